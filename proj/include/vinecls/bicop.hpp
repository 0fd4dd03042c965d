#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace vinecls {

enum class Family { Independence, Gaussian, StudentT, Clayton, Gumbel, Frank, Joe };

std::string to_string(Family family);
Family family_from_string(const std::string& name);
int parameter_count(Family family);
/// Families with a non-trivial rotation set {0, 90, 180, 270}.
bool is_rotatable(Family family);
/// Rotations admitted for a family: {0} or {0, 90, 180, 270}.
std::vector<int> rotations_for(Family family);
const std::vector<Family>& all_families();

enum class HDirection {
  OneGivenTwo,  ///< dC/dv: conditional CDF of U given V = v
  TwoGivenOne,  ///< dC/du: conditional CDF of V given U = u
};

/// One coordinate of a pseudo-observation. For continuous entries
/// minus == plus; for discrete entries (plus, minus) = (F(x), F(x-1)).
struct PseudoValue {
  double plus = 0.5;
  double minus = 0.5;
  bool discrete = false;

  static PseudoValue continuous(double u) { return {u, u, false}; }
  static PseudoValue ordinal(double upper, double lower) { return {upper, lower, true}; }
};

struct PseudoObs {
  PseudoValue u;
  PseudoValue v;
};

/// Parametric bivariate copula: family, rotation (degrees) and parameters.
/// Rotations act as C90(u,v) = v - C(1-u,v), C180(u,v) = u+v-1+C(1-u,1-v),
/// C270(u,v) = u - C(u,1-v).
class Bicop {
 public:
  Bicop() = default;
  /// Throws ParameterOutOfRange / InvalidArgument on an invalid triple.
  Bicop(Family family, int rotation, std::vector<double> params);

  Family family() const { return family_; }
  int rotation() const { return rotation_; }
  const std::vector<double>& params() const { return params_; }
  int parameter_count() const { return vinecls::parameter_count(family_); }
  bool is_independence() const { return family_ == Family::Independence; }

  double cdf(double u, double v) const;
  double pdf(double u, double v) const;
  double log_pdf(double u, double v) const;
  double hfunc(double u, double v, HDirection direction) const;
  /// Inverts the h-function in its free argument: for OneGivenTwo returns u with
  /// hfunc(u, cond) = w; for TwoGivenOne returns v with hfunc(cond, v) = w.
  double hinv(double w, double cond, HDirection direction) const;

  double tau() const;
  /// Spearman's rho by Monte Carlo with a fixed seed.
  double spearman_rho(std::size_t samples = 100000, std::uint64_t seed = 20240607) const;

  /// Conditional-inversion sampling; deterministic per seed.
  std::vector<std::pair<double, double>> sample(std::size_t n, std::uint64_t seed) const;

  /// Per-observation likelihood contribution: pdf (cont x cont), difference of
  /// h-functions (mixed) or rectangle probability (discrete x discrete).
  double contribution(const PseudoObs& obs) const;
  /// Sum of log contributions, each floored at log(1e-300).
  double loglik(std::span<const PseudoObs> obs) const;
  /// Log contribution divided by the marginal masses of its discrete
  /// coordinates (the pair-copula term entering a mixed vine density).
  /// Exactly 0 for the independence copula.
  double log_term(const PseudoObs& obs) const;

  /// Short label, e.g. "G(1.40)", "SC(2.00)", "RC270(0.40)".
  std::string label() const;

  nlohmann::json to_json() const;
  static Bicop from_json(const nlohmann::json& j);

  friend bool operator==(const Bicop&, const Bicop&) = default;

 private:
  Family family_ = Family::Independence;
  int rotation_ = 0;
  std::vector<double> params_;
};

/// Kendall's tau of a family/rotation/parameter triple.
double param_to_tau(Family family, int rotation, std::span<const double> params);
/// Inverse map. For the Student-t family the degrees of freedom are `nu`.
/// Throws TauUnattainable when tau lies outside the family's range.
std::vector<double> tau_to_param(Family family, int rotation, double tau, double nu = 5.0);
/// True when the sign of tau can be produced by the family/rotation.
bool tau_admissible(Family family, int rotation, double tau);

/// Kendall's tau-b of the upper pseudo-observation values.
double empirical_tau(std::span<const PseudoObs> obs);

struct BicopFit {
  Bicop bicop;
  double loglik = 0.0;
};

/// Maximum-likelihood fit: Brent for one parameter, Nelder-Mead for two,
/// starting from the tau inversion of the empirical tau.
/// Throws TooFewObservations below 10 observations and TauUnattainable when
/// the empirical tau has the wrong sign for the family/rotation.
BicopFit bicop_fit(Family family, int rotation, std::span<const PseudoObs> obs);

}  // namespace vinecls
