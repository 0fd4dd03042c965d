#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vinecls/data.hpp"

namespace vinecls {

/// Lower/upper clamp applied to every value handed to a copula.
inline constexpr double kClampEps = 1e-10;

enum class MarginMethod { Kernel, Empirical, Categorical };

MarginMethod margin_method_from_string(const std::string& name);
std::string to_string(MarginMethod method);

/// Fitted univariate margin.
///
/// * Kernel: Gaussian kernel with Silverman's rule-of-thumb bandwidth; the CDF
///   is the exact mixture of normal CDFs.
/// * Empirical: piecewise-linear interpolation of rank/(n+1) through the
///   distinct sample values, extended linearly to 0 and 1 one mean spacing
///   beyond the sample range.
/// * Categorical: level probabilities (count + 0.5) / (n + 0.5 * levels).
class MarginModel {
 public:
  MarginModel() = default;

  MarginMethod method() const { return method_; }
  bool is_discrete() const { return method_ == MarginMethod::Categorical; }
  int levels() const { return static_cast<int>(probs_.size()); }
  double bandwidth() const { return bandwidth_; }
  const std::vector<double>& probabilities() const { return probs_; }
  const std::vector<double>& sample() const { return sample_; }

  /// F(x) clamped to [eps, 1 - eps].
  double cdf(double x) const;
  /// F(x - 1) for ordinal margins, eps at the lowest level.
  double cdf_left(double x) const;
  /// Density (continuous) or probability mass (ordinal).
  double density(double x) const;
  double quantile(double u) const;

  nlohmann::json to_json() const;
  static MarginModel from_json(const nlohmann::json& j);

  friend MarginModel fit_margin(std::span<const double> column, const VariableSpec& spec, MarginMethod method);

 private:
  double raw_cdf(double x) const;

  MarginMethod method_ = MarginMethod::Kernel;
  double bandwidth_ = 0.0;
  std::vector<double> sample_;   // kernel centers (sorted), or empirical knots
  std::vector<double> knot_cdf_;  // empirical only
  std::vector<double> probs_;    // categorical only
  std::vector<double> cum_;      // categorical cumulative sums
};

MarginModel fit_margin(std::span<const double> column, const VariableSpec& spec, MarginMethod method);

/// Raw relative level frequencies (no smoothing), for reporting.
std::vector<double> level_frequencies(std::span<const double> column, int levels);

}  // namespace vinecls
