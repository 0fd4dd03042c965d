#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vinecls/bicop.hpp"
#include "vinecls/data.hpp"
#include "vinecls/margins.hpp"

namespace vinecls {

/// Edge of a regular vine. In tree 1 `left`/`right` are variable indices; in
/// tree m > 1 they index edges of tree m - 1. The conditioned variable `a`
/// comes from the left node and `b` from the right node.
struct VineEdge {
  int left = 0;
  int right = 0;
  int a = 0;
  int b = 0;
  std::vector<int> given;  ///< conditioning set, sorted

  /// Conditioned;conditioning label with 1-based indices, e.g. "23;1".
  std::string label() const;
  /// Same with variable names, e.g. "surgerytime,age;BMI".
  std::string label(const std::vector<VariableSpec>& schema) const;
};

struct VineStructure {
  int d = 0;
  std::vector<std::vector<VineEdge>> trees;  ///< trees[m - 1] is tree m

  /// Checks edge counts, acyclicity/connectivity and the proximity condition.
  void validate() const;
  nlohmann::json to_json() const;
  static VineStructure from_json(const nlohmann::json& j);
};

/// Maximum spanning trees of |partial correlation| level by level.
/// Equal weights are broken towards the lexicographically smallest edge.
VineStructure select_structure(const Eigen::MatrixXd& corr);

struct VineFitOptions {
  std::vector<Family> candidates = all_families();
  std::vector<int> rotations = {0, 90, 180, 270};
  double psi0 = 0.9;
  /// Fit all trees and pick the mBIC-optimal truncation instead of stopping
  /// at the first tree in which every edge is independent.
  bool full_truncation_search = false;
};

struct VineFitInfo {
  double loglik = 0.0;  ///< copula log-likelihood (margins excluded)
  double mbic = 0.0;
  std::size_t n = 0;
  double psi0 = 0.9;
  int parameters = 0;
};

/// Simplified, possibly truncated, vine copula model with its margins.
/// Pair-copula parameters are constants: they never depend on conditioning values.
class VineModel {
 public:
  VineModel() = default;
  VineModel(std::vector<VariableSpec> schema, std::vector<MarginModel> margins, VineStructure structure,
            std::vector<std::vector<Bicop>> copulas, int truncation_level);

  const std::vector<VariableSpec>& schema() const { return schema_; }
  const std::vector<MarginModel>& margins() const { return margins_; }
  const VineStructure& structure() const { return structure_; }
  const std::vector<std::vector<Bicop>>& copulas() const { return copulas_; }
  const Bicop& copula(int tree, int edge) const { return copulas_[tree - 1][edge]; }
  int truncation_level() const { return truncation_; }
  int dims() const { return structure_.d; }
  const VineFitInfo& fit_info() const { return info_; }
  void set_fit_info(VineFitInfo info) { info_ = info; }
  int parameter_count() const;

  /// log f(x): margins contribute densities (continuous) or masses (ordinal).
  double log_density(std::span<const double> row) const;
  /// Row-wise log densities for column-major data.
  std::vector<double> log_density(const std::vector<std::vector<double>>& columns) const;
  /// Copula part only (sum of pair-copula terms up to the truncation level).
  std::vector<double> copula_log_terms(const std::vector<std::vector<double>>& columns) const;

  nlohmann::json to_json() const;
  static VineModel from_json(const nlohmann::json& j);

 private:
  std::vector<VariableSpec> schema_;
  std::vector<MarginModel> margins_;
  VineStructure structure_;
  std::vector<std::vector<Bicop>> copulas_;
  int truncation_ = 0;
  VineFitInfo info_;
};

/// Tree-1 pseudo-observations for each variable: (F(x), F(x)) for continuous
/// and (F(x), F(x - 1)) for ordinal margins.
std::vector<std::vector<PseudoValue>> margin_pseudo_obs(const std::vector<MarginModel>& margins,
                                                        const std::vector<std::vector<double>>& columns);

/// Conditional pseudo-observations F(a | b, D) and F(b | a, D) produced by an
/// edge copula. Discrete conditioning divides by P(b | D) (floored at 1e-12).
std::pair<std::vector<PseudoValue>, std::vector<PseudoValue>> propagate_edge(const Bicop& copula,
                                                                             std::span<const PseudoValue> u,
                                                                             std::span<const PseudoValue> v);

/// Sequential tree-by-tree fit with per-edge mBIC family selection.
VineModel fit_vine(const Dataset& data, const std::vector<MarginModel>& margins, const VineStructure& structure,
                   const VineFitOptions& options = {});

/// -2 loglik + nu log n - 2 sum_m [q_m log psi_m + (d - m - q_m) log(1 - psi_m)], psi_m = psi0^m.
double vine_mbic(const VineModel& model, const Dataset& data, double psi0);
double vine_mbic(double copula_loglik, const VineModel& model, std::size_t n, double psi0);

struct EdgeReport {
  int tree = 0;
  std::string label;
  std::string names;
  Family family = Family::Independence;
  int rotation = 0;
  std::vector<double> params;
  std::string short_label;
  double tau = 0.0;
  double spearman = 0.0;
};

/// One row per edge up to the truncation level (plus independence edges
/// beyond it are omitted). Spearman's rho via seeded Monte Carlo (1e5 draws).
std::vector<EdgeReport> edge_report(const VineModel& model, std::uint64_t seed = 20240607);

}  // namespace vinecls
