#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "vinecls/data.hpp"

namespace vinecls {

enum class CorrEstimator { Identity, Pearson, Polyserial, Polychoric };
std::string to_string(CorrEstimator e);

/// Latent (Gaussian-scale) correlation matrix used for structure selection.
struct LatentMatrix {
  Eigen::MatrixXd values;
  std::vector<std::vector<CorrEstimator>> tags;
  bool repaired = false;

  std::size_t dims() const { return static_cast<std::size_t>(values.rows()); }
};

/// Pearson correlation of normal scores qnorm(rank / (n + 1)).
double normal_scores_pearson(std::span<const double> x, std::span<const double> y);

/// Two-step polyserial correlation between a continuous x and ordinal codes k in 1..levels.
double polyserial(std::span<const double> x, std::span<const double> k, int levels);

/// Two-step polychoric correlation between two ordinal columns.
double polychoric(std::span<const double> k1, int levels1, std::span<const double> k2, int levels2);

/// Normal thresholds -inf = t_0 < t_1 < ... < t_L = +inf from smoothed level proportions.
std::vector<double> ordinal_thresholds(std::span<const double> k, int levels);

/// Normal scores qnorm(midrank / (n + 1)).
std::vector<double> normal_scores(std::span<const double> x);

LatentMatrix latent_matrix(const Dataset& data);

/// Eigenvalue clipping at `floor` followed by rescaling to unit diagonal.
/// Returns true if the matrix was modified.
bool repair_positive_definite(Eigen::MatrixXd& m, double floor = 1e-6);

/// rho_{ab;S} by the standard partial-correlation recursion.
/// Throws NearSingular when a denominator underflows.
double partial_correlation(const Eigen::MatrixXd& corr, int a, int b, std::span<const int> given);

std::string latent_matrix_csv(const LatentMatrix& m, const std::vector<VariableSpec>& schema);

}  // namespace vinecls
