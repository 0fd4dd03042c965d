#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vinecls/classifier.hpp"
#include "vinecls/data.hpp"

namespace vinecls {

enum class DgpVariant { Continuous, Mixed };
DgpVariant dgp_variant_from_string(const std::string& name);
std::string to_string(DgpVariant variant);

/// Two-class bivariate DGP. DGP class 1 (Frank) is emitted with label 1 and
/// DGP class 2 (Gumbel) with label 0.
struct DgpConfig {
  DgpVariant variant = DgpVariant::Continuous;
  std::size_t n_per_class = 1000;
  std::uint64_t seed = 1;
  double tau1 = 0.5;
  double tau2 = 0.9;
  double mu1 = -1.5;
  double mu2 = 0.0;
  double mu_y = 0.0;
  double sigma = 1.0;
  double lambda = 2.0;
  /// Poisson counts above the cap share the top level; codes are count + 1.
  int poisson_cap = 11;
};

std::vector<VariableSpec> dgp_schema(const DgpConfig& cfg);

/// Rows are class 1 (label 1) followed by class 2 (label 0), n_per_class each.
Dataset simulate_dgp(const DgpConfig& cfg);

/// Smallest k with P(K <= k) >= u for K ~ Poisson(lambda).
int poisson_quantile(double u, double lambda);

struct LogisticModel {
  double intercept = 0.0;
  std::vector<double> coefficients;
  std::vector<double> class_weights;  ///< per-row weight for label 0 and label 1
  int iterations = 0;
  bool converged = false;
  bool ridge = false;
  double penalty = 0.0;
  std::vector<std::string> warnings;

  double probability(std::span<const double> row) const;
  /// Rows of (p0, p1).
  std::vector<std::vector<double>> posterior(const Dataset& data) const;
  /// Gradient of the (penalized) weighted log-likelihood at the stored coefficients.
  std::vector<double> gradient(const Dataset& data) const;
  nlohmann::json to_json() const;
};

/// Weighted maximum likelihood by IRLS. Weights are inversely proportional to the
/// class counts and sum to n. Separable data trigger a ridge refit (penalty 1e-6).
LogisticModel fit_weighted_logistic(const Dataset& train);

struct BenchmarkConfig {
  DgpVariant variant = DgpVariant::Continuous;
  std::vector<std::uint64_t> seeds = {1};
  std::size_t n_train = 700;
  std::size_t n_test = 300;
  bool oracle = true;
  bool mbic = true;
  MarginMethod margin = MarginMethod::Kernel;
  double psi0 = 0.9;
  int grid_points = 60;
};

struct BenchmarkRow {
  std::uint64_t seed = 0;
  std::string method;  ///< "logistic" or "copula"
  std::string mode;    ///< "weighted", "oracle" or "mbic"
  std::string split;   ///< "train" or "test"
  std::string metric;
  std::optional<double> value;
};

struct GridRow {
  std::uint64_t seed = 0;
  std::string method;
  std::string mode;
  double x1 = 0.0;
  double x2 = 0.0;
  double p1 = 0.0;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;
  std::vector<GridRow> grid;  ///< first seed only

  std::optional<double> value(std::uint64_t seed, const std::string& method, const std::string& mode,
                              const std::string& split, const std::string& metric) const;
};

/// Splits each class into the first n_train and the next n_test rows.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, std::size_t n_train, std::size_t n_test);

BenchmarkResult benchmark_run(const BenchmarkConfig& cfg);
std::string benchmark_csv(const BenchmarkResult& result);
std::string benchmark_grid_csv(const BenchmarkResult& result);

}  // namespace vinecls
