#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "vinecls/error.hpp"
#include "vinecls/latent_corr.hpp"
#include "vinecls/random.hpp"
#include "vinecls/stats.hpp"
#include "vinecls/vine.hpp"

using namespace vinecls;

namespace {

VineStructure path3() {
  VineStructure s;
  s.d = 3;
  s.trees = {{{0, 1, 0, 1, {}}, {1, 2, 1, 2, {}}}, {{0, 1, 0, 2, {1}}}};
  return s;
}

Dataset gaussian_data(std::size_t n, double r12, double r23, double r13_2, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  for (int j = 0; j < 3; ++j) d.schema.push_back({"x" + std::to_string(j + 1), VariableKind::Continuous, 0});
  d.columns.assign(3, std::vector<double>(n));
  const double r13 = r13_2 * std::sqrt((1 - r12 * r12) * (1 - r23 * r23)) + r12 * r23;
  Eigen::Matrix3d c;
  c << 1, r12, r13, r12, 1, r23, r13, r23, 1;
  const Eigen::Matrix3d l = c.llt().matrixL();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d z(rng.normal(), rng.normal(), rng.normal());
    const Eigen::Vector3d x = l * z;
    for (int j = 0; j < 3; ++j) d.columns[j][i] = x(j);
  }
  return d;
}

}  // namespace

TEST_CASE("structure validation") {
  auto s = path3();
  CHECK_NOTHROW(s.validate());
  s.trees[1][0].given = {0};
  CHECK_THROWS_AS(s.validate(), Error);
  s = path3();
  s.trees[0][1] = {0, 1, 0, 1, {}};
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK(VineStructure::from_json(path3().to_json()).trees[1][0].given == std::vector<int>{1});
  CHECK(path3().trees[1][0].label() == "13;2");
}

TEST_CASE("maximum spanning tree follows the strongest correlations") {
  Eigen::Matrix3d c;
  c << 1, 0.8, 0.56, 0.8, 1, 0.7, 0.56, 0.7, 1;
  const auto s = select_structure(c);
  CHECK_NOTHROW(s.validate());
  for (const auto& e : s.trees[0]) CHECK(std::abs(e.a - e.b) == 1);
  CHECK(s.trees[1][0].given == std::vector<int>{1});
}

TEST_CASE("Gaussian vine equals the Gaussian copula density") {
  const double r12 = 0.6, r23 = -0.4, r13_2 = 0.3;
  const auto data = gaussian_data(50, r12, r23, r13_2, 1);
  std::vector<MarginModel> margins;
  for (int j = 0; j < 3; ++j) margins.push_back(fit_margin(data.columns[j], data.schema[j], MarginMethod::Kernel));
  const VineModel vine(data.schema, margins, path3(),
                       {{Bicop(Family::Gaussian, 0, {r12}), Bicop(Family::Gaussian, 0, {r23})},
                        {Bicop(Family::Gaussian, 0, {r13_2})}},
                       2);
  const double r13 = r13_2 * std::sqrt((1 - r12 * r12) * (1 - r23 * r23)) + r12 * r23;
  Eigen::Matrix3d c;
  c << 1, r12, r13, r12, 1, r23, r13, r23, 1;
  const Eigen::Matrix3d q = c.inverse() - Eigen::Matrix3d::Identity();
  const auto terms = vine.copula_log_terms(data.columns);
  const auto full = vine.log_density(data.columns);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    Eigen::Vector3d z;
    double logm = 0.0;
    for (int j = 0; j < 3; ++j) {
      z(j) = stats::norm_quantile(margins[j].cdf(data.columns[j][i]));
      logm += std::log(margins[j].density(data.columns[j][i]));
    }
    const double oracle = -0.5 * std::log(c.determinant()) - 0.5 * z.dot(q * z);
    CHECK(terms[i] == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(full[i] == doctest::Approx(oracle + logm).epsilon(1e-9));
    CHECK(vine.log_density(data.row(i)) == doctest::Approx(full[i]).epsilon(1e-12));
  }
}

TEST_CASE("mixed continuous-ordinal vine integrates to one") {
  Rng rng(3);
  std::vector<double> x(60), k(60);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    k[i] = 1 + static_cast<double>(rng.below(3));
  }
  const std::vector<VariableSpec> schema{{"x", VariableKind::Continuous, 0}, {"k", VariableKind::Ordinal, 3}};
  const std::vector<MarginModel> margins{fit_margin(x, schema[0], MarginMethod::Kernel),
                                         fit_margin(k, schema[1], MarginMethod::Categorical)};
  VineStructure s;
  s.d = 2;
  s.trees = {{{0, 1, 0, 1, {}}}};
  const VineModel vine(schema, margins, s, {{Bicop(Family::Clayton, 180, {2.5})}}, 1);
  double total = 0.0;
  const double h = margins[0].bandwidth();
  for (int level = 1; level <= 3; ++level)
    total += stats::integrate(
        [&](double t) {
          const std::vector<double> row{t, double(level)};
          return std::exp(vine.log_density(row));
        },
        margins[0].sample().front() - 10 * h, margins[0].sample().back() + 10 * h, 64);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("fit recovers a Gaussian vine and scores it by mBIC") {
  const auto data = gaussian_data(800, 0.7, 0.5, 0.0, 9);
  std::vector<MarginModel> margins;
  for (int j = 0; j < 3; ++j) margins.push_back(fit_margin(data.columns[j], data.schema[j], MarginMethod::Empirical));
  VineFitOptions opt;
  opt.candidates = {Family::Independence, Family::Gaussian, Family::Clayton, Family::Gumbel};
  const auto vine = fit_vine(data, margins, select_structure(latent_matrix(data).values), opt);
  REQUIRE(vine.truncation_level() >= 1);
  for (int e = 0; e < 2; ++e) CHECK(vine.copula(1, e).family() == Family::Gaussian);
  const auto& info = vine.fit_info();
  CHECK(info.n == 800);
  CHECK(vine_mbic(vine, data, opt.psi0) == doctest::Approx(info.mbic).epsilon(1e-10));

  // manual mBIC: -2 ll + k log n - 2 sum_m [q_m log psi_m + (d - m - q_m) log(1 - psi_m)]
  double prior = 0.0;
  for (int m = 1; m <= 2; ++m) {
    const double psi = std::pow(opt.psi0, m);
    int q = 0;
    if (m <= vine.truncation_level())
      for (const auto& b : vine.copulas()[m - 1]) q += !b.is_independence();
    prior += q * std::log(psi) + (3 - m - q) * std::log(1 - psi);
  }
  const double manual = -2 * info.loglik + vine.parameter_count() * std::log(800.0) - 2 * prior;
  CHECK(info.mbic == doctest::Approx(manual).epsilon(1e-10));

  const auto back = VineModel::from_json(vine.to_json());
  CHECK(back.log_density(data.row(3)) == vine.log_density(data.row(3)));

  const auto report = edge_report(vine);
  CHECK(report.size() >= 2);
  CHECK(report[0].tau == doctest::Approx(vine.copula(1, 0).tau()));
}

TEST_CASE("strong sparsity prior truncates independent data") {
  Rng rng(4);
  Dataset d;
  for (int j = 0; j < 3; ++j) {
    d.schema.push_back({"u" + std::to_string(j), VariableKind::Continuous, 0});
    std::vector<double> col(300);
    for (auto& v : col) v = rng.normal();
    d.columns.push_back(col);
  }
  std::vector<MarginModel> margins;
  for (int j = 0; j < 3; ++j) margins.push_back(fit_margin(d.columns[j], d.schema[j], MarginMethod::Empirical));
  VineFitOptions opt;
  opt.psi0 = 0.05;
  const auto vine = fit_vine(d, margins, select_structure(latent_matrix(d).values), opt);
  CHECK(vine.truncation_level() == 0);
  CHECK(vine.copula_log_terms(d.columns)[0] == 0.0);
}
