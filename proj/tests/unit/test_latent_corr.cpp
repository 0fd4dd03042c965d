#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "vinecls/error.hpp"
#include "vinecls/latent_corr.hpp"
#include "vinecls/random.hpp"
#include "vinecls/stats.hpp"

using namespace vinecls;

namespace {

// rho_{ab;S} from the inverse of the (a, b, S) sub-matrix.
double partial_by_inverse(const Eigen::MatrixXd& c, int a, int b, const std::vector<int>& s) {
  std::vector<int> idx{a, b};
  idx.insert(idx.end(), s.begin(), s.end());
  Eigen::MatrixXd sub(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) sub(i, j) = c(idx[i], idx[j]);
  const Eigen::MatrixXd p = sub.inverse();
  return -p(0, 1) / std::sqrt(p(0, 0) * p(1, 1));
}

Eigen::MatrixXd random_corr(int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd a(d, d + 2);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d + 2; ++j) a(i, j) = rng.normal();
  Eigen::MatrixXd s = a * a.transpose();
  const Eigen::VectorXd inv = s.diagonal().cwiseSqrt().cwiseInverse();
  return inv.asDiagonal() * s * inv.asDiagonal();
}

int cut(double z, const std::vector<double>& t) {
  int k = 1;
  while (k <= static_cast<int>(t.size()) && z > t[k - 1]) ++k;
  return k;
}

}  // namespace

TEST_CASE("partial correlation recursion matches the matrix-inverse formula") {
  const auto c = random_corr(5, 3);
  const std::vector<int> s1{2}, s2{2, 4}, s3{1, 2, 4};
  CHECK(partial_correlation(c, 0, 3, s1) == doctest::Approx(partial_by_inverse(c, 0, 3, {2})).epsilon(1e-12));
  CHECK(partial_correlation(c, 0, 3, s2) == doctest::Approx(partial_by_inverse(c, 0, 3, {2, 4})).epsilon(1e-12));
  CHECK(partial_correlation(c, 0, 3, s3) == doctest::Approx(partial_by_inverse(c, 0, 3, {1, 2, 4})).epsilon(1e-12));
  const std::vector<int> overlap{0};
  CHECK_THROWS_AS(partial_correlation(c, 0, 3, overlap), Error);
}

TEST_CASE("latent correlations recover a bivariate normal") {
  Rng rng(12);
  const double rho = 0.6;
  const std::size_t n = 4000;
  std::vector<double> x(n), y(n), k1(n), k2(n);
  const std::vector<double> t1{-0.5, 0.7}, t2{-1.0, 0.0, 1.2};
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = rho * x[i] + std::sqrt(1 - rho * rho) * rng.normal();
    k1[i] = cut(x[i], t1);
    k2[i] = cut(y[i], t2);
  }
  CHECK(normal_scores_pearson(x, y) == doctest::Approx(rho).epsilon(0.05));
  CHECK(polyserial(x, k2, 4) == doctest::Approx(rho).epsilon(0.05));
  CHECK(polychoric(k1, 3, k2, 4) == doctest::Approx(rho).epsilon(0.06));
  const auto th = ordinal_thresholds(k2, 4);
  CHECK(th[1] == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(th[3] == doctest::Approx(1.2).epsilon(0.05));
}

TEST_CASE("single observed level is degenerate") {
  const std::vector<double> k1(50, 2.0), k2(50, 1.0);
  std::vector<double> k3(50);
  for (std::size_t i = 0; i < k3.size(); ++i) k3[i] = 1 + i % 3;
  CHECK_THROWS_AS(polychoric(k1, 3, k3, 3), Error);
  try {
    polychoric(k1, 3, k2, 3);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateMargin);
  }
}

TEST_CASE("positive-definite repair") {
  Eigen::MatrixXd m(3, 3);
  m << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
  CHECK(repair_positive_definite(m));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  for (int i = 0; i < 3; ++i) CHECK(m(i, i) == doctest::Approx(1.0));
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  CHECK_FALSE(repair_positive_definite(id));
}

TEST_CASE("latent matrix tags estimators by variable kinds") {
  Rng rng(5);
  Dataset d;
  d.schema = {{"a", VariableKind::Continuous, 0}, {"b", VariableKind::Ordinal, 3}, {"c", VariableKind::Ordinal, 4}};
  d.columns.assign(3, std::vector<double>(300));
  for (std::size_t i = 0; i < 300; ++i) {
    const double z = rng.normal();
    d.columns[0][i] = z;
    d.columns[1][i] = cut(z + rng.normal(), {-0.5, 0.5});
    d.columns[2][i] = cut(z + rng.normal(), {-1, 0, 1});
  }
  const auto m = latent_matrix(d);
  CHECK(m.tags[0][1] == CorrEstimator::Polyserial);
  CHECK(m.tags[1][2] == CorrEstimator::Polychoric);
  CHECK(m.tags[0][0] == CorrEstimator::Identity);
  CHECK(m.values(0, 1) == m.values(1, 0));
}
