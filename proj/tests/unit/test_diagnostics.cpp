#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "vinecls/diagnostics.hpp"
#include "vinecls/error.hpp"
#include "vinecls/latent_corr.hpp"
#include "vinecls/random.hpp"
#include "vinecls/stats.hpp"

using namespace vinecls;

TEST_CASE("conditional Spearman equals Spearman within each level") {
  Rng rng(1);
  std::vector<double> x(90), y(90), z(90);
  for (std::size_t i = 0; i < x.size(); ++i) {
    z[i] = 1 + static_cast<double>(rng.below(3));
    x[i] = rng.normal();
    y[i] = z[i] * x[i] + rng.normal();
  }
  z[0] = 4;  // a single row at level 4
  const auto rho = conditional_spearman(x, y, z, 4);
  REQUIRE(rho.size() == 4);
  for (int level = 1; level <= 3; ++level) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (z[i] == level) {
        xs.push_back(x[i]);
        ys.push_back(y[i]);
      }
    CHECK(*rho[level - 1] == doctest::Approx(stats::spearman(xs, ys)).epsilon(1e-14));
  }
  CHECK_FALSE(rho[3]);
  const std::vector<double> bad{7.0};
  CHECK_THROWS_AS(conditional_spearman(std::vector<double>{1.0}, std::vector<double>{1.0}, bad, 3), Error);
}

TEST_CASE("bootstrap bands are seeded and bracket the observed value") {
  Rng rng(2);
  std::vector<double> x(300), y(300), z(300);
  for (std::size_t i = 0; i < x.size(); ++i) {
    z[i] = 1 + static_cast<double>(i % 2);
    x[i] = rng.normal();
    y[i] = 0.5 * x[i] + rng.normal();
  }
  const auto a = bootstrap_bands(x, y, z, 2, 200, 0.9, 5);
  const auto b = bootstrap_bands(x, y, z, 2, 200, 0.9, 5);
  for (int k = 0; k < 2; ++k) {
    const auto& c = a.categories[k];
    CHECK(c.n == 150);
    CHECK(*c.lower < *c.observed);
    CHECK(*c.observed < *c.upper);
    CHECK(*c.lower == *b.categories[k].lower);
  }
  CHECK_THROWS_AS(bootstrap_bands(x, y, z, 2, 50), Error);
  CHECK(conditional_rho_csv(a).find("level") != std::string::npos);
}

TEST_CASE("latent normal scores respect the ordinal intervals") {
  Rng rng(3);
  std::vector<double> x(400), k(400);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    const double w = 0.6 * x[i] + 0.8 * rng.normal();
    k[i] = w < -0.6 ? 1 : w < 0.4 ? 2 : 3;
  }
  const auto s = latent_normal_scores(x, k, 3, 9);
  const auto t = ordinal_thresholds(k, 3);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int level = static_cast<int>(k[i]);
    CHECK(s.latent[i] > t[level - 1]);
    CHECK(s.latent[i] < t[level]);
  }
  CHECK(s.rho == doctest::Approx(polyserial(x, k, 3)));
  CHECK(stats::pearson(s.continuous, s.latent) == doctest::Approx(0.6).epsilon(0.15));
  CHECK(latent_normal_scores(x, k, 3, 9).latent == s.latent);
}
