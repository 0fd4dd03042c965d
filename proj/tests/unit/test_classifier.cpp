#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "vinecls/classifier.hpp"
#include "vinecls/error.hpp"
#include "vinecls/random.hpp"
#include "vinecls/simulation.hpp"

using namespace vinecls;

namespace {

Dataset small_mixed(std::uint64_t seed, std::size_t n = 120) {
  DgpConfig cfg;
  cfg.variant = DgpVariant::Mixed;
  cfg.n_per_class = n;
  cfg.seed = seed;
  return simulate_dgp(cfg);
}

double brute_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return wins / pairs;
}

}  // namespace

TEST_CASE("Bayes posterior") {
  const std::vector<double> priors{0.2, 0.8}, logd{std::log(2.0), 0.0};
  const auto p = bayes_posterior(priors, logd);
  CHECK(p[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> far{-900.0, -1000.0}, half{0.5, 0.5};
  const auto q = bayes_posterior(half, far);
  CHECK(q[0] == doctest::Approx(1.0 / (1.0 + std::exp(-100.0))));
  const std::vector<double> floor{kMinLogDensity, kMinLogDensity};
  CHECK(bayes_posterior(half, floor)[0] == doctest::Approx(0.5));
}

TEST_CASE("classifier fit, posterior and persistence") {
  const auto train = small_mixed(3);
  ClassifierConfig cfg;
  cfg.class_candidates = {{0, {Family::Gumbel}}, {1, {Family::Frank}}};
  cfg.oracle = true;
  const auto model = fit_classifier(train, cfg);
  CHECK(model.classes() == std::vector<int>{0, 1});
  CHECK(model.priors() == std::vector<double>{0.5, 0.5});
  CHECK(model.vine_for(0).copula(1, 0).family() == Family::Gumbel);
  CHECK(model.vine_for(1).copula(1, 0).family() == Family::Frank);

  const auto probs = model.posterior(train);
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const auto row = train.row(i);
    const auto logd = model.log_densities(row);
    const auto direct = bayes_posterior(model.priors(), logd);
    CHECK(probs[i][1] == doctest::Approx(direct[1]).epsilon(1e-12));
  }

  const auto path = (std::filesystem::temp_directory_path() / "vinecls_unit_model.json").string();
  model.save(path);
  const auto loaded = ClassifierModel::load(path);
  std::filesystem::remove(path);
  const auto again = loaded.posterior(train);
  for (std::size_t i = 0; i < train.rows(); ++i) CHECK(again[i][1] == probs[i][1]);

  ClassifierConfig emp;
  emp.priors = PriorMode::Empirical;
  auto unbalanced = train.subset([&] {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < train.rows(); ++i)
      if ((*train.labels)[i] == 1 || i % 2 == 0) idx.push_back(i);
    return idx;
  }());
  const auto m2 = fit_classifier(unbalanced, emp);
  CHECK(m2.priors()[1] == doctest::Approx(120.0 / unbalanced.rows()));
}

TEST_CASE("classifier errors") {
  auto d = small_mixed(4, 20);
  auto one = d;
  for (auto& y : *one.labels) y = 1;
  CHECK_THROWS_AS(fit_classifier(one), Error);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < d.rows(); ++i)
    if ((*d.labels)[i] == 1 || i < 25) idx.push_back(i);
  try {
    fit_classifier(d.subset(idx));
    FAIL("expected ClassTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ClassTooSmall);
  }
  CHECK_THROWS_AS(ClassifierModel({0, 1}, {}, {0.3, 0.3}), Error);
}

TEST_CASE("per-class scores") {
  const std::vector<int> y{0, 1, 1, 0, 1};
  std::vector<std::vector<double>> p{{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.4}, {0.3, 0.7}, {0.05, 0.95}};
  const auto nll = per_class_nll(p, y);
  CHECK(*nll.per_class[0] == doctest::Approx(-(std::log(0.9) + std::log(0.3)) / 2));
  CHECK(*nll.per_class[1] == doctest::Approx(-(std::log(0.8) + std::log(0.4) + std::log(0.95)) / 3));
  CHECK(nll.overall_sum == doctest::Approx(nll.per_class_sum[0] + nll.per_class_sum[1]));
  CHECK(nll.overall_mean == doctest::Approx(nll.overall_sum / 5));

  // over class-j rows only the (1 - p_j)^2 indicator term survives
  const auto brier = per_class_brier(p, y);
  CHECK(*brier[0] == doctest::Approx((0.01 + 0.49) / 2));
  CHECK(*brier[1] == doctest::Approx((0.04 + 0.36 + 0.0025) / 3));

  const std::vector<int> only0{0, 0};
  const std::vector<std::vector<double>> p0{{0.5, 0.5}, {0.7, 0.3}};
  CHECK_FALSE(per_class_nll(p0, only0).per_class[1]);
  CHECK_FALSE(per_class_brier(p0, only0)[1]);
}

TEST_CASE("AUC agrees with pair counting") {
  Rng rng(6);
  std::vector<double> s(80);
  std::vector<int> y(80);
  for (std::size_t i = 0; i < s.size(); ++i) {
    y[i] = static_cast<int>(rng.below(2));
    s[i] = std::round((rng.uniform() + 0.3 * y[i]) * 10) / 10;
  }
  CHECK(auc(s, y) == doctest::Approx(brute_auc(s, y)).epsilon(1e-14));
  const std::vector<int> ones(80, 1);
  CHECK_THROWS_AS(auc(s, ones), Error);
}

TEST_CASE("risk groups") {
  const RiskPolicy policy{0.25, 1};
  CHECK(assign_risk_group(0.25, policy) == RiskGroup::Low);
  CHECK(assign_risk_group(0.75, policy) == RiskGroup::High);
  CHECK(assign_risk_group(0.5, policy) == RiskGroup::Moderate);
  CHECK_THROWS_AS((RiskPolicy{0.5, 1}.validate()), Error);
  CHECK_THROWS_AS((RiskPolicy{0.0, 1}.validate()), Error);

  const std::vector<double> p{0.1, 0.2, 0.5, 0.9, 0.95};
  const std::vector<int> y{0, 0, 1, 1, 0};
  const std::vector<double> aux{1, 3, 4, 10, 20};
  const auto rows = risk_group_table(p, y, std::span<const double>(aux), {0.25});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].n == 2);
  CHECK(rows[0].class_counts == std::vector<std::size_t>{2, 0});
  CHECK(*rows[0].aux_mean == doctest::Approx(2.0));
  CHECK(*rows[0].aux_sd == doctest::Approx(std::sqrt(2.0)));
  CHECK(rows[1].n == 1);
  CHECK_FALSE(rows[1].aux_sd);
  CHECK(rows[2].class_counts == std::vector<std::size_t>{1, 1});
  const auto csv = risk_group_csv(rows, "los");
  CHECK(csv.find("alpha,group,n,class0,class1,los_mean,los_sd") == 0);
  CHECK(csv.find("NA") != std::string::npos);
}

TEST_CASE("prediction and metric tables") {
  const std::vector<std::vector<double>> p{{0.8, 0.2}, {0.1, 0.9}};
  const auto csv = predictions_csv(p, {0, 1}, std::vector<int>{0, 1}, {0.25, 0.1});
  CHECK(csv == "row,p0,p1,y,group_0.25,group_0.1\n0,0.8,0.2,0,low,moderate\n1,0.1,0.9,1,high,high\n");
  const std::vector<int> y{0, 1};
  const auto rows = evaluate_split(p, y, "test");
  CHECK(rows.back().metric == "auc");
  CHECK(*rows.back().value == 1.0);
  CHECK(metrics_csv(rows).find("split,metric,class,value\ntest,brier,0,") == 0);
}
