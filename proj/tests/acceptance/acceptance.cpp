// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <boost/math/distributions/normal.hpp>

#include "vinecls/bicop.hpp"
#include "vinecls/classifier.hpp"
#include "vinecls/data.hpp"
#include "vinecls/diagnostics.hpp"
#include "vinecls/latent_corr.hpp"
#include "vinecls/margins.hpp"
#include "vinecls/random.hpp"
#include "vinecls/simulation.hpp"
#include "vinecls/stats.hpp"
#include "vinecls/vine.hpp"

#ifndef VINECLS_CLI_PATH
#define VINECLS_CLI_PATH "vinecls"
#endif

using namespace vinecls;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double phi_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double phi_inv(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

// Composite Gauss-Legendre nodes/weights on [a, b].
struct Rule {
  std::vector<double> x, w;
};
Rule composite_rule(double a, double b, int panels, int order) {
  // Golub-Welsch free: Newton on Legendre polynomials.
  std::vector<double> t(order), wt(order);
  for (int i = 0; i < order; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    t[i] = z;
    wt[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  Rule r;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < order; ++i) {
      r.x.push_back(mid + 0.5 * h * t[i]);
      r.w.push_back(0.5 * h * wt[i]);
    }
  }
  return r;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------

Outcome copula_suite() {
  const Rule rule = composite_rule(-8.0, 8.0, 16, 20);
  std::vector<double> nodes_u(rule.x.size()), weight_u(rule.x.size());
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    nodes_u[i] = phi_cdf(rule.x[i]);
    weight_u[i] = rule.w[i] * phi_pdf(rule.x[i]);
  }
  double worst_frechet = 0.0, worst_h = 0.0, worst_mass = 0.0, worst_tau = 0.0;
  std::string worst_h_case, worst_mass_case, worst_tau_case;
  int cases = 0;
  for (Family f : all_families()) {
    if (f == Family::Independence) continue;
    for (int rot : rotations_for(f)) {
      for (double tau_abs : {0.3, 0.5, 0.75}) {
        const double tau = (rot == 90 || rot == 270) ? -tau_abs : tau_abs;
        const Bicop c(f, rot, tau_to_param(f, rot, tau));
        ++cases;
        const std::string name = c.label() + fmt(" tau=%.2f", tau);

        for (int i = 0; i <= 20; ++i)
          for (int j = 0; j <= 20; ++j) {
            const double u = i / 20.0, v = j / 20.0;
            const double cv = c.cdf(u, v);
            const double lo = std::max(u + v - 1.0, 0.0), hi = std::min(u, v);
            worst_frechet = std::max({worst_frechet, lo - cv, cv - hi});
          }

        const double h = 1e-3;
        for (int i = 1; i < 20; ++i)
          for (int j = 1; j < 20; ++j) {
            const double u = i / 20.0, v = j / 20.0;
            const double du = (-c.cdf(u + 2 * h, v) + 8 * c.cdf(u + h, v) - 8 * c.cdf(u - h, v) + c.cdf(u - 2 * h, v)) /
                              (12 * h);
            const double dv = (-c.cdf(u, v + 2 * h) + 8 * c.cdf(u, v + h) - 8 * c.cdf(u, v - h) + c.cdf(u, v - 2 * h)) /
                              (12 * h);
            const double e = std::max(std::abs(du - c.hfunc(u, v, HDirection::TwoGivenOne)),
                                      std::abs(dv - c.hfunc(u, v, HDirection::OneGivenTwo)));
            if (e > worst_h) {
              worst_h = e;
              worst_h_case = name;
            }
          }

        double mass = 0.0;
        for (std::size_t i = 0; i < nodes_u.size(); ++i)
          for (std::size_t j = 0; j < nodes_u.size(); ++j)
            mass += weight_u[i] * weight_u[j] * c.pdf(nodes_u[i], nodes_u[j]);
        if (std::abs(mass - 1.0) > worst_mass) {
          worst_mass = std::abs(mass - 1.0);
          worst_mass_case = name;
        }

        const auto draws = c.sample(100000, 1000 + cases);
        std::vector<double> a(draws.size()), b(draws.size());
        for (std::size_t k = 0; k < draws.size(); ++k) std::tie(a[k], b[k]) = draws[k];
        const double err = std::abs(stats::kendall_tau(a, b) - param_to_tau(f, rot, c.params()));
        if (err > worst_tau) {
          worst_tau = err;
          worst_tau_case = name;
        }
      }
    }
  }
  const bool pass = worst_frechet <= 1e-9 && worst_h <= 1e-5 && worst_mass <= 1e-3 && worst_tau <= 0.01;
  return {pass, fmt("%d cases; frechet excess %.1e, h err %.1e (%s), |mass-1| %.1e (%s), tau err %.4f (%s)", cases,
                    worst_frechet, worst_h, worst_h_case.c_str(), worst_mass, worst_mass_case.c_str(), worst_tau,
                    worst_tau_case.c_str())};
}

VineStructure path3() {
  VineStructure s;
  s.d = 3;
  s.trees = {{{0, 1, 0, 1, {}}, {1, 2, 1, 2, {}}}, {{0, 1, 0, 2, {1}}}};
  return s;
}

Outcome mixed_likelihood() {
  std::vector<VariableSpec> schema;
  std::vector<MarginModel> margins;
  const std::vector<std::vector<double>> samples = {
      {1, 1, 2, 2, 2, 3}, {1, 2, 2, 3, 3, 3, 3}, {1, 1, 1, 2, 3}};
  for (int j = 0; j < 3; ++j) {
    schema.push_back({"k" + std::to_string(j + 1), VariableKind::Ordinal, 3});
    margins.push_back(fit_margin(samples[j], schema.back(), MarginMethod::Categorical));
  }
  const VineModel ordinal(schema, margins, path3(),
                          {{Bicop(Family::Clayton, 0, {2.0}), Bicop(Family::Gumbel, 90, {1.5})},
                           {Bicop(Family::Frank, 0, {3.0})}},
                          2);
  double total = 0.0;
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b)
      for (int c = 1; c <= 3; ++c) {
        const std::vector<double> row{double(a), double(b), double(c)};
        total += std::exp(ordinal.log_density(row));
      }

  std::vector<VariableSpec> cschema;
  std::vector<MarginModel> cmargins;
  Rng rng(11);
  double lo = 1e300, hi = -1e300;
  for (int j = 0; j < 3; ++j) {
    std::vector<double> s(40);
    for (auto& x : s) x = rng.normal() * (1.0 + j);
    cschema.push_back({"x" + std::to_string(j + 1), VariableKind::Continuous, 0});
    cmargins.push_back(fit_margin(s, cschema.back(), MarginMethod::Kernel));
  }
  const VineModel gauss(cschema, cmargins, path3(),
                        {{Bicop(Family::Gaussian, 0, {0.6}), Bicop(Family::Gaussian, 0, {-0.4})},
                         {Bicop(Family::Gaussian, 0, {0.3})}},
                        2);
  std::vector<Rule> rules;
  for (const auto& m : cmargins) {
    lo = m.sample().front() - 9.0 * m.bandwidth();
    hi = m.sample().back() + 9.0 * m.bandwidth();
    rules.push_back(composite_rule(lo, hi, 12, 10));
  }
  std::vector<std::vector<double>> cols(3);
  std::vector<double> weights;
  for (std::size_t i = 0; i < rules[0].x.size(); ++i)
    for (std::size_t j = 0; j < rules[1].x.size(); ++j)
      for (std::size_t k = 0; k < rules[2].x.size(); ++k) {
        cols[0].push_back(rules[0].x[i]);
        cols[1].push_back(rules[1].x[j]);
        cols[2].push_back(rules[2].x[k]);
        weights.push_back(rules[0].w[i] * rules[1].w[j] * rules[2].w[k]);
      }
  const auto logf = gauss.log_density(cols);
  double integral = 0.0;
  for (std::size_t i = 0; i < logf.size(); ++i) integral += weights[i] * std::exp(logf[i]);
  const bool pass = std::abs(total - 1.0) <= 1e-6 && std::abs(integral - 1.0) <= 1e-2;
  return {pass, fmt("ordinal cell sum - 1 = %.2e; continuous integral - 1 = %.2e", total - 1.0, integral - 1.0)};
}

Outcome posterior_contract() {
  DgpConfig cfg;
  cfg.variant = DgpVariant::Mixed;
  cfg.n_per_class = 300;
  cfg.seed = 5;
  const auto model = fit_classifier(simulate_dgp(cfg));
  Rng rng(77);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double scale = i % 10 == 0 ? 40.0 : 4.0;
    const std::vector<double> row{(2.0 * rng.uniform() - 1.0) * scale, double(1 + rng.below(12))};
    const auto p = model.posterior(row);
    worst = std::max(worst, std::abs(p[0] + p[1] - 1.0));
  }
  const std::vector<double> priors{0.2, 0.8}, logd{std::log(2.0), 0.0};
  const auto worked = bayes_posterior(priors, logd);
  const double err = std::abs(worked[0] - 1.0 / 3.0);
  return {worst <= 1e-12 && err <= 1e-12,
          fmt("max |sum - 1| over 1e4 inputs %.1e; worked case p0 = %.15f", worst, worked[0])};
}

Outcome benchmark_replication() {
  std::string detail;
  bool pass = true;
  for (auto [variant, target] : {std::pair{DgpVariant::Continuous, 82.88}, std::pair{DgpVariant::Mixed, 111.45}}) {
    BenchmarkConfig cfg;
    cfg.variant = variant;
    cfg.seeds.clear();
    for (std::uint64_t s = 1; s <= 20; ++s) cfg.seeds.push_back(s);
    cfg.mbic = false;
    cfg.grid_points = 2;
    const auto res = benchmark_run(cfg);
    int wins = 0;
    std::vector<double> cop;
    for (auto s : cfg.seeds) {
      const double c = *res.value(s, "copula", "oracle", "test", "nll_sum");
      const double l = *res.value(s, "logistic", "weighted", "test", "nll_sum");
      wins += c < l;
      cop.push_back(c);
    }
    const double med = median(cop);
    const bool ok = wins >= 18 && std::abs(med / target - 1.0) <= 0.30;
    pass = pass && ok;
    detail += fmt("%s: wins %d/20, median copula nll %.2f (target %.2f); ", to_string(variant).c_str(), wins, med,
                  target);
  }
  return {pass, detail};
}

VineModel fit_default(const Dataset& data, MarginMethod method) {
  std::vector<MarginModel> margins;
  for (std::size_t j = 0; j < data.dims(); ++j) margins.push_back(fit_margin(data.columns[j], data.schema[j], method));
  return fit_vine(data, margins, select_structure(latent_matrix(data).values));
}

Outcome model_selection() {
  const int seeds = 20;
  int independent = 0, independent_kernel = 0;
  for (int s = 1; s <= seeds; ++s) {
    Rng rng(900, s);
    Dataset data;
    for (int j = 0; j < 3; ++j) {
      data.schema.push_back({"u" + std::to_string(j + 1), VariableKind::Continuous, 0});
      std::vector<double> col(500);
      for (auto& x : col) x = rng.uniform();
      data.columns.push_back(col);
    }
    independent += fit_default(data, MarginMethod::Empirical).truncation_level() == 0;
    independent_kernel += fit_default(data, MarginMethod::Kernel).truncation_level() == 0;
  }

  const Bicop gumbel(Family::Gumbel, 0, tau_to_param(Family::Gumbel, 0, 0.6));
  int recovered = 0;
  double worst = 0.0;
  for (int s = 1; s <= seeds; ++s) {
    Rng rng(901, s);
    Dataset data;
    std::vector<std::vector<double>> cols(3, std::vector<double>(500));
    for (int i = 0; i < 500; ++i) {
      const double u1 = rng.uniform();
      const double u2 = gumbel.hinv(rng.uniform(), u1, HDirection::TwoGivenOne);
      const double u3 = gumbel.hinv(rng.uniform(), u2, HDirection::TwoGivenOne);
      cols[0][i] = phi_inv(u1);
      cols[1][i] = phi_inv(u2);
      cols[2][i] = phi_inv(u3);
    }
    for (int j = 0; j < 3; ++j) data.schema.push_back({"x" + std::to_string(j + 1), VariableKind::Continuous, 0});
    data.columns = cols;
    const auto vine = fit_default(data, MarginMethod::Kernel);
    bool ok = vine.truncation_level() <= 1;
    const auto& tree1 = vine.structure().trees[0];
    double err = 0.0;
    for (std::size_t e = 0; e < tree1.size(); ++e) {
      const int a = std::min(tree1[e].a, tree1[e].b), b = std::max(tree1[e].a, tree1[e].b);
      if (b - a != 1) ok = false;
      err = std::max(err, std::abs(vine.copula(1, int(e)).tau() - 0.6));
    }
    worst = std::max(worst, err);
    recovered += ok && err <= 0.08;
  }
  const bool pass = independent >= 18 && recovered >= 16;
  return {pass, fmt("independent uniforms: truncation 0 in %d/20 (kernel margins %d/20); 1-truncated Gumbel vine "
                    "recovered in %d/20 (max tau err %.3f)",
                    independent, independent_kernel, recovered, worst)};
}

Outcome risk_semantics() {
  const RiskPolicy policy{0.25, 1};
  bool ok = assign_risk_group(0.95, policy) == RiskGroup::High && assign_risk_group(0.10, policy) == RiskGroup::Low &&
            assign_risk_group(0.60, policy) == RiskGroup::Moderate;
  const std::vector<double> alphas{0.45, 0.4, 0.35, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05, 0.01};
  bool partition = true, monotone = true;
  for (int rep = 0; rep < 50; ++rep) {
    Rng rng(31, rep);
    const std::size_t n = 50 + rng.below(500);
    std::vector<double> p(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rep % 5 == 0 ? std::round(rng.uniform() * 20.0) / 20.0 : rng.uniform();
      y[i] = int(rng.below(2));
    }
    const auto table = risk_group_table(p, y, std::nullopt, alphas);
    std::size_t prev_low = n + 1;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      std::size_t total = 0;
      for (int g = 0; g < 3; ++g) total += table[3 * a + g].n;
      partition = partition && total == n;
      const std::size_t low = table[3 * a].n;
      monotone = monotone && low <= prev_low;
      prev_low = low;
    }
  }
  return {ok && partition && monotone,
          fmt("worked cases %s; partition %s; low-group monotone %s", ok ? "ok" : "wrong", partition ? "ok" : "broken",
              monotone ? "ok" : "broken")};
}

Outcome bootstrap_coverage() {
  const std::vector<double> rho{0.2, 0.5, 0.7};
  std::vector<int> covered(3, 0), trials(3, 0);
  for (int ds = 0; ds < 200; ++ds) {
    Rng rng(4242, ds);
    std::vector<double> x(600), y(600), z(600);
    for (int i = 0; i < 600; ++i) {
      const int k = int(rng.below(3));
      const double a = rng.normal(), b = rng.normal();
      x[i] = a;
      y[i] = rho[k] * a + std::sqrt(1.0 - rho[k] * rho[k]) * b;
      z[i] = k + 1;
    }
    const auto res = bootstrap_bands(x, y, z, 3, 1000, 0.90, 10000 + ds);
    for (int k = 0; k < 3; ++k) {
      const auto& c = res.categories[k];
      if (!c.lower || !c.upper) continue;
      const double truth = 6.0 / std::numbers::pi * std::asin(rho[k] / 2.0);
      ++trials[k];
      covered[k] += *c.lower <= truth && truth <= *c.upper;
    }
  }
  const int all = covered[0] + covered[1] + covered[2];
  const int n = trials[0] + trials[1] + trials[2];
  const double rate = double(all) / n;
  return {std::abs(rate - 0.90) <= 0.05,
          fmt("coverage %.3f over %d bands (by level: %.3f %.3f %.3f)", rate, n, double(covered[0]) / trials[0],
              double(covered[1]) / trials[1], double(covered[2]) / trials[2])};
}

Outcome metric_identities() {
  const std::vector<int> labels{0, 1, 1, 0, 1, 0, 0, 1, 1};
  std::vector<std::vector<double>> perfect, half, noisy;
  Rng rng(8);
  for (int y : labels) {
    perfect.push_back(y == 1 ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0});
    half.push_back({0.5, 0.5});
    const double p = rng.uniform();
    noisy.push_back({1.0 - p, p});
  }
  const auto nll_perfect = per_class_nll(perfect, labels);
  bool ok = *nll_perfect.per_class[0] == 0.0 && *nll_perfect.per_class[1] == 0.0 && nll_perfect.overall_sum == 0.0;
  const auto brier = per_class_brier(half, labels);
  ok = ok && std::abs(*brier[0] - 0.25) <= 1e-15 && std::abs(*brier[1] - 0.25) <= 1e-15;
  const auto nll = per_class_nll(noisy, labels);
  double combined = 0.0;
  for (int j = 0; j < 2; ++j) combined += double(nll.counts[j]) * *nll.per_class[j];
  combined /= double(labels.size());
  const double gap = std::abs(combined - nll.overall_mean);
  std::vector<double> scores;
  for (std::size_t i = 0; i < labels.size(); ++i) scores.push_back((labels[i] == 1 ? 0.9 : 0.0) + 0.01 * double(i));
  const double a = auc(scores, labels);
  ok = ok && gap <= 1e-12 && a == 1.0;
  return {ok, fmt("perfect nll %g/%g; constant Brier %.17g/%.17g; weighted-combination gap %.1e; AUC %.17g",
                  *nll_perfect.per_class[0], *nll_perfect.per_class[1], *brier[0], *brier[1], gap, a)};
}

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + VINECLS_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("vinecls_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string d = dir.string() + "/";

  {
    Rng rng(3);
    std::ostringstream csv;
    csv.precision(17);
    csv << "x,y,z,lab\n";
    for (int i = 0; i < 400; ++i) {
      const int k = int(rng.below(3));
      const double a = rng.normal();
      csv << a << ',' << 0.5 * a + rng.normal() << ',' << k + 1 << ',' << (i % 2) << '\n';
    }
    write_text_file(d + "diag.csv", csv.str());
    write_text_file(d + "diag_schema.json",
                    R"({"variables":[{"name":"x","kind":"continuous"},{"name":"y","kind":"continuous"},)"
                    R"({"name":"z","kind":"ordinal","levels":3}],"label":"lab"})");
    write_text_file(d + "sim_schema.json",
                    R"({"variables":[{"name":"x1","kind":"continuous"},{"name":"x2","kind":"ordinal","levels":12}],)"
                    R"("label":"y"})");
  }

  std::vector<std::string> outputs;
  int failures = 0;
  for (const std::string tag : {"t1", "t4", "t4b"}) {
    const std::string threads = tag == "t1" ? "1" : "4";
    const std::string g = " --seed 17 --threads " + threads + " ";
    failures += run(g + "simulate --variant mixed --n-per-class 250 --out " + d + "sim_" + tag + ".csv") != 0;
    failures += run(g + "fit --data " + d + "sim_t1.csv --schema " + d + "sim_schema.json --out " + d + "model_" + tag +
                    ".json --edges " + d + "edges_" + tag + ".csv --train-predictions " + d + "train_" + tag +
                    ".csv") != 0;
    fs::create_directories(d + "diag_" + tag);
    failures += run(g + "diagnose --data " + d + "diag.csv --schema " + d + "diag_schema.json --out-dir " + d +
                    "diag_" + tag + " --pair x,y,z --latent x,z --replicates 200") != 0;
    failures += run(g + "benchmark --variant continuous --n-seeds 3 --modes oracle,mbic --n-train 150 --n-test 100 "
                        "--grid-points 12 --out " +
                    d + "bench_" + tag + ".csv --grid-out " + d + "grid_" + tag + ".csv") != 0;
  }
  const std::vector<std::string> files = {"sim_%s.csv",     "sim_%s.csv.json",           "model_%s.json",
                                          "edges_%s.csv",   "train_%s.csv",              "diag_%s/latent_corr.csv",
                                          "diag_%s/conditional_rho.csv", "diag_%s/latent_scores.csv",
                                          "bench_%s.csv",   "grid_%s.csv"};
  int identical = 0;
  std::string differing;
  for (const auto& pattern : files) {
    std::string ref;
    bool same = true;
    for (const char* tag : {"t1", "t4", "t4b"}) {
      std::string text;
      try {
        text = read_text_file(d + fmt(pattern.c_str(), tag));
      } catch (const std::exception&) {
        same = false;
        break;
      }
      if (text.empty()) same = false;
      if (std::string(tag) == "t1")
        ref = text;
      else if (text != ref)
        same = false;
    }
    identical += same;
    if (!same) differing += fmt(pattern.c_str(), "*") + " ";
  }
  fs::remove_all(dir);
  return {failures == 0 && identical == int(files.size()),
          fmt("%d/%zu outputs byte-identical across 1/4 workers and re-runs; %d command failures %s", identical,
              files.size(), failures, differing.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "copula correctness suite", 120, copula_suite},
      {2, "mixed-likelihood oracle", 60, mixed_likelihood},
      {3, "posterior contract", 0, posterior_contract},
      {4, "two-class benchmark ordering", 300, benchmark_replication},
      {5, "model-selection sanity", 180, model_selection},
      {6, "risk-group semantics", 0, risk_semantics},
      {7, "bootstrap band coverage", 300, bootstrap_coverage},
      {8, "metric identities", 0, metric_identities},
      {9, "determinism across worker counts", 0, determinism},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_s <= 0 || secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("criterion %d %s: %s | %s | %.1fs%s\n", c.id, c.name, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                in_time ? "" : " (over time limit)");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
