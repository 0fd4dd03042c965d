#include "vinecls/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vinecls/error.hpp"
#include "vinecls/latent_corr.hpp"
#include "vinecls/parallel.hpp"
#include "vinecls/random.hpp"
#include "vinecls/stats.hpp"

namespace vinecls {

namespace {

void check_triplet(std::span<const double> x, std::span<const double> y, std::span<const double> z, int levels) {
  if (x.size() != y.size() || x.size() != z.size())
    throw Error(ErrorCode::InvalidArgument, "x, y and z differ in length");
  if (levels < 1) throw Error(ErrorCode::InvalidArgument, "conditioning variable needs at least one level");
  for (double v : z) {
    if (v < 1 || v > levels || v != std::floor(v))
      throw Error(ErrorCode::OrdinalOutOfRange, "conditioning value outside 1.." + std::to_string(levels));
  }
}

// Inversion sampling of N(0,1) truncated to (lo, hi); the upper tail is reflected
// so that the CDF differences keep their relative accuracy.
double truncated_standard_normal(double lo, double hi, Rng& rng) {
  if (lo > 0.0) return -truncated_standard_normal(-hi, -lo, rng);
  const double plo = stats::norm_cdf(lo), phi = stats::norm_cdf(hi);
  if (!(phi > plo)) return std::isfinite(lo) ? lo : hi;
  return std::clamp(stats::norm_quantile(plo + rng.uniform() * (phi - plo)), lo, hi);
}

}  // namespace

std::vector<std::optional<double>> conditional_spearman(std::span<const double> x, std::span<const double> y,
                                                        std::span<const double> z, int levels) {
  check_triplet(x, y, z, levels);
  std::vector<std::vector<double>> xs(levels), ys(levels);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto c = static_cast<std::size_t>(z[i]) - 1;
    xs[c].push_back(x[i]);
    ys[c].push_back(y[i]);
  }
  std::vector<std::optional<double>> out(levels);
  for (int c = 0; c < levels; ++c)
    if (xs[c].size() >= 3) out[c] = stats::spearman(xs[c], ys[c]);
  return out;
}

ConditionalRhoResult bootstrap_bands(std::span<const double> x, std::span<const double> y, std::span<const double> z,
                                     int levels, int replicates, double level, std::uint64_t seed) {
  check_triplet(x, y, z, levels);
  if (replicates < 100) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least 100 replicates");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "band level must lie in (0,1)");
  const std::size_t n = x.size();
  ConditionalRhoResult result;
  result.level = level;
  result.replicates = replicates;
  const auto observed = conditional_spearman(x, y, z, levels);

  std::vector<std::vector<std::optional<double>>> draws(static_cast<std::size_t>(replicates));
  parallel_for(draws.size(), [&](std::size_t b) {
    Rng rng(seed, b);
    std::vector<double> bx(n), by(n), bz(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<std::size_t>(rng.below(n));
      bx[i] = x[r];
      by[i] = y[r];
      bz[i] = z[r];
    }
    draws[b] = conditional_spearman(bx, by, bz, levels);
  });

  for (int c = 0; c < levels; ++c) {
    CategoryRho cat;
    cat.level = c + 1;
    cat.n = static_cast<std::size_t>(std::count(z.begin(), z.end(), static_cast<double>(c + 1)));
    cat.observed = observed[c];
    std::vector<double> values;
    for (const auto& d : draws)
      if (d[c]) values.push_back(*d[c]);
    if (cat.observed && !values.empty()) {
      std::sort(values.begin(), values.end());
      cat.lower = stats::quantile_sorted(values, (1.0 - level) / 2.0);
      cat.upper = stats::quantile_sorted(values, 1.0 - (1.0 - level) / 2.0);
    }
    result.categories.push_back(cat);
  }
  return result;
}

std::pair<int, int> find_edge(const VineModel& model, const std::string& label) {
  const auto& trees = model.structure().trees;
  for (std::size_t m = 0; m < trees.size(); ++m)
    for (std::size_t e = 0; e < trees[m].size(); ++e)
      if (trees[m][e].label() == label) return {static_cast<int>(m) + 1, static_cast<int>(e)};
  throw Error(ErrorCode::EdgeAbsent, "no edge labelled '" + label + "'");
}

double model_conditional_spearman(const VineModel& model, int tree, int edge, int /*category*/, std::size_t samples,
                                  std::uint64_t seed) {
  const auto& trees = model.structure().trees;
  if (tree < 1 || tree > static_cast<int>(trees.size()) || edge < 0 ||
      edge >= static_cast<int>(trees[tree - 1].size()))
    throw Error(ErrorCode::EdgeAbsent, "edge (" + std::to_string(tree) + ", " + std::to_string(edge) + ") is absent");
  return model.copula(tree, edge).spearman_rho(samples, seed);
}

void attach_model_spearman(ConditionalRhoResult& result, const VineModel& model, int tree, int edge,
                           std::uint64_t seed) {
  const double rho = model_conditional_spearman(model, tree, edge, 0, 100000, seed);
  for (auto& c : result.categories) c.modeled = rho;
}

LatentScores latent_normal_scores(std::span<const double> x, std::span<const double> k, int levels,
                                  std::uint64_t seed) {
  LatentScores out;
  out.rho = polyserial(x, k, levels);
  out.continuous = normal_scores(x);
  const auto t = ordinal_thresholds(k, levels);
  const double s = std::sqrt(1.0 - out.rho * out.rho);
  Rng rng(seed, 0);
  out.latent.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto level = static_cast<std::size_t>(k[i]);
    const double mu = out.rho * out.continuous[i];
    const double lo = t[level - 1], hi = t[level];
    double v = mu + s * truncated_standard_normal((lo - mu) / s, (hi - mu) / s, rng);
    if (!(v > lo)) v = std::nextafter(lo, INFINITY);
    if (!(v < hi)) v = std::nextafter(hi, -INFINITY);
    out.latent[i] = v;
  }
  return out;
}

std::string conditional_rho_csv(const ConditionalRhoResult& result) {
  auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("NA"); };
  std::ostringstream out;
  out << "level,n,observed,lower,upper,modeled\n";
  for (const auto& c : result.categories)
    out << c.level << "," << c.n << "," << cell(c.observed) << "," << cell(c.lower) << "," << cell(c.upper) << ","
        << cell(c.modeled) << "\n";
  return out.str();
}

std::string latent_scores_csv(const LatentScores& scores) {
  std::ostringstream out;
  out << "z_continuous,z_latent\n";
  for (std::size_t i = 0; i < scores.latent.size(); ++i)
    out << format_number(scores.continuous[i]) << "," << format_number(scores.latent[i]) << "\n";
  return out.str();
}

}  // namespace vinecls
