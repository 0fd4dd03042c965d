#include "vinecls/latent_corr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <tuple>
#include <sstream>

#include "vinecls/error.hpp"
#include "vinecls/stats.hpp"

namespace vinecls {

namespace {

constexpr double kRhoBound = 0.999;

void require_levels_observed(std::span<const double> k, const char* what) {
  if (std::adjacent_find(k.begin(), k.end(), std::not_equal_to<>()) == k.end())
    throw Error(ErrorCode::DegenerateMargin, std::string(what) + ": ordinal column has a single observed level");
}

}  // namespace

std::string to_string(CorrEstimator e) {
  switch (e) {
    case CorrEstimator::Identity: return "identity";
    case CorrEstimator::Pearson: return "pearson";
    case CorrEstimator::Polyserial: return "polyserial";
    case CorrEstimator::Polychoric: return "polychoric";
  }
  return "identity";
}

std::vector<double> normal_scores(std::span<const double> x) {
  auto ranks = stats::midranks(x);
  const double n1 = static_cast<double>(x.size()) + 1.0;
  for (auto& r : ranks) r = stats::norm_quantile(r / n1);
  return ranks;
}

double normal_scores_pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 3 || x.size() != y.size())
    throw Error(ErrorCode::TooFewObservations, "normal-scores correlation needs n >= 3 paired values");
  auto constant = [](std::span<const double> v) {
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
  };
  if (constant(x) || constant(y)) throw Error(ErrorCode::DegenerateMargin, "normal-scores correlation: constant column");
  return std::clamp(stats::pearson(normal_scores(x), normal_scores(y)), -kRhoBound, kRhoBound);
}

std::vector<double> ordinal_thresholds(std::span<const double> k, int levels) {
  std::vector<double> counts(levels, 0.0);
  for (double v : k) counts[static_cast<std::size_t>(v) - 1] += 1.0;
  const double total = static_cast<double>(k.size()) + 0.5 * levels;
  std::vector<double> t(levels + 1);
  t[0] = -INFINITY;
  t[levels] = INFINITY;
  double cum = 0.0;
  for (int j = 1; j < levels; ++j) {
    cum += (counts[j - 1] + 0.5) / total;
    t[j] = stats::norm_quantile(cum);
  }
  return t;
}

double polyserial(std::span<const double> x, std::span<const double> k, int levels) {
  if (x.size() < 10 || x.size() != k.size()) throw Error(ErrorCode::TooFewObservations, "polyserial needs n >= 10");
  require_levels_observed(k, "polyserial");
  if (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end())
    throw Error(ErrorCode::DegenerateMargin, "polyserial: constant continuous column");
  const auto z = normal_scores(x);
  const auto t = ordinal_thresholds(k, levels);
  auto neg_ll = [&](double rho) {
    const double s = std::sqrt(1.0 - rho * rho);
    double ll = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const auto level = static_cast<std::size_t>(k[i]);
      const double p = stats::norm_cdf((t[level] - rho * z[i]) / s) - stats::norm_cdf((t[level - 1] - rho * z[i]) / s);
      ll += std::log(std::max(p, 1e-300));
    }
    return -ll;
  };
  return stats::brent_minimize(neg_ll, -kRhoBound, kRhoBound, 40).first;
}

double polychoric(std::span<const double> k1, int levels1, std::span<const double> k2, int levels2) {
  if (k1.size() != k2.size() || k1.empty()) throw Error(ErrorCode::TooFewObservations, "polychoric needs paired data");
  require_levels_observed(k1, "polychoric");
  require_levels_observed(k2, "polychoric");
  std::vector<double> table(static_cast<std::size_t>(levels1 * levels2), 0.0);
  for (std::size_t i = 0; i < k1.size(); ++i)
    table[static_cast<std::size_t>((k1[i] - 1) * levels2 + (k2[i] - 1))] += 1.0;
  const auto a = ordinal_thresholds(k1, levels1);
  const auto b = ordinal_thresholds(k2, levels2);
  auto neg_ll = [&](double rho) {
    double ll = 0.0;
    for (int i = 1; i <= levels1; ++i) {
      for (int j = 1; j <= levels2; ++j) {
        const double n = table[static_cast<std::size_t>((i - 1) * levels2 + (j - 1))];
        if (n == 0.0) continue;
        const double p = stats::bvn_cdf(a[i], b[j], rho) - stats::bvn_cdf(a[i - 1], b[j], rho) -
                         stats::bvn_cdf(a[i], b[j - 1], rho) + stats::bvn_cdf(a[i - 1], b[j - 1], rho);
        ll += n * std::log(std::max(p, 1e-300));
      }
    }
    return -ll;
  };
  return stats::brent_minimize(neg_ll, -kRhoBound, kRhoBound, 40).first;
}

bool repair_positive_definite(Eigen::MatrixXd& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.eigenvalues().minCoeff() >= floor) return false;
  Eigen::VectorXd clipped = solver.eigenvalues().cwiseMax(floor);
  Eigen::MatrixXd rebuilt = solver.eigenvectors() * clipped.asDiagonal() * solver.eigenvectors().transpose();
  const Eigen::VectorXd scale = rebuilt.diagonal().cwiseSqrt().cwiseInverse();
  m = scale.asDiagonal() * rebuilt * scale.asDiagonal();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) m(j, i) = m(i, j);
  }
  return true;
}

LatentMatrix latent_matrix(const Dataset& data) {
  const auto d = static_cast<Eigen::Index>(data.dims());
  LatentMatrix out;
  out.values = Eigen::MatrixXd::Identity(d, d);
  out.tags.assign(data.dims(), std::vector<CorrEstimator>(data.dims(), CorrEstimator::Identity));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const auto& si = data.schema[i];
      const auto& sj = data.schema[j];
      const auto& ci = data.columns[i];
      const auto& cj = data.columns[j];
      double rho = 0.0;
      CorrEstimator tag;
      if (!si.is_ordinal() && !sj.is_ordinal()) {
        rho = normal_scores_pearson(ci, cj);
        tag = CorrEstimator::Pearson;
      } else if (si.is_ordinal() && sj.is_ordinal()) {
        rho = polychoric(ci, si.levels, cj, sj.levels);
        tag = CorrEstimator::Polychoric;
      } else if (si.is_ordinal()) {
        rho = polyserial(cj, ci, si.levels);
        tag = CorrEstimator::Polyserial;
      } else {
        rho = polyserial(ci, cj, sj.levels);
        tag = CorrEstimator::Polyserial;
      }
      out.values(i, j) = out.values(j, i) = rho;
      out.tags[i][j] = out.tags[j][i] = tag;
    }
  }
  out.repaired = repair_positive_definite(out.values);
  return out;
}

double partial_correlation(const Eigen::MatrixXd& corr, int a, int b, std::span<const int> given) {
  const int d = static_cast<int>(corr.rows());
  auto check = [&](int i) {
    if (i < 0 || i >= d) throw Error(ErrorCode::InvalidArgument, "partial correlation index out of range");
  };
  check(a);
  check(b);
  for (int c : given) {
    check(c);
    if (c == a || c == b) throw Error(ErrorCode::InvalidArgument, "conditioning set overlaps the pair");
  }
  if (a == b) throw Error(ErrorCode::InvalidArgument, "partial correlation of a variable with itself");

  std::vector<int> set(given.begin(), given.end());
  std::sort(set.begin(), set.end());
  if (std::adjacent_find(set.begin(), set.end()) != set.end())
    throw Error(ErrorCode::InvalidArgument, "duplicate conditioning index");

  std::map<std::tuple<int, int, std::vector<int>>, double> memo;
  std::function<double(int, int, const std::vector<int>&)> rec = [&](int i, int j, const std::vector<int>& s) {
    if (i > j) std::swap(i, j);
    if (s.empty()) return corr(i, j);
    const auto key = std::make_tuple(i, j, s);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const int c = s.back();
    const std::vector<int> rest(s.begin(), s.end() - 1);
    const double rij = rec(i, j, rest), ric = rec(i, c, rest), rjc = rec(j, c, rest);
    const double den = (1.0 - ric * ric) * (1.0 - rjc * rjc);
    if (den < 1e-14) throw Error(ErrorCode::NearSingular, "partial correlation denominator underflow");
    const double value = (rij - ric * rjc) / std::sqrt(den);
    memo.emplace(key, value);
    return value;
  };
  return rec(a, b, set);
}

std::string latent_matrix_csv(const LatentMatrix& m, const std::vector<VariableSpec>& schema) {
  std::ostringstream out;
  out.precision(6);
  out << "variable";
  for (const auto& v : schema) out << "," << v.name;
  out << "\n";
  for (std::size_t i = 0; i < m.dims(); ++i) {
    out << schema[i].name;
    for (std::size_t j = 0; j < m.dims(); ++j) out << "," << m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    out << "\n";
  }
  return out.str();
}

}  // namespace vinecls
