#include "vinecls/margins.hpp"

#include <algorithm>
#include <cmath>

#include "vinecls/error.hpp"
#include "vinecls/stats.hpp"

namespace vinecls {

namespace {
constexpr double kKernelReach = 9.0;  // kernels beyond this many bandwidths are saturated
}

MarginMethod margin_method_from_string(const std::string& name) {
  if (name == "kernel") return MarginMethod::Kernel;
  if (name == "empirical") return MarginMethod::Empirical;
  if (name == "categorical") return MarginMethod::Categorical;
  throw Error(ErrorCode::InvalidArgument, "unknown margin method '" + name + "'");
}

std::string to_string(MarginMethod method) {
  switch (method) {
    case MarginMethod::Kernel: return "kernel";
    case MarginMethod::Empirical: return "empirical";
    case MarginMethod::Categorical: return "categorical";
  }
  return "kernel";
}

std::vector<double> level_frequencies(std::span<const double> column, int levels) {
  std::vector<double> freq(levels, 0.0);
  for (double v : column) freq[static_cast<std::size_t>(v) - 1] += 1.0;
  for (auto& f : freq) f /= static_cast<double>(column.size());
  return freq;
}

MarginModel fit_margin(std::span<const double> column, const VariableSpec& spec, MarginMethod method) {
  MarginModel m;
  m.method_ = method;
  if (spec.is_ordinal() != (method == MarginMethod::Categorical))
    throw Error(ErrorCode::InvalidArgument, "margin method incompatible with variable '" + spec.name + "'");

  if (method == MarginMethod::Categorical) {
    if (column.empty()) throw Error(ErrorCode::TooFewObservations, "empty ordinal column '" + spec.name + "'");
    std::vector<double> counts(spec.levels, 0.0);
    for (double v : column) {
      if (v < 1 || v > spec.levels || v != std::floor(v))
        throw Error(ErrorCode::OrdinalOutOfRange, "ordinal value outside levels in '" + spec.name + "'");
      counts[static_cast<std::size_t>(v) - 1] += 1.0;
    }
    const double total = static_cast<double>(column.size()) + 0.5 * spec.levels;
    double running = 0.0;
    for (double c : counts) {
      m.probs_.push_back((c + 0.5) / total);
      running += m.probs_.back();
      m.cum_.push_back(running);
    }
    m.cum_.back() = 1.0;
    return m;
  }

  if (column.size() < 2) throw Error(ErrorCode::TooFewObservations, "need at least 2 values for '" + spec.name + "'");
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back())
    throw Error(ErrorCode::DegenerateMargin, "column '" + spec.name + "' is constant");
  const auto n = static_cast<double>(sorted.size());

  if (method == MarginMethod::Kernel) {
    const double sd = stats::sample_sd(sorted);
    const double iqr = stats::quantile_sorted(sorted, 0.75) - stats::quantile_sorted(sorted, 0.25);
    double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    m.bandwidth_ = 0.9 * spread * std::pow(n, -0.2);
    m.sample_ = std::move(sorted);
    return m;
  }

  // Empirical: knots at distinct values with rank/(n+1) heights.
  std::vector<double> values, heights;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    values.push_back(sorted[i]);
    heights.push_back(static_cast<double>(i + 1) / (n + 1.0));
  }
  const double spacing = (values.back() - values.front()) / static_cast<double>(values.size() - 1);
  m.sample_.push_back(values.front() - spacing);
  m.knot_cdf_.push_back(0.0);
  m.sample_.insert(m.sample_.end(), values.begin(), values.end());
  m.knot_cdf_.insert(m.knot_cdf_.end(), heights.begin(), heights.end());
  m.sample_.push_back(values.back() + spacing);
  m.knot_cdf_.push_back(1.0);
  return m;
}

double MarginModel::raw_cdf(double x) const {
  switch (method_) {
    case MarginMethod::Categorical: {
      const double k = std::floor(x);
      if (k < 1) return 0.0;
      if (k >= levels()) return 1.0;
      return cum_[static_cast<std::size_t>(k) - 1];
    }
    case MarginMethod::Kernel: {
      const auto lo = std::lower_bound(sample_.begin(), sample_.end(), x - kKernelReach * bandwidth_);
      const auto hi = std::upper_bound(lo, sample_.end(), x + kKernelReach * bandwidth_);
      double sum = static_cast<double>(lo - sample_.begin());
      for (auto it = lo; it != hi; ++it) sum += stats::norm_cdf((x - *it) / bandwidth_);
      return sum / static_cast<double>(sample_.size());
    }
    case MarginMethod::Empirical: {
      if (x <= sample_.front()) return 0.0;
      if (x >= sample_.back()) return 1.0;
      const auto it = std::upper_bound(sample_.begin(), sample_.end(), x);
      const auto k = static_cast<std::size_t>(it - sample_.begin());
      const double t = (x - sample_[k - 1]) / (sample_[k] - sample_[k - 1]);
      return knot_cdf_[k - 1] + t * (knot_cdf_[k] - knot_cdf_[k - 1]);
    }
  }
  return 0.0;
}

double MarginModel::cdf(double x) const { return std::clamp(raw_cdf(x), kClampEps, 1.0 - kClampEps); }

double MarginModel::cdf_left(double x) const {
  if (!is_discrete()) throw Error(ErrorCode::InvalidArgument, "cdf_left is defined for ordinal margins only");
  return cdf(std::floor(x) - 1.0);
}

double MarginModel::density(double x) const {
  switch (method_) {
    case MarginMethod::Categorical: {
      if (x != std::floor(x) || x < 1 || x > levels()) return 0.0;
      return probs_[static_cast<std::size_t>(x) - 1];
    }
    case MarginMethod::Kernel: {
      const auto lo = std::lower_bound(sample_.begin(), sample_.end(), x - kKernelReach * bandwidth_);
      const auto hi = std::upper_bound(lo, sample_.end(), x + kKernelReach * bandwidth_);
      double sum = 0.0;
      for (auto it = lo; it != hi; ++it) sum += stats::norm_pdf((x - *it) / bandwidth_);
      return sum / (static_cast<double>(sample_.size()) * bandwidth_);
    }
    case MarginMethod::Empirical: {
      if (x < sample_.front() || x >= sample_.back()) return 0.0;
      const auto it = std::upper_bound(sample_.begin(), sample_.end(), x);
      const auto k = static_cast<std::size_t>(it - sample_.begin());
      return (knot_cdf_[k] - knot_cdf_[k - 1]) / (sample_[k] - sample_[k - 1]);
    }
  }
  return 0.0;
}

double MarginModel::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level must lie in (0,1)");
  switch (method_) {
    case MarginMethod::Categorical: {
      for (int k = 1; k < levels(); ++k)
        if (cum_[k - 1] >= u) return k;
      return levels();
    }
    case MarginMethod::Empirical: {
      const auto it = std::lower_bound(knot_cdf_.begin(), knot_cdf_.end(), u);
      const auto k = static_cast<std::size_t>(it - knot_cdf_.begin());
      const double t = (u - knot_cdf_[k - 1]) / (knot_cdf_[k] - knot_cdf_[k - 1]);
      return sample_[k - 1] + t * (sample_[k] - sample_[k - 1]);
    }
    case MarginMethod::Kernel: {
      double lo = sample_.front() - 40.0 * bandwidth_;
      double hi = sample_.back() + 40.0 * bandwidth_;
      double x = sample_[sample_.size() / 2];
      // Safeguarded Newton on the smooth mixture CDF.
      for (int iter = 0; iter < 200; ++iter) {
        const double f = raw_cdf(x) - u;
        if (f > 0) hi = x; else lo = x;
        const double d = density(x);
        double next = d > 0 ? x - f / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-13 * (1.0 + std::abs(x))) return next;
        x = next;
      }
      return x;
    }
  }
  return 0.0;
}

nlohmann::json MarginModel::to_json() const {
  nlohmann::json j;
  j["method"] = to_string(method_);
  switch (method_) {
    case MarginMethod::Categorical: j["probabilities"] = probs_; break;
    case MarginMethod::Kernel:
      j["bandwidth"] = bandwidth_;
      j["centers"] = sample_;
      break;
    case MarginMethod::Empirical:
      j["knots"] = sample_;
      j["knot_cdf"] = knot_cdf_;
      break;
  }
  return j;
}

MarginModel MarginModel::from_json(const nlohmann::json& j) {
  MarginModel m;
  m.method_ = margin_method_from_string(j.at("method").get<std::string>());
  switch (m.method_) {
    case MarginMethod::Categorical: {
      m.probs_ = j.at("probabilities").get<std::vector<double>>();
      double running = 0.0;
      for (double p : m.probs_) m.cum_.push_back(running += p);
      m.cum_.back() = 1.0;
      break;
    }
    case MarginMethod::Kernel:
      m.bandwidth_ = j.at("bandwidth").get<double>();
      m.sample_ = j.at("centers").get<std::vector<double>>();
      break;
    case MarginMethod::Empirical:
      m.sample_ = j.at("knots").get<std::vector<double>>();
      m.knot_cdf_ = j.at("knot_cdf").get<std::vector<double>>();
      break;
  }
  return m;
}

}  // namespace vinecls
