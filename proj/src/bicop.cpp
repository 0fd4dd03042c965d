#include "vinecls/bicop.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "vinecls/error.hpp"
#include "vinecls/parallel.hpp"
#include "vinecls/random.hpp"
#include "vinecls/stats.hpp"

namespace vinecls {

namespace {

constexpr double kTiny = 1e-15;
constexpr double kFloor = 1e-300;
const double kLogFloor = std::log(kFloor);

double clamp_open(double u) { return std::clamp(u, kTiny, 1.0 - kTiny); }

// log(exp(a) + exp(b) - 1) for a, b >= 0.
double log_sum_exp_minus_one(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
}

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Solves h(u) = w for an increasing h on [0, 1], using dh as the Newton slope.
template <class H, class D>
double invert_increasing(const H& h, const D& dh, double w) {
  double lo = 0.0, hi = 1.0, u = w;
  for (int iter = 0; iter < 200; ++iter) {
    const double f = h(u) - w;
    if (std::abs(f) <= 1e-14) return u;
    if (f > 0.0) hi = u; else lo = u;
    if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(hi, 1e-300)) return u;
    // h is evaluated on clamped arguments, so it is flat beyond the clamp range.
    if (hi <= kTiny) return kTiny;
    if (lo >= 1.0 - kTiny) return 1.0 - kTiny;
    const double slope = dh(u);
    double next = (slope > 0.0 && std::isfinite(slope)) ? u - f / slope : -1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    u = next;
  }
  throw Error(ErrorCode::NonConvergence, "h-function inversion did not converge in 200 iterations");
}

// ---------------------------------------------------------------------------
// Unrotated families. h0(u, v) = dC/dv, hinv0 inverts h0 in u.

struct StudentT {
  double rho, nu;
  boost::math::students_t_distribution<double> t_nu, t_nu1;
  StudentT(double r, double n) : rho(r), nu(n), t_nu(n), t_nu1(n + 1.0) {}
  double q(double u) const { return boost::math::quantile(t_nu, u); }
  double scale(double y) const { return std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0)); }
};

double frank_debye(double theta) {
  const double a = std::abs(theta);
  const double integral = stats::integrate(
      [](double t) { return t < 1e-12 ? 1.0 : t / std::expm1(t); }, 0.0, a, 8);
  return integral / a;
}

double frank_tau(double theta) {
  const double a = std::abs(theta);
  if (a < 1e-8) return 0.0;
  const double tau = 1.0 - 4.0 / a * (1.0 - frank_debye(a));
  return theta < 0.0 ? -tau : tau;
}

double joe_tau(double delta) {
  if (delta <= 1.0) return 0.0;
  // tau = 1 + 4 * int_0^1 phi(t)/phi'(t) dt, with s = 1 - t.
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto f = [delta](double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double sd = std::pow(s, delta);
    const double ratio = sd > 0.0 ? std::log1p(-sd) / sd : -1.0;
    return ratio * s * (1.0 - sd) / delta;
  };
  return 1.0 + 4.0 * integrator.integrate(f, 0.0, 1.0);
}

// Frank with theta > 0 written as sums of positive terms:
// den = exp(-th u) (1 - exp(-th v)) + exp(-th v) - exp(-th) = (1 - e^-th) - (1 - e^-th u)(1 - e^-th v).
// Negative theta follows from C_{-th}(u, v) = v - C_th(1 - u, v).
double frank_den(double th, double u, double v) {
  return -std::exp(-th * u) * std::expm1(-th * v) - std::exp(-th * v) * std::expm1(-th * (1.0 - v));
}

double frank_h(double th, double u, double v) {
  if (th < 0.0) return 1.0 - frank_h(-th, 1.0 - u, v);
  return -std::exp(-th * v) * std::expm1(-th * u) / frank_den(th, u, v);
}

double frank_hinv(double th, double w, double v) {
  if (th < 0.0) return 1.0 - frank_hinv(-th, 1.0 - w, v);
  const double ev = std::exp(-th * v);
  const double num = ev * (1.0 - w) + w * std::exp(-th);
  const double den = -w * std::expm1(-th * v) + ev;
  return (std::log(den) - std::log(num)) / th;
}

double frank_log_pdf(double th, double u, double v) {
  if (th < 0.0) return frank_log_pdf(-th, 1.0 - u, v);
  return std::log(th) + std::log(-std::expm1(-th)) - th * (u + v) - 2.0 * std::log(frank_den(th, u, v));
}

double frank_cdf(double th, double u, double v) {
  if (th < 0.0) return v - frank_cdf(-th, 1.0 - u, v);
  return -(std::log(frank_den(th, u, v)) - std::log(-std::expm1(-th))) / th;
}

double base_log_pdf(Family f, const std::vector<double>& p, double u, double v);

double base_h(Family f, const std::vector<double>& p, double u, double v) {
  switch (f) {
    case Family::Independence: return u;
    case Family::Gaussian: {
      const double rho = p[0];
      const double x = stats::norm_quantile(u), y = stats::norm_quantile(v);
      return stats::norm_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho));
    }
    case Family::StudentT: {
      const StudentT t(p[0], p[1]);
      const double x = t.q(u), y = t.q(v);
      return boost::math::cdf(t.t_nu1, (x - t.rho * y) / t.scale(y));
    }
    case Family::Clayton: {
      const double th = p[0];
      const double lu = std::log(u), lv = std::log(v);
      const double log_s = log_sum_exp_minus_one(-th * lu, -th * lv);
      return std::exp((-th - 1.0) * lv - (1.0 / th + 1.0) * log_s);
    }
    case Family::Gumbel: {
      const double d = p[0];
      const double x = -std::log(u), y = -std::log(v);
      const double log_s = log_sum_exp(d * std::log(x), d * std::log(y));
      const double a = std::exp(log_s / d);
      return std::exp(-a + (1.0 / d - 1.0) * log_s + (d - 1.0) * std::log(y) - std::log(v));
    }
    case Family::Frank: return frank_h(p[0], u, v);
    case Family::Joe: {
      const double d = p[0];
      const double lub = std::log1p(-u), lvb = std::log1p(-v);
      const double a = std::exp(d * lub), b = std::exp(d * lvb);
      const double s = a + b - a * b;
      return std::exp((1.0 / d - 1.0) * std::log(s) + (d - 1.0) * lvb) * (1.0 - a);
    }
  }
  return u;
}

double base_hinv(Family f, const std::vector<double>& p, double w, double v) {
  switch (f) {
    case Family::Independence: return w;
    case Family::Gaussian: {
      const double rho = p[0];
      return stats::norm_cdf(stats::norm_quantile(w) * std::sqrt(1.0 - rho * rho) + rho * stats::norm_quantile(v));
    }
    case Family::StudentT: {
      const StudentT t(p[0], p[1]);
      const double y = t.q(v);
      const double x = boost::math::quantile(t.t_nu1, w) * t.scale(y) + t.rho * y;
      return boost::math::cdf(t.t_nu, x);
    }
    case Family::Clayton: {
      const double th = p[0];
      const double b = -th * std::log(v);
      const double c = -th / (th + 1.0) * std::log(w);
      const double log_term = b + std::log(std::expm1(c) + std::exp(-b));
      return std::exp(-log_term / th);
    }
    case Family::Frank: return frank_hinv(p[0], w, v);
    case Family::Gumbel:
    case Family::Joe:
      return invert_increasing([&](double u) { return base_h(f, p, clamp_open(u), v); },
                               [&](double u) { return std::exp(base_log_pdf(f, p, clamp_open(u), v)); }, w);
  }
  return w;
}

double base_log_pdf(Family f, const std::vector<double>& p, double u, double v) {
  switch (f) {
    case Family::Independence: return 0.0;
    case Family::Gaussian: {
      const double rho = p[0];
      const double x = stats::norm_quantile(u), y = stats::norm_quantile(v);
      const double one_minus = 1.0 - rho * rho;
      return -0.5 * std::log(one_minus) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * one_minus);
    }
    case Family::StudentT: {
      const StudentT t(p[0], p[1]);
      const double nu = t.nu, rho = t.rho;
      const double x = t.q(u), y = t.q(v);
      const double one_minus = 1.0 - rho * rho;
      const double q = (x * x + y * y - 2.0 * rho * x * y) / (nu * one_minus);
      return std::lgamma((nu + 2.0) / 2.0) + std::lgamma(nu / 2.0) - 2.0 * std::lgamma((nu + 1.0) / 2.0) -
             0.5 * std::log(one_minus) - (nu + 2.0) / 2.0 * std::log1p(q) +
             (nu + 1.0) / 2.0 * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
    }
    case Family::Clayton: {
      const double th = p[0];
      const double lu = std::log(u), lv = std::log(v);
      const double log_s = log_sum_exp_minus_one(-th * lu, -th * lv);
      return std::log1p(th) + (-1.0 - th) * (lu + lv) - (1.0 / th + 2.0) * log_s;
    }
    case Family::Gumbel: {
      const double d = p[0];
      const double x = -std::log(u), y = -std::log(v);
      const double lx = std::log(x), ly = std::log(y);
      const double log_s = log_sum_exp(d * lx, d * ly);
      const double a = std::exp(log_s / d);
      return -a + x + y + (d - 1.0) * (lx + ly) + (1.0 / d - 2.0) * log_s + std::log(a + d - 1.0);
    }
    case Family::Frank: return frank_log_pdf(p[0], u, v);
    case Family::Joe: {
      const double d = p[0];
      const double lub = std::log1p(-u), lvb = std::log1p(-v);
      const double a = std::exp(d * lub), b = std::exp(d * lvb);
      const double s = a + b - a * b;
      return (1.0 / d - 2.0) * std::log(s) + (d - 1.0) * (lub + lvb) + std::log(d - 1.0 + s);
    }
  }
  return 0.0;
}

double base_cdf(Family f, const std::vector<double>& p, double u, double v) {
  switch (f) {
    case Family::Independence: return u * v;
    case Family::Gaussian:
      return stats::bvn_cdf(stats::norm_quantile(u), stats::norm_quantile(v), p[0]);
    case Family::StudentT: {
      // C(u, v) = int_0^v dC/dv(u, t) dt; the integrand is bounded by 1.
      boost::math::quadrature::tanh_sinh<double> integrator;
      return integrator.integrate([&](double t) { return base_h(f, p, u, clamp_open(t)); }, 0.0, v);
    }
    case Family::Clayton: {
      const double th = p[0];
      return std::exp(-log_sum_exp_minus_one(-th * std::log(u), -th * std::log(v)) / th);
    }
    case Family::Gumbel: {
      const double d = p[0];
      const double log_s = log_sum_exp(d * std::log(-std::log(u)), d * std::log(-std::log(v)));
      return std::exp(-std::exp(log_s / d));
    }
    case Family::Frank: return frank_cdf(p[0], u, v);
    case Family::Joe: {
      const double d = p[0];
      const double a = std::exp(d * std::log1p(-u)), b = std::exp(d * std::log1p(-v));
      return 1.0 - std::pow(a + b - a * b, 1.0 / d);
    }
  }
  return u * v;
}

bool frank_is_flat(Family f, const std::vector<double>& p) { return f == Family::Frank && std::abs(p[0]) < 1e-8; }

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(Family family) {
  switch (family) {
    case Family::Independence: return "independence";
    case Family::Gaussian: return "gaussian";
    case Family::StudentT: return "studentt";
    case Family::Clayton: return "clayton";
    case Family::Gumbel: return "gumbel";
    case Family::Frank: return "frank";
    case Family::Joe: return "joe";
  }
  return "independence";
}

Family family_from_string(const std::string& name) {
  for (Family f : all_families())
    if (to_string(f) == name) return f;
  if (name == "t" || name == "student-t" || name == "student") return Family::StudentT;
  if (name == "normal" || name == "gauss") return Family::Gaussian;
  throw Error(ErrorCode::InvalidArgument, "unknown copula family '" + name + "'");
}

const std::vector<Family>& all_families() {
  static const std::vector<Family> families{Family::Independence, Family::Gaussian, Family::StudentT, Family::Clayton,
                                            Family::Gumbel,       Family::Frank,    Family::Joe};
  return families;
}

int parameter_count(Family family) {
  switch (family) {
    case Family::Independence: return 0;
    case Family::StudentT: return 2;
    default: return 1;
  }
}

bool is_rotatable(Family family) {
  return family == Family::Clayton || family == Family::Gumbel || family == Family::Joe;
}

std::vector<int> rotations_for(Family family) {
  if (is_rotatable(family)) return {0, 90, 180, 270};
  return {0};
}

Bicop::Bicop(Family family, int rotation, std::vector<double> params)
    : family_(family), rotation_(rotation), params_(std::move(params)) {
  if (rotation != 0 && rotation != 90 && rotation != 180 && rotation != 270)
    throw Error(ErrorCode::InvalidArgument, "rotation must be 0, 90, 180 or 270");
  if (rotation != 0 && !is_rotatable(family))
    throw Error(ErrorCode::InvalidArgument, to_string(family) + " copula only supports rotation 0");
  if (static_cast<int>(params_.size()) != vinecls::parameter_count(family))
    throw Error(ErrorCode::InvalidArgument, "wrong parameter count for " + to_string(family));
  for (double x : params_)
    if (!std::isfinite(x)) throw Error(ErrorCode::ParameterOutOfRange, "non-finite copula parameter");
  auto fail = [&](const char* what) { throw Error(ErrorCode::ParameterOutOfRange, to_string(family) + ": " + what); };
  switch (family) {
    case Family::Independence: break;
    case Family::Gaussian:
      if (!(std::abs(params_[0]) < 1.0)) fail("rho must lie in (-1, 1)");
      break;
    case Family::StudentT:
      if (!(std::abs(params_[0]) < 1.0)) fail("rho must lie in (-1, 1)");
      if (!(params_[1] > 2.0 && params_[1] <= 1000.0)) fail("nu must lie in (2, 1000]");
      break;
    case Family::Clayton:
      if (!(params_[0] > 0.0 && params_[0] <= 100.0)) fail("theta must lie in (0, 100]");
      break;
    case Family::Gumbel:
    case Family::Joe:
      if (!(params_[0] >= 1.0 && params_[0] <= 100.0)) fail("delta must lie in [1, 100]");
      break;
    case Family::Frank:
      if (!(params_[0] != 0.0 && std::abs(params_[0]) <= 100.0)) fail("theta must be nonzero with |theta| <= 100");
      break;
  }
}

double Bicop::cdf(double u, double v) const {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return std::min(v, 1.0);
  if (v >= 1.0) return u;
  if (is_independence() || frank_is_flat(family_, params_)) return u * v;
  const double lo = std::max(0.0, u + v - 1.0), hi = std::min(u, v);
  double c = 0.0;
  switch (rotation_) {
    case 0: c = base_cdf(family_, params_, clamp_open(u), clamp_open(v)); break;
    case 90: c = v - base_cdf(family_, params_, clamp_open(1.0 - u), clamp_open(v)); break;
    case 180: c = u + v - 1.0 + base_cdf(family_, params_, clamp_open(1.0 - u), clamp_open(1.0 - v)); break;
    case 270: c = u - base_cdf(family_, params_, clamp_open(u), clamp_open(1.0 - v)); break;
  }
  return std::clamp(c, lo, hi);
}

double Bicop::log_pdf(double u, double v) const {
  if (is_independence() || frank_is_flat(family_, params_)) return 0.0;
  u = clamp_open(u);
  v = clamp_open(v);
  double l = 0.0;
  switch (rotation_) {
    case 0: l = base_log_pdf(family_, params_, u, v); break;
    case 90: l = base_log_pdf(family_, params_, clamp_open(1.0 - u), v); break;
    case 180: l = base_log_pdf(family_, params_, clamp_open(1.0 - u), clamp_open(1.0 - v)); break;
    case 270: l = base_log_pdf(family_, params_, u, clamp_open(1.0 - v)); break;
  }
  if (std::isnan(l)) return kLogFloor;
  return std::max(l, kLogFloor);
}

double Bicop::pdf(double u, double v) const { return std::exp(log_pdf(u, v)); }

double Bicop::hfunc(double u, double v, HDirection direction) const {
  if (is_independence() || frank_is_flat(family_, params_)) {
    return std::clamp(direction == HDirection::OneGivenTwo ? u : v, 0.0, 1.0);
  }
  // Boundary values of the free argument are exact.
  const double free = direction == HDirection::OneGivenTwo ? u : v;
  if (free <= 0.0) return 0.0;
  if (free >= 1.0) return 1.0;
  u = clamp_open(u);
  v = clamp_open(v);
  const double ub = clamp_open(1.0 - u), vb = clamp_open(1.0 - v);
  const auto h = [&](double a, double b) { return base_h(family_, params_, a, b); };
  double r = 0.0;
  if (direction == HDirection::OneGivenTwo) {
    switch (rotation_) {
      case 0: r = h(u, v); break;
      case 90: r = 1.0 - h(ub, v); break;
      case 180: r = 1.0 - h(ub, vb); break;
      case 270: r = h(u, vb); break;
    }
  } else {
    switch (rotation_) {
      case 0: r = h(v, u); break;
      case 90: r = h(v, ub); break;
      case 180: r = 1.0 - h(vb, ub); break;
      case 270: r = 1.0 - h(vb, u); break;
    }
  }
  if (std::isnan(r)) r = 0.5;
  return std::clamp(r, 0.0, 1.0);
}

double Bicop::hinv(double w, double cond, HDirection direction) const {
  if (is_independence() || frank_is_flat(family_, params_)) return w;
  w = clamp_open(w);
  cond = clamp_open(cond);
  const auto hi = [&](double a, double b) { return clamp_open(base_hinv(family_, params_, clamp_open(a), b)); };
  const double cb = clamp_open(1.0 - cond);
  if (direction == HDirection::OneGivenTwo) {
    switch (rotation_) {
      case 0: return hi(w, cond);
      case 90: return 1.0 - hi(1.0 - w, cond);
      case 180: return 1.0 - hi(1.0 - w, cb);
      case 270: return hi(w, cb);
    }
  } else {
    switch (rotation_) {
      case 0: return hi(w, cond);
      case 90: return hi(w, cb);
      case 180: return 1.0 - hi(1.0 - w, cb);
      case 270: return 1.0 - hi(1.0 - w, cond);
    }
  }
  return w;
}

double param_to_tau(Family family, int rotation, std::span<const double> params) {
  double tau = 0.0;
  switch (family) {
    case Family::Independence: tau = 0.0; break;
    case Family::Gaussian:
    case Family::StudentT: tau = 2.0 / std::numbers::pi * std::asin(params[0]); break;
    case Family::Clayton: tau = params[0] / (params[0] + 2.0); break;
    case Family::Gumbel: tau = 1.0 - 1.0 / params[0]; break;
    case Family::Frank: tau = frank_tau(params[0]); break;
    case Family::Joe: tau = joe_tau(params[0]); break;
  }
  return (rotation == 90 || rotation == 270) ? -tau : tau;
}

double Bicop::tau() const { return param_to_tau(family_, rotation_, params_); }

bool tau_admissible(Family family, int rotation, double tau) {
  if (!(std::abs(tau) < 1.0)) return false;
  if (family == Family::Independence) return true;
  if (!is_rotatable(family)) return true;
  return (rotation == 0 || rotation == 180) ? tau > 0.0 : tau < 0.0;
}

namespace {

// Bisection on a monotone increasing tau(theta) over [lo, hi].
double invert_tau(const std::function<double(double)>& tau_of, double target, double lo, double hi) {
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (tau_of(mid) < target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> tau_to_param(Family family, int rotation, double tau, double nu) {
  if (family == Family::Independence) {
    if (tau != 0.0) throw Error(ErrorCode::TauUnattainable, "independence copula has tau = 0");
    return {};
  }
  const bool flipped = rotation == 90 || rotation == 270;
  const double t = flipped ? -tau : tau;
  auto unattainable = [&] {
    throw Error(ErrorCode::TauUnattainable,
                "tau " + std::to_string(tau) + " unattainable for " + to_string(family) + " rotation " + std::to_string(rotation));
  };
  if (!(std::abs(t) < 1.0)) unattainable();
  switch (family) {
    case Family::Gaussian: return {std::sin(std::numbers::pi * t / 2.0)};
    case Family::StudentT: return {std::sin(std::numbers::pi * t / 2.0), nu};
    case Family::Clayton:
      if (!(t > 0.0)) unattainable();
      return {2.0 * t / (1.0 - t)};
    case Family::Gumbel:
      if (!(t > 0.0)) unattainable();
      return {1.0 / (1.0 - t)};
    case Family::Frank: {
      if (t == 0.0 || std::abs(t) > frank_tau(100.0)) unattainable();
      const double theta = invert_tau(frank_tau, std::abs(t), 1e-8, 100.0);
      return {t < 0.0 ? -theta : theta};
    }
    case Family::Joe: {
      if (!(t > 0.0) || t > joe_tau(100.0)) unattainable();
      return {invert_tau(joe_tau, t, 1.0, 100.0)};
    }
    case Family::Independence: break;
  }
  return {};
}

std::vector<std::pair<double, double>> Bicop::sample(std::size_t n, std::uint64_t seed) const {
  constexpr std::size_t kBlock = 4096;
  std::vector<std::pair<double, double>> out(n);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    Rng rng(seed, b);
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const double u = rng.uniform();
      const double w = rng.uniform();
      out[i] = {u, hinv(w, u, HDirection::TwoGivenOne)};
    }
  });
  return out;
}

double Bicop::spearman_rho(std::size_t samples, std::uint64_t seed) const {
  if (is_independence()) return 0.0;
  const auto draws = sample(samples, seed);
  std::vector<double> u(samples), v(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    u[i] = draws[i].first;
    v[i] = draws[i].second;
  }
  return stats::spearman(u, v);
}

double Bicop::contribution(const PseudoObs& obs) const {
  const auto& [u, v] = obs;
  if (!u.discrete && !v.discrete) return pdf(u.plus, v.plus);
  if (!u.discrete && v.discrete)
    return hfunc(u.plus, v.plus, HDirection::TwoGivenOne) - hfunc(u.plus, v.minus, HDirection::TwoGivenOne);
  if (u.discrete && !v.discrete)
    return hfunc(u.plus, v.plus, HDirection::OneGivenTwo) - hfunc(u.minus, v.plus, HDirection::OneGivenTwo);
  return cdf(u.plus, v.plus) - cdf(u.plus, v.minus) - cdf(u.minus, v.plus) + cdf(u.minus, v.minus);
}

double Bicop::log_term(const PseudoObs& obs) const {
  if (is_independence()) return 0.0;
  if (!obs.u.discrete && !obs.v.discrete) return log_pdf(obs.u.plus, obs.v.plus);
  double log_mass = 0.0;
  if (obs.u.discrete) log_mass += std::log(std::max(obs.u.plus - obs.u.minus, kFloor));
  if (obs.v.discrete) log_mass += std::log(std::max(obs.v.plus - obs.v.minus, kFloor));
  return std::log(std::max(contribution(obs), kFloor)) - log_mass;
}

double Bicop::loglik(std::span<const PseudoObs> obs) const {
  double total = 0.0;
  for (const auto& o : obs) {
    const double c = contribution(o);
    total += (o.u.discrete || o.v.discrete) ? std::log(std::max(c, kFloor)) : log_pdf(o.u.plus, o.v.plus);
  }
  return total;
}

std::string Bicop::label() const {
  static const char* codes[] = {"I", "N", "T", "C", "G", "F", "J"};
  const std::string code = codes[static_cast<int>(family_)];
  if (is_independence()) return code;
  std::string name = code;
  if (rotation_ == 180) name = "S" + code;
  if (rotation_ == 90 || rotation_ == 270) name = "R" + code + std::to_string(rotation_);
  name += "(";
  for (std::size_t i = 0; i < params_.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", params_[i]);
    name += (i ? "," : "") + std::string(buf);
  }
  return name + ")";
}

nlohmann::json Bicop::to_json() const {
  return {{"family", to_string(family_)}, {"rotation", rotation_}, {"params", params_}};
}

Bicop Bicop::from_json(const nlohmann::json& j) {
  return Bicop(family_from_string(j.at("family").get<std::string>()), j.value("rotation", 0),
               j.value("params", std::vector<double>{}));
}

double empirical_tau(std::span<const PseudoObs> obs) {
  std::vector<double> u(obs.size()), v(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    u[i] = obs[i].u.plus;
    v[i] = obs[i].v.plus;
  }
  return stats::kendall_tau(u, v);
}

BicopFit bicop_fit(Family family, int rotation, std::span<const PseudoObs> obs) {
  if (obs.size() < 10) throw Error(ErrorCode::TooFewObservations, "pair-copula fit needs at least 10 observations");
  if (family == Family::Independence) return {Bicop(), Bicop().loglik(obs)};

  const double tau = empirical_tau(obs);
  if (!tau_admissible(family, rotation, tau))
    throw Error(ErrorCode::TauUnattainable, "empirical tau " + std::to_string(tau) + " inadmissible for " +
                                                to_string(family) + " rotation " + std::to_string(rotation));
  const double sign = tau < 0.0 ? -1.0 : 1.0;
  const double start_tau = sign * std::clamp(std::abs(tau), 1e-3, 0.9);
  const Bicop start(family, rotation, tau_to_param(family, rotation, start_tau));
  const double start_ll = start.loglik(obs);

  auto neg_ll = [&](std::vector<double> params) {
    try {
      return -Bicop(family, rotation, std::move(params)).loglik(obs);
    } catch (const Error&) {
      return std::numeric_limits<double>::max();
    }
  };

  Bicop best = start;
  double best_ll = start_ll;
  const bool all_continuous =
      std::all_of(obs.begin(), obs.end(), [](const PseudoObs& o) { return !o.u.discrete && !o.v.discrete; });
  if (family == Family::StudentT && all_continuous) {
    // Profile over nu: quantiles are computed once per nu, rho by Brent.
    const std::size_t n = obs.size();
    std::vector<double> x(n), y(n), marg(n);
    auto profile = [&](double nu, double* rho_out) {
      const boost::math::students_t_distribution<double> dist(nu);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = boost::math::quantile(dist, clamp_open(obs[i].u.plus));
        y[i] = boost::math::quantile(dist, clamp_open(obs[i].v.plus));
        marg[i] = (nu + 1.0) / 2.0 * (std::log1p(x[i] * x[i] / nu) + std::log1p(y[i] * y[i] / nu));
      }
      const double c0 = std::lgamma((nu + 2.0) / 2.0) + std::lgamma(nu / 2.0) - 2.0 * std::lgamma((nu + 1.0) / 2.0);
      auto neg = [&](double rho) {
        const double one_minus = 1.0 - rho * rho;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double q = (x[i] * x[i] + y[i] * y[i] - 2.0 * rho * x[i] * y[i]) / (nu * one_minus);
          total += std::max(c0 - 0.5 * std::log(one_minus) - (nu + 2.0) / 2.0 * std::log1p(q) + marg[i], kLogFloor);
        }
        return -total;
      };
      const auto [rho, value] = stats::brent_minimize(neg, -0.999, 0.999, 30);
      if (rho_out) *rho_out = rho;
      return value;
    };
    const auto [log_nu, value] =
        stats::brent_minimize([&](double z) { return profile(2.05 + std::exp(z), nullptr); }, std::log(0.05),
                              std::log(47.95), 20);
    double rho = 0.0;
    const double nu = 2.05 + std::exp(log_nu);
    profile(nu, &rho);
    const Bicop candidate(family, rotation, {rho, nu});
    const double ll = candidate.loglik(obs);
    if (ll > best_ll) {
      best = candidate;
      best_ll = ll;
    }
  } else if (family == Family::StudentT) {
    auto to_params = [](const std::vector<double>& z) {
      return std::vector<double>{std::tanh(z[0]), 2.05 + std::min(std::exp(z[1]), 47.95)};
    };
    const auto [z, value] = stats::nelder_mead([&](const std::vector<double>& z) { return neg_ll(to_params(z)); },
                                               {std::atanh(start.params()[0]), std::log(start.params()[1] - 2.05)},
                                               {0.1, 0.5});
    if (-value > best_ll) {
      best = Bicop(family, rotation, to_params(z));
      best_ll = -value;
    }
  } else {
    double lo = 0.0, hi = 0.0;
    switch (family) {
      case Family::Gaussian: lo = -0.999; hi = 0.999; break;
      case Family::Clayton: lo = 1e-4; hi = 50.0; break;
      case Family::Gumbel:
      case Family::Joe: lo = 1.0; hi = 50.0; break;
      case Family::Frank:
        lo = sign > 0 ? 1e-4 : -60.0;
        hi = sign > 0 ? 60.0 : -1e-4;
        break;
      default: break;
    }
    const auto [x, value] = stats::brent_minimize([&](double p) { return neg_ll({p}); }, lo, hi, 30);
    if (-value > best_ll) {
      best = Bicop(family, rotation, {x});
      best_ll = -value;
    }
  }
  return {best, best_ll};
}

}  // namespace vinecls
