#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace vinecls::stats {

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double norm_quantile(double p);

/// P(X <= x, Y <= y) for a standard bivariate normal with correlation rho.
/// Drezner–Wesolowsky/Genz quadrature; absolute error below 1e-14.
double bvn_cdf(double x, double y, double rho);

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

/// Integrates f over [a, b] with composite Gauss–Legendre (panels x 20 points).
double integrate(const std::function<double(double)>& f, double a, double b, int panels = 16);

/// Midranks (1-based) with ties averaged.
std::vector<double> midranks(std::span<const double> x);

double mean(std::span<const double> x);
/// Sample standard deviation with the n-1 denominator.
double sample_sd(std::span<const double> x);
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);
/// Kendall's tau-b in O(n log n).
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Type-7 quantile of a sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);

/// Minimizes f on [lo, hi] with Brent's method; returns (argmin, min).
std::pair<double, double> brent_minimize(const std::function<double(double)>& f, double lo, double hi,
                                         int bits = 40, std::uintmax_t max_iter = 200);

/// Nelder–Mead simplex minimization of f starting at x0 with initial step sizes.
std::pair<std::vector<double>, double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                                   std::vector<double> x0, std::vector<double> step,
                                                   int max_iter = 400, double ftol = 1e-9);

}  // namespace vinecls::stats
