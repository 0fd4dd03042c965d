#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vinecls/vine.hpp"

namespace vinecls {

/// Spearman's rho of (x, y) within each level 1..levels of z. Levels with
/// fewer than 3 rows are absent.
std::vector<std::optional<double>> conditional_spearman(std::span<const double> x, std::span<const double> y,
                                                        std::span<const double> z, int levels);

struct CategoryRho {
  int level = 0;
  std::size_t n = 0;
  std::optional<double> observed;
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<double> modeled;
};

struct ConditionalRhoResult {
  std::vector<CategoryRho> categories;
  double level = 0.90;
  int replicates = 1000;
};

/// Percentile bootstrap bands of the conditional Spearman's rho (rows resampled
/// with replacement, replicate b drawing from stream b of `seed`).
ConditionalRhoResult bootstrap_bands(std::span<const double> x, std::span<const double> y, std::span<const double> z,
                                     int levels, int replicates = 1000, double level = 0.90,
                                     std::uint64_t seed = 1);

/// Locates a fitted edge by its "ab;S" label (1-based indices, e.g. "23;1").
std::pair<int, int> find_edge(const VineModel& model, const std::string& label);

/// Spearman's rho of the edge copula by seeded Monte Carlo. Under the simplifying
/// assumption the value is the same for every category of the conditioning variable.
double model_conditional_spearman(const VineModel& model, int tree, int edge, int category = 0,
                                  std::size_t samples = 100000, std::uint64_t seed = 20240607);

/// Attaches model-implied values to every category of a bootstrap result.
void attach_model_spearman(ConditionalRhoResult& result, const VineModel& model, int tree, int edge,
                           std::uint64_t seed = 20240607);

struct LatentScores {
  std::vector<double> continuous;  ///< normal scores of x
  std::vector<double> latent;      ///< truncated-normal latent draws for k
  double rho = 0.0;                ///< polyserial correlation used
};

/// Latent normal scores for a continuous-ordinal pair.
LatentScores latent_normal_scores(std::span<const double> x, std::span<const double> k, int levels,
                                  std::uint64_t seed = 1);

std::string conditional_rho_csv(const ConditionalRhoResult& result);
std::string latent_scores_csv(const LatentScores& scores);

}  // namespace vinecls
