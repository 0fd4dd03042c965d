#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vinecls/data.hpp"
#include "vinecls/margins.hpp"
#include "vinecls/vine.hpp"

namespace vinecls {

enum class PriorMode { Equal, Empirical };
PriorMode prior_mode_from_string(const std::string& name);
std::string to_string(PriorMode mode);

struct ClassifierConfig {
  MarginMethod continuous_margin = MarginMethod::Kernel;
  VineFitOptions vine;
  /// Per-class family candidates replacing `vine.candidates` (and forcing rotation 0
  /// when `oracle` is set).
  std::map<int, std::vector<Family>> class_candidates;
  bool oracle = false;
  PriorMode priors = PriorMode::Equal;
};

/// Generative classifier: one vine (with its own margins) per class and class priors.
class ClassifierModel {
 public:
  ClassifierModel() = default;
  ClassifierModel(std::vector<int> classes, std::vector<VineModel> vines, std::vector<double> priors);

  const std::vector<int>& classes() const { return classes_; }
  const std::vector<VineModel>& vines() const { return vines_; }
  const VineModel& vine_for(int label) const;
  const std::vector<double>& priors() const { return priors_; }
  std::size_t class_index(int label) const;
  const std::vector<VariableSpec>& schema() const { return vines_.front().schema(); }

  /// Class-conditional log densities, floored at kMinLogDensity.
  std::vector<double> log_densities(std::span<const double> row) const;
  std::vector<double> posterior(std::span<const double> row) const;
  /// Posterior rows (one vector of class probabilities per data row).
  std::vector<std::vector<double>> posterior(const Dataset& data) const;

  nlohmann::json to_json() const;
  static ClassifierModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static ClassifierModel load(const std::string& path);

 private:
  std::vector<int> classes_;
  std::vector<VineModel> vines_;
  std::vector<double> priors_;
};

inline constexpr double kMinLogDensity = -1.0e6;

ClassifierModel fit_classifier(const Dataset& train, const ClassifierConfig& config = {});

/// Bayes' rule with log-sum-exp stabilization.
std::vector<double> bayes_posterior(std::span<const double> priors, std::span<const double> log_densities);

struct NllResult {
  std::vector<std::optional<double>> per_class;  ///< mean over the class; empty if absent
  std::vector<double> per_class_sum;
  std::vector<std::size_t> counts;
  double overall_sum = 0.0;
  double overall_mean = 0.0;
};

/// probs[i][j] is the probability of class label j for row i; labels are 0..K-1.
NllResult per_class_nll(const std::vector<std::vector<double>>& probs, std::span<const int> labels);
std::vector<std::optional<double>> per_class_brier(const std::vector<std::vector<double>>& probs,
                                                   std::span<const int> labels);
/// Mann-Whitney AUC of `scores` for the positive label, midranks for ties.
double auc(std::span<const double> scores, std::span<const int> labels, int positive = 1);

enum class RiskGroup { Low, Moderate, High };
std::string to_string(RiskGroup group);

struct RiskPolicy {
  double alpha = 0.25;
  int adverse_class = 1;

  void validate() const;
};

/// low if p <= alpha, high if p >= 1 - alpha, moderate otherwise.
RiskGroup assign_risk_group(double p_adverse, const RiskPolicy& policy);
std::vector<RiskGroup> assign_risk_groups(std::span<const double> p_adverse, const RiskPolicy& policy);

struct RiskGroupRow {
  double alpha = 0.0;
  RiskGroup group = RiskGroup::Low;
  std::size_t n = 0;
  std::vector<std::size_t> class_counts;
  std::optional<double> aux_mean;
  std::optional<double> aux_sd;
};

std::vector<RiskGroupRow> risk_group_report(std::span<const RiskGroup> groups, std::span<const int> labels,
                                            std::optional<std::span<const double>> aux, double alpha,
                                            int class_count = 2);
/// Three rows (low, moderate, high) per alpha.
std::vector<RiskGroupRow> risk_group_table(std::span<const double> p_adverse, std::span<const int> labels,
                                           std::optional<std::span<const double>> aux,
                                           const std::vector<double>& alphas, int class_count = 2);
std::string risk_group_csv(const std::vector<RiskGroupRow>& rows, const std::string& aux_name = "aux");

/// row, p<class>..., y (if labels), aux (if given), group_<alpha>...
std::string predictions_csv(const std::vector<std::vector<double>>& probs, const std::vector<int>& classes,
                            const std::optional<std::vector<int>>& labels, const std::vector<double>& alphas,
                            int adverse_class = 1,
                            const std::optional<std::vector<double>>& aux = std::nullopt);

struct MetricRow {
  std::string split;
  std::string metric;
  std::string cls;  ///< class label or "all"
  std::optional<double> value;
};

/// Brier and nll per class, overall nll (sum and mean) and AUC for one split.
std::vector<MetricRow> evaluate_split(const std::vector<std::vector<double>>& probs, std::span<const int> labels,
                                      const std::string& split, int adverse_class = 1);
std::string metrics_csv(const std::vector<MetricRow>& rows);

}  // namespace vinecls
