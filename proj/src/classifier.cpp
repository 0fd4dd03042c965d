#include "vinecls/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "vinecls/error.hpp"
#include "vinecls/latent_corr.hpp"
#include "vinecls/stats.hpp"

namespace vinecls {

namespace {

constexpr double kProbFloor = 1e-300;

double floor_log_density(double l) { return std::isfinite(l) ? std::max(l, kMinLogDensity) : kMinLogDensity; }

void check_scored(const std::vector<std::vector<double>>& probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) throw Error(ErrorCode::InvalidArgument, "probabilities and labels differ in length");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= probs[i].size())
      throw Error(ErrorCode::InvalidArgument, "label outside the probability columns at row " + std::to_string(i));
  }
}

std::size_t class_count_of(const std::vector<std::vector<double>>& probs) { return probs.empty() ? 2 : probs.front().size(); }

}  // namespace

PriorMode prior_mode_from_string(const std::string& name) {
  if (name == "equal") return PriorMode::Equal;
  if (name == "empirical") return PriorMode::Empirical;
  throw Error(ErrorCode::InvalidArgument, "unknown prior mode '" + name + "'");
}

std::string to_string(PriorMode mode) { return mode == PriorMode::Equal ? "equal" : "empirical"; }

ClassifierModel::ClassifierModel(std::vector<int> classes, std::vector<VineModel> vines, std::vector<double> priors)
    : classes_(std::move(classes)), vines_(std::move(vines)), priors_(std::move(priors)) {
  if (classes_.empty() || classes_.size() != vines_.size() || classes_.size() != priors_.size())
    throw Error(ErrorCode::InvalidArgument, "classifier needs one vine and one prior per class");
  double total = 0.0;
  for (double p : priors_) {
    if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "priors must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "priors must sum to 1");
  for (const auto& v : vines_)
    if (v.dims() != vines_.front().dims()) throw Error(ErrorCode::SchemaMismatch, "class vines differ in dimension");
}

std::size_t ClassifierModel::class_index(int label) const {
  const auto it = std::find(classes_.begin(), classes_.end(), label);
  if (it == classes_.end()) throw Error(ErrorCode::InvalidArgument, "unknown class " + std::to_string(label));
  return static_cast<std::size_t>(it - classes_.begin());
}

const VineModel& ClassifierModel::vine_for(int label) const { return vines_[class_index(label)]; }

std::vector<double> ClassifierModel::log_densities(std::span<const double> row) const {
  if (row.size() != schema().size()) throw Error(ErrorCode::SchemaMismatch, "row width differs from the model schema");
  std::vector<double> out(vines_.size());
  for (std::size_t k = 0; k < vines_.size(); ++k) out[k] = floor_log_density(vines_[k].log_density(row));
  return out;
}

std::vector<double> ClassifierModel::posterior(std::span<const double> row) const {
  return bayes_posterior(priors_, log_densities(row));
}

std::vector<std::vector<double>> ClassifierModel::posterior(const Dataset& data) const {
  if (data.dims() != schema().size()) throw Error(ErrorCode::SchemaMismatch, "dataset width differs from the model schema");
  for (std::size_t j = 0; j < data.dims(); ++j) {
    if (data.schema[j].name != schema()[j].name || data.schema[j].kind != schema()[j].kind)
      throw Error(ErrorCode::SchemaMismatch, "variable '" + data.schema[j].name + "' does not match the model schema");
  }
  std::vector<std::vector<double>> logf(vines_.size());
  for (std::size_t k = 0; k < vines_.size(); ++k) logf[k] = vines_[k].log_density(data.columns);
  std::vector<std::vector<double>> out(data.rows());
  std::vector<double> row_logf(vines_.size());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t k = 0; k < vines_.size(); ++k) row_logf[k] = floor_log_density(logf[k][i]);
    out[i] = bayes_posterior(priors_, row_logf);
  }
  return out;
}

nlohmann::json ClassifierModel::to_json() const {
  nlohmann::json j;
  j["format"] = "vinecls-classifier";
  j["version"] = 1;
  j["classes"] = classes_;
  j["priors"] = priors_;
  j["vines"] = nlohmann::json::array();
  for (const auto& v : vines_) j["vines"].push_back(v.to_json());
  return j;
}

ClassifierModel ClassifierModel::from_json(const nlohmann::json& j) {
  try {
    std::vector<VineModel> vines;
    for (const auto& jv : j.at("vines")) vines.push_back(VineModel::from_json(jv));
    return ClassifierModel(j.at("classes").get<std::vector<int>>(), std::move(vines),
                           j.at("priors").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed model JSON: ") + e.what());
  }
}

void ClassifierModel::save(const std::string& path) const { write_text_file(path, to_json().dump(2) + "\n"); }

ClassifierModel ClassifierModel::load(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed model JSON: ") + e.what());
  }
  return from_json(j);
}

ClassifierModel fit_classifier(const Dataset& train, const ClassifierConfig& config) {
  const auto split = split_by_class(train);
  std::vector<int> classes;
  for (const auto& [cls, idx] : split.row_indices)
    if (!idx.empty()) classes.push_back(cls);
  if (classes.size() < 2) throw Error(ErrorCode::DegenerateLabels, "training data contain a single class");
  for (int cls : classes) {
    if (split.row_indices.at(cls).size() < 10)
      throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(cls) + " has fewer than 10 rows");
  }

  std::vector<VineModel> vines;
  std::vector<double> priors;
  for (int cls : classes) {
    const Dataset& data = split.by_class.at(cls);
    std::vector<MarginModel> margins;
    for (std::size_t j = 0; j < data.dims(); ++j) {
      const auto& spec = data.schema[j];
      margins.push_back(fit_margin(data.columns[j], spec, spec.is_ordinal() ? MarginMethod::Categorical
                                                                             : config.continuous_margin));
    }
    const auto latent = latent_matrix(data);
    const auto structure = select_structure(latent.values);
    VineFitOptions options = config.vine;
    if (auto it = config.class_candidates.find(cls); it != config.class_candidates.end()) options.candidates = it->second;
    if (config.oracle) options.rotations = {0};
    vines.push_back(fit_vine(data, margins, structure, options));
    priors.push_back(config.priors == PriorMode::Equal
                         ? 1.0 / static_cast<double>(classes.size())
                         : static_cast<double>(data.rows()) / static_cast<double>(train.rows()));
  }
  return ClassifierModel(std::move(classes), std::move(vines), std::move(priors));
}

std::vector<double> bayes_posterior(std::span<const double> priors, std::span<const double> log_densities) {
  if (priors.size() != log_densities.size() || priors.empty())
    throw Error(ErrorCode::InvalidArgument, "priors and densities differ in length");
  std::vector<double> terms(priors.size());
  for (std::size_t k = 0; k < priors.size(); ++k) terms[k] = std::log(priors[k]) + floor_log_density(log_densities[k]);
  const double top = *std::max_element(terms.begin(), terms.end());
  double total = 0.0;
  for (auto& t : terms) {
    t = std::exp(t - top);
    total += t;
  }
  for (auto& t : terms) t /= total;
  return terms;
}

NllResult per_class_nll(const std::vector<std::vector<double>>& probs, std::span<const int> labels) {
  check_scored(probs, labels);
  const std::size_t k = class_count_of(probs);
  NllResult r;
  r.per_class.assign(k, std::nullopt);
  r.per_class_sum.assign(k, 0.0);
  r.counts.assign(k, 0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto j = static_cast<std::size_t>(labels[i]);
    r.per_class_sum[j] -= std::log(std::max(probs[i][j], kProbFloor));
    ++r.counts[j];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (r.counts[j] > 0) r.per_class[j] = r.per_class_sum[j] / static_cast<double>(r.counts[j]);
    r.overall_sum += r.per_class_sum[j];
  }
  r.overall_mean = probs.empty() ? 0.0 : r.overall_sum / static_cast<double>(probs.size());
  return r;
}

std::vector<std::optional<double>> per_class_brier(const std::vector<std::vector<double>>& probs,
                                                   std::span<const int> labels) {
  check_scored(probs, labels);
  const std::size_t k = class_count_of(probs);
  std::vector<std::optional<double>> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (static_cast<std::size_t>(labels[i]) != j) continue;
      const double p = probs[i][j];
      const double hit = static_cast<std::size_t>(labels[i]) == j ? 1.0 : 0.0;
      sum += hit * (1.0 - p) * (1.0 - p) + (1.0 - hit) * p * p;
      ++n;
    }
    if (n > 0) out[j] = sum / static_cast<double>(n);
  }
  return out;
}

double auc(std::span<const double> scores, std::span<const int> labels, int positive) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::InvalidArgument, "scores and labels differ in length");
  const auto ranks = stats::midranks(scores);
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == positive) {
      rank_sum += ranks[i];
      ++n_pos;
    }
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorCode::DegenerateLabels, "AUC needs both classes");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

std::string to_string(RiskGroup group) {
  switch (group) {
    case RiskGroup::Low: return "low";
    case RiskGroup::Moderate: return "moderate";
    case RiskGroup::High: return "high";
  }
  return "moderate";
}

void RiskPolicy::validate() const {
  if (!(alpha > 0.0 && alpha < 0.5)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 0.5)");
}

RiskGroup assign_risk_group(double p_adverse, const RiskPolicy& policy) {
  if (p_adverse <= policy.alpha) return RiskGroup::Low;
  if (p_adverse >= 1.0 - policy.alpha) return RiskGroup::High;
  return RiskGroup::Moderate;
}

std::vector<RiskGroup> assign_risk_groups(std::span<const double> p_adverse, const RiskPolicy& policy) {
  policy.validate();
  std::vector<RiskGroup> out(p_adverse.size());
  for (std::size_t i = 0; i < p_adverse.size(); ++i) {
    if (!(p_adverse[i] >= 0.0 && p_adverse[i] <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "probability outside [0,1] at row " + std::to_string(i));
    out[i] = assign_risk_group(p_adverse[i], policy);
  }
  return out;
}

std::vector<RiskGroupRow> risk_group_report(std::span<const RiskGroup> groups, std::span<const int> labels,
                                            std::optional<std::span<const double>> aux, double alpha,
                                            int class_count) {
  if (groups.size() != labels.size() || (aux && aux->size() != groups.size()))
    throw Error(ErrorCode::InvalidArgument, "groups, labels and aux differ in length");
  std::vector<RiskGroupRow> rows;
  for (RiskGroup g : {RiskGroup::Low, RiskGroup::Moderate, RiskGroup::High}) {
    RiskGroupRow row;
    row.alpha = alpha;
    row.group = g;
    row.class_counts.assign(static_cast<std::size_t>(class_count), 0);
    std::vector<double> values;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (groups[i] != g) continue;
      ++row.n;
      if (labels[i] >= 0 && labels[i] < class_count) ++row.class_counts[static_cast<std::size_t>(labels[i])];
      if (aux) values.push_back((*aux)[i]);
    }
    if (!values.empty()) row.aux_mean = stats::mean(values);
    if (values.size() >= 2) row.aux_sd = stats::sample_sd(values);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RiskGroupRow> risk_group_table(std::span<const double> p_adverse, std::span<const int> labels,
                                           std::optional<std::span<const double>> aux,
                                           const std::vector<double>& alphas, int class_count) {
  std::vector<RiskGroupRow> out;
  for (double alpha : alphas) {
    const auto groups = assign_risk_groups(p_adverse, RiskPolicy{alpha, 1});
    auto rows = risk_group_report(groups, labels, aux, alpha, class_count);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

std::string risk_group_csv(const std::vector<RiskGroupRow>& rows, const std::string& aux_name) {
  std::ostringstream out;
  const std::size_t k = rows.empty() ? 2 : rows.front().class_counts.size();
  out << "alpha,group,n";
  for (std::size_t j = 0; j < k; ++j) out << ",class" << j;
  out << "," << aux_name << "_mean," << aux_name << "_sd\n";
  for (const auto& r : rows) {
    out << format_number(r.alpha) << "," << to_string(r.group) << "," << r.n;
    for (auto c : r.class_counts) out << "," << c;
    out << "," << (r.aux_mean ? format_number(*r.aux_mean) : "NA") << ","
        << (r.aux_sd ? format_number(*r.aux_sd) : "NA") << "\n";
  }
  return out.str();
}

std::string predictions_csv(const std::vector<std::vector<double>>& probs, const std::vector<int>& classes,
                            const std::optional<std::vector<int>>& labels, const std::vector<double>& alphas,
                            int adverse_class, const std::optional<std::vector<double>>& aux) {
  const auto adverse = static_cast<std::size_t>(std::find(classes.begin(), classes.end(), adverse_class) - classes.begin());
  if (adverse >= classes.size()) throw Error(ErrorCode::InvalidArgument, "adverse class not among the model classes");
  for (double a : alphas) RiskPolicy{a, adverse_class}.validate();
  std::ostringstream out;
  out << "row";
  for (int c : classes) out << ",p" << c;
  if (labels) out << ",y";
  if (aux) out << ",aux";
  for (double a : alphas) out << ",group_" << format_number(a);
  out << "\n";
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out << i;
    for (double p : probs[i]) out << "," << format_number(p);
    if (labels) out << "," << (*labels)[i];
    if (aux) out << "," << format_number((*aux)[i]);
    for (double a : alphas) out << "," << to_string(assign_risk_group(probs[i][adverse], RiskPolicy{a, adverse_class}));
    out << "\n";
  }
  return out.str();
}

std::vector<MetricRow> evaluate_split(const std::vector<std::vector<double>>& probs, std::span<const int> labels,
                                      const std::string& split, int adverse_class) {
  std::vector<MetricRow> rows;
  const auto brier = per_class_brier(probs, labels);
  const auto nll = per_class_nll(probs, labels);
  for (std::size_t j = 0; j < brier.size(); ++j) rows.push_back({split, "brier", std::to_string(j), brier[j]});
  for (std::size_t j = 0; j < nll.per_class.size(); ++j) rows.push_back({split, "nll", std::to_string(j), nll.per_class[j]});
  rows.push_back({split, "nll_sum", "all", nll.overall_sum});
  rows.push_back({split, "nll_mean", "all", nll.overall_mean});
  std::vector<double> scores(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) scores[i] = probs[i][static_cast<std::size_t>(adverse_class)];
  std::optional<double> a;
  try {
    a = auc(scores, labels, adverse_class);
  } catch (const Error&) {
  }
  rows.push_back({split, "auc", "all", a});
  return rows;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::ostringstream out;
  out << "split,metric,class,value\n";
  for (const auto& r : rows)
    out << r.split << "," << r.metric << "," << r.cls << "," << (r.value ? format_number(*r.value) : "NA") << "\n";
  return out.str();
}

}  // namespace vinecls
