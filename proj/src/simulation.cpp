#include "vinecls/simulation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>

#include "vinecls/bicop.hpp"
#include "vinecls/error.hpp"
#include "vinecls/parallel.hpp"
#include "vinecls/random.hpp"
#include "vinecls/stats.hpp"

namespace vinecls {

namespace {

constexpr double kRidgePenalty = 1e-6;

struct Design {
  Eigen::MatrixXd x;  // intercept column first
  Eigen::VectorXd y;
  Eigen::VectorXd w;
  std::vector<double> class_weights;
};

Design make_design(const Dataset& train) {
  if (!train.labels) throw Error(ErrorCode::LabelsAbsent, "logistic regression needs labels");
  const auto n = static_cast<Eigen::Index>(train.rows());
  const auto d = static_cast<Eigen::Index>(train.dims());
  Design des;
  des.x.resize(n, d + 1);
  des.y.resize(n);
  des.w.resize(n);
  double counts[2] = {0.0, 0.0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = (*train.labels)[static_cast<std::size_t>(i)];
    counts[label] += 1.0;
    des.y(i) = label;
    des.x(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < d; ++j) des.x(i, j + 1) = train.columns[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  }
  if (counts[0] == 0.0 || counts[1] == 0.0) throw Error(ErrorCode::DegenerateLabels, "logistic regression needs two classes");
  const double scale = static_cast<double>(n) / 2.0;
  des.class_weights = {scale / counts[0], scale / counts[1]};
  for (Eigen::Index i = 0; i < n; ++i) des.w(i) = des.class_weights[static_cast<std::size_t>(des.y(i))];
  return des;
}

double sigmoid(double t) { return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t)); }

double objective(const Design& des, const Eigen::VectorXd& beta, double penalty) {
  const Eigen::VectorXd eta = des.x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // log(1 + exp(eta)) computed stably
    const double softplus = eta(i) > 0 ? eta(i) + std::log1p(std::exp(-eta(i))) : std::log1p(std::exp(eta(i)));
    ll += des.w(i) * (des.y(i) * eta(i) - softplus);
  }
  return ll - 0.5 * penalty * beta.tail(beta.size() - 1).squaredNorm();
}

Eigen::VectorXd score(const Design& des, const Eigen::VectorXd& beta, double penalty) {
  const Eigen::VectorXd eta = des.x * beta;
  Eigen::VectorXd r(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) r(i) = des.w(i) * (des.y(i) - sigmoid(eta(i)));
  Eigen::VectorXd g = des.x.transpose() * r;
  g.tail(g.size() - 1) -= penalty * beta.tail(beta.size() - 1);
  return g;
}

bool separates(const Design& des, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = des.x * beta;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    if ((des.y(i) == 1.0) != (eta(i) > 0.0)) return false;
  return true;
}

struct IrlsResult {
  Eigen::VectorXd beta;
  int iterations = 0;
  bool converged = false;
  bool separated = false;
};

IrlsResult irls(const Design& des, double penalty, int max_iter) {
  const auto p = des.x.cols();
  IrlsResult res;
  res.beta = Eigen::VectorXd::Zero(p);
  double current = objective(des, res.beta, penalty);
  for (int it = 1; it <= max_iter; ++it) {
    res.iterations = it;
    const Eigen::VectorXd eta = des.x * res.beta;
    Eigen::VectorXd s(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double pi = sigmoid(eta(i));
      s(i) = des.w(i) * pi * (1.0 - pi);
    }
    Eigen::MatrixXd info = des.x.transpose() * s.asDiagonal() * des.x;
    for (Eigen::Index j = 1; j < p; ++j) info(j, j) += penalty;
    const Eigen::VectorXd step = info.ldlt().solve(score(des, res.beta, penalty));
    if (!step.allFinite()) break;
    double t = 1.0;
    Eigen::VectorXd next = res.beta + step;
    double value = objective(des, next, penalty);
    while (value < current - 1e-12 * std::abs(current) && t > 1e-10) {
      t *= 0.5;
      next = res.beta + t * step;
      value = objective(des, next, penalty);
    }
    const double change = (t * step).cwiseAbs().maxCoeff();
    res.beta = next;
    current = value;
    if (penalty == 0.0 && separates(des, res.beta)) {
      res.separated = true;
      return res;
    }
    if (change < 1e-8) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace

DgpVariant dgp_variant_from_string(const std::string& name) {
  if (name == "continuous") return DgpVariant::Continuous;
  if (name == "mixed") return DgpVariant::Mixed;
  throw Error(ErrorCode::InvalidArgument, "unknown DGP variant '" + name + "'");
}

std::string to_string(DgpVariant variant) { return variant == DgpVariant::Continuous ? "continuous" : "mixed"; }

std::vector<VariableSpec> dgp_schema(const DgpConfig& cfg) {
  std::vector<VariableSpec> schema{{"x1", VariableKind::Continuous, 0}};
  if (cfg.variant == DgpVariant::Continuous)
    schema.push_back({"x2", VariableKind::Continuous, 0});
  else
    schema.push_back({"x2", VariableKind::Ordinal, cfg.poisson_cap + 1});
  return schema;
}

int poisson_quantile(double u, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "Poisson rate must be positive");
  double pmf = std::exp(-lambda), cdf = pmf;
  int k = 0;
  while (cdf < u && k < 100000) {
    ++k;
    pmf *= lambda / k;
    cdf += pmf;
    if (pmf == 0.0 && cdf < u) break;
  }
  return k;
}

Dataset simulate_dgp(const DgpConfig& cfg) {
  if (cfg.n_per_class < 1) throw Error(ErrorCode::InvalidArgument, "n per class must be at least 1");
  if (!(cfg.sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  Dataset data;
  data.schema = dgp_schema(cfg);
  data.columns.assign(2, {});
  data.labels = std::vector<int>();
  const Bicop frank(Family::Frank, 0, tau_to_param(Family::Frank, 0, cfg.tau1));
  const Bicop gumbel(Family::Gumbel, 0, tau_to_param(Family::Gumbel, 0, cfg.tau2));
  const struct {
    const Bicop* copula;
    double mu;
    int label;
    std::uint64_t stream;
  } classes[2] = {{&frank, cfg.mu1, 1, 1}, {&gumbel, cfg.mu2, 0, 2}};
  for (const auto& c : classes) {
    const auto draws = c.copula->sample(cfg.n_per_class, derive_seed(cfg.seed, c.stream));
    for (const auto& [u1, u2] : draws) {
      data.columns[0].push_back(c.mu + cfg.sigma * stats::norm_quantile(u1));
      if (cfg.variant == DgpVariant::Continuous)
        data.columns[1].push_back(cfg.mu_y + cfg.sigma * stats::norm_quantile(u2));
      else
        data.columns[1].push_back(std::min(poisson_quantile(u2, cfg.lambda), cfg.poisson_cap) + 1);
      data.labels->push_back(c.label);
    }
  }
  return data;
}

double LogisticModel::probability(std::span<const double> row) const {
  double eta = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) eta += coefficients[j] * row[j];
  return sigmoid(eta);
}

std::vector<std::vector<double>> LogisticModel::posterior(const Dataset& data) const {
  if (data.dims() != coefficients.size()) throw Error(ErrorCode::SchemaMismatch, "logistic model width differs");
  std::vector<std::vector<double>> out(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double p = probability(data.row(i));
    out[i] = {1.0 - p, p};
  }
  return out;
}

std::vector<double> LogisticModel::gradient(const Dataset& data) const {
  const auto des = make_design(data);
  Eigen::VectorXd beta(static_cast<Eigen::Index>(coefficients.size() + 1));
  beta(0) = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) beta(static_cast<Eigen::Index>(j + 1)) = coefficients[j];
  const Eigen::VectorXd g = score(des, beta, penalty);
  return {g.data(), g.data() + g.size()};
}

nlohmann::json LogisticModel::to_json() const {
  return {{"intercept", intercept}, {"coefficients", coefficients}, {"class_weights", class_weights},
          {"iterations", iterations}, {"converged", converged}, {"ridge", ridge}, {"penalty", penalty},
          {"warnings", warnings}};
}

LogisticModel fit_weighted_logistic(const Dataset& train) {
  const auto des = make_design(train);
  auto res = irls(des, 0.0, 100);
  LogisticModel model;
  if (res.separated || !res.converged) {
    model.warnings.push_back(res.separated ? "perfect separation: ridge fallback" : "no convergence: ridge fallback");
    model.ridge = true;
    model.penalty = kRidgePenalty;
    res = irls(des, kRidgePenalty, 1000);
  }
  model.intercept = res.beta(0);
  model.coefficients.assign(res.beta.data() + 1, res.beta.data() + res.beta.size());
  model.class_weights = des.class_weights;
  model.iterations = res.iterations;
  model.converged = res.converged;
  if (!res.converged) model.warnings.push_back("IRLS stopped at the iteration limit");
  return model;
}

std::optional<double> BenchmarkResult::value(std::uint64_t seed, const std::string& method, const std::string& mode,
                                             const std::string& split, const std::string& metric) const {
  for (const auto& r : rows)
    if (r.seed == seed && r.method == method && r.mode == mode && r.split == split && r.metric == metric) return r.value;
  return std::nullopt;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, std::size_t n_train, std::size_t n_test) {
  const auto split = split_by_class(data);
  std::vector<std::size_t> train_idx, test_idx;
  for (int cls : {1, 0}) {
    const auto& idx = split.row_indices.at(cls);
    if (idx.size() < n_train + n_test)
      throw Error(ErrorCode::InvalidArgument, "class " + std::to_string(cls) + " has too few rows for the split");
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                    idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
  }
  return {data.subset(train_idx), data.subset(test_idx)};
}

BenchmarkResult benchmark_run(const BenchmarkConfig& cfg) {
  if (cfg.seeds.empty()) throw Error(ErrorCode::InvalidArgument, "benchmark needs at least one seed");
  if (cfg.n_train < 10 || cfg.n_test < 1) throw Error(ErrorCode::InvalidArgument, "split sizes too small");
  std::vector<BenchmarkResult> per_seed(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), [&](std::size_t s) {
    const std::uint64_t seed = cfg.seeds[s];
    DgpConfig dgp;
    dgp.variant = cfg.variant;
    dgp.n_per_class = cfg.n_train + cfg.n_test;
    dgp.seed = seed;
    const auto data = simulate_dgp(dgp);
    const auto [train, test] = train_test_split(data, cfg.n_train, cfg.n_test);
    auto& out = per_seed[s];

    struct Scored {
      std::string method, mode;
      std::function<std::vector<std::vector<double>>(const Dataset&)> predict;
    };
    std::vector<Scored> methods;
    const auto logistic = fit_weighted_logistic(train);
    methods.push_back({"logistic", "weighted", [logistic](const Dataset& d) { return logistic.posterior(d); }});
    auto add_copula = [&](bool oracle) {
      ClassifierConfig cc;
      cc.continuous_margin = cfg.margin;
      cc.vine.psi0 = cfg.psi0;
      if (oracle) {
        cc.oracle = true;
        cc.class_candidates = {{1, {Family::Frank}}, {0, {Family::Gumbel}}};
      }
      auto model = std::make_shared<ClassifierModel>(fit_classifier(train, cc));
      methods.push_back({"copula", oracle ? "oracle" : "mbic", [model](const Dataset& d) { return model->posterior(d); }});
    };
    if (cfg.oracle) add_copula(true);
    if (cfg.mbic) add_copula(false);

    for (const auto& m : methods) {
      for (const auto* part : {&train, &test}) {
        const std::string split = part == &train ? "train" : "test";
        const auto probs = m.predict(*part);
        for (const auto& row : evaluate_split(probs, *part->labels, split, 1))
          out.rows.push_back({seed, m.method, m.mode, split, row.metric + (row.cls == "all" ? "" : "_" + row.cls),
                              row.value});
      }
    }

    if (s == 0 && cfg.grid_points >= 2) {
      const auto [lo, hi] = std::minmax_element(data.columns[0].begin(), data.columns[0].end());
      std::vector<double> g1(static_cast<std::size_t>(cfg.grid_points)), g2;
      for (int i = 0; i < cfg.grid_points; ++i) g1[i] = *lo + (*hi - *lo) * i / (cfg.grid_points - 1);
      if (data.schema[1].is_ordinal()) {
        for (int l = 1; l <= data.schema[1].levels; ++l) g2.push_back(l);
      } else {
        const auto [lo2, hi2] = std::minmax_element(data.columns[1].begin(), data.columns[1].end());
        g2.resize(g1.size());
        for (int i = 0; i < cfg.grid_points; ++i) g2[i] = *lo2 + (*hi2 - *lo2) * i / (cfg.grid_points - 1);
      }
      Dataset grid;
      grid.schema = data.schema;
      grid.columns.assign(2, {});
      for (double b : g2)
        for (double a : g1) {
          grid.columns[0].push_back(a);
          grid.columns[1].push_back(b);
        }
      for (const auto& m : methods) {
        const auto probs = m.predict(grid);
        for (std::size_t i = 0; i < probs.size(); ++i)
          out.grid.push_back({seed, m.method, m.mode, grid.columns[0][i], grid.columns[1][i], probs[i][1]});
      }
    }
  });
  BenchmarkResult result;
  for (auto& r : per_seed) {
    result.rows.insert(result.rows.end(), r.rows.begin(), r.rows.end());
    result.grid.insert(result.grid.end(), r.grid.begin(), r.grid.end());
  }
  return result;
}

std::string benchmark_csv(const BenchmarkResult& result) {
  std::ostringstream out;
  out << "seed,method,mode,split,metric,value\n";
  for (const auto& r : result.rows)
    out << r.seed << "," << r.method << "," << r.mode << "," << r.split << "," << r.metric << ","
        << (r.value ? format_number(*r.value) : "NA") << "\n";
  return out.str();
}

std::string benchmark_grid_csv(const BenchmarkResult& result) {
  std::ostringstream out;
  out << "seed,method,mode,x1,x2,p1\n";
  for (const auto& g : result.grid)
    out << g.seed << "," << g.method << "," << g.mode << "," << format_number(g.x1) << "," << format_number(g.x2) << ","
        << format_number(g.p1) << "\n";
  return out.str();
}

}  // namespace vinecls
