#include "vinecls/vine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "vinecls/error.hpp"
#include "vinecls/latent_corr.hpp"
#include "vinecls/parallel.hpp"
#include "vinecls/random.hpp"

namespace vinecls {

namespace {

constexpr double kMassFloor = 1e-12;

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

// Variables spanned by an edge: conditioned pair plus conditioning set.
std::set<int> edge_union(const VineEdge& e) {
  std::set<int> s(e.given.begin(), e.given.end());
  s.insert(e.a);
  s.insert(e.b);
  return s;
}

std::string join_indices(const std::vector<int>& idx, bool wide) {
  std::string out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (wide && i) out += ",";
    out += std::to_string(idx[i] + 1);
  }
  return out;
}

PseudoValue clamp_pseudo(double plus, double minus, bool discrete) {
  plus = std::clamp(plus, kClampEps, 1.0 - kClampEps);
  minus = discrete ? std::clamp(minus, kClampEps, plus) : plus;
  return {plus, minus, discrete};
}

// F(first | second) given the two pseudo-values, for copula c with the
// conditioning coordinate being `second` in direction `dir`.
PseudoValue conditional(const Bicop& c, const PseudoValue& first, const PseudoValue& second, bool first_is_u) {
  const HDirection dir = first_is_u ? HDirection::OneGivenTwo : HDirection::TwoGivenOne;
  auto cdf = [&](double f, double s) { return first_is_u ? c.cdf(f, s) : c.cdf(s, f); };
  auto h = [&](double f, double s) { return first_is_u ? c.hfunc(f, s, dir) : c.hfunc(s, f, dir); };
  double plus, minus;
  if (!second.discrete) {
    plus = h(first.plus, second.plus);
    minus = first.discrete ? h(first.minus, second.plus) : plus;
  } else {
    const double mass = std::max(second.plus - second.minus, kMassFloor);
    plus = (cdf(first.plus, second.plus) - cdf(first.plus, second.minus)) / mass;
    minus = first.discrete ? (cdf(first.minus, second.plus) - cdf(first.minus, second.minus)) / mass : plus;
  }
  return clamp_pseudo(plus, minus, first.discrete);
}

// Inputs (for a and b) of a tree-m edge, given the outputs of tree m - 1.
struct EdgeOutputs {
  std::vector<PseudoValue> for_a;  // F(a | b, D)
  std::vector<PseudoValue> for_b;  // F(b | a, D)
};

const std::vector<PseudoValue>& output_for(const VineEdge& parent, const EdgeOutputs& out, int variable) {
  return variable == parent.a ? out.for_a : out.for_b;
}

double edge_score(double loglik, int params, bool independent, std::size_t n, double psi_m) {
  const double prior = independent ? std::log(1.0 - psi_m) : std::log(psi_m);
  return -2.0 * loglik + params * std::log(static_cast<double>(n)) - 2.0 * prior;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string VineEdge::label() const {
  std::vector<int> pair{std::min(a, b), std::max(a, b)};
  const bool wide = std::max(pair[1], given.empty() ? 0 : given.back()) >= 9;
  std::string out = join_indices(pair, wide);
  if (!given.empty()) out += ";" + join_indices(given, wide);
  return out;
}

std::string VineEdge::label(const std::vector<VariableSpec>& schema) const {
  const int lo = std::min(a, b), hi = std::max(a, b);
  std::string out = schema[lo].name + "," + schema[hi].name;
  for (std::size_t i = 0; i < given.size(); ++i) out += (i ? "," : ";") + schema[given[i]].name;
  return out;
}

void VineStructure::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, "invalid vine structure: " + what); };
  if (d < 1) fail("dimension must be positive");
  if (static_cast<int>(trees.size()) != std::max(d - 1, 0)) fail("expected d - 1 trees");
  for (int m = 1; m <= d - 1; ++m) {
    const auto& tree = trees[m - 1];
    const int nodes = d - m + 1;
    if (static_cast<int>(tree.size()) != d - m) fail("tree " + std::to_string(m) + " has wrong edge count");
    DisjointSets sets(nodes);
    for (const auto& e : tree) {
      if (e.left < 0 || e.right < 0 || e.left >= nodes || e.right >= nodes || e.left == e.right)
        fail("edge endpoint out of range");
      if (!sets.unite(e.left, e.right)) fail("tree " + std::to_string(m) + " contains a cycle");
      if (static_cast<int>(e.given.size()) != m - 1) fail("conditioning set size mismatch");
      if (m == 1) {
        if (e.a != e.left || e.b != e.right) fail("tree-1 conditioned pair must match endpoints");
        continue;
      }
      const auto& l = trees[m - 2][e.left];
      const auto& r = trees[m - 2][e.right];
      if (l.left != r.left && l.left != r.right && l.right != r.left && l.right != r.right)
        fail("proximity condition violated in tree " + std::to_string(m));
      const auto ul = edge_union(l), ur = edge_union(r);
      std::vector<int> common;
      std::set_intersection(ul.begin(), ul.end(), ur.begin(), ur.end(), std::back_inserter(common));
      if (common != e.given) fail("conditioning set does not match parent edges");
      if (!ul.contains(e.a) || ur.contains(e.a) || !ur.contains(e.b) || ul.contains(e.b))
        fail("conditioned pair does not match parent edges");
    }
  }
}

nlohmann::json VineStructure::to_json() const {
  nlohmann::json j;
  j["d"] = d;
  j["trees"] = nlohmann::json::array();
  for (const auto& tree : trees) {
    auto jt = nlohmann::json::array();
    for (const auto& e : tree)
      jt.push_back({{"left", e.left}, {"right", e.right}, {"a", e.a}, {"b", e.b}, {"given", e.given}});
    j["trees"].push_back(jt);
  }
  return j;
}

VineStructure VineStructure::from_json(const nlohmann::json& j) {
  VineStructure s;
  s.d = j.at("d").get<int>();
  for (const auto& jt : j.at("trees")) {
    std::vector<VineEdge> tree;
    for (const auto& je : jt) {
      tree.push_back({je.at("left").get<int>(), je.at("right").get<int>(), je.at("a").get<int>(),
                      je.at("b").get<int>(), je.at("given").get<std::vector<int>>()});
    }
    s.trees.push_back(std::move(tree));
  }
  s.validate();
  return s;
}

VineStructure select_structure(const Eigen::MatrixXd& corr) {
  const int d = static_cast<int>(corr.rows());
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "structure selection needs d >= 2");
  VineStructure s;
  s.d = d;

  struct Candidate {
    double weight;
    std::tuple<int, int, std::vector<int>> key;
    VineEdge edge;
  };
  auto pick_tree = [](std::vector<Candidate> candidates, int nodes) {
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
      if (x.weight != y.weight) return x.weight > y.weight;
      return x.key < y.key;
    });
    DisjointSets sets(nodes);
    std::vector<VineEdge> tree;
    for (auto& c : candidates) {
      if (sets.unite(c.edge.left, c.edge.right)) tree.push_back(std::move(c.edge));
      if (static_cast<int>(tree.size()) == nodes - 1) break;
    }
    return tree;
  };

  std::vector<Candidate> first;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      first.push_back({std::abs(corr(a, b)), {a, b, {}}, VineEdge{a, b, a, b, {}}});
  s.trees.push_back(pick_tree(std::move(first), d));

  for (int m = 2; m <= d - 1; ++m) {
    const auto& prev = s.trees[m - 2];
    std::vector<Candidate> candidates;
    for (int i = 0; i < static_cast<int>(prev.size()); ++i) {
      for (int j = i + 1; j < static_cast<int>(prev.size()); ++j) {
        const auto& l = prev[i];
        const auto& r = prev[j];
        if (l.left != r.left && l.left != r.right && l.right != r.left && l.right != r.right) continue;
        const auto ul = edge_union(l), ur = edge_union(r);
        std::vector<int> common, only_l, only_r;
        std::set_intersection(ul.begin(), ul.end(), ur.begin(), ur.end(), std::back_inserter(common));
        std::set_difference(ul.begin(), ul.end(), ur.begin(), ur.end(), std::back_inserter(only_l));
        std::set_difference(ur.begin(), ur.end(), ul.begin(), ul.end(), std::back_inserter(only_r));
        if (only_l.size() != 1 || only_r.size() != 1) continue;
        const int a = only_l[0], b = only_r[0];
        const double w = std::abs(partial_correlation(corr, a, b, common));
        candidates.push_back({w, {std::min(a, b), std::max(a, b), common}, VineEdge{i, j, a, b, common}});
      }
    }
    s.trees.push_back(pick_tree(std::move(candidates), static_cast<int>(prev.size())));
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<PseudoValue>> margin_pseudo_obs(const std::vector<MarginModel>& margins,
                                                        const std::vector<std::vector<double>>& columns) {
  std::vector<std::vector<PseudoValue>> out(margins.size());
  for (std::size_t j = 0; j < margins.size(); ++j) {
    const auto& m = margins[j];
    out[j].reserve(columns[j].size());
    for (double x : columns[j]) {
      if (m.is_discrete()) out[j].push_back(PseudoValue::ordinal(m.cdf(x), m.cdf_left(x)));
      else out[j].push_back(PseudoValue::continuous(m.cdf(x)));
    }
  }
  return out;
}

std::pair<std::vector<PseudoValue>, std::vector<PseudoValue>> propagate_edge(const Bicop& copula,
                                                                             std::span<const PseudoValue> u,
                                                                             std::span<const PseudoValue> v) {
  if (copula.is_independence()) return {{u.begin(), u.end()}, {v.begin(), v.end()}};
  std::vector<PseudoValue> for_u(u.size()), for_v(v.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    for_u[i] = conditional(copula, u[i], v[i], true);
    for_v[i] = conditional(copula, v[i], u[i], false);
  }
  return {std::move(for_u), std::move(for_v)};
}

namespace {

// Carries conditional pseudo-observations from one tree level to the next.
class VineWalker {
 public:
  VineWalker(const VineStructure& s, const std::vector<std::vector<PseudoValue>>& base) : s_(s), base_(base) {}

  // Pseudo-observation pairs entering each edge of tree m.
  std::vector<std::vector<PseudoObs>> edge_obs(int m) const {
    const auto& tree = s_.trees[m - 1];
    std::vector<std::vector<PseudoObs>> out(tree.size());
    for (std::size_t e = 0; e < tree.size(); ++e) {
      const auto& edge = tree[e];
      const std::vector<PseudoValue>* u;
      const std::vector<PseudoValue>* v;
      if (m == 1) {
        u = &base_[edge.a];
        v = &base_[edge.b];
      } else {
        u = &output_for(s_.trees[m - 2][edge.left], prev_[edge.left], edge.a);
        v = &output_for(s_.trees[m - 2][edge.right], prev_[edge.right], edge.b);
      }
      out[e].resize(u->size());
      for (std::size_t i = 0; i < u->size(); ++i) out[e][i] = {(*u)[i], (*v)[i]};
    }
    return out;
  }

  // Computes the conditional outputs of tree m from its edge copulas.
  void advance(const std::vector<Bicop>& copulas, const std::vector<std::vector<PseudoObs>>& obs, bool parallel) {
    std::vector<EdgeOutputs> next(obs.size());
    auto body = [&](std::size_t e) {
      std::vector<PseudoValue> u(obs[e].size()), v(obs[e].size());
      for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = obs[e][i].u;
        v[i] = obs[e][i].v;
      }
      auto [fa, fb] = propagate_edge(copulas[e], u, v);
      next[e] = {std::move(fa), std::move(fb)};
    };
    if (parallel) {
      parallel_for(obs.size(), body);
    } else {
      for (std::size_t e = 0; e < obs.size(); ++e) body(e);
    }
    prev_ = std::move(next);
  }

 private:
  const VineStructure& s_;
  const std::vector<std::vector<PseudoValue>>& base_;
  std::vector<EdgeOutputs> prev_;
};

// Sum of pair-copula log terms per row, trees 1..levels, edges in order.
std::vector<double> sum_log_terms(const VineStructure& s, const std::vector<std::vector<Bicop>>& copulas, int levels,
                                  const std::vector<std::vector<PseudoValue>>& base, std::size_t n) {
  std::vector<double> total(n, 0.0);
  VineWalker walker(s, base);
  for (int m = 1; m <= levels; ++m) {
    const auto obs = walker.edge_obs(m);
    for (std::size_t e = 0; e < obs.size(); ++e) {
      const Bicop& c = copulas[m - 1][e];
      if (c.is_independence()) continue;
      for (std::size_t i = 0; i < n; ++i) total[i] += c.log_term(obs[e][i]);
    }
    if (m < levels) walker.advance(copulas[m - 1], obs, false);
  }
  return total;
}

}  // namespace

VineModel::VineModel(std::vector<VariableSpec> schema, std::vector<MarginModel> margins, VineStructure structure,
                     std::vector<std::vector<Bicop>> copulas, int truncation_level)
    : schema_(std::move(schema)),
      margins_(std::move(margins)),
      structure_(std::move(structure)),
      copulas_(std::move(copulas)),
      truncation_(truncation_level) {
  structure_.validate();
  if (static_cast<int>(schema_.size()) != structure_.d || margins_.size() != schema_.size())
    throw Error(ErrorCode::SchemaMismatch, "vine dimension differs from schema/margins");
  if (copulas_.size() != structure_.trees.size())
    throw Error(ErrorCode::InvalidArgument, "one copula list per tree required");
  for (std::size_t m = 0; m < copulas_.size(); ++m)
    if (copulas_[m].size() != structure_.trees[m].size())
      throw Error(ErrorCode::InvalidArgument, "copula count differs from edge count");
  if (truncation_ < 0 || truncation_ > std::max(structure_.d - 1, 0))
    throw Error(ErrorCode::InvalidArgument, "truncation level out of range");
  for (std::size_t m = truncation_; m < copulas_.size(); ++m)
    for (const auto& c : copulas_[m])
      if (!c.is_independence())
        throw Error(ErrorCode::InvalidArgument, "edges beyond the truncation level must be independence");
}

int VineModel::parameter_count() const {
  int total = 0;
  for (const auto& tree : copulas_)
    for (const auto& c : tree) total += c.parameter_count();
  return total;
}


std::vector<double> VineModel::copula_log_terms(const std::vector<std::vector<double>>& columns) const {
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  if (truncation_ == 0 || n == 0) return std::vector<double>(n, 0.0);
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> total(n, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = c * kChunk, hi = std::min(n, lo + kChunk);
    std::vector<std::vector<double>> part(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) part[j].assign(columns[j].begin() + lo, columns[j].begin() + hi);
    const auto base = margin_pseudo_obs(margins_, part);
    const auto terms = sum_log_terms(structure_, copulas_, truncation_, base, hi - lo);
    std::copy(terms.begin(), terms.end(), total.begin() + lo);
  });
  return total;
}

std::vector<double> VineModel::log_density(const std::vector<std::vector<double>>& columns) const {
  if (columns.size() != schema_.size()) throw Error(ErrorCode::SchemaMismatch, "row width differs from vine dimension");
  auto total = copula_log_terms(columns);
  for (std::size_t i = 0; i < total.size(); ++i) {
    double margin_part = 0.0;
    for (std::size_t j = 0; j < margins_.size(); ++j)
      margin_part += std::log(std::max(margins_[j].density(columns[j][i]), 1e-300));
    total[i] += margin_part;
  }
  return total;
}

double VineModel::log_density(std::span<const double> row) const {
  std::vector<std::vector<double>> columns(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) columns[j] = {row[j]};
  return log_density(columns).front();
}

nlohmann::json VineModel::to_json() const {
  nlohmann::json j;
  j["variables"] = nlohmann::json::array();
  for (const auto& v : schema_) {
    nlohmann::json jv{{"name", v.name}, {"kind", v.is_ordinal() ? "ordinal" : "continuous"}};
    if (v.is_ordinal()) jv["levels"] = v.levels;
    j["variables"].push_back(jv);
  }
  j["margins"] = nlohmann::json::array();
  for (const auto& m : margins_) j["margins"].push_back(m.to_json());
  j["structure"] = structure_.to_json();
  j["pair_copulas"] = nlohmann::json::array();
  for (const auto& tree : copulas_) {
    auto jt = nlohmann::json::array();
    for (const auto& c : tree) jt.push_back(c.to_json());
    j["pair_copulas"].push_back(jt);
  }
  j["truncation_level"] = truncation_;
  j["fit"] = {{"loglik", info_.loglik}, {"mbic", info_.mbic}, {"n", info_.n}, {"psi0", info_.psi0},
              {"parameters", info_.parameters}};
  return j;
}

VineModel VineModel::from_json(const nlohmann::json& j) {
  std::vector<VariableSpec> schema;
  for (const auto& jv : j.at("variables")) {
    VariableSpec v;
    v.name = jv.at("name").get<std::string>();
    v.kind = jv.at("kind").get<std::string>() == "ordinal" ? VariableKind::Ordinal : VariableKind::Continuous;
    if (v.is_ordinal()) v.levels = jv.at("levels").get<int>();
    schema.push_back(std::move(v));
  }
  std::vector<MarginModel> margins;
  for (const auto& jm : j.at("margins")) margins.push_back(MarginModel::from_json(jm));
  std::vector<std::vector<Bicop>> copulas;
  for (const auto& jt : j.at("pair_copulas")) {
    std::vector<Bicop> tree;
    for (const auto& jc : jt) tree.push_back(Bicop::from_json(jc));
    copulas.push_back(std::move(tree));
  }
  VineModel model(std::move(schema), std::move(margins), VineStructure::from_json(j.at("structure")),
                  std::move(copulas), j.at("truncation_level").get<int>());
  if (j.contains("fit")) {
    const auto& jf = j["fit"];
    model.info_ = {jf.value("loglik", 0.0), jf.value("mbic", 0.0), jf.value("n", std::size_t{0}),
                   jf.value("psi0", 0.9), jf.value("parameters", 0)};
  }
  return model;
}

// ---------------------------------------------------------------------------

namespace {

struct EdgeChoice {
  Bicop copula;
  double loglik = 0.0;
};

EdgeChoice select_edge_copula(const std::vector<PseudoObs>& obs, const VineFitOptions& options, double psi_m) {
  const std::size_t n = obs.size();
  EdgeChoice best;
  double best_score = edge_score(0.0, 0, true, n, psi_m);
  const bool any_discrete = !obs.empty() && (obs.front().u.discrete || obs.front().v.discrete);
  const double tau = empirical_tau(obs);
  for (Family family : options.candidates) {
    if (family == Family::Independence) continue;
    if (family == Family::StudentT && any_discrete) continue;
    for (int rotation : rotations_for(family)) {
      if (std::find(options.rotations.begin(), options.rotations.end(), rotation) == options.rotations.end()) continue;
      if (!tau_admissible(family, rotation, tau)) continue;
      BicopFit fit;
      try {
        fit = bicop_fit(family, rotation, obs);
      } catch (const Error&) {
        continue;
      }
      double ll = 0.0;
      for (const auto& o : obs) ll += fit.bicop.log_term(o);
      const double score = edge_score(ll, fit.bicop.parameter_count(), false, n, psi_m);
      if (score < best_score) {
        best_score = score;
        best = {fit.bicop, ll};
      }
    }
  }
  return best;
}

double mbic_penalty(const std::vector<std::vector<Bicop>>& copulas, int d, std::size_t n, double psi0) {
  double penalty = 0.0;
  for (int m = 1; m <= d - 1; ++m) {
    const double psi_m = std::pow(psi0, m);
    int q = 0;
    for (const auto& c : copulas[m - 1]) {
      penalty += c.parameter_count() * std::log(static_cast<double>(n));
      q += c.is_independence() ? 0 : 1;
    }
    penalty -= 2.0 * (q * std::log(psi_m) + (d - m - q) * std::log(1.0 - psi_m));
  }
  return penalty;
}

}  // namespace

double vine_mbic(double copula_loglik, const VineModel& model, std::size_t n, double psi0) {
  return -2.0 * copula_loglik + mbic_penalty(model.copulas(), model.dims(), n, psi0);
}

double vine_mbic(const VineModel& model, const Dataset& data, double psi0) {
  const auto terms = model.copula_log_terms(data.columns);
  double ll = 0.0;
  for (double t : terms) ll += t;
  return vine_mbic(ll, model, data.rows(), psi0);
}

VineModel fit_vine(const Dataset& data, const std::vector<MarginModel>& margins, const VineStructure& structure,
                   const VineFitOptions& options) {
  const std::size_t n = data.rows();
  const int d = static_cast<int>(data.dims());
  if (n < 10) throw Error(ErrorCode::TooFewObservations, "vine fit needs at least 10 observations");
  if (structure.d != d || static_cast<int>(margins.size()) != d)
    throw Error(ErrorCode::SchemaMismatch, "structure/margins dimension differs from data");
  if (options.candidates.empty()) throw Error(ErrorCode::InvalidArgument, "empty candidate family list");
  if (!(options.psi0 > 0.0 && options.psi0 < 1.0)) throw Error(ErrorCode::InvalidArgument, "psi0 must lie in (0,1)");

  std::vector<std::vector<Bicop>> copulas(structure.trees.size());
  std::vector<std::vector<double>> edge_ll(structure.trees.size());
  for (std::size_t m = 0; m < structure.trees.size(); ++m) {
    copulas[m].assign(structure.trees[m].size(), Bicop());
    edge_ll[m].assign(structure.trees[m].size(), 0.0);
  }

  const auto base = margin_pseudo_obs(margins, data.columns);
  VineWalker walker(structure, base);
  int truncation = d - 1;
  for (int m = 1; m <= d - 1; ++m) {
    const auto obs = walker.edge_obs(m);
    const double psi_m = std::pow(options.psi0, m);
    parallel_for(obs.size(), [&](std::size_t e) {
      auto choice = select_edge_copula(obs[e], options, psi_m);
      copulas[m - 1][e] = std::move(choice.copula);
      edge_ll[m - 1][e] = choice.loglik;
    });
    const bool all_independent = std::all_of(copulas[m - 1].begin(), copulas[m - 1].end(),
                                             [](const Bicop& c) { return c.is_independence(); });
    if (all_independent && !options.full_truncation_search) {
      truncation = m - 1;
      break;
    }
    if (m < d - 1) walker.advance(copulas[m - 1], obs, true);
  }

  if (options.full_truncation_search) {
    // mBIC(k) - mBIC(k - 1) is the sum over tree k of (edge score - independence score).
    double best = 0.0, running = 0.0;
    int best_k = 0;
    for (int m = 1; m <= d - 1; ++m) {
      const double psi_m = std::pow(options.psi0, m);
      for (std::size_t e = 0; e < copulas[m - 1].size(); ++e) {
        const auto& c = copulas[m - 1][e];
        running += edge_score(edge_ll[m - 1][e], c.parameter_count(), c.is_independence(), n, psi_m) -
                   edge_score(0.0, 0, true, n, psi_m);
      }
      if (running < best) {
        best = running;
        best_k = m;
      }
    }
    truncation = best_k;
  }
  // Trim trailing all-independence trees from the truncation level.
  while (truncation > 0 && std::all_of(copulas[truncation - 1].begin(), copulas[truncation - 1].end(),
                                       [](const Bicop& c) { return c.is_independence(); }))
    --truncation;
  for (std::size_t m = truncation; m < copulas.size(); ++m) {
    std::fill(copulas[m].begin(), copulas[m].end(), Bicop());
    std::fill(edge_ll[m].begin(), edge_ll[m].end(), 0.0);
  }

  VineModel model(data.schema, margins, structure, std::move(copulas), truncation);
  VineFitInfo info;
  for (const auto& tree : edge_ll)
    for (double ll : tree) info.loglik += ll;
  info.n = n;
  info.psi0 = options.psi0;
  info.parameters = model.parameter_count();
  info.mbic = vine_mbic(info.loglik, model, n, options.psi0);
  model.set_fit_info(info);
  return model;
}

std::vector<EdgeReport> edge_report(const VineModel& model, std::uint64_t seed) {
  std::vector<EdgeReport> rows;
  std::uint64_t stream = 0;
  for (int m = 1; m <= static_cast<int>(model.structure().trees.size()); ++m) {
    const auto& tree = model.structure().trees[m - 1];
    for (std::size_t e = 0; e < tree.size(); ++e, ++stream) {
      const Bicop& c = model.copula(m, static_cast<int>(e));
      EdgeReport r;
      r.tree = m;
      r.label = tree[e].label();
      r.names = tree[e].label(model.schema());
      r.family = c.family();
      r.rotation = c.rotation();
      r.params = c.params();
      r.short_label = c.label();
      r.tau = c.tau();
      r.spearman = c.spearman_rho(100000, derive_seed(seed, stream));
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace vinecls
