#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vinecls/bicop.hpp"
#include "vinecls/classifier.hpp"
#include "vinecls/diagnostics.hpp"
#include "vinecls/error.hpp"
#include "vinecls/parallel.hpp"
#include "vinecls/simulation.hpp"

namespace py = pybind11;
using namespace vinecls;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<VariableSpec> parse_schema(const std::vector<py::dict>& schema) {
  std::vector<VariableSpec> out;
  for (const auto& v : schema) {
    VariableSpec spec;
    spec.name = v["name"].cast<std::string>();
    const auto kind = v.contains("kind") ? v["kind"].cast<std::string>() : "continuous";
    if (kind == "ordinal") {
      spec.kind = VariableKind::Ordinal;
      spec.levels = v["levels"].cast<int>();
    } else if (kind != "continuous") {
      throw Error(ErrorCode::InvalidSchema, "unknown variable kind '" + kind + "'");
    }
    out.push_back(spec);
  }
  validate_schema(out);
  return out;
}

py::list schema_to_py(const std::vector<VariableSpec>& schema) {
  py::list out;
  for (const auto& v : schema) {
    py::dict d;
    d["name"] = v.name;
    d["kind"] = v.is_ordinal() ? "ordinal" : "continuous";
    if (v.is_ordinal()) d["levels"] = v.levels;
    out.append(d);
  }
  return out;
}

Dataset to_dataset(const Matrix& x, const std::vector<VariableSpec>& schema,
                   const std::optional<std::vector<int>>& labels) {
  if (x.ndim() != 2 || static_cast<std::size_t>(x.shape(1)) != schema.size())
    throw Error(ErrorCode::SchemaMismatch, "X must be a 2-d array with one column per schema variable");
  Dataset d;
  d.schema = schema;
  const auto r = x.unchecked<2>();
  d.columns.assign(schema.size(), std::vector<double>(static_cast<std::size_t>(x.shape(0))));
  for (py::ssize_t i = 0; i < x.shape(0); ++i)
    for (py::ssize_t j = 0; j < x.shape(1); ++j) d.columns[j][i] = r(i, j);
  d.labels = labels;
  d.validate();
  return d;
}

py::array_t<double> to_array(const std::vector<std::vector<double>>& rows) {
  const std::size_t k = rows.empty() ? 0 : rows.front().size();
  py::array_t<double> out({rows.size(), k});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) w(i, j) = rows[i][j];
  return out;
}

std::vector<std::vector<double>> from_array(const Matrix& p) {
  if (p.ndim() != 2) throw Error(ErrorCode::InvalidArgument, "probabilities must be a 2-d array");
  const auto r = p.unchecked<2>();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(p.shape(0)));
  for (py::ssize_t i = 0; i < p.shape(0); ++i)
    for (py::ssize_t j = 0; j < p.shape(1); ++j) out[i].push_back(r(i, j));
  return out;
}

std::vector<Family> families(const std::vector<std::string>& names) {
  std::vector<Family> out;
  for (const auto& n : names) out.push_back(family_from_string(n));
  return out;
}

py::object optional_list(const std::vector<std::optional<double>>& v) {
  py::list out;
  for (const auto& x : v) out.append(x ? py::cast(*x) : py::none());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Vine-copula generative classifier for mixed continuous/ordinal data";

  py::register_exception<Error>(m, "VineclsError", PyExc_ValueError);

  m.def("set_threads", [](std::size_t n) { set_worker_count(n); }, py::arg("n"));

  py::class_<Bicop>(m, "Bicop")
      .def(py::init([](const std::string& family, int rotation, std::vector<double> params) {
             return Bicop(family_from_string(family), rotation, std::move(params));
           }),
           py::arg("family") = "independence", py::arg("rotation") = 0, py::arg("params") = std::vector<double>{})
      .def_static(
          "from_tau",
          [](const std::string& family, double tau, int rotation, double nu) {
            const auto f = family_from_string(family);
            return Bicop(f, rotation, tau_to_param(f, rotation, tau, nu));
          },
          py::arg("family"), py::arg("tau"), py::arg("rotation") = 0, py::arg("nu") = 5.0)
      .def_property_readonly("family", [](const Bicop& b) { return to_string(b.family()); })
      .def_property_readonly("rotation", &Bicop::rotation)
      .def_property_readonly("params", &Bicop::params)
      .def("cdf", py::vectorize([](Bicop& b, double u, double v) { return b.cdf(u, v); }))
      .def("pdf", py::vectorize([](Bicop& b, double u, double v) { return b.pdf(u, v); }))
      .def("hfunc1", py::vectorize([](Bicop& b, double u, double v) {
             return b.hfunc(u, v, HDirection::OneGivenTwo);
           }),
           "P(U <= u | V = v)")
      .def("hfunc2", py::vectorize([](Bicop& b, double u, double v) {
             return b.hfunc(u, v, HDirection::TwoGivenOne);
           }),
           "P(V <= v | U = u)")
      .def("tau", &Bicop::tau)
      .def("sample",
           [](const Bicop& b, std::size_t n, std::uint64_t seed) {
             const auto s = b.sample(n, seed);
             std::vector<std::vector<double>> rows;
             for (auto [u, v] : s) rows.push_back({u, v});
             return to_array(rows);
           },
           py::arg("n"), py::arg("seed"))
      .def("__repr__", [](const Bicop& b) { return "<Bicop " + b.label() + ">"; });

  py::class_<ClassifierModel>(m, "Classifier")
      .def_static(
          "fit",
          [](const Matrix& x, const std::vector<int>& y, const std::vector<py::dict>& schema,
             const std::string& margin, double psi0, const std::optional<std::vector<std::string>>& candidates,
             const std::optional<std::map<int, std::vector<std::string>>>& class_families, bool oracle,
             const std::string& priors, bool full_truncation) {
            const auto data = to_dataset(x, parse_schema(schema), y);
            ClassifierConfig cfg;
            cfg.continuous_margin = margin_method_from_string(margin);
            cfg.vine.psi0 = psi0;
            cfg.vine.full_truncation_search = full_truncation;
            if (candidates) cfg.vine.candidates = families(*candidates);
            if (class_families)
              for (const auto& [cls, names] : *class_families) cfg.class_candidates[cls] = families(names);
            cfg.oracle = oracle;
            cfg.priors = prior_mode_from_string(priors);
            py::gil_scoped_release release;
            return fit_classifier(data, cfg);
          },
          py::arg("X"), py::arg("y"), py::arg("schema"), py::arg("margin") = "kernel", py::arg("psi0") = 0.9,
          py::arg("families") = py::none(), py::arg("class_families") = py::none(), py::arg("oracle") = false,
          py::arg("priors") = "equal", py::arg("full_truncation") = false)
      .def(
          "predict_proba",
          [](const ClassifierModel& model, const Matrix& x) {
            const auto data = to_dataset(x, model.schema(), std::nullopt);
            std::vector<std::vector<double>> p;
            {
              py::gil_scoped_release release;
              p = model.posterior(data);
            }
            return to_array(p);
          },
          py::arg("X"))
      .def("log_densities",
           [](const ClassifierModel& model, const std::vector<double>& row) { return model.log_densities(row); })
      .def_property_readonly("classes", &ClassifierModel::classes)
      .def_property_readonly("priors", &ClassifierModel::priors)
      .def_property_readonly("schema", [](const ClassifierModel& model) { return schema_to_py(model.schema()); })
      .def(
          "edges",
          [](const ClassifierModel& model, int cls) {
            py::list out;
            for (const auto& e : edge_report(model.vine_for(cls))) {
              py::dict d;
              d["tree"] = e.tree;
              d["edge"] = e.label;
              d["variables"] = e.names;
              d["family"] = to_string(e.family);
              d["rotation"] = e.rotation;
              d["params"] = e.params;
              d["label"] = e.short_label;
              d["tau"] = e.tau;
              d["spearman"] = e.spearman;
              out.append(d);
            }
            return out;
          },
          py::arg("cls"))
      .def("truncation_level", [](const ClassifierModel& model, int cls) { return model.vine_for(cls).truncation_level(); })
      .def("to_json", [](const ClassifierModel& model) { return model.to_json().dump(); })
      .def_static("from_json",
                  [](const std::string& text) { return ClassifierModel::from_json(nlohmann::json::parse(text)); })
      .def("save", &ClassifierModel::save)
      .def_static("load", &ClassifierModel::load);

  m.def(
      "simulate",
      [](const std::string& variant, std::size_t n_per_class, std::uint64_t seed) {
        DgpConfig cfg;
        cfg.variant = dgp_variant_from_string(variant);
        cfg.n_per_class = n_per_class;
        cfg.seed = seed;
        const auto d = simulate_dgp(cfg);
        std::vector<std::vector<double>> rows(d.rows());
        for (std::size_t i = 0; i < d.rows(); ++i) rows[i] = d.row(i);
        return py::make_tuple(to_array(rows), py::array_t<int>(py::cast(*d.labels)), schema_to_py(d.schema));
      },
      py::arg("variant") = "continuous", py::arg("n_per_class") = 1000, py::arg("seed") = 1,
      "Returns (X, y, schema) for the two-class benchmark DGP.");

  m.def("bayes_posterior", [](const std::vector<double>& priors, const std::vector<double>& log_densities) {
    return bayes_posterior(priors, log_densities);
  });

  m.def(
      "per_class_nll",
      [](const Matrix& probs, const std::vector<int>& labels) {
        const auto r = per_class_nll(from_array(probs), labels);
        py::dict d;
        d["per_class"] = optional_list(r.per_class);
        d["counts"] = r.counts;
        d["sum"] = r.overall_sum;
        d["mean"] = r.overall_mean;
        return d;
      },
      py::arg("probs"), py::arg("labels"));
  m.def(
      "per_class_brier",
      [](const Matrix& probs, const std::vector<int>& labels) {
        return optional_list(per_class_brier(from_array(probs), labels));
      },
      py::arg("probs"), py::arg("labels"));
  m.def(
      "auc", [](const std::vector<double>& scores, const std::vector<int>& labels) { return auc(scores, labels); },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "risk_groups",
      [](const std::vector<double>& p, double alpha) {
        RiskPolicy policy{alpha, 1};
        policy.validate();
        std::vector<std::string> out;
        for (auto g : assign_risk_groups(p, policy)) out.push_back(to_string(g));
        return out;
      },
      py::arg("p_adverse"), py::arg("alpha") = 0.25);

  m.def(
      "conditional_spearman",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& z, int levels,
         int replicates, double level, std::uint64_t seed) {
        const auto r = bootstrap_bands(x, y, z, levels, replicates, level, seed);
        py::list out;
        for (const auto& c : r.categories) {
          py::dict d;
          d["level"] = c.level;
          d["n"] = c.n;
          d["observed"] = c.observed ? py::cast(*c.observed) : py::none();
          d["lower"] = c.lower ? py::cast(*c.lower) : py::none();
          d["upper"] = c.upper ? py::cast(*c.upper) : py::none();
          out.append(d);
        }
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("z"), py::arg("levels"), py::arg("replicates") = 1000,
      py::arg("level") = 0.90, py::arg("seed") = 1);

  m.def(
      "benchmark",
      [](const std::string& variant, const std::vector<std::uint64_t>& seeds, std::size_t n_train, std::size_t n_test,
         bool oracle, bool mbic) {
        BenchmarkConfig cfg;
        cfg.variant = dgp_variant_from_string(variant);
        cfg.seeds = seeds;
        cfg.n_train = n_train;
        cfg.n_test = n_test;
        cfg.oracle = oracle;
        cfg.mbic = mbic;
        cfg.grid_points = 2;
        BenchmarkResult res;
        {
          py::gil_scoped_release release;
          res = benchmark_run(cfg);
        }
        py::list out;
        for (const auto& r : res.rows) {
          py::dict d;
          d["seed"] = r.seed;
          d["method"] = r.method;
          d["mode"] = r.mode;
          d["split"] = r.split;
          d["metric"] = r.metric;
          d["value"] = r.value ? py::cast(*r.value) : py::none();
          out.append(d);
        }
        return out;
      },
      py::arg("variant") = "continuous", py::arg("seeds") = std::vector<std::uint64_t>{1}, py::arg("n_train") = 700,
      py::arg("n_test") = 300, py::arg("oracle") = true, py::arg("mbic") = false);

#ifdef VERSION_INFO
#define VINECLS_STR(x) #x
#define VINECLS_XSTR(x) VINECLS_STR(x)
  m.attr("__version__") = VINECLS_XSTR(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
