#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vinecls/classifier.hpp"
#include "vinecls/diagnostics.hpp"
#include "vinecls/error.hpp"
#include "vinecls/latent_corr.hpp"
#include "vinecls/parallel.hpp"
#include "vinecls/scenario.hpp"
#include "vinecls/simulation.hpp"

namespace fs = std::filesystem;
using namespace vinecls;

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("VINECLS_OUT_DIR");
  return env && *env ? env : ".";
}

std::string in_out_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void require_output_path(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent))
    throw Error(ErrorCode::Io, "output directory does not exist: " + parent.string());
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

std::vector<Family> parse_families(const std::vector<std::string>& names) {
  std::vector<Family> out;
  for (const auto& n : names) out.push_back(family_from_string(n));
  return out;
}

// Label and aux column names: explicit flags win over the schema file.
struct DataArgs {
  std::string data;
  std::string schema;
  std::string label;
  std::string aux;
};

Dataset load_with(const DataArgs& a, const std::vector<VariableSpec>* fallback_schema = nullptr) {
  std::vector<VariableSpec> schema;
  std::optional<std::string> label, aux;
  if (!a.schema.empty()) {
    auto cfg = load_schema_config(a.schema);
    schema = cfg.variables;
    label = cfg.label;
    aux = cfg.aux;
  } else if (fallback_schema) {
    schema = *fallback_schema;
    const auto text = read_text_file(a.data);
    const auto header = parse_csv_table(text.substr(0, text.find('\n'))).header;
    if (std::find(header.begin(), header.end(), "y") != header.end()) label = "y";
  } else {
    throw Error(ErrorCode::InvalidSchema, "--schema is required");
  }
  if (!a.label.empty()) label = a.label;
  if (!a.aux.empty()) aux = a.aux;
  return load_dataset(a.data, schema, label, aux);
}

void add_data_args(CLI::App* cmd, DataArgs& a, bool schema_required) {
  cmd->add_option("--data", a.data, "input CSV")->required()->check(CLI::ExistingFile);
  auto* s = cmd->add_option("--schema", a.schema, "schema JSON")->check(CLI::ExistingFile);
  if (schema_required) s->required();
  cmd->add_option("--label", a.label, "label column (overrides the schema file)");
  cmd->add_option("--aux", a.aux, "auxiliary outcome column (overrides the schema file)");
}

std::vector<std::uint64_t> seed_list(const std::vector<std::uint64_t>& seeds, std::uint64_t base, int count) {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(base + static_cast<std::uint64_t>(i));
  return out;
}

std::string config_value(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

// Appends "--key value" for every config entry that the command line does not set.
std::vector<std::string> merge_config(const std::vector<std::string>& args, const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config file: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::InvalidArgument, "config file must hold a JSON object");
  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) != 0) continue;
    given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  }
  std::vector<std::string> out = args;
  for (const auto& [key, value] : doc.items()) {
    if (key == "config" || given.count(key)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back("--" + key);
      continue;
    }
    out.push_back("--" + key);
    if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) joined += (joined.empty() ? "" : ",") + config_value(item);
      out.push_back(joined);
    } else {
      out.push_back(config_value(value));
    }
  }
  return out;
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vine copula classifier for mixed continuous-ordinal data", "vinecls"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  app.add_option("--config", config_path, "JSON file supplying any flag")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "64-bit seed");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a labelled dataset from a two-class DGP");
  std::string sim_variant = "continuous", sim_out;
  std::size_t sim_n = 1000;
  sim->add_option("--variant", sim_variant)->check(CLI::IsMember({"continuous", "mixed"}));
  sim->add_option("--n-per-class", sim_n);
  sim->add_option("--out", sim_out, "output CSV")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "fit a classifier to labelled training data");
  DataArgs fit_data;
  std::string fit_out, fit_margin = "kernel", fit_priors = "equal", fit_edges, fit_train_pred;
  double psi0 = 0.9;
  std::vector<std::string> families, families0, families1;
  bool full_trunc = false, oracle = false;
  add_data_args(fit, fit_data, true);
  fit->add_option("--out", fit_out, "model JSON")->required();
  fit->add_option("--margin", fit_margin)->check(CLI::IsMember({"kernel", "empirical"}));
  fit->add_option("--psi0", psi0)->check(CLI::Range(1e-9, 1.0 - 1e-9));
  fit->add_option("--families", families)->delimiter(',');
  fit->add_option("--families-class0", families0)->delimiter(',');
  fit->add_option("--families-class1", families1)->delimiter(',');
  fit->add_flag("--oracle", oracle, "rotation 0 only (use with per-class families)");
  fit->add_flag("--full-truncation", full_trunc, "search all truncation levels");
  fit->add_option("--priors", fit_priors)->check(CLI::IsMember({"equal", "empirical"}));
  fit->add_option("--edges", fit_edges, "edge report CSV");
  fit->add_option("--train-predictions", fit_train_pred, "posterior CSV for the training rows");

  // predict
  auto* pred = app.add_subcommand("predict", "posterior probabilities for new rows");
  DataArgs pred_data;
  std::string pred_model, pred_out;
  std::vector<double> alphas = {0.15, 0.20, 0.25};
  int adverse = 1;
  add_data_args(pred, pred_data, false);
  pred->add_option("--model", pred_model)->required()->check(CLI::ExistingFile);
  pred->add_option("--out", pred_out, "posterior CSV (stdout if omitted)");
  pred->add_option("--alpha", alphas)->delimiter(',');
  pred->add_option("--adverse", adverse);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "per-class Brier and nll scores");
  std::string eval_pred, eval_out, eval_split = "test";
  eval->add_option("--predictions", eval_pred)->required()->check(CLI::ExistingFile);
  eval->add_option("--split", eval_split);
  eval->add_option("--out", eval_out);
  eval->add_option("--adverse", adverse);

  // risk-groups
  auto* risk = app.add_subcommand("risk-groups", "low/moderate/high groups per alpha");
  std::string risk_pred, risk_out;
  risk->add_option("--predictions", risk_pred)->required()->check(CLI::ExistingFile);
  risk->add_option("--alpha", alphas)->delimiter(',');
  risk->add_option("--adverse", adverse);
  risk->add_option("--out", risk_out);

  // scenario
  auto* scen = app.add_subcommand("scenario", "risk curve or surface around a base profile");
  std::string scen_model, scen_profile, scen_out, scen_meta;
  std::vector<std::string> grids;
  double contour_level = 0.5;
  scen->add_option("--model", scen_model)->required()->check(CLI::ExistingFile);
  scen->add_option("--profile", scen_profile, "base profile JSON")->required()->check(CLI::ExistingFile);
  scen->add_option("--grid", grids, "name:min:max[:points] or name[:levels]")->required()->expected(1, 2);
  scen->add_option("--out", scen_out)->required();
  scen->add_option("--meta", scen_meta, "metadata JSON (default: <out>.json)");
  scen->add_option("--adverse", adverse);
  scen->add_option("--level", contour_level);

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "latent correlations, conditional Spearman bands, normal scores");
  DataArgs diag_data;
  std::string diag_dir = default_out_dir(), diag_model, diag_edge;
  std::vector<std::string> diag_pair, diag_latent;
  int diag_class = -1, replicates = 1000;
  double band_level = 0.90;
  add_data_args(diag, diag_data, true);
  diag->add_option("--out-dir", diag_dir);
  diag->add_option("--class", diag_class, "restrict to one class");
  diag->add_option("--pair", diag_pair, "x,y,z: conditional Spearman of x,y given ordinal z")->delimiter(',')->expected(3);
  diag->add_option("--replicates", replicates);
  diag->add_option("--band-level", band_level);
  diag->add_option("--latent", diag_latent, "x,k: latent normal scores")->delimiter(',')->expected(2);
  diag->add_option("--model", diag_model)->check(CLI::ExistingFile);
  diag->add_option("--edge", diag_edge, "edge label such as 23;1 for the modelled Spearman");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "copula classifier vs weighted logistic on the DGP");
  std::string bench_variant = "continuous", bench_out, bench_grid;
  std::vector<std::uint64_t> seeds;
  int n_seeds = 20, grid_points = 60;
  std::size_t n_train = 700, n_test = 300;
  std::vector<std::string> modes = {"oracle", "mbic"};
  bench->add_option("--variant", bench_variant)->check(CLI::IsMember({"continuous", "mixed"}));
  bench->add_option("--seeds", seeds)->delimiter(',');
  bench->add_option("--n-seeds", n_seeds, "consecutive seeds starting at --seed");
  bench->add_option("--n-train", n_train);
  bench->add_option("--n-test", n_test);
  bench->add_option("--modes", modes)->delimiter(',')->check(CLI::IsMember({"oracle", "mbic"}));
  bench->add_option("--psi0", psi0);
  bench->add_option("--out", bench_out)->required();
  bench->add_option("--grid-out", bench_grid);
  bench->add_option("--grid-points", grid_points);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
      if (!path.empty()) {
        args = merge_config(args, path);
        break;
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: Usage: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    set_worker_count(threads);
    auto need_seed = [&](const char* cmd) {
      if (seed_opt->count() == 0) throw Error(ErrorCode::InvalidArgument, std::string(cmd) + " requires --seed");
    };

    if (*sim) {
      need_seed("simulate");
      require_output_path(sim_out);
      DgpConfig cfg;
      cfg.variant = dgp_variant_from_string(sim_variant);
      cfg.n_per_class = sim_n;
      cfg.seed = seed;
      const auto data = simulate_dgp(cfg);
      write_dataset(data, sim_out);
      nlohmann::json meta{{"variant", sim_variant},
                          {"seed", seed},
                          {"n_per_class", sim_n},
                          {"label_map", {{"dgp_class_1", 1}, {"dgp_class_2", 0}}},
                          {"schema", nlohmann::json::array()}};
      for (const auto& v : data.schema) {
        nlohmann::json jv{{"name", v.name}, {"kind", v.is_ordinal() ? "ordinal" : "continuous"}};
        if (v.is_ordinal()) jv["levels"] = v.levels;
        meta["schema"].push_back(jv);
      }
      write_text_file(sim_out + ".json", meta.dump(2) + "\n");
    } else if (*fit) {
      require_output_path(fit_out);
      const auto data = load_with(fit_data);
      ClassifierConfig cfg;
      cfg.continuous_margin = margin_method_from_string(fit_margin);
      cfg.vine.psi0 = psi0;
      cfg.vine.full_truncation_search = full_trunc;
      if (!families.empty()) cfg.vine.candidates = parse_families(families);
      if (!families0.empty()) cfg.class_candidates[0] = parse_families(families0);
      if (!families1.empty()) cfg.class_candidates[1] = parse_families(families1);
      cfg.oracle = oracle;
      cfg.priors = prior_mode_from_string(fit_priors);
      const auto model = fit_classifier(data, cfg);
      model.save(fit_out);
      if (!fit_edges.empty()) {
        std::ostringstream out;
        out << "class,tree,edge,names,family,rotation,label,tau,spearman\n";
        for (std::size_t k = 0; k < model.classes().size(); ++k) {
          for (const auto& r : edge_report(model.vines()[k], seed)) {
            out << model.classes()[k] << "," << r.tree << "," << r.label << ",\"" << r.names << "\","
                << to_string(r.family) << "," << r.rotation << "," << r.short_label << "," << format_number(r.tau)
                << "," << format_number(r.spearman) << "\n";
          }
        }
        write_text_file(fit_edges, out.str());
      }
      if (!fit_train_pred.empty())
        write_text_file(fit_train_pred, predictions_csv(model.posterior(data), model.classes(), data.labels, alphas,
                                                        adverse, data.aux));
    } else if (*pred) {
      if (!pred_out.empty()) require_output_path(pred_out);
      const auto model = ClassifierModel::load(pred_model);
      const auto data = load_with(pred_data, &model.schema());
      emit(pred_out, predictions_csv(model.posterior(data), model.classes(), data.labels, alphas, adverse, data.aux));
    } else if (*eval) {
      const auto table = parse_csv_table(read_text_file(eval_pred));
      if (!table.has_column("y")) throw Error(ErrorCode::LabelsAbsent, "predictions lack a y column");
      const auto p0 = table.numeric_column("p0"), p1 = table.numeric_column("p1"), y = table.numeric_column("y");
      std::vector<std::vector<double>> probs(p0.size());
      std::vector<int> labels(p0.size());
      for (std::size_t i = 0; i < p0.size(); ++i) {
        probs[i] = {p0[i], p1[i]};
        labels[i] = static_cast<int>(y[i]);
      }
      emit(eval_out, metrics_csv(evaluate_split(probs, labels, eval_split, adverse)));
    } else if (*risk) {
      const auto table = parse_csv_table(read_text_file(risk_pred));
      if (!table.has_column("y")) throw Error(ErrorCode::LabelsAbsent, "predictions lack a y column");
      const auto p = table.numeric_column("p" + std::to_string(adverse));
      const auto y = table.numeric_column("y");
      std::vector<int> labels(y.begin(), y.end());
      std::optional<std::vector<double>> aux;
      if (table.has_column("aux")) aux = table.numeric_column("aux");
      std::optional<std::span<const double>> aux_span;
      if (aux) aux_span = std::span<const double>(*aux);
      emit(risk_out, risk_group_csv(risk_group_table(p, labels, aux_span, alphas)));
    } else if (*scen) {
      require_output_path(scen_out);
      const auto model = ClassifierModel::load(scen_model);
      nlohmann::json profile_json;
      try {
        profile_json = nlohmann::json::parse(read_text_file(scen_profile));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("profile: ") + e.what());
      }
      const auto base = BaseProfile::from_json(profile_json, model.schema());
      std::vector<GridSpec> specs;
      for (const auto& g : grids) specs.push_back(GridSpec::parse(g));
      auto meta = scenario_metadata(model.schema(), base, specs, adverse);
      if (specs.size() == 1) {
        write_text_file(scen_out, risk_curve_csv(risk_curve(model, base, specs[0], adverse)));
      } else {
        const auto surface = risk_surface(model, base, specs[0], specs[1], adverse, contour_level);
        write_text_file(scen_out, risk_surface_csv(surface));
        meta["contour"] = {{"level", contour_level}, {"present", surface.contour_present}};
        meta["contour"]["segments"] = nlohmann::json::array();
        for (const auto& s : surface.contour) meta["contour"]["segments"].push_back({s.x0, s.y0, s.x1, s.y1});
      }
      write_text_file(scen_meta.empty() ? scen_out + ".json" : scen_meta, meta.dump(2) + "\n");
    } else if (*diag) {
      need_seed("diagnose");
      if (!fs::is_directory(diag_dir)) throw Error(ErrorCode::Io, "output directory does not exist: " + diag_dir);
      auto data = load_with(diag_data);
      if (diag_class >= 0) {
        const auto split = split_by_class(data);
        if (!split.by_class.count(diag_class)) throw Error(ErrorCode::InvalidArgument, "unknown class");
        data = split.by_class.at(diag_class);
      }
      write_text_file(in_out_dir(diag_dir, "latent_corr.csv"), latent_matrix_csv(latent_matrix(data), data.schema));
      std::optional<ClassifierModel> model;
      if (!diag_model.empty()) model = ClassifierModel::load(diag_model);
      if (!diag_pair.empty()) {
        const auto ix = data.column_index(diag_pair[0]), iy = data.column_index(diag_pair[1]),
                   iz = data.column_index(diag_pair[2]);
        if (!data.schema[iz].is_ordinal())
          throw Error(ErrorCode::InvalidArgument, "conditioning variable must be ordinal");
        auto result = bootstrap_bands(data.columns[ix], data.columns[iy], data.columns[iz], data.schema[iz].levels,
                                      replicates, band_level, seed);
        if (model && !diag_edge.empty()) {
          const auto& vine = model->vine_for(diag_class >= 0 ? diag_class : model->classes().back());
          const auto [tree, edge] = find_edge(vine, diag_edge);
          attach_model_spearman(result, vine, tree, edge, seed);
        }
        write_text_file(in_out_dir(diag_dir, "conditional_rho.csv"), conditional_rho_csv(result));
      }
      if (!diag_latent.empty()) {
        const auto ix = data.column_index(diag_latent[0]), ik = data.column_index(diag_latent[1]);
        if (!data.schema[ik].is_ordinal()) throw Error(ErrorCode::InvalidArgument, "second --latent variable must be ordinal");
        const auto scores = latent_normal_scores(data.columns[ix], data.columns[ik], data.schema[ik].levels, seed);
        write_text_file(in_out_dir(diag_dir, "latent_scores.csv"), latent_scores_csv(scores));
      }
    } else if (*bench) {
      need_seed("benchmark");
      require_output_path(bench_out);
      if (!bench_grid.empty()) require_output_path(bench_grid);
      BenchmarkConfig cfg;
      cfg.variant = dgp_variant_from_string(bench_variant);
      cfg.seeds = seed_list(seeds, seed, n_seeds);
      cfg.n_train = n_train;
      cfg.n_test = n_test;
      cfg.oracle = std::find(modes.begin(), modes.end(), "oracle") != modes.end();
      cfg.mbic = std::find(modes.begin(), modes.end(), "mbic") != modes.end();
      cfg.psi0 = psi0;
      cfg.grid_points = bench_grid.empty() ? 0 : grid_points;
      const auto result = benchmark_run(cfg);
      write_text_file(bench_out, benchmark_csv(result));
      if (!bench_grid.empty()) write_text_file(bench_grid, benchmark_grid_csv(result));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
