#include "vinecls/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "vinecls/error.hpp"

namespace vinecls {

namespace {

std::size_t schema_index(const std::vector<VariableSpec>& schema, const std::string& name) {
  for (std::size_t j = 0; j < schema.size(); ++j)
    if (schema[j].name == name) return j;
  throw Error(ErrorCode::MissingColumn, "no variable named '" + name + "'");
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad number '" + s + "' in grid specification");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

// Evaluates the adverse-class posterior at every row of a column-major grid.
std::vector<double> adverse_probabilities(const ClassifierModel& model, std::vector<std::vector<double>> columns,
                                          int adverse_class) {
  const auto adverse = model.class_index(adverse_class);
  Dataset data;
  data.schema = model.schema();
  data.columns = std::move(columns);
  const auto post = model.posterior(data);
  std::vector<double> out(post.size());
  for (std::size_t i = 0; i < post.size(); ++i) out[i] = std::clamp(post[i][adverse], 0.0, 1.0);
  return out;
}

bool is_bmi(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower == "bmi";
}

}  // namespace

BaseProfile BaseProfile::from_json(const nlohmann::json& j, const std::vector<VariableSpec>& schema) {
  BaseProfile base;
  for (const auto& v : schema) {
    if (!j.contains(v.name) || !j[v.name].is_number())
      throw Error(ErrorCode::MissingColumn, "base profile lacks a numeric value for '" + v.name + "'");
    base.values.push_back(j[v.name].get<double>());
  }
  base.validate(schema);
  return base;
}

nlohmann::json BaseProfile::to_json(const std::vector<VariableSpec>& schema) const {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t k = 0; k < schema.size(); ++k) j[schema[k].name] = values[k];
  return j;
}

void BaseProfile::validate(const std::vector<VariableSpec>& schema) const {
  if (values.size() != schema.size()) throw Error(ErrorCode::SchemaMismatch, "base profile width differs from schema");
  for (std::size_t k = 0; k < schema.size(); ++k) {
    if (!std::isfinite(values[k])) throw Error(ErrorCode::MissingValue, "base value for '" + schema[k].name + "'");
    if (schema[k].is_ordinal() &&
        (values[k] < 1 || values[k] > schema[k].levels || values[k] != std::floor(values[k])))
      throw Error(ErrorCode::OrdinalOutOfRange, "base value for '" + schema[k].name + "' is not a valid level");
  }
}

GridSpec GridSpec::parse(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.empty() || parts[0].empty()) throw Error(ErrorCode::InvalidArgument, "empty grid specification");
  GridSpec g;
  g.variable = parts[0];
  if (parts.size() == 2) {
    for (const auto& lv : split(parts[1], ',')) g.levels.push_back(static_cast<int>(parse_double(lv)));
  } else if (parts.size() == 3 || parts.size() == 4) {
    g.min = parse_double(parts[1]);
    g.max = parse_double(parts[2]);
    if (parts.size() == 4) g.points = static_cast<int>(parse_double(parts[3]));
  } else if (parts.size() != 1) {
    throw Error(ErrorCode::InvalidArgument, "grid specification '" + text + "' not understood");
  }
  return g;
}

std::vector<double> GridSpec::values(const std::vector<VariableSpec>& schema) const {
  const auto& spec = schema[schema_index(schema, variable)];
  std::vector<double> out;
  if (spec.is_ordinal()) {
    std::vector<int> lv = levels;
    if (lv.empty())
      for (int l = 1; l <= spec.levels; ++l) lv.push_back(l);
    for (int l : lv) {
      if (l < 1 || l > spec.levels)
        throw Error(ErrorCode::OrdinalOutOfRange, "grid level " + std::to_string(l) + " invalid for '" + variable + "'");
      out.push_back(l);
    }
    return out;
  }
  if (!(min < max)) throw Error(ErrorCode::InvalidArgument, "grid for '" + variable + "' needs min < max");
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "grid for '" + variable + "' needs at least 2 points");
  out.resize(static_cast<std::size_t>(points));
  const double step = (max - min) / (points - 1);
  for (int i = 0; i < points; ++i) out[i] = min + i * step;
  out.back() = max;
  return out;
}

bool RiskSurface::on_contour(std::size_t i1, std::size_t i2) const {
  const std::size_t c1 = values1.size() - 1, c2 = values2.size() - 1;
  for (std::size_t r = (i2 > 0 ? i2 - 1 : 0); r <= std::min(i2, c2 - 1); ++r)
    for (std::size_t c = (i1 > 0 ? i1 - 1 : 0); c <= std::min(i1, c1 - 1); ++c)
      if (contour_cells[r * c1 + c]) return true;
  return false;
}

RiskCurve risk_curve(const ClassifierModel& model, const BaseProfile& base, const GridSpec& grid, int adverse_class) {
  const auto& schema = model.schema();
  base.validate(schema);
  RiskCurve curve;
  curve.variable = grid.variable;
  curve.values = grid.values(schema);
  const auto j = schema_index(schema, grid.variable);
  std::vector<std::vector<double>> columns(schema.size());
  for (std::size_t k = 0; k < schema.size(); ++k) columns[k].assign(curve.values.size(), base.values[k]);
  columns[j] = curve.values;
  curve.probabilities = adverse_probabilities(model, std::move(columns), adverse_class);
  return curve;
}

RiskSurface risk_surface(const ClassifierModel& model, const BaseProfile& base, const GridSpec& grid1,
                         const GridSpec& grid2, int adverse_class, double contour_level) {
  const auto& schema = model.schema();
  base.validate(schema);
  if (grid1.variable == grid2.variable) throw Error(ErrorCode::InvalidArgument, "surface needs two distinct variables");
  RiskSurface s;
  s.variable1 = grid1.variable;
  s.variable2 = grid2.variable;
  s.values1 = grid1.values(schema);
  s.values2 = grid2.values(schema);
  s.contour_level = contour_level;
  const auto j1 = schema_index(schema, grid1.variable), j2 = schema_index(schema, grid2.variable);
  const std::size_t n1 = s.values1.size(), n2 = s.values2.size();
  std::vector<std::vector<double>> columns(schema.size());
  for (std::size_t k = 0; k < schema.size(); ++k) columns[k].assign(n1 * n2, base.values[k]);
  for (std::size_t i2 = 0; i2 < n2; ++i2) {
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
      columns[j1][i2 * n1 + i1] = s.values1[i1];
      columns[j2][i2 * n1 + i1] = s.values2[i2];
    }
  }
  s.probabilities = adverse_probabilities(model, std::move(columns), adverse_class);
  mark_contour(s);
  return s;
}

void mark_contour(RiskSurface& s) {
  const std::size_t n1 = s.values1.size(), n2 = s.values2.size();
  s.contour_cells.assign((n1 - 1) * (n2 - 1), false);
  s.contour.clear();
  const double level = s.contour_level;
  for (std::size_t r = 0; r + 1 < n2; ++r) {
    for (std::size_t c = 0; c + 1 < n1; ++c) {
      // Corners counter-clockwise from the lower-left.
      const double x[4] = {s.values1[c], s.values1[c + 1], s.values1[c + 1], s.values1[c]};
      const double y[4] = {s.values2[r], s.values2[r], s.values2[r + 1], s.values2[r + 1]};
      const double p[4] = {s.at(c, r), s.at(c + 1, r), s.at(c + 1, r + 1), s.at(c, r + 1)};
      const bool above = std::any_of(p, p + 4, [&](double v) { return v > level; });
      const bool below = std::any_of(p, p + 4, [&](double v) { return v < level; });
      if (!(above && below)) continue;
      s.contour_cells[r * (n1 - 1) + c] = true;
      std::vector<std::pair<double, double>> hits;
      for (int e = 0; e < 4; ++e) {
        const int f = (e + 1) % 4;
        if ((p[e] - level) * (p[f] - level) < 0.0) {
          const double t = (level - p[e]) / (p[f] - p[e]);
          hits.emplace_back(x[e] + t * (x[f] - x[e]), y[e] + t * (y[f] - y[e]));
        }
      }
      for (std::size_t h = 0; h + 1 < hits.size(); h += 2)
        s.contour.push_back({hits[h].first, hits[h].second, hits[h + 1].first, hits[h + 1].second});
    }
  }
  s.contour_present = std::any_of(s.contour_cells.begin(), s.contour_cells.end(), [](bool b) { return b; });
}

std::string risk_curve_csv(const RiskCurve& curve) {
  std::ostringstream out;
  out << "value,probability\n";
  for (std::size_t i = 0; i < curve.values.size(); ++i)
    out << format_number(curve.values[i]) << "," << format_number(curve.probabilities[i]) << "\n";
  return out.str();
}

std::string risk_surface_csv(const RiskSurface& s) {
  std::ostringstream out;
  out << "v1,v2,probability,on_contour\n";
  for (std::size_t i2 = 0; i2 < s.values2.size(); ++i2)
    for (std::size_t i1 = 0; i1 < s.values1.size(); ++i1)
      out << format_number(s.values1[i1]) << "," << format_number(s.values2[i2]) << "," << format_number(s.at(i1, i2))
          << "," << (s.on_contour(i1, i2) ? 1 : 0) << "\n";
  return out.str();
}

nlohmann::json scenario_metadata(const std::vector<VariableSpec>& schema, const BaseProfile& base,
                                 const std::vector<GridSpec>& grids, int adverse_class) {
  nlohmann::json j;
  j["adverse_class"] = adverse_class;
  j["base_profile"] = base.to_json(schema);
  j["axes"] = nlohmann::json::array();
  for (std::size_t k = 0; k < grids.size(); ++k) {
    const auto& g = grids[k];
    nlohmann::json axis{{"column", "v" + std::to_string(k + 1)}, {"variable", g.variable}};
    const auto values = g.values(schema);
    axis["min"] = values.front();
    axis["max"] = values.back();
    axis["points"] = values.size();
    if (is_bmi(g.variable)) {
      axis["categories"] = {{{"name", "underweight"}, {"upper", 18.5}},
                            {{"name", "normal"}, {"lower", 18.5}, {"upper", 25.0}},
                            {{"name", "overweight"}, {"lower", 25.0}, {"upper", 30.0}},
                            {{"name", "obese"}, {"lower", 30.0}}};
    }
    j["axes"].push_back(axis);
  }
  return j;
}

}  // namespace vinecls
