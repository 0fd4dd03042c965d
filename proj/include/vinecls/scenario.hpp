#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "vinecls/classifier.hpp"

namespace vinecls {

/// One value per schema variable (schema order).
struct BaseProfile {
  std::vector<double> values;

  /// From {"name": value, ...}; every schema variable must be present.
  static BaseProfile from_json(const nlohmann::json& j, const std::vector<VariableSpec>& schema);
  nlohmann::json to_json(const std::vector<VariableSpec>& schema) const;
  void validate(const std::vector<VariableSpec>& schema) const;
};

/// Continuous grids are `points` equally spaced values on [min, max]; ordinal
/// grids list levels (all levels when empty).
struct GridSpec {
  std::string variable;
  double min = 0.0;
  double max = 1.0;
  int points = 200;
  std::vector<int> levels;

  /// "name:min:max[:points]" or "name" / "name:1,2,3" for ordinal variables.
  static GridSpec parse(const std::string& text);
  std::vector<double> values(const std::vector<VariableSpec>& schema) const;
};

struct RiskCurve {
  std::string variable;
  std::vector<double> values;
  std::vector<double> probabilities;
};

struct ContourSegment {
  double x0, y0, x1, y1;
};

/// probabilities[i2 * values1.size() + i1]: each row holds a fixed value of variable 2.
struct RiskSurface {
  std::string variable1;
  std::string variable2;
  std::vector<double> values1;
  std::vector<double> values2;
  std::vector<double> probabilities;
  /// Cells (row-major, (n2 - 1) x (n1 - 1)) whose corners lie strictly on both sides of the level.
  std::vector<bool> contour_cells;
  std::vector<ContourSegment> contour;
  bool contour_present = false;
  double contour_level = 0.5;

  double at(std::size_t i1, std::size_t i2) const { return probabilities[i2 * values1.size() + i1]; }
  /// True when the grid point is a corner of a crossing cell.
  bool on_contour(std::size_t i1, std::size_t i2) const;
};

RiskCurve risk_curve(const ClassifierModel& model, const BaseProfile& base, const GridSpec& grid,
                     int adverse_class = 1);
RiskSurface risk_surface(const ClassifierModel& model, const BaseProfile& base, const GridSpec& grid1,
                         const GridSpec& grid2, int adverse_class = 1, double contour_level = 0.5);

/// Marching squares on a row-major grid with strict crossings.
void mark_contour(RiskSurface& surface);

std::string risk_curve_csv(const RiskCurve& curve);
std::string risk_surface_csv(const RiskSurface& surface);
nlohmann::json scenario_metadata(const std::vector<VariableSpec>& schema, const BaseProfile& base,
                                 const std::vector<GridSpec>& grids, int adverse_class);

}  // namespace vinecls
