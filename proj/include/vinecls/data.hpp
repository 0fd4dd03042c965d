#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vinecls {

enum class VariableKind { Continuous, Ordinal };

struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::Continuous;
  int levels = 0;  ///< ordinal only; values are coded 1..levels

  bool is_ordinal() const { return kind == VariableKind::Ordinal; }
};

/// Contents of the JSON schema config:
/// {"variables":[{"name":..,"kind":..,"levels":..}],"label":..,"aux":..}
struct SchemaConfig {
  std::vector<VariableSpec> variables;
  std::optional<std::string> label;
  std::optional<std::string> aux;
};

SchemaConfig load_schema_config(const std::string& path);
SchemaConfig parse_schema_config(const std::string& json_text);
void validate_schema(const std::vector<VariableSpec>& schema);

/// Column-major mixed dataset. Ordinal codes are stored as exact doubles.
struct Dataset {
  std::vector<VariableSpec> schema;
  std::vector<std::vector<double>> columns;
  std::optional<std::vector<int>> labels;
  std::optional<std::string> aux_name;
  std::optional<std::vector<double>> aux;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t dims() const { return schema.size(); }
  std::vector<double> row(std::size_t i) const;
  std::size_t column_index(const std::string& name) const;

  /// Keeps the given rows (in order), including labels and aux.
  Dataset subset(const std::vector<std::size_t>& indices) const;

  /// Throws on any invariant violation (shape, ordinal range, NaN, labels).
  void validate() const;
};

/// Parses a CSV with a header row. Columns are reordered to schema order.
Dataset load_dataset(const std::string& path, const std::vector<VariableSpec>& schema,
                     const std::optional<std::string>& label_column = std::nullopt,
                     const std::optional<std::string>& aux_column = std::nullopt);
Dataset parse_dataset(const std::string& csv_text, const std::vector<VariableSpec>& schema,
                      const std::optional<std::string>& label_column = std::nullopt,
                      const std::optional<std::string>& aux_column = std::nullopt);

/// Writes schema columns, then label ("y" unless named) and aux, with
/// round-trip precision.
void write_dataset(const Dataset& data, const std::string& path, const std::string& label_name = "y");
std::string format_dataset(const Dataset& data, const std::string& label_name = "y");

struct ClassSplit {
  std::map<int, Dataset> by_class;
  std::map<int, std::vector<std::size_t>> row_indices;
  std::vector<std::string> warnings;
};

/// Partitions rows by label. Both binary classes are always present in the
/// result; an empty class produces a warning.
ClassSplit split_by_class(const Dataset& data);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Header plus string cells of a generic CSV.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;
};

CsvTable parse_csv_table(const std::string& text);

/// Shortest form with `digits` significant digits, as used in CSV outputs.
std::string format_number(double value, int digits = 6);

}  // namespace vinecls
