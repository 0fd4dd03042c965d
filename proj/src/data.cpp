#include "vinecls/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vinecls/error.hpp"

namespace vinecls {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string current;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      cells.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  cells.push_back(trim(current));
  return cells;
}

double parse_number(const std::string& cell, const std::string& column, std::size_t line) {
  if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan")
    throw Error(ErrorCode::MissingValue, "missing value in column '" + column + "' at line " + std::to_string(line));
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw Error(ErrorCode::NonNumericCell,
                "non-numeric cell '" + cell + "' in column '" + column + "' at line " + std::to_string(line));
  return value;
}

VariableKind parse_kind(const std::string& kind) {
  if (kind == "continuous") return VariableKind::Continuous;
  if (kind == "ordinal") return VariableKind::Ordinal;
  throw Error(ErrorCode::InvalidSchema, "unknown variable kind '" + kind + "'");
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

CsvTable parse_csv_table(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (header) {
      table.header = std::move(cells);
      header = false;
    } else {
      if (cells.size() != table.header.size())
        throw Error(ErrorCode::InvalidArgument, "ragged CSV row " + std::to_string(table.rows.size() + 2));
      table.rows.push_back(std::move(cells));
    }
  }
  if (header) throw Error(ErrorCode::EmptyDataset, "CSV has no header");
  return table;
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorCode::MissingColumn, "missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const auto j = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.push_back(parse_number(rows[i][j], name, i + 2));
  return out;
}

std::string format_number(double value, int digits) {
  std::ostringstream out;
  out.precision(digits);
  out << value;
  return out.str();
}

void validate_schema(const std::vector<VariableSpec>& schema) {
  if (schema.empty()) throw Error(ErrorCode::InvalidSchema, "schema has no variables");
  std::set<std::string> names;
  for (const auto& v : schema) {
    if (!names.insert(v.name).second) throw Error(ErrorCode::InvalidSchema, "duplicate variable name '" + v.name + "'");
    if (v.is_ordinal() && v.levels < 2)
      throw Error(ErrorCode::InvalidSchema, "ordinal variable '" + v.name + "' needs at least 2 levels");
  }
}

SchemaConfig parse_schema_config(const std::string& json_text) {
  SchemaConfig config;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    for (const auto& v : doc.at("variables")) {
      VariableSpec spec;
      spec.name = v.at("name").get<std::string>();
      spec.kind = parse_kind(v.at("kind").get<std::string>());
      if (spec.is_ordinal()) spec.levels = v.at("levels").get<int>();
      config.variables.push_back(std::move(spec));
    }
    if (doc.contains("label") && !doc["label"].is_null()) config.label = doc["label"].get<std::string>();
    if (doc.contains("aux") && !doc["aux"].is_null()) config.aux = doc["aux"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSchema, e.what());
  }
  validate_schema(config.variables);
  return config;
}

SchemaConfig load_schema_config(const std::string& path) { return parse_schema_config(read_text_file(path)); }

std::vector<double> Dataset::row(std::size_t i) const {
  std::vector<double> out(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) out[j] = columns[j][i];
  return out;
}

std::size_t Dataset::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < schema.size(); ++j)
    if (schema[j].name == name) return j;
  throw Error(ErrorCode::MissingColumn, "no variable named '" + name + "'");
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.schema = schema;
  out.aux_name = aux_name;
  out.columns.assign(columns.size(), {});
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.columns[j].reserve(indices.size());
    for (auto i : indices) out.columns[j].push_back(columns[j][i]);
  }
  if (labels) {
    out.labels.emplace();
    for (auto i : indices) out.labels->push_back((*labels)[i]);
  }
  if (aux) {
    out.aux.emplace();
    for (auto i : indices) out.aux->push_back((*aux)[i]);
  }
  return out;
}

void Dataset::validate() const {
  validate_schema(schema);
  if (columns.size() != schema.size()) throw Error(ErrorCode::SchemaMismatch, "column count differs from schema");
  const std::size_t n = rows();
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no rows");
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != n) throw Error(ErrorCode::SchemaMismatch, "ragged columns");
    for (double v : columns[j]) {
      if (!std::isfinite(v)) throw Error(ErrorCode::MissingValue, "non-finite value in '" + schema[j].name + "'");
      if (schema[j].is_ordinal() && (v != std::floor(v) || v < 1 || v > schema[j].levels))
        throw Error(ErrorCode::OrdinalOutOfRange, "value " + std::to_string(v) + " outside 1.." +
                                                      std::to_string(schema[j].levels) + " in '" + schema[j].name + "'");
    }
  }
  if (labels) {
    if (labels->size() != n) throw Error(ErrorCode::SchemaMismatch, "label count differs from row count");
    for (int y : *labels)
      if (y != 0 && y != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
  }
  if (aux && aux->size() != n) throw Error(ErrorCode::SchemaMismatch, "aux count differs from row count");
}

Dataset parse_dataset(const std::string& csv_text, const std::vector<VariableSpec>& schema,
                      const std::optional<std::string>& label_column, const std::optional<std::string>& aux_column) {
  validate_schema(schema);
  std::istringstream in(csv_text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_line(line);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorCode::EmptyDataset, "missing header row");

  auto find = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> positions;
  for (const auto& v : schema) positions.push_back(find(v.name));
  const std::optional<std::size_t> label_pos = label_column ? std::optional(find(*label_column)) : std::nullopt;
  const std::optional<std::size_t> aux_pos = aux_column ? std::optional(find(*aux_column)) : std::nullopt;

  Dataset data;
  data.schema = schema;
  data.columns.assign(schema.size(), {});
  if (label_pos) data.labels.emplace();
  if (aux_pos) {
    data.aux.emplace();
    data.aux_name = aux_column;
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::MissingValue, "line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                               " cells, expected " + std::to_string(header.size()));
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const double v = parse_number(cells[positions[j]], schema[j].name, line_no);
      if (schema[j].is_ordinal() && (v != std::floor(v) || v < 1 || v > schema[j].levels))
        throw Error(ErrorCode::OrdinalOutOfRange, "value '" + cells[positions[j]] + "' outside 1.." +
                                                      std::to_string(schema[j].levels) + " in column '" +
                                                      schema[j].name + "' at line " + std::to_string(line_no));
      data.columns[j].push_back(v);
    }
    if (label_pos) {
      const double y = parse_number(cells[*label_pos], *label_column, line_no);
      if (y != 0.0 && y != 1.0)
        throw Error(ErrorCode::InvalidArgument, "label at line " + std::to_string(line_no) + " is not 0 or 1");
      data.labels->push_back(static_cast<int>(y));
    }
    if (aux_pos) data.aux->push_back(parse_number(cells[*aux_pos], *aux_column, line_no));
  }
  if (data.rows() == 0) throw Error(ErrorCode::EmptyDataset, "no data rows");
  data.validate();
  return data;
}

Dataset load_dataset(const std::string& path, const std::vector<VariableSpec>& schema,
                     const std::optional<std::string>& label_column, const std::optional<std::string>& aux_column) {
  return parse_dataset(read_text_file(path), schema, label_column, aux_column);
}

std::string format_dataset(const Dataset& data, const std::string& label_name) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t j = 0; j < data.schema.size(); ++j) out << (j ? "," : "") << data.schema[j].name;
  if (data.labels) out << "," << label_name;
  if (data.aux) out << "," << data.aux_name.value_or("aux");
  out << "\n";
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.columns.size(); ++j) out << (j ? "," : "") << data.columns[j][i];
    if (data.labels) out << "," << (*data.labels)[i];
    if (data.aux) out << "," << (*data.aux)[i];
    out << "\n";
  }
  return out.str();
}

void write_dataset(const Dataset& data, const std::string& path, const std::string& label_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << format_dataset(data, label_name);
}

ClassSplit split_by_class(const Dataset& data) {
  if (!data.labels) throw Error(ErrorCode::LabelsAbsent, "dataset has no labels");
  ClassSplit split;
  split.row_indices[0];
  split.row_indices[1];
  for (std::size_t i = 0; i < data.rows(); ++i) split.row_indices[(*data.labels)[i]].push_back(i);
  for (const auto& [cls, idx] : split.row_indices) {
    split.by_class.emplace(cls, data.subset(idx));
    if (idx.empty()) split.warnings.push_back("class " + std::to_string(cls) + " has no rows");
  }
  return split;
}

}  // namespace vinecls
