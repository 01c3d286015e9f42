#include "ivlab/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "ivlab/error.hpp"
#include "text_util.hpp"

namespace ivlab {

namespace {

std::optional<double> parse_number(std::string_view cell) {
  cell = detail::trim(cell);
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> parse_int(std::string_view cell) {
  cell = detail::trim(cell);
  int v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (detail::trim(header[i]) == name) return i;
  }
  throw Error(ErrorCode::Schema, "missing required column '" + name + "'");
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

const std::vector<double>& AlignedTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return columns[i];
  }
  throw Error(ErrorCode::Lookup, "column '" + name + "' not in aligned table");
}

PanelDataset::Builder& PanelDataset::Builder::add_variable(VariableMeta meta) {
  if (meta.name.empty()) throw Error(ErrorCode::Schema, "variable name must be nonempty");
  auto [it, inserted] = variables_.try_emplace(meta.name, meta);
  if (!inserted) {
    if (it->second.description.empty()) it->second.description = meta.description;
    if (it->second.unit.empty()) it->second.unit = meta.unit;
  }
  return *this;
}

PanelDataset::Builder& PanelDataset::Builder::add_observation(const std::string& entity, int time,
                                                              const std::string& variable,
                                                              std::optional<double> value) {
  if (entity.empty()) throw Error(ErrorCode::Schema, "entity identifier must be nonempty");
  add_variable(VariableMeta{variable, "", ""});
  auto& cells = cells_[variable];
  if (!cells.try_emplace({entity, time}, value).second) {
    throw Error(ErrorCode::Conflict, "duplicate observation for key (" + entity + ", " +
                                         std::to_string(time) + ", " + variable + ")");
  }
  return *this;
}

PanelDataset PanelDataset::Builder::build() && {
  PanelDataset d;
  std::set<std::string> entities;
  std::set<int> times;
  for (const auto& [var, cells] : cells_) {
    for (const auto& [key, value] : cells) {
      entities.insert(key.first);
      times.insert(key.second);
    }
  }
  d.entities_.assign(entities.begin(), entities.end());
  d.times_.assign(times.begin(), times.end());

  std::map<std::string, std::size_t> entity_index;
  for (std::size_t i = 0; i < d.entities_.size(); ++i) entity_index[d.entities_[i]] = i;

  for (auto& [name, meta] : variables_) {
    d.variable_index_[name] = d.variables_.size();
    d.variables_.push_back(meta);
    Column column;
    std::size_t absent = 0;
    if (auto it = cells_.find(name); it != cells_.end()) {
      for (const auto& [key, value] : it->second) {
        if (value) {
          column.emplace(RowKey{entity_index.at(key.first), key.second}, *value);
        } else {
          ++absent;
        }
      }
    }
    d.columns_.push_back(std::move(column));
    d.absent_.push_back(absent);
  }
  return d;
}

std::vector<std::string> PanelDataset::variable_names() const {
  std::vector<std::string> names;
  names.reserve(variables_.size());
  for (const auto& v : variables_) names.push_back(v.name);
  return names;
}

bool PanelDataset::has_variable(const std::string& name) const {
  return variable_index_.contains(name);
}

const VariableMeta& PanelDataset::variable(const std::string& name) const {
  auto it = variable_index_.find(name);
  if (it == variable_index_.end()) throw Error(ErrorCode::Lookup, "unknown variable '" + name + "'");
  return variables_[it->second];
}

const PanelDataset::Column& PanelDataset::column(const std::string& name) const {
  auto it = variable_index_.find(name);
  if (it == variable_index_.end()) throw Error(ErrorCode::Lookup, "unknown variable '" + name + "'");
  return columns_[it->second];
}

std::size_t PanelDataset::absent_count(const std::string& name) const {
  column(name);
  return absent_[variable_index_.at(name)];
}

std::optional<double> PanelDataset::value(const std::string& entity, int time,
                                          const std::string& variable) const {
  const auto& col = column(variable);
  auto e = std::lower_bound(entities_.begin(), entities_.end(), entity);
  if (e == entities_.end() || *e != entity) return std::nullopt;
  auto it = col.find({static_cast<std::size_t>(e - entities_.begin()), time});
  if (it == col.end()) return std::nullopt;
  return it->second;
}

PanelDataset PanelDataset::with_metadata(const std::vector<VariableMeta>& metas) const {
  PanelDataset copy = *this;
  for (const auto& meta : metas) {
    auto it = copy.variable_index_.find(meta.name);
    if (it == copy.variable_index_.end()) continue;
    copy.variables_[it->second].description = meta.description;
    copy.variables_[it->second].unit = meta.unit;
  }
  return copy;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

PanelDataset load_panel(std::istream& in, const PanelSchema& schema, LoadDiagnostics* diagnostics) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Schema, "input is empty; header row required");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  const std::size_t entity_col = column_index(header, schema.entity);
  const std::size_t time_col = column_index(header, schema.time);
  const std::size_t variable_col = column_index(header, schema.variable);
  const std::size_t value_col = column_index(header, schema.value);
  const std::size_t needed = std::max({entity_col, time_col, variable_col, value_col}) + 1;

  LoadDiagnostics diag;
  PanelDataset::Builder builder;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++diag.rows_read;
    auto fields = split_csv_line(line);
    if (fields.size() < needed) fields.resize(needed);
    const std::string entity{detail::trim(fields[entity_col])};
    const std::string variable{detail::trim(fields[variable_col])};
    const auto time = parse_int(fields[time_col]);
    if (entity.empty() || variable.empty() || !time) {
      ++diag.rows_skipped;
      continue;
    }
    const auto value = parse_number(fields[value_col]);
    if (!value) ++diag.absent_values;
    builder.add_observation(entity, *time, variable, value);
  }
  if (diagnostics) *diagnostics = diag;
  return std::move(builder).build();
}

PanelDataset load_panel(const std::string& path, const PanelSchema& schema, LoadDiagnostics* diagnostics) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open dataset '" + path + "'");
  return load_panel(in, schema, diagnostics);
}

std::vector<VariableMeta> load_variable_metadata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open metadata file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Schema, "metadata file is empty");
  const auto header = split_csv_line(line);
  const std::size_t name_col = column_index(header, "name");
  const std::size_t desc_col = column_index(header, "description");
  std::optional<std::size_t> unit_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (detail::trim(header[i]) == "unit") unit_col = i;
  }
  std::vector<VariableMeta> metas;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    fields.resize(std::max(fields.size(), header.size()));
    VariableMeta meta{std::string(detail::trim(fields[name_col])),
                      std::string(detail::trim(fields[desc_col])),
                      unit_col ? std::string(detail::trim(fields[*unit_col])) : std::string()};
    if (meta.name.empty()) throw Error(ErrorCode::Schema, "metadata row with empty name");
    metas.push_back(std::move(meta));
  }
  return metas;
}

void write_panel(std::ostream& out, const PanelDataset& d) {
  const PanelSchema schema;
  out << schema.entity << ',' << schema.time << ',' << schema.variable << ',' << schema.value << '\n';
  char buf[64];
  for (const auto& meta : d.variables()) {
    for (const auto& [key, value] : d.column(meta.name)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
      out << csv_quote(d.entities()[key.first]) << ',' << key.second << ',' << csv_quote(meta.name) << ','
          << std::string_view(buf, ptr - buf) << '\n';
    }
  }
}

AlignedTable align_columns(const PanelDataset& d, const std::vector<std::string>& names) {
  if (names.empty()) throw Error(ErrorCode::Lookup, "no variables requested");
  std::vector<const PanelDataset::Column*> cols;
  for (const auto& name : names) cols.push_back(&d.column(name));

  // Walk the smallest column and probe the rest.
  const auto* driver = *std::min_element(cols.begin(), cols.end(),
                                         [](auto* a, auto* b) { return a->size() < b->size(); });
  AlignedTable table;
  table.names = names;
  table.columns.resize(names.size());
  for (const auto& [key, unused] : *driver) {
    bool complete = true;
    for (auto* col : cols) {
      if (!col->contains(key)) {
        complete = false;
        break;
      }
    }
    if (!complete) continue;
    for (std::size_t c = 0; c < cols.size(); ++c) table.columns[c].push_back(cols[c]->at(key));
    table.keys.push_back({d.entities()[key.first], key.second});
  }
  if (table.keys.empty()) {
    std::string joined;
    for (const auto& n : names) joined += (joined.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::EmptyOverlap, "no rows where all of {" + joined + "} are present");
  }
  return table;
}

AlignedSeries align_pair(const PanelDataset& d, const std::string& a, const std::string& b) {
  auto table = align_columns(d, {a, b});
  AlignedSeries s;
  s.x = std::move(table.columns[0]);
  s.y = std::move(table.columns[1]);
  s.n = table.keys.size();
  s.keys = std::move(table.keys);
  return s;
}

double mean(std::span<const double> s) {
  if (s.empty()) throw Error(ErrorCode::InsufficientData, "mean of empty vector");
  double sum = 0.0;
  for (double v : s) sum += v;
  return sum / static_cast<double>(s.size());
}

double sample_covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::Domain, "covariance of vectors with different lengths");
  if (x.size() < 2) throw Error(ErrorCode::InsufficientData, "covariance needs at least 2 samples");
  const double mx = mean(x);
  const double my = mean(y);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += (x[i] - mx) * (y[i] - my);
  return sum / static_cast<double>(x.size() - 1);
}

double sample_variance(std::span<const double> s) { return sample_covariance(s, s); }

namespace {

// Near-zero spread relative to magnitude counts as constant.
bool is_degenerate(std::span<const double> s, double var) {
  double scale = 1.0;
  for (double v : s) scale = std::max(scale, std::abs(v));
  return !(std::sqrt(var) > 1e-12 * scale);
}

}  // namespace

std::vector<double> standardize(std::span<const double> s) {
  if (s.size() < 2) throw Error(ErrorCode::InsufficientData, "standardize needs at least 2 samples");
  const double m = mean(s);
  const double var = sample_variance(s);
  if (is_degenerate(s, var)) throw Error(ErrorCode::ZeroVariance, "cannot standardize a constant vector");
  const double sd = std::sqrt(var);
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = (s[i] - m) / sd;
  return out;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::Domain, "correlation of vectors with different lengths");
  if (x.size() < 3) throw Error(ErrorCode::InsufficientData, "correlation needs at least 3 samples");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  const double denom = static_cast<double>(x.size() - 1);
  if (is_degenerate(x, sxx / denom) || is_degenerate(y, syy / denom)) {
    throw Error(ErrorCode::ZeroVariance, "correlation with a constant column");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson_correlation(const AlignedSeries& s) { return pearson_correlation(s.x, s.y); }

}  // namespace ivlab
