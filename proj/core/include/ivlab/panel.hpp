#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ivlab {

struct VariableMeta {
  std::string name;
  std::string description;
  std::string unit;
};

struct ObservationKey {
  std::string entity;
  int time = 0;

  friend bool operator==(const ObservationKey&, const ObservationKey&) = default;
};

/// Complete-case realization of two variables: one row per (entity, time)
/// where both are present, ordered by entity then time.
struct AlignedSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::size_t n = 0;
  std::vector<ObservationKey> keys;
};

/// Complete-case realization of several variables at once.
struct AlignedTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::vector<ObservationKey> keys;

  std::size_t rows() const { return keys.size(); }
  const std::vector<double>& column(const std::string& name) const;
};

/// Entity x time x variable observations. Immutable once built; reads are
/// safe from any number of threads.
class PanelDataset {
 public:
  /// (entity index, time) in entity-then-time order.
  using RowKey = std::pair<std::size_t, int>;
  using Column = std::map<RowKey, double>;

  class Builder {
   public:
    /// Registers a variable; re-registering only fills in empty metadata.
    Builder& add_variable(VariableMeta meta);
    /// `value == nullopt` records an absent observation (blank or non-numeric cell).
    /// Throws Conflict when (entity, time, variable) was already added.
    Builder& add_observation(const std::string& entity, int time, const std::string& variable,
                             std::optional<double> value);
    PanelDataset build() &&;

   private:
    std::map<std::string, VariableMeta> variables_;
    std::map<std::string, std::map<std::pair<std::string, int>, std::optional<double>>> cells_;
  };

  PanelDataset() = default;

  const std::vector<std::string>& entities() const { return entities_; }
  /// Sorted union of time points over all entities.
  const std::vector<int>& times() const { return times_; }
  const std::vector<VariableMeta>& variables() const { return variables_; }
  std::vector<std::string> variable_names() const;

  bool has_variable(const std::string& name) const;
  const VariableMeta& variable(const std::string& name) const;

  std::optional<double> value(const std::string& entity, int time, const std::string& variable) const;
  /// Present observations of one variable. Throws Lookup for unknown names.
  const Column& column(const std::string& name) const;
  std::size_t presence_count(const std::string& name) const { return column(name).size(); }
  std::size_t absent_count(const std::string& name) const;

  /// Replaces descriptions/units for variables named in `metas`; unknown names are ignored.
  PanelDataset with_metadata(const std::vector<VariableMeta>& metas) const;

 private:
  std::vector<std::string> entities_;
  std::vector<int> times_;
  std::vector<VariableMeta> variables_;
  std::map<std::string, std::size_t> variable_index_;
  std::vector<Column> columns_;
  std::vector<std::size_t> absent_;
};

/// Column mapping for long-format input.
struct PanelSchema {
  std::string entity = "entity";
  std::string time = "year";
  std::string variable = "variable";
  std::string value = "value";
};

struct LoadDiagnostics {
  std::size_t rows_read = 0;
  std::size_t rows_skipped = 0;  // unparsable entity/time/variable
  std::size_t absent_values = 0;
};

PanelDataset load_panel(std::istream& in, const PanelSchema& schema = {},
                        LoadDiagnostics* diagnostics = nullptr);
PanelDataset load_panel(const std::string& path, const PanelSchema& schema = {},
                        LoadDiagnostics* diagnostics = nullptr);

/// Reads `name,description,unit` rows (header required).
std::vector<VariableMeta> load_variable_metadata(const std::string& path);

/// Writes the dataset back out in long format with the default schema column names.
void write_panel(std::ostream& out, const PanelDataset& d);

AlignedSeries align_pair(const PanelDataset& d, const std::string& a, const std::string& b);
AlignedTable align_columns(const PanelDataset& d, const std::vector<std::string>& names);

/// Centers and scales to unit sample standard deviation (n - 1 denominator).
std::vector<double> standardize(std::span<const double> s);

double mean(std::span<const double> s);
double sample_variance(std::span<const double> s);
double sample_covariance(std::span<const double> x, std::span<const double> y);

double pearson_correlation(std::span<const double> x, std::span<const double> y);
double pearson_correlation(const AlignedSeries& s);

/// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace ivlab
