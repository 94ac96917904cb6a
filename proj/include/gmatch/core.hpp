#ifndef GMATCH_CORE_HPP
#define GMATCH_CORE_HPP

// Data model shared by every other header: the time partition, simplex
// vectors, within-group differencing schemes and the long-format dataset.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gmatch/error.hpp"

namespace gmatch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CountMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

/// Periods are labelled 1..T; treatment starts at T*. Pre-treatment periods
/// are 1..T*-1, post-treatment periods T*..T.
class TimeConfig {
 public:
  TimeConfig(int num_periods, int treatment_period)
      : num_periods_(num_periods), treatment_period_(treatment_period) {
    if (num_periods < 2) {
      throw ValidationError("time config: need at least 2 periods, got " +
                            std::to_string(num_periods));
    }
    if (treatment_period < 2 || treatment_period > num_periods) {
      throw ValidationError("time config: treatment period " +
                            std::to_string(treatment_period) +
                            " outside [2, " + std::to_string(num_periods) +
                            "]");
    }
  }

  int num_periods() const noexcept { return num_periods_; }
  int treatment_period() const noexcept { return treatment_period_; }
  int num_pre() const noexcept { return treatment_period_ - 1; }
  int num_post() const noexcept { return num_periods_ - treatment_period_ + 1; }
  bool is_post(int period) const noexcept { return period >= treatment_period_; }

  friend bool operator==(const TimeConfig&, const TimeConfig&) = default;

 private:
  int num_periods_;
  int treatment_period_;
};

/// A point of the probability simplex. Entries in [-tolerance, 0) are clamped
/// to zero and the vector is renormalised; anything worse is rejected.
class SimplexVector {
 public:
  static constexpr double kDefaultTolerance = 1e-10;

  explicit SimplexVector(Vector entries, double tolerance = kDefaultTolerance)
      : entries_(std::move(entries)) {
    if (entries_.size() == 0) {
      throw ValidationError("simplex vector: empty");
    }
    for (Eigen::Index j = 0; j < entries_.size(); ++j) {
      const double v = entries_[j];
      if (!std::isfinite(v)) {
        throw ValidationError("simplex vector: non-finite entry at " +
                              std::to_string(j));
      }
      if (v < -tolerance) {
        throw ValidationError("simplex vector: negative entry " +
                              std::to_string(v) + " at " + std::to_string(j));
      }
      if (v < 0.0) entries_[j] = 0.0;
    }
    const double total = entries_.sum();
    const double slack =
        tolerance * static_cast<double>(std::max<Eigen::Index>(1, entries_.size()));
    if (std::abs(total - 1.0) > slack) {
      throw ValidationError("simplex vector: entries sum to " +
                            std::to_string(total) + ", not 1");
    }
    entries_ /= total;
  }

  SimplexVector(std::initializer_list<double> entries)
      : SimplexVector(Vector::Map(std::data(entries),
                                  static_cast<Eigen::Index>(entries.size()))) {}

  static SimplexVector uniform(Eigen::Index size) {
    return SimplexVector(Vector::Constant(size, 1.0 / static_cast<double>(size)));
  }

  static SimplexVector vertex(Eigen::Index size, Eigen::Index index) {
    Vector v = Vector::Zero(size);
    v[index] = 1.0;
    return SimplexVector(std::move(v));
  }

  Eigen::Index size() const noexcept { return entries_.size(); }
  double operator[](Eigen::Index j) const { return entries_[j]; }
  const Vector& values() const noexcept { return entries_; }

  /// True when every coordinate is strictly positive.
  bool interior() const { return (entries_.array() > 0.0).all(); }

 private:
  Vector entries_;
};

enum class DifferencingKind { did, uniform, custom, none };

inline std::string to_string(DifferencingKind kind) {
  switch (kind) {
    case DifferencingKind::did: return "did";
    case DifferencingKind::uniform: return "uniform";
    case DifferencingKind::custom: return "custom";
    case DifferencingKind::none: return "none";
  }
  return "unknown";
}

inline DifferencingKind parse_differencing_kind(std::string_view text) {
  if (text == "did") return DifferencingKind::did;
  if (text == "uniform" || text == "unif") return DifferencingKind::uniform;
  if (text == "custom") return DifferencingKind::custom;
  if (text == "none" || text == "zero") return DifferencingKind::none;
  throw ValidationError("unknown differencing kind '" + std::string(text) + "'");
}

/// Weights over the pre-treatment periods used for within-group differencing:
/// mu_{j,t} = m_{j,t} - sum_s lambda_s m_{j,s}.
class DifferencingScheme {
 public:
  DifferencingKind kind() const noexcept { return kind_; }
  /// Length equals the number of pre-treatment periods.
  const Vector& lambda() const noexcept { return lambda_; }

  friend DifferencingScheme make_differencing(DifferencingKind, const TimeConfig&,
                                              const std::optional<Vector>&);

 private:
  DifferencingScheme(DifferencingKind kind, Vector lambda)
      : kind_(kind), lambda_(std::move(lambda)) {}

  DifferencingKind kind_;
  Vector lambda_;
};

inline DifferencingScheme make_differencing(DifferencingKind kind,
                                            const TimeConfig& time,
                                            const std::optional<Vector>& custom = std::nullopt) {
  const int pre = time.num_pre();
  if (pre <= 0) {
    throw ValidationError("differencing: no pre-treatment periods");
  }
  if (custom.has_value() != (kind == DifferencingKind::custom)) {
    throw ValidationError(
        "differencing: a custom lambda must be supplied exactly when kind is custom");
  }
  switch (kind) {
    case DifferencingKind::did: {
      Vector lambda = Vector::Zero(pre);
      lambda[pre - 1] = 1.0;
      return DifferencingScheme(kind, std::move(lambda));
    }
    case DifferencingKind::uniform:
      return DifferencingScheme(kind, Vector::Constant(pre, 1.0 / pre));
    case DifferencingKind::none:
      return DifferencingScheme(kind, Vector::Zero(pre));
    case DifferencingKind::custom: {
      if (custom->size() != pre) {
        throw ValidationError("differencing: custom lambda has length " +
                              std::to_string(custom->size()) + ", expected " +
                              std::to_string(pre));
      }
      SimplexVector checked(*custom);
      return DifferencingScheme(kind, checked.values());
    }
  }
  throw ValidationError("differencing: unknown kind");
}

enum class DatasetMode { panel, repeated_cross_sections };

inline std::string to_string(DatasetMode mode) {
  return mode == DatasetMode::panel ? "panel" : "rc";
}

inline DatasetMode parse_dataset_mode(std::string_view text) {
  if (text == "panel") return DatasetMode::panel;
  if (text == "rc" || text == "repeated_cross_sections" || text == "repeated-cross-sections") {
    return DatasetMode::repeated_cross_sections;
  }
  throw ValidationError("unknown dataset mode '" + std::string(text) + "'");
}

/// One long-format row. `unit` indexes Dataset::unit_names().
struct Observation {
  std::size_t unit;
  int period;
  int group;
  double outcome;
};

/// Validated long-format observations. Group 0 is the treated group, groups
/// 1..K form the donor pool. Immutable once built.
class Dataset {
 public:
  static Dataset build(DatasetMode mode, TimeConfig time, int num_groups,
                       std::vector<Observation> rows,
                       std::vector<std::string> unit_names) {
    if (num_groups < 1) {
      throw ValidationError("dataset: need at least one donor group");
    }
    Dataset d(mode, time, num_groups, std::move(rows), std::move(unit_names));
    d.validate_and_count();
    return d;
  }

  DatasetMode mode() const noexcept { return mode_; }
  const TimeConfig& time_config() const noexcept { return time_; }
  /// K, the number of donor groups.
  int num_groups() const noexcept { return num_groups_; }
  const std::vector<Observation>& observations() const noexcept { return rows_; }
  const std::vector<std::string>& unit_names() const noexcept { return unit_names_; }

  /// n: distinct units in panel mode, total rows for repeated cross-sections.
  std::size_t sample_size() const noexcept {
    return mode_ == DatasetMode::panel ? unit_names_.size() : rows_.size();
  }

  /// n_{j,t}; rows are groups 0..K, columns periods 1..T (0-based column t-1).
  const CountMatrix& counts() const noexcept { return counts_; }
  long count(int group, int period) const { return counts_(group, period - 1); }
  /// n_t, the number of rows observed in `period`.
  long period_size(int period) const { return counts_.col(period - 1).sum(); }

  /// Group of each unit (panel mode only; -1 for units with no rows).
  const std::vector<int>& unit_groups() const noexcept { return unit_group_; }

 private:
  Dataset(DatasetMode mode, TimeConfig time, int num_groups,
          std::vector<Observation> rows, std::vector<std::string> unit_names)
      : mode_(mode), time_(time), num_groups_(num_groups),
        rows_(std::move(rows)), unit_names_(std::move(unit_names)) {}

  void validate_and_count() {
    const int periods = time_.num_periods();
    counts_ = CountMatrix::Zero(num_groups_ + 1, periods);
    unit_group_.assign(unit_names_.size(), -1);
    std::vector<std::vector<char>> seen;
    if (mode_ == DatasetMode::panel) {
      seen.assign(unit_names_.size(), std::vector<char>(static_cast<std::size_t>(periods), 0));
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Observation& o = rows_[r];
      if (o.unit >= unit_names_.size()) {
        throw ValidationError("dataset: row " + std::to_string(r) +
                              " references unknown unit index");
      }
      if (o.period < 1 || o.period > periods) {
        throw ValidationError("period out of range: " + std::to_string(o.period) +
                              " not in [1, " + std::to_string(periods) + "]");
      }
      if (o.group < 0 || o.group > num_groups_) {
        throw ValidationError("group out of range: " + std::to_string(o.group) +
                              " not in [0, " + std::to_string(num_groups_) + "]");
      }
      if (!std::isfinite(o.outcome)) {
        throw ValidationError("dataset: non-finite outcome for unit '" +
                              unit_names_[o.unit] + "'");
      }
      if (mode_ == DatasetMode::panel) {
        int& g = unit_group_[o.unit];
        if (g >= 0 && g != o.group) {
          throw ValidationError("inconsistent group for unit '" + unit_names_[o.unit] +
                                "': " + std::to_string(g) + " vs " +
                                std::to_string(o.group));
        }
        g = o.group;
        char& flag = seen[o.unit][static_cast<std::size_t>(o.period - 1)];
        if (flag) {
          throw ValidationError("duplicate observation for unit '" + unit_names_[o.unit] +
                                "' in period " + std::to_string(o.period));
        }
        flag = 1;
      }
      ++counts_(o.group, o.period - 1);
    }
  }

  DatasetMode mode_;
  TimeConfig time_;
  int num_groups_;
  std::vector<Observation> rows_;
  std::vector<std::string> unit_names_;
  CountMatrix counts_;
  std::vector<int> unit_group_;
};

/// Rows of a long-format CSV before a time configuration is imposed.
struct CsvTable {
  std::vector<Observation> rows;
  std::vector<std::string> unit_names;
  int max_period = 0;
  int max_group = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse_number(std::string_view field, const std::string& where, const char* what) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && field.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    throw ValidationError(where + ": malformed " + what + " '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace detail

/// Reads `unit,period,group,outcome` rows. With `relabel_periods`, the sorted
/// distinct raw period values are mapped to 1..T.
inline CsvTable read_long_csv(std::istream& in, const std::string& source,
                              bool relabel_periods = false) {
  CsvTable table;
  std::unordered_map<std::string, std::size_t> unit_index;
  std::vector<long long> raw_periods;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    view = detail::trim(view);
    if (view.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = view.find(',', start);
      fields.push_back(detail::trim(view.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const std::string where = source + ": line " + std::to_string(line_no);
    if (!header_seen) {
      if (fields.size() != 4 || fields[0] != "unit" || fields[1] != "period" ||
          fields[2] != "group" || fields[3] != "outcome") {
        throw ValidationError(where + ": expected header 'unit,period,group,outcome'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4) {
      throw ValidationError(where + ": malformed row, expected 4 fields, got " +
                            std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ValidationError(where + ": malformed row, empty unit id");
    const auto period = detail::parse_number<long long>(fields[1], where, "period");
    const auto group = detail::parse_number<int>(fields[2], where, "group");
    const auto outcome = detail::parse_number<double>(fields[3], where, "outcome");
    if (!std::isfinite(outcome)) {
      throw ValidationError(where + ": non-finite outcome");
    }
    if (group < 0) {
      throw ValidationError(where + ": group out of range: " + std::to_string(group));
    }
    if (!relabel_periods && (period < 1 || period > 1'000'000)) {
      throw ValidationError(where + ": period out of range: " + std::to_string(period));
    }
    auto [it, inserted] = unit_index.try_emplace(std::string(fields[0]), table.unit_names.size());
    if (inserted) table.unit_names.emplace_back(fields[0]);
    raw_periods.push_back(period);
    table.rows.push_back({it->second, 0, group, outcome});
    table.max_group = std::max(table.max_group, group);
  }
  if (!header_seen) {
    throw ValidationError(source + ": empty file, expected header 'unit,period,group,outcome'");
  }
  if (relabel_periods) {
    std::vector<long long> distinct = raw_periods;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto pos = std::lower_bound(distinct.begin(), distinct.end(), raw_periods[r]);
      table.rows[r].period = static_cast<int>(pos - distinct.begin()) + 1;
    }
    table.max_period = static_cast<int>(distinct.size());
  } else {
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      table.rows[r].period = static_cast<int>(raw_periods[r]);
      table.max_period = std::max(table.max_period, table.rows[r].period);
    }
  }
  return table;
}

/// Imposes a time configuration and group count on a parsed table. When
/// `num_groups` is absent K is the largest group label present.
inline Dataset dataset_from_table(CsvTable table, DatasetMode mode, const TimeConfig& time,
                                  std::optional<int> num_groups = std::nullopt) {
  const int k = num_groups.value_or(table.max_group);
  return Dataset::build(mode, time, k, std::move(table.rows), std::move(table.unit_names));
}

struct ParseOptions {
  std::optional<int> num_groups;
  bool relabel_periods = false;
};

inline Dataset parse_dataset(const std::filesystem::path& path, DatasetMode mode,
                             const TimeConfig& time, const ParseOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open input file '" + path.string() + "'");
  }
  return dataset_from_table(read_long_csv(in, path.string(), options.relabel_periods), mode,
                            time, options.num_groups);
}

}  // namespace gmatch

#endif  // GMATCH_CORE_HPP
