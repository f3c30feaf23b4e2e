#pragma once

// Labeled name data: CSV ingestion, census surname-aggregate expansion,
// stratified train/test splitting and uniform subsampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "namerace/csv.hpp"
#include "namerace/error.hpp"
#include "namerace/rng.hpp"
#include "namerace/strings.hpp"

namespace namerace {

struct NameRecord {
  std::string last_name;
  std::optional<std::string> first_name;
  std::string label;

  friend bool operator==(const NameRecord&, const NameRecord&) = default;
  friend auto operator<=>(const NameRecord&, const NameRecord&) = default;
};

/// Distinct class labels in lexicographic order; class index k is the rank.
class LabelSet {
 public:
  LabelSet() = default;

  explicit LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  }

  template <typename Range>
  static LabelSet from_records(const Range& records) {
    std::vector<std::string> labels;
    for (const auto& r : records) labels.push_back(r.label);
    return LabelSet(std::move(labels));
  }

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t index) const { return labels_.at(index); }

  std::optional<std::size_t> find(std::string_view label) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
  }

  bool contains(std::string_view label) const { return find(label).has_value(); }

  std::size_t index_of(std::string_view label) const {
    if (auto idx = find(label)) return *idx;
    throw InvalidArgument("unknown label '" + std::string(label) + "'");
  }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::string> labels_;
};

// ---------------------------------------------------------------------------
// Labeled CSV

struct LabeledSchema {
  std::string last_name = "last_name";
  std::string first_name = "first_name";  // empty: file has no first-name column
  std::string label = "label";
};

struct LoadedCorpus {
  std::vector<NameRecord> records;
  LabelSet labels;
  std::size_t dropped = 0;     // rows with empty last name or empty label
  std::size_t duplicates = 0;  // rows removed by deduplication
};

/// Removes exact (last, first, label) duplicates, keeping first occurrences in order.
inline std::size_t deduplicate(std::vector<NameRecord>& records) {
  std::set<std::tuple<std::string, std::optional<std::string>, std::string>> seen;
  std::vector<NameRecord> kept;
  kept.reserve(records.size());
  for (auto& r : records) {
    if (seen.emplace(r.last_name, r.first_name, r.label).second) kept.push_back(std::move(r));
  }
  const std::size_t removed = records.size() - kept.size();
  records = std::move(kept);
  return removed;
}

inline LoadedCorpus load_labeled_table(const csv::Table& table, const LabeledSchema& schema = {},
                                       bool dedup = false) {
  const std::size_t last_col = table.require_column(schema.last_name);
  const std::size_t label_col = table.require_column(schema.label);
  std::optional<std::size_t> first_col;
  if (!schema.first_name.empty()) first_col = table.require_column(schema.first_name);

  LoadedCorpus out;
  for (const auto& row : table.rows) {
    const auto last = str::trim(row.fields[last_col]);
    const auto label = str::trim(row.fields[label_col]);
    if (last.empty() || label.empty()) {
      ++out.dropped;
      continue;
    }
    NameRecord rec{std::string(last), std::nullopt, std::string(label)};
    if (first_col) {
      const auto first = str::trim(row.fields[*first_col]);
      if (!first.empty()) rec.first_name = std::string(first);
    }
    out.records.push_back(std::move(rec));
  }
  if (out.records.empty()) throw DataError(table.source + ": no valid rows");
  if (dedup) out.duplicates = deduplicate(out.records);
  out.labels = LabelSet::from_records(out.records);
  return out;
}

inline LoadedCorpus load_labeled_csv(const std::string& path, const LabeledSchema& schema = {},
                                     bool dedup = false) {
  return load_labeled_table(csv::read(path), schema, dedup);
}

inline void write_labeled_csv(std::ostream& out, std::span<const NameRecord> records,
                              const LabeledSchema& schema = {}) {
  const std::string first_header = schema.first_name.empty() ? "first_name" : schema.first_name;
  csv::write_row(out, {schema.last_name, first_header, schema.label});
  for (const auto& r : records) csv::write_row(out, {r.last_name, r.first_name.value_or(""), r.label});
}

inline void write_labeled_csv(const std::string& path, std::span<const NameRecord> records,
                              const LabeledSchema& schema = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  write_labeled_csv(out, records, schema);
  if (!out) throw DataError(path + ": write failed");
}

// ---------------------------------------------------------------------------
// Census surname aggregates

struct CensusAggregateRow {
  std::string surname;
  std::uint64_t count = 0;
  std::map<std::string, double> race_percentages;  // label -> percentage in [0, 100]
};

struct CensusSchema {
  std::string surname = "surname";
  std::string count = "count";
  std::vector<std::pair<std::string, std::string>> percent_columns;  // (column, label)
};

/// Slack allowed on the per-row percentage total for source rounding.
inline constexpr double kCensusPercentSlack = 0.5;

inline void validate_census_percentages(const CensusAggregateRow& row) {
  for (const auto& [label, pct] : row.race_percentages) {
    if (!std::isfinite(pct) || pct < 0.0 || pct > 100.0) {
      throw InvalidArgument("census row '" + row.surname + "': percentage for '" + label +
                            "' outside [0,100]: " + std::to_string(pct));
    }
  }
}

/// Range check plus the file-level rule that a row sums to at most 100 + slack.
inline void validate_census_row(const CensusAggregateRow& row) {
  validate_census_percentages(row);
  double total = 0.0;
  for (const auto& [_, pct] : row.race_percentages) total += pct;
  if (total > 100.0 + kCensusPercentSlack) {
    throw InvalidArgument("census row '" + row.surname + "': percentages sum to " + std::to_string(total));
  }
}

namespace detail {

inline double parse_double(std::string_view cell, const std::string& where) {
  const std::string s(cell);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw DataError(where + ": not a number: '" + s + "'");
  return v;
}

inline std::uint64_t parse_count(std::string_view cell, const std::string& where) {
  const std::string s(cell);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw DataError(where + ": count must be a non-negative integer: '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw DataError(where + ": count out of range: '" + s + "'");
  }
}

}  // namespace detail

/// Percentage cells that are blank, or the census suppression marker "(S)", read as 0.
inline std::vector<CensusAggregateRow> load_census_table(const csv::Table& table, const CensusSchema& schema) {
  if (schema.percent_columns.empty()) throw InvalidArgument("census schema declares no percentage columns");
  const std::size_t name_col = table.require_column(schema.surname);
  const std::size_t count_col = table.require_column(schema.count);
  std::vector<std::pair<std::size_t, std::string>> pct_cols;
  for (const auto& [column, label] : schema.percent_columns) pct_cols.emplace_back(table.require_column(column), label);

  std::vector<CensusAggregateRow> rows;
  for (const auto& row : table.rows) {
    const std::string where = table.source + ":" + std::to_string(row.line);
    CensusAggregateRow out;
    out.surname = std::string(str::trim(row.fields[name_col]));
    if (out.surname.empty()) continue;
    out.count = detail::parse_count(str::trim(row.fields[count_col]), where);
    for (const auto& [col, label] : pct_cols) {
      const auto cell = str::trim(row.fields[col]);
      const double pct = (cell.empty() || cell == "(S)") ? 0.0 : detail::parse_double(cell, where);
      out.race_percentages[label] += pct;
    }
    try {
      validate_census_row(out);
    } catch (const InvalidArgument& e) {
      throw DataError(where + ": " + e.what());
    }
    rows.push_back(std::move(out));
  }
  if (rows.empty()) throw DataError(table.source + ": no valid rows");
  return rows;
}

inline std::vector<CensusAggregateRow> load_census_csv(const std::string& path, const CensusSchema& schema) {
  return load_census_table(csv::read(path), schema);
}

struct CensusExpansion {
  std::vector<NameRecord> records;
  std::size_t dropped = 0;  // draws that fell in the residual mass 1 - sum(floor(pct))/100
};

/// Draws `n_samples` surnames with replacement, probability proportional to
/// count, then one label per draw with P(c) = floor(pct_c) / 100. Draws in the
/// leftover mass produce no record. Labels are visited in lexicographic order.
inline CensusExpansion expand_census_aggregate(std::span<const CensusAggregateRow> rows, std::size_t n_samples,
                                               std::uint64_t seed) {
  if (n_samples == 0) throw InvalidArgument("n_samples must be positive");
  std::vector<std::uint64_t> cumulative;
  cumulative.reserve(rows.size());
  std::uint64_t total = 0;
  for (const auto& row : rows) {
    validate_census_percentages(row);
    if (row.count > UINT64_MAX - total) throw InvalidArgument("census counts overflow");
    total += row.count;
    cumulative.push_back(total);
  }
  if (total == 0) throw InvalidArgument("all census counts are zero");

  // Per-row cumulative integer thresholds on a 0..99 draw.
  std::vector<std::vector<std::pair<int, const std::string*>>> thresholds(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int acc = 0;
    for (const auto& [label, pct] : rows[i].race_percentages) {
      const int floored = static_cast<int>(std::floor(pct));
      if (floored == 0) continue;
      acc += floored;
      thresholds[i].emplace_back(acc, &label);
    }
    if (acc > 100) {
      throw InvalidArgument("census row '" + rows[i].surname + "': floored percentages sum to " + std::to_string(acc));
    }
  }

  Rng rng(seed);
  CensusExpansion out;
  out.records.reserve(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const std::uint64_t pick = rng.uniform_index(total);
    const auto row_idx =
        static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    const int roll = static_cast<int>(rng.uniform_index(100));
    const std::string* label = nullptr;
    for (const auto& [bound, lab] : thresholds[row_idx]) {
      if (roll < bound) {
        label = lab;
        break;
      }
    }
    if (label == nullptr) {
      ++out.dropped;
      continue;
    }
    out.records.push_back(NameRecord{rows[row_idx].surname, std::nullopt, *label});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splitting and sampling

struct TrainTestSplit {
  std::vector<NameRecord> train;
  std::vector<NameRecord> test;
};

/// Stratified split. |test| = round(test_fraction * N); each class receives
/// floor(f * n_c) test rows plus one extra for the classes with the largest
/// fractional remainders (ties to the lower class index). Both outputs keep
/// the input's relative order.
inline TrainTestSplit split_train_test(std::span<const NameRecord> records, double test_fraction,
                                       std::uint64_t seed) {
  if (records.empty()) throw InvalidArgument("cannot split an empty record list");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("test_fraction must be in (0,1)");

  const auto labels = LabelSet::from_records(records);
  std::vector<std::vector<std::size_t>> by_class(labels.size());
  for (std::size_t i = 0; i < records.size(); ++i) by_class[labels.index_of(records[i].label)].push_back(i);

  const auto n_total = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(records.size())));
  std::vector<std::size_t> quota(labels.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    const double exact = test_fraction * static_cast<double>(by_class[c].size());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n_total && k < remainders.size(); ++k) {
    if (remainders[k].first <= 0.0) break;
    ++quota[remainders[k].second];
    ++assigned;
  }

  if (assigned == 0 || assigned == records.size()) {
    throw InvalidArgument("test_fraction " + std::to_string(test_fraction) + " leaves an empty train or test set for " +
                          std::to_string(records.size()) + " records");
  }

  Rng rng(seed);
  std::vector<char> in_test(records.size(), 0);
  for (std::size_t c = 0; c < labels.size(); ++c) {
    auto members = by_class[c];
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t k = 0; k < quota[c]; ++k) in_test[members[k]] = 1;
  }

  TrainTestSplit out;
  out.test.reserve(assigned);
  out.train.reserve(records.size() - assigned);
  for (std::size_t i = 0; i < records.size(); ++i) (in_test[i] ? out.test : out.train).push_back(records[i]);
  return out;
}

/// Uniform sample of n records without replacement (partial Fisher-Yates), in draw order.
inline std::vector<NameRecord> sample_records(std::span<const NameRecord> records, std::size_t n,
                                              std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("sample size must be positive");
  if (n > records.size()) {
    throw InvalidArgument("sample size " + std::to_string(n) + " exceeds " + std::to_string(records.size()) +
                          " records");
  }
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  std::vector<NameRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(order.size() - i));
    std::swap(order[i], order[j]);
    out.push_back(records[order[i]]);
  }
  return out;
}

}  // namespace namerace
