#pragma once

// Race imputation for contribution records and each group's share of the
// total amount donated, optionally grouped by year.

#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "namerace/corpus.hpp"
#include "namerace/csv.hpp"
#include "namerace/error.hpp"
#include "namerace/eval.hpp"
#include "namerace/model_io.hpp"
#include "namerace/pipeline.hpp"

namespace namerace {

struct ContributionRecord {
  std::string last_name;
  std::optional<std::string> first_name;
  double amount = 0.0;
  std::optional<int> year;
};

struct ContributionSchema {
  std::string last_name = "last_name";
  std::string first_name = "first_name";  // empty: no first-name column
  std::string amount = "amount";
  std::string year = "year";              // used only when present in the header
};

inline std::vector<ContributionRecord> load_contributions_table(const csv::Table& table,
                                                                const ContributionSchema& schema = {}) {
  const std::size_t last_col = table.require_column(schema.last_name);
  const std::size_t amount_col = table.require_column(schema.amount);
  std::optional<std::size_t> first_col;
  if (!schema.first_name.empty()) first_col = table.require_column(schema.first_name);
  const auto year_col = schema.year.empty() ? std::nullopt : table.find_column(schema.year);

  std::vector<ContributionRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    const std::string where = table.source + ":" + std::to_string(row.line);
    ContributionRecord rec;
    rec.last_name = std::string(str::trim(row.fields[last_col]));
    if (first_col) {
      const auto first = str::trim(row.fields[*first_col]);
      if (!first.empty()) rec.first_name = std::string(first);
    }
    rec.amount = detail::parse_double(str::trim(row.fields[amount_col]), where);
    if (!std::isfinite(rec.amount) || rec.amount < 0.0) throw DataError(where + ": amount must be finite and >= 0");
    if (year_col) {
      const auto cell = str::trim(row.fields[*year_col]);
      if (!cell.empty()) {
        const double y = detail::parse_double(cell, where);
        if (y != std::floor(y)) throw DataError(where + ": year must be an integer");
        rec.year = static_cast<int>(y);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<ContributionRecord> load_contributions_csv(const std::string& path,
                                                              const ContributionSchema& schema = {}) {
  return load_contributions_table(csv::read(path), schema);
}

struct ImputedRecord {
  std::size_t record_index = 0;
  int label = 0;  // argmax, ties to the lowest class index
  nn::ProbVector probs;
};

struct Imputation {
  LabelSet labels;
  std::vector<ImputedRecord> rows;
  std::size_t skipped = 0;  // names that normalized to empty
};

inline Imputation impute(std::span<const ContributionRecord> records, const TrainedModel& model, int threads = 1) {
  if (records.empty()) throw InvalidArgument("impute: no records");
  std::vector<NameRecord> names;
  names.reserve(records.size());
  for (const auto& r : records) names.push_back(NameRecord{r.last_name, r.first_name, {}});
  const auto pred = predict_records(model, names, threads);

  Imputation out;
  out.labels = model.labels;
  out.skipped = pred.skipped;
  out.rows.reserve(pred.source.size());
  for (std::size_t i = 0; i < pred.source.size(); ++i) {
    const auto row = pred.probs.row(static_cast<Eigen::Index>(i));
    out.rows.push_back(ImputedRecord{pred.source[i], pred.predicted[i], nn::ProbVector(row.data(), row.data() + row.size())});
  }
  return out;
}

enum class ShareMode {
  hard,  // whole amount to the argmax label
  soft,  // amount split by class probability (extension)
};

struct ShareTable {
  LabelSet labels;
  std::vector<double> shares;   // aligned with labels
  std::vector<double> amounts;  // per-label amount attributed
  double total_amount = 0.0;
  std::size_t n_records = 0;

  double share(std::string_view label) const { return shares.at(labels.index_of(label)); }
};

/// Shares of the total amount over the imputed rows selected by `include`.
template <typename Predicate>
ShareTable compute_shares(std::span<const ContributionRecord> records, const Imputation& imputed, ShareMode mode,
                          Predicate include) {
  ShareTable t;
  t.labels = imputed.labels;
  t.amounts.assign(t.labels.size(), 0.0);
  for (const auto& row : imputed.rows) {
    const auto& rec = records[row.record_index];
    if (!include(rec)) continue;
    ++t.n_records;
    t.total_amount += rec.amount;
    if (mode == ShareMode::hard) {
      t.amounts[static_cast<std::size_t>(row.label)] += rec.amount;
    } else {
      for (std::size_t c = 0; c < t.amounts.size(); ++c) t.amounts[c] += rec.amount * row.probs[c];
    }
  }
  if (t.n_records == 0) throw InvalidArgument("shares: no imputed records");
  if (!(t.total_amount > 0.0)) throw InvalidArgument("shares: total amount is zero");
  t.shares.resize(t.amounts.size());
  double attributed = 0.0;
  for (double a : t.amounts) attributed += a;
  // Soft-mode probabilities sum to 1 only up to rounding; normalize by the
  // attributed total so the shares sum to 1.
  const double denom = mode == ShareMode::hard ? t.total_amount : attributed;
  for (std::size_t c = 0; c < t.shares.size(); ++c) t.shares[c] = t.amounts[c] / denom;
  return t;
}

inline ShareTable shares(std::span<const ContributionRecord> records, const Imputation& imputed,
                         ShareMode mode = ShareMode::hard) {
  return compute_shares(records, imputed, mode, [](const ContributionRecord&) { return true; });
}

inline constexpr std::string_view kUnspecifiedYear = "unspecified";

/// One table per year, ascending, then "unspecified" for records without a year.
inline std::vector<std::pair<std::string, ShareTable>> shares_by_year(std::span<const ContributionRecord> records,
                                                                      const Imputation& imputed,
                                                                      ShareMode mode = ShareMode::hard) {
  std::map<int, bool> years;
  bool has_unspecified = false;
  for (const auto& row : imputed.rows) {
    const auto& y = records[row.record_index].year;
    if (y) years[*y] = true;
    else has_unspecified = true;
  }
  std::vector<std::pair<std::string, ShareTable>> out;
  for (const auto& [year, _] : years) {
    const int y = year;
    out.emplace_back(std::to_string(y), compute_shares(records, imputed, mode, [y](const ContributionRecord& r) {
                       return r.year && *r.year == y;
                     }));
  }
  if (has_unspecified) {
    out.emplace_back(std::string(kUnspecifiedYear), compute_shares(records, imputed, mode, [](const ContributionRecord& r) {
                       return !r.year.has_value();
                     }));
  }
  return out;
}

/// Columns: year, label, share, amount, n_records; one row per label per year group.
inline void write_share_table_csv(std::ostream& out, const std::vector<std::pair<std::string, ShareTable>>& groups) {
  csv::write_row(out, {"year", "label", "share", "amount", "n_records"});
  for (const auto& [year, t] : groups) {
    for (std::size_t c = 0; c < t.labels.size(); ++c) {
      csv::write_row(out, {year, t.labels.label(c), detail::exact(t.shares[c]), detail::exact(t.amounts[c]),
                           std::to_string(t.n_records)});
    }
  }
}

}  // namespace namerace
