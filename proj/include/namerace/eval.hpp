#pragma once

// Confusion matrices and per-class precision / recall / F1 / support reports
// with support-weighted "avg / total" rows.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "namerace/corpus.hpp"
#include "namerace/error.hpp"

namespace namerace {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(LabelSet labels)
      : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {}

  const LabelSet& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }

  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_.at(truth * size() + predicted); }
  void add(std::size_t truth, std::size_t predicted, std::uint64_t n = 1) { counts_.at(truth * size() + predicted) += n; }

  std::uint64_t row_sum(std::size_t truth) const {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < size(); ++j) s += at(truth, j);
    return s;
  }
  std::uint64_t column_sum(std::size_t predicted) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < size(); ++i) s += at(i, predicted);
    return s;
  }
  std::uint64_t trace() const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < size(); ++i) s += at(i, i);
    return s;
  }
  std::uint64_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  LabelSet labels_;
  std::vector<std::uint64_t> counts_;
};

inline ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, const LabelSet& labels) {
  if (truth.size() != predicted.size()) {
    throw InvalidArgument("confusion: " + std::to_string(truth.size()) + " true labels vs " +
                          std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix m(labels);
  const auto k = static_cast<int>(labels.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= k || predicted[i] < 0 || predicted[i] >= k) {
      throw InvalidArgument("confusion: class index out of range at position " + std::to_string(i));
    }
    m.add(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
  }
  return m;
}

inline ConfusionMatrix confusion(std::span<const std::string> truth, std::span<const std::string> predicted,
                                 const LabelSet& labels) {
  if (truth.size() != predicted.size()) {
    throw InvalidArgument("confusion: " + std::to_string(truth.size()) + " true labels vs " +
                          std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix m(labels);
  for (std::size_t i = 0; i < truth.size(); ++i) m.add(labels.index_of(truth[i]), labels.index_of(predicted[i]));
  return m;
}

/// Support-weighted mean: sum(s_c * v_c) / sum(s_c).
inline double weighted_average(std::span<const double> values, std::span<const std::uint64_t> supports) {
  if (values.size() != supports.size()) throw InvalidArgument("weighted_average: size mismatch");
  double num = 0.0;
  std::uint64_t den = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += static_cast<double>(supports[i]) * values[i];
    den += supports[i];
  }
  if (den == 0) throw InvalidArgument("weighted_average: total support is zero");
  return num / static_cast<double>(den);
}

/// Harmonic mean; 0 when both inputs are 0.
inline double f1_score(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct AverageMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassificationReport {
  std::vector<ClassMetrics> per_class;
  AverageMetrics weighted_avg;  // the "avg / total" row
  AverageMetrics macro_avg;     // unweighted mean, reported as an extra
  double accuracy = 0.0;
  std::uint64_t total_support = 0;
};

/// Precision of a never-predicted class and recall of an absent class are 0.
inline ClassificationReport report(const ConfusionMatrix& m) {
  const std::uint64_t total = m.total();
  if (total == 0) throw InvalidArgument("report: confusion matrix is empty");

  ClassificationReport r;
  r.total_support = total;
  r.accuracy = static_cast<double>(m.trace()) / static_cast<double>(total);
  std::vector<double> p, rc, f;
  std::vector<std::uint64_t> s;
  for (std::size_t c = 0; c < m.size(); ++c) {
    ClassMetrics cm;
    cm.label = m.labels().label(c);
    const auto col = m.column_sum(c);
    const auto row = m.row_sum(c);
    const auto hit = static_cast<double>(m.at(c, c));
    cm.precision = col ? hit / static_cast<double>(col) : 0.0;
    cm.recall = row ? hit / static_cast<double>(row) : 0.0;
    cm.f1 = f1_score(cm.precision, cm.recall);
    cm.support = row;
    p.push_back(cm.precision);
    rc.push_back(cm.recall);
    f.push_back(cm.f1);
    s.push_back(row);
    r.per_class.push_back(std::move(cm));
  }
  r.weighted_avg = {weighted_average(p, s), weighted_average(rc, s), weighted_average(f, s)};
  const auto k = static_cast<double>(m.size());
  r.macro_avg = {std::accumulate(p.begin(), p.end(), 0.0) / k, std::accumulate(rc.begin(), rc.end(), 0.0) / k,
                 std::accumulate(f.begin(), f.end(), 0.0) / k};
  return r;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline std::string with_thousands(std::uint64_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace detail

inline constexpr std::string_view kWeightedRowName = "avg / total";
inline constexpr std::string_view kMacroRowName = "macro avg";

/// Aligned plain-text table: precision, recall, f1-score, support, values to 2 decimals.
inline std::string render_text(const ClassificationReport& r) {
  std::size_t name_w = kWeightedRowName.size();
  for (const auto& c : r.per_class) name_w = std::max(name_w, c.label.size());
  std::size_t support_w = std::string_view("support").size();
  support_w = std::max(support_w, detail::with_thousands(r.total_support).size());
  constexpr std::size_t num_w = 10;

  std::ostringstream out;
  auto line = [&](const std::string& name, const std::string& p, const std::string& rc, const std::string& f,
                  const std::string& s) {
    out << detail::pad_left(name, name_w) << ' ' << detail::pad_left(p, num_w) << ' ' << detail::pad_left(rc, num_w)
        << ' ' << detail::pad_left(f, num_w) << ' ' << detail::pad_left(s, support_w) << '\n';
  };
  line("", "precision", "recall", "f1-score", "support");
  out << '\n';
  for (const auto& c : r.per_class) {
    line(c.label, detail::fixed2(c.precision), detail::fixed2(c.recall), detail::fixed2(c.f1),
         detail::with_thousands(c.support));
  }
  out << '\n';
  const auto& w = r.weighted_avg;
  line(std::string(kWeightedRowName), detail::fixed2(w.precision), detail::fixed2(w.recall), detail::fixed2(w.f1),
       detail::with_thousands(r.total_support));
  const auto& m = r.macro_avg;
  line(std::string(kMacroRowName), detail::fixed2(m.precision), detail::fixed2(m.recall), detail::fixed2(m.f1),
       detail::with_thousands(r.total_support));
  out << '\n' << "accuracy " << detail::fixed2(r.accuracy) << '\n';
  return out.str();
}

/// Full-precision CSV: one row per class, then "avg / total" and "macro avg".
inline void write_report_csv(std::ostream& out, const ClassificationReport& r) {
  using detail::exact;
  csv::write_row(out, {"label", "precision", "recall", "f1_score", "support"});
  for (const auto& c : r.per_class) {
    csv::write_row(out, {c.label, exact(c.precision), exact(c.recall), exact(c.f1), std::to_string(c.support)});
  }
  const auto& w = r.weighted_avg;
  csv::write_row(out, {std::string(kWeightedRowName), exact(w.precision), exact(w.recall), exact(w.f1),
                       std::to_string(r.total_support)});
  const auto& m = r.macro_avg;
  csv::write_row(out, {std::string(kMacroRowName), exact(m.precision), exact(m.recall), exact(m.f1),
                       std::to_string(r.total_support)});
}

}  // namespace namerace
