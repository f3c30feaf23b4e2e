#pragma once

// Glue between records and the network: vocabulary fitting, encoding,
// end-to-end fitting, batch prediction and held-out evaluation.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "namerace/corpus.hpp"
#include "namerace/eval.hpp"
#include "namerace/lstm.hpp"
#include "namerace/model_io.hpp"
#include "namerace/textprep.hpp"
#include "namerace/train.hpp"

namespace namerace {

struct EncodedCorpus {
  std::vector<EncodedSequence> sequences;
  std::vector<int> labels;             // empty when encoded without a label set
  std::vector<std::size_t> source;     // index of the originating record
  std::size_t degraded = 0;            // full-name mode records lacking a first name
  std::size_t skipped = 0;             // records whose name normalized to empty
};

inline std::vector<std::vector<std::string>> tokenize_records(std::span<const NameRecord> records, NameMode mode) {
  std::vector<std::vector<std::string>> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    auto toks = record_tokens(r, mode);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

/// Vocabulary from full (untruncated) token lists of `records`.
inline Vocabulary fit_vocabulary(std::span<const NameRecord> records, const PrepConfig& prep) {
  return build_vocabulary(tokenize_records(records, prep.mode), prep);
}

/// Encodes every record; with a label set, also maps labels to class indices.
inline EncodedCorpus encode_records(std::span<const NameRecord> records, const PrepConfig& prep,
                                    const Vocabulary& vocab, const LabelSet* labels = nullptr) {
  EncodedCorpus out;
  out.sequences.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    bool degraded = false;
    const auto toks = record_tokens(records[i], prep.mode, &degraded);
    if (toks.empty()) {
      ++out.skipped;
      continue;
    }
    if (degraded) ++out.degraded;
    out.sequences.push_back(encode(toks, vocab, prep.window));
    out.source.push_back(i);
    if (labels) out.labels.push_back(static_cast<int>(labels->index_of(records[i].label)));
  }
  return out;
}

/// Network hyperparameters that are not derived from the data.
struct ArchitectureConfig {
  int embed_dim = 32;
  int hidden_dim = 128;
  double dropout = 0.2;
  double recurrent_dropout = 0.2;
};

struct FitResult {
  TrainedModel model;
  std::vector<double> epoch_loss;
};

/// Vocabulary + label set from `train`, then network training.
inline FitResult fit(std::span<const NameRecord> train, const PrepConfig& prep, const ArchitectureConfig& arch,
                     const nn::TrainConfig& tconfig, const nn::EpochCallback& on_epoch = {}) {
  prep.validate();
  FitResult out;
  out.model.prep = prep;
  out.model.labels = LabelSet::from_records(train);
  out.model.vocab = fit_vocabulary(train, prep);
  const auto encoded = encode_records(train, prep, out.model.vocab, &out.model.labels);
  out.model.model = nn::ModelConfig{static_cast<int>(out.model.vocab.size()), arch.embed_dim, arch.hidden_dim,
                                    static_cast<int>(out.model.labels.size()), arch.dropout,
                                    arch.recurrent_dropout, prep.window};
  auto trained = nn::train(encoded.sequences, encoded.labels, out.model.model, tconfig, on_epoch);
  out.model.params = std::move(trained.params);
  out.epoch_loss = std::move(trained.epoch_loss);
  return out;
}

struct Predictions {
  nn::Matrix probs;                  // one row per encoded record
  std::vector<int> predicted;        // argmax class, ties to the lowest index
  std::vector<std::size_t> source;   // originating record index per row
  std::size_t skipped = 0;
};

inline Predictions predict_records(const TrainedModel& model, std::span<const NameRecord> records, int threads = 1) {
  const auto enc = encode_records(records, model.prep, model.vocab);
  Predictions out;
  out.probs = nn::predict_proba(enc.sequences, model.params, model.model, threads);
  out.source = enc.source;
  out.skipped = enc.skipped;
  out.predicted.reserve(enc.sequences.size());
  for (Eigen::Index r = 0; r < out.probs.rows(); ++r) {
    out.predicted.push_back(static_cast<int>(
        nn::argmax(std::span<const double>(out.probs.row(r).data(), static_cast<std::size_t>(out.probs.cols())))));
  }
  return out;
}

struct Evaluation {
  ConfusionMatrix matrix;
  ClassificationReport report;
  std::size_t skipped = 0;  // unusable names plus labels unknown to the model
};

/// Scores `records` against the model's label set. Records whose label the
/// model never saw are skipped and counted.
inline Evaluation evaluate(const TrainedModel& model, std::span<const NameRecord> records, int threads = 1) {
  std::vector<NameRecord> known;
  std::size_t unknown = 0;
  for (const auto& r : records) {
    if (model.labels.contains(r.label)) known.push_back(r);
    else ++unknown;
  }
  const auto pred = predict_records(model, known, threads);
  std::vector<int> truth;
  truth.reserve(pred.source.size());
  for (auto i : pred.source) truth.push_back(static_cast<int>(model.labels.index_of(known[i].label)));
  auto matrix = confusion(truth, pred.predicted, model.labels);
  auto rep = report(matrix);
  return Evaluation{std::move(matrix), std::move(rep), pred.skipped + unknown};
}

}  // namespace namerace
