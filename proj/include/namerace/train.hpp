#pragma once

// Minibatch training loop and batch inference.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "namerace/adam.hpp"
#include "namerace/lstm.hpp"

namespace namerace::nn {

/// Seed used whenever the caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 20170521;

struct TrainConfig {
  int epochs = 15;
  int batch_size = 32;
  AdamConfig adam{};
  std::uint64_t seed = kDefaultSeed;
  double clip_norm = 0.0;  // global gradient-norm clip; 0 disables

  void validate() const {
    if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
    if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
    if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0) || !(adam.beta2 > 0.0 && adam.beta2 < 1.0)) {
      throw InvalidArgument("adam betas must be in (0,1)");
    }
    if (adam.alpha < 0.0 || adam.epsilon <= 0.0) throw InvalidArgument("adam alpha must be >= 0 and epsilon > 0");
    if (clip_norm < 0.0) throw InvalidArgument("clip_norm must be >= 0");
  }
};

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_loss;  // mean training cross-entropy per epoch
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

inline double gradient_norm(const Gradients& g) {
  double sq = 0.0;
  for (const auto& v : g.views()) {
    for (double x : v.values) sq += x * x;
  }
  return std::sqrt(sq);
}

/// Trains from init_params(config, tconfig.seed). Each epoch reshuffles the
/// examples and draws fresh dropout masks per sequence; every minibatch takes
/// one Adam step on the batch-mean gradient.
inline TrainResult train(std::span<const EncodedSequence> sequences, std::span<const int> labels,
                         const ModelConfig& config, const TrainConfig& tconfig, const EpochCallback& on_epoch = {}) {
  config.validate();
  tconfig.validate();
  if (sequences.empty()) throw InvalidArgument("training set is empty");
  if (sequences.size() != labels.size()) throw InvalidArgument("sequence and label counts differ");
  for (int y : labels) {
    if (y < 0 || y >= config.n_classes) throw InvalidArgument("label index out of range");
  }

  TrainResult result{init_params(config, tconfig.seed), {}};
  AdamState adam = AdamState::zeros(config);
  const Rng root(tconfig.seed);
  Rng order_rng = root.derive(1);
  Rng mask_rng = root.derive(2);

  std::vector<std::size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch_size = static_cast<std::size_t>(tconfig.batch_size);
  const bool use_dropout = config.dropout > 0.0 || config.recurrent_dropout > 0.0;
  ForwardCache cache;
  std::vector<EncodedSequence> batch_seqs;
  std::vector<int> batch_labels;

  for (int epoch = 0; epoch < tconfig.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(start + batch_size, order.size());
      batch_seqs.clear();
      batch_labels.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch_seqs.push_back(sequences[order[k]]);
        batch_labels.push_back(labels[order[k]]);
      }
      const IndexBatch batch = make_batch(batch_seqs);
      DropoutMasks masks;
      if (use_dropout) masks = draw_masks(mask_rng, batch.rows(), config);
      const Matrix probs = forward(batch, result.params, config, use_dropout ? &masks : nullptr, &cache);
      for (Eigen::Index b = 0; b < probs.rows(); ++b) {
        loss_sum += cross_entropy(std::span<const double>(probs.row(b).data(), static_cast<std::size_t>(probs.cols())),
                                  static_cast<std::size_t>(batch_labels[static_cast<std::size_t>(b)]));
      }
      Gradients grads = backward(cache, batch_labels, result.params, config);
      if (tconfig.clip_norm > 0.0) {
        const double norm = gradient_norm(grads);
        if (norm > tconfig.clip_norm) {
          for (auto& v : grads.views()) {
            for (double& x : v.values) x *= tconfig.clip_norm / norm;
          }
        }
      }
      adam_step(result.params, grads, adam, tconfig.adam);
    }
    const double mean_loss = loss_sum / static_cast<double>(sequences.size());
    result.epoch_loss.push_back(mean_loss);
    if (on_epoch) on_epoch(epoch + 1, mean_loss);
  }
  return result;
}

/// Inference-mode probabilities, one row per input, in input order. Work is
/// cut into fixed 256-row chunks independent of `threads`, so the output does
/// not depend on the thread count.
inline Matrix predict_proba(std::span<const EncodedSequence> sequences, const ModelParams& params,
                            const ModelConfig& config, int threads = 1) {
  config.validate();
  constexpr std::size_t kChunk = 256;
  Matrix out(static_cast<Eigen::Index>(sequences.size()), config.n_classes);
  for (const auto& s : sequences) {
    if (s.indices.size() != static_cast<std::size_t>(config.window)) {
      throw InvalidArgument("sequence length " + std::to_string(s.indices.size()) + " does not match window " +
                            std::to_string(config.window));
    }
  }
  const std::size_t n_chunks = (sequences.size() + kChunk - 1) / kChunk;
  auto run = [&](std::size_t first_chunk, std::size_t stride) {
    for (std::size_t c = first_chunk; c < n_chunks; c += stride) {
      const std::size_t begin = c * kChunk;
      const std::size_t end = std::min(begin + kChunk, sequences.size());
      const Matrix probs = forward(make_batch(sequences.subspan(begin, end - begin)), params, config);
      out.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)) = probs;
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::max(1, threads));
  if (n_threads == 1 || n_chunks <= 1) {
    run(0, 1);
    return out;
  }
  // Exceptions cannot escape a std::thread; inputs were validated above.
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(n_threads, n_chunks); ++t) pool.emplace_back(run, t, n_threads);
  for (auto& th : pool) th.join();
  return out;
}

inline std::size_t argmax(std::span<const double> probs) {
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

}  // namespace namerace::nn
