#pragma once

// Embedding -> single LSTM layer -> dense softmax classifier, with variational
// input and recurrent dropout and exact backpropagation through time.
//
// Gate layout in the stacked weights is [input | forget | candidate | output],
// each block hidden_dim wide. All math is in double precision. A batch is a
// B x window matrix of token indices; the classifier reads the final hidden
// state. Pad positions run through the recurrence like any other token.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "namerace/error.hpp"
#include "namerace/rng.hpp"
#include "namerace/textprep.hpp"

namespace namerace::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using Array = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IndexBatch = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ProbVector = std::vector<double>;

struct ModelConfig {
  int vocab_size = 0;  // includes the pad and OOV rows
  int embed_dim = 32;
  int hidden_dim = 128;
  int n_classes = 0;
  double dropout = 0.2;
  double recurrent_dropout = 0.2;
  int window = 20;

  void validate() const {
    if (vocab_size < 1 || embed_dim < 1 || hidden_dim < 1 || n_classes < 1 || window < 1) {
      throw InvalidArgument("model dimensions must all be >= 1");
    }
    if (!(dropout >= 0.0 && dropout < 1.0) || !(recurrent_dropout >= 0.0 && recurrent_dropout < 1.0)) {
      throw InvalidArgument("dropout rates must be in [0,1)");
    }
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Flat view of one parameter tensor, row-major.
template <typename T>
struct TensorView {
  std::string_view name;
  Eigen::Index rows;
  Eigen::Index cols;
  bool is_vector;
  std::span<T> values;
};

struct ModelParams {
  Matrix embedding;           // vocab_size x embed_dim
  Matrix input_weights;       // embed_dim x 4*hidden_dim
  Matrix recurrent_weights;   // hidden_dim x 4*hidden_dim
  RowVector lstm_bias;        // 4*hidden_dim
  Matrix output_weights;      // hidden_dim x n_classes
  RowVector output_bias;      // n_classes

  static constexpr std::size_t kTensorCount = 6;

  static ModelParams zeros(const ModelConfig& c) {
    const auto g = 4 * c.hidden_dim;
    ModelParams p;
    p.embedding = Matrix::Zero(c.vocab_size, c.embed_dim);
    p.input_weights = Matrix::Zero(c.embed_dim, g);
    p.recurrent_weights = Matrix::Zero(c.hidden_dim, g);
    p.lstm_bias = RowVector::Zero(g);
    p.output_weights = Matrix::Zero(c.hidden_dim, c.n_classes);
    p.output_bias = RowVector::Zero(c.n_classes);
    return p;
  }

  std::array<TensorView<double>, kTensorCount> views() { return make_views<double>(*this); }
  std::array<TensorView<const double>, kTensorCount> views() const { return make_views<const double>(*this); }

  /// True when every tensor has the shape `c` implies.
  bool matches(const ModelConfig& c) const {
    const auto g = 4 * c.hidden_dim;
    return embedding.rows() == c.vocab_size && embedding.cols() == c.embed_dim && input_weights.rows() == c.embed_dim &&
           input_weights.cols() == g && recurrent_weights.rows() == c.hidden_dim && recurrent_weights.cols() == g &&
           lstm_bias.size() == g && output_weights.rows() == c.hidden_dim && output_weights.cols() == c.n_classes &&
           output_bias.size() == c.n_classes;
  }

  bool all_finite() const {
    for (const auto& v : views()) {
      for (double x : v.values) {
        if (!std::isfinite(x)) return false;
      }
    }
    return true;
  }

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    const auto va = a.views();
    const auto vb = b.views();
    for (std::size_t i = 0; i < kTensorCount; ++i) {
      if (va[i].rows != vb[i].rows || va[i].cols != vb[i].cols) return false;
      if (!std::equal(va[i].values.begin(), va[i].values.end(), vb[i].values.begin())) return false;
    }
    return true;
  }

 private:
  template <typename T, typename Self>
  static std::array<TensorView<T>, kTensorCount> make_views(Self& s) {
    auto mat = [](std::string_view name, auto& m, bool vec) {
      return TensorView<T>{name, m.rows(), m.cols(), vec, std::span<T>(m.data(), static_cast<std::size_t>(m.size()))};
    };
    return {mat("embedding", s.embedding, false),         mat("input_weights", s.input_weights, false),
            mat("recurrent_weights", s.recurrent_weights, false), mat("lstm_bias", s.lstm_bias, true),
            mat("output_weights", s.output_weights, false), mat("output_bias", s.output_bias, true)};
  }
};

using Gradients = ModelParams;

/// Glorot-uniform weights, zero pad row, forget-gate bias 1, other biases 0.
/// Tensors are drawn in order embedding, input, recurrent, output weights.
inline ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams p = ModelParams::zeros(config);
  Rng rng(seed);
  auto glorot = [&rng](Matrix& m) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
  };
  glorot(p.embedding);
  glorot(p.input_weights);
  glorot(p.recurrent_weights);
  glorot(p.output_weights);
  p.embedding.row(Vocabulary::pad_index).setZero();
  p.lstm_bias.segment(config.hidden_dim, config.hidden_dim).setConstant(1.0);
  return p;
}

// ---------------------------------------------------------------------------

/// Per-sequence dropout masks, constant across timesteps. Entries are 0 or 1/(1-rate).
struct DropoutMasks {
  Matrix input;      // B x embed_dim
  Matrix recurrent;  // B x hidden_dim
};

inline DropoutMasks draw_masks(Rng& rng, Eigen::Index batch, const ModelConfig& c) {
  auto draw = [&rng, batch](Eigen::Index width, double rate) {
    Matrix m(batch, width);
    const double keep = 1.0 - rate;
    const double scale = 1.0 / keep;
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.bernoulli(keep) ? scale : 0.0;
    return m;
  };
  DropoutMasks masks;
  masks.input = draw(c.embed_dim, c.dropout);
  masks.recurrent = draw(c.hidden_dim, c.recurrent_dropout);
  return masks;
}

struct ForwardCache {
  IndexBatch indices;
  DropoutMasks masks;
  bool has_masks = false;
  std::vector<Matrix> inputs;         // per step: masked embeddings, B x D
  std::vector<Matrix> masked_hidden;  // per step: h_{t-1} * recurrent mask, B x H
  std::vector<Matrix> gates;          // per step: activated [i f g o], B x 4H
  std::vector<Matrix> cells;          // c_0 .. c_T, B x H
  Matrix final_hidden;                // h_T
  Matrix probs;                       // B x K
};

inline IndexBatch make_batch(std::span<const EncodedSequence> seqs) {
  if (seqs.empty()) return IndexBatch(0, 0);
  IndexBatch batch(static_cast<Eigen::Index>(seqs.size()), static_cast<Eigen::Index>(seqs.front().indices.size()));
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    if (seqs[b].indices.size() != static_cast<std::size_t>(batch.cols())) {
      throw InvalidArgument("sequences in a batch must share one window length");
    }
    for (Eigen::Index t = 0; t < batch.cols(); ++t) batch(static_cast<Eigen::Index>(b), t) = seqs[b].indices[t];
  }
  return batch;
}

/// Row-wise softmax with max subtraction.
inline Matrix softmax_rows(const Matrix& logits) {
  Matrix out = logits;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return out;
}

/// -log(p[label] + 1e-12).
inline double cross_entropy(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) throw InvalidArgument("label index out of range");
  return -std::log(probs[label] + 1e-12);
}

namespace detail {

inline void activate_gates(Matrix& z, Eigen::Index h) {
  auto sig = [](auto block) { block = (1.0 + (-block.array()).exp()).inverse().matrix(); };
  sig(z.middleCols(0, h));
  sig(z.middleCols(h, h));
  z.middleCols(2 * h, h) = z.middleCols(2 * h, h).array().tanh().matrix();
  sig(z.middleCols(3 * h, h));
}

}  // namespace detail

/// Runs the model on a batch and returns B x K probabilities. Training mode is
/// selected by passing masks. When `cache` is non-null it receives everything
/// backward() needs.
inline Matrix forward(const IndexBatch& batch, const ModelParams& params, const ModelConfig& config,
                      const DropoutMasks* masks = nullptr, ForwardCache* cache = nullptr) {
  const Eigen::Index B = batch.rows();
  const Eigen::Index T = batch.cols();
  const Eigen::Index D = config.embed_dim;
  const Eigen::Index H = config.hidden_dim;
  if (T != config.window) {
    throw InvalidArgument("sequence length " + std::to_string(T) + " does not match window " +
                          std::to_string(config.window));
  }
  if (!params.matches(config)) throw InvalidArgument("parameter shapes do not match the model config");
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    const auto idx = batch.data()[i];
    if (idx < 0 || idx >= config.vocab_size) {
      throw InvalidArgument("token index " + std::to_string(idx) + " out of vocabulary range [0," +
                            std::to_string(config.vocab_size) + ")");
    }
  }
  if (masks && (masks->input.rows() != B || masks->input.cols() != D || masks->recurrent.rows() != B ||
                masks->recurrent.cols() != H)) {
    throw InvalidArgument("dropout mask shape does not match the batch");
  }

  if (cache) {
    cache->indices = batch;
    cache->has_masks = masks != nullptr;
    if (masks) cache->masks = *masks;
    cache->inputs.assign(static_cast<std::size_t>(T), Matrix());
    cache->masked_hidden.assign(static_cast<std::size_t>(T), Matrix());
    cache->gates.assign(static_cast<std::size_t>(T), Matrix());
    cache->cells.assign(static_cast<std::size_t>(T + 1), Matrix());
    cache->cells[0] = Matrix::Zero(B, H);
  }

  Matrix h = Matrix::Zero(B, H);
  Matrix c = Matrix::Zero(B, H);
  Matrix x(B, D);
  Matrix hm(B, H);
  Matrix z(B, 4 * H);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index b = 0; b < B; ++b) x.row(b) = params.embedding.row(batch(b, t));
    if (masks) {
      x.array() *= masks->input.array();
      hm = h.cwiseProduct(masks->recurrent);
    } else {
      hm = h;
    }
    z.noalias() = x * params.input_weights;
    z.noalias() += hm * params.recurrent_weights;
    z.rowwise() += params.lstm_bias;
    detail::activate_gates(z, H);

    c = z.middleCols(H, H).cwiseProduct(c) + z.middleCols(0, H).cwiseProduct(z.middleCols(2 * H, H));
    h = z.middleCols(3 * H, H).cwiseProduct(c.array().tanh().matrix());

    if (cache) {
      const auto ts = static_cast<std::size_t>(t);
      cache->inputs[ts] = x;
      cache->masked_hidden[ts] = hm;
      cache->gates[ts] = z;
      cache->cells[ts + 1] = c;
    }
  }

  Matrix logits = h * params.output_weights;
  logits.rowwise() += params.output_bias;
  Matrix probs = softmax_rows(logits);
  if (cache) {
    cache->final_hidden = h;
    cache->probs = probs;
  }
  return probs;
}

/// Gradient of the batch-mean cross-entropy with respect to every parameter.
/// The softmax-CE identity d/dlogits = p - onehot is used directly, so the
/// loss floor of 1e-12 does not enter the gradient.
inline Gradients backward(const ForwardCache& cache, std::span<const int> labels, const ModelParams& params,
                          const ModelConfig& config) {
  const Eigen::Index B = cache.indices.rows();
  const Eigen::Index T = cache.indices.cols();
  const Eigen::Index H = config.hidden_dim;
  if (static_cast<Eigen::Index>(labels.size()) != B) throw InvalidArgument("label count does not match batch");

  Gradients g = ModelParams::zeros(config);
  Matrix dlogits = cache.probs;
  for (Eigen::Index b = 0; b < B; ++b) {
    const int y = labels[static_cast<std::size_t>(b)];
    if (y < 0 || y >= config.n_classes) throw InvalidArgument("label index out of range");
    dlogits(b, y) -= 1.0;
  }
  dlogits /= static_cast<double>(B);

  g.output_weights.noalias() = cache.final_hidden.transpose() * dlogits;
  g.output_bias = dlogits.colwise().sum();
  Matrix dh = dlogits * params.output_weights.transpose();
  Matrix dc = Matrix::Zero(B, H);
  Matrix dz(B, 4 * H);
  Matrix dx(B, config.embed_dim);

  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const auto ts = static_cast<std::size_t>(t);
    const Matrix& gates = cache.gates[ts];
    const auto i = gates.middleCols(0, H).array();
    const auto f = gates.middleCols(H, H).array();
    const auto cand = gates.middleCols(2 * H, H).array();
    const auto o = gates.middleCols(3 * H, H).array();
    const Matrix& c_prev = cache.cells[ts];
    const Array tanh_c = cache.cells[ts + 1].array().tanh();

    dc.array() += dh.array() * o * (1.0 - tanh_c.square());
    dz.middleCols(0, H) = (dc.array() * cand * i * (1.0 - i)).matrix();
    dz.middleCols(H, H) = (dc.array() * c_prev.array() * f * (1.0 - f)).matrix();
    dz.middleCols(2 * H, H) = (dc.array() * i * (1.0 - cand.square())).matrix();
    dz.middleCols(3 * H, H) = (dh.array() * tanh_c * o * (1.0 - o)).matrix();
    dc.array() *= f;

    g.input_weights.noalias() += cache.inputs[ts].transpose() * dz;
    g.recurrent_weights.noalias() += cache.masked_hidden[ts].transpose() * dz;
    g.lstm_bias += dz.colwise().sum();

    dx.noalias() = dz * params.input_weights.transpose();
    if (cache.has_masks) dx.array() *= cache.masks.input.array();
    for (Eigen::Index b = 0; b < B; ++b) g.embedding.row(cache.indices(b, t)) += dx.row(b);

    dh.noalias() = dz * params.recurrent_weights.transpose();
    if (cache.has_masks) dh.array() *= cache.masks.recurrent.array();
  }
  return g;
}

// Single-sequence conveniences.

inline ProbVector forward(const EncodedSequence& seq, const ModelParams& params, const ModelConfig& config,
                          const DropoutMasks* masks = nullptr, ForwardCache* cache = nullptr) {
  const Matrix probs = forward(make_batch(std::span<const EncodedSequence>(&seq, 1)), params, config, masks, cache);
  return ProbVector(probs.data(), probs.data() + probs.cols());
}

inline Gradients backward(const ForwardCache& cache, int label, const ModelParams& params,
                          const ModelConfig& config) {
  return backward(cache, std::span<const int>(&label, 1), params, config);
}

}  // namespace namerace::nn
