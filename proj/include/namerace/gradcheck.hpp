#pragma once

// Finite-difference verification of backward().
//
// The numeric side never touches forward(): it evaluates the loss with a
// plain-loop reference implementation templated on the scalar type. With
// `double` this is ordinary f64 central differencing; with `long double` the
// loss is accumulated in extended precision, which removes most of the
// roundoff that otherwise dominates the difference quotient at a 1e-5 step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "namerace/lstm.hpp"

namespace namerace::nn {

enum class OraclePrecision { float64, extended };

struct GradCheckOptions {
  ModelConfig config{20, 4, 5, 3, 0.2, 0.2, 6};
  std::uint64_t seed = 7;
  double step = 1e-5;
  int batch = 1;
  OraclePrecision precision = OraclePrecision::float64;
  double denominator_floor = 1e-8;  // see relative_error()
};

struct TensorError {
  std::string name;
  double max_relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<TensorError> tensors;

  double max() const {
    double m = 0.0;
    for (const auto& t : tensors) m = std::max(m, t.max_relative_error);
    return m;
  }
};

/// |a - n| / max(|a|, |n|, floor); 0 when both agree exactly.
inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
  const double diff = std::abs(analytic - numeric);
  if (diff == 0.0) return 0.0;
  return diff / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Batch-mean cross-entropy computed with scalar loops only.
template <typename Scalar>
Scalar reference_loss(const IndexBatch& batch, const std::vector<int>& labels, const ModelParams& p,
                      const ModelConfig& cfg, const DropoutMasks* masks) {
  using std::exp;
  using std::log;
  using std::tanh;
  const Eigen::Index D = cfg.embed_dim;
  const Eigen::Index H = cfg.hidden_dim;
  const Eigen::Index K = cfg.n_classes;
  auto sigmoid = [](Scalar x) { return Scalar(1) / (Scalar(1) + exp(-x)); };

  Scalar total = 0;
  std::vector<Scalar> h(H), c(H), hm(H), x(D), z(4 * H), logits(K);
  for (Eigen::Index b = 0; b < batch.rows(); ++b) {
    std::fill(h.begin(), h.end(), Scalar(0));
    std::fill(c.begin(), c.end(), Scalar(0));
    for (Eigen::Index t = 0; t < batch.cols(); ++t) {
      for (Eigen::Index d = 0; d < D; ++d) {
        x[d] = Scalar(p.embedding(batch(b, t), d)) * (masks ? Scalar(masks->input(b, d)) : Scalar(1));
      }
      for (Eigen::Index j = 0; j < H; ++j) hm[j] = h[j] * (masks ? Scalar(masks->recurrent(b, j)) : Scalar(1));
      for (Eigen::Index g = 0; g < 4 * H; ++g) {
        Scalar acc = Scalar(p.lstm_bias(g));
        for (Eigen::Index d = 0; d < D; ++d) acc += x[d] * Scalar(p.input_weights(d, g));
        for (Eigen::Index j = 0; j < H; ++j) acc += hm[j] * Scalar(p.recurrent_weights(j, g));
        z[g] = acc;
      }
      for (Eigen::Index j = 0; j < H; ++j) {
        const Scalar in = sigmoid(z[j]);
        const Scalar forget = sigmoid(z[H + j]);
        const Scalar cand = tanh(z[2 * H + j]);
        const Scalar out = sigmoid(z[3 * H + j]);
        c[j] = forget * c[j] + in * cand;
        h[j] = out * tanh(c[j]);
      }
    }
    Scalar max_logit = 0;
    for (Eigen::Index k = 0; k < K; ++k) {
      Scalar acc = Scalar(p.output_bias(k));
      for (Eigen::Index j = 0; j < H; ++j) acc += h[j] * Scalar(p.output_weights(j, k));
      logits[k] = acc;
      max_logit = k == 0 ? acc : std::max(max_logit, acc);
    }
    Scalar norm = 0;
    for (Eigen::Index k = 0; k < K; ++k) norm += exp(logits[k] - max_logit);
    total += -(logits[labels[static_cast<std::size_t>(b)]] - max_logit - log(norm));
  }
  return total / Scalar(batch.rows());
}

/// Compares backward() against central differences over every parameter of a
/// random model and batch. Biases and the pad row are randomized as well so no
/// block of the gradient is trivially zero. `tamper` may alter the analytic
/// gradients before comparison.
inline GradCheckReport gradient_check(const GradCheckOptions& opts,
                                      const std::function<void(Gradients&)>& tamper = {}) {
  const ModelConfig& cfg = opts.config;
  cfg.validate();
  Rng rng(opts.seed);
  ModelParams params = init_params(cfg, rng.next_u64());
  for (auto& v : params.views()) {
    if (v.is_vector) {
      for (double& x : v.values) x += rng.uniform(-0.5, 0.5);
    }
  }
  for (auto& x : params.embedding.row(Vocabulary::pad_index)) x = rng.uniform(-0.5, 0.5);

  IndexBatch batch(opts.batch, cfg.window);
  std::vector<int> labels(static_cast<std::size_t>(opts.batch));
  for (Eigen::Index b = 0; b < batch.rows(); ++b) {
    const auto pads = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(cfg.window) / 2 + 1));
    for (Eigen::Index t = 0; t < batch.cols(); ++t) {
      batch(b, t) = t < pads ? Vocabulary::pad_index
                             : static_cast<std::int32_t>(rng.uniform_index(static_cast<std::uint64_t>(cfg.vocab_size)));
    }
    labels[static_cast<std::size_t>(b)] =
        static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cfg.n_classes)));
  }
  const bool use_masks = cfg.dropout > 0.0 || cfg.recurrent_dropout > 0.0;
  const DropoutMasks masks = draw_masks(rng, batch.rows(), cfg);
  const DropoutMasks* mask_ptr = use_masks ? &masks : nullptr;

  auto loss_delta = [&](const ModelParams& up, const ModelParams& down) -> double {
    if (opts.precision == OraclePrecision::extended) {
      return static_cast<double>(reference_loss<long double>(batch, labels, up, cfg, mask_ptr) -
                                 reference_loss<long double>(batch, labels, down, cfg, mask_ptr));
    }
    return reference_loss<double>(batch, labels, up, cfg, mask_ptr) -
           reference_loss<double>(batch, labels, down, cfg, mask_ptr);
  };

  ForwardCache cache;
  forward(batch, params, cfg, mask_ptr, &cache);
  Gradients analytic = backward(cache, labels, params, cfg);
  if (tamper) tamper(analytic);

  GradCheckReport report;
  ModelParams up = params;
  ModelParams down = params;
  auto uv = up.views();
  auto dv = down.views();
  const auto pv = params.views();
  const auto av = analytic.views();
  for (std::size_t k = 0; k < ModelParams::kTensorCount; ++k) {
    TensorError err{std::string(pv[k].name), 0.0};
    for (std::size_t i = 0; i < pv[k].values.size(); ++i) {
      const double saved = pv[k].values[i];
      uv[k].values[i] = saved + opts.step;
      dv[k].values[i] = saved - opts.step;
      const double numeric = loss_delta(up, down) / (2.0 * opts.step);
      uv[k].values[i] = saved;
      dv[k].values[i] = saved;
      err.max_relative_error =
          std::max(err.max_relative_error, relative_error(av[k].values[i], numeric, opts.denominator_floor));
    }
    report.tensors.push_back(std::move(err));
  }
  return report;
}

}  // namespace namerace::nn
