#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "namerace/error.hpp"
#include "namerace/lstm.hpp"

namespace namerace::nn {

struct AdamConfig {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  ModelParams first_moment;
  ModelParams second_moment;
  std::uint64_t step = 0;

  static AdamState zeros(const ModelConfig& config) {
    return AdamState{ModelParams::zeros(config), ModelParams::zeros(config), 0};
  }
};

/// One bias-corrected Adam update of every tensor. Gradients are checked for
/// NaN/inf before anything is modified.
inline void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, const AdamConfig& cfg) {
  auto p = params.views();
  const auto g = grads.views();
  auto m = state.first_moment.views();
  auto v = state.second_moment.views();
  for (std::size_t k = 0; k < ModelParams::kTensorCount; ++k) {
    if (g[k].values.size() != p[k].values.size() || m[k].values.size() != p[k].values.size() ||
        v[k].values.size() != p[k].values.size()) {
      throw InvalidArgument("adam: shape mismatch in tensor '" + std::string(p[k].name) + "'");
    }
    for (double x : g[k].values) {
      if (!std::isfinite(x)) throw NumericError("adam: non-finite gradient in tensor '" + std::string(g[k].name) + "'");
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < ModelParams::kTensorCount; ++k) {
    auto& pv = p[k].values;
    const auto& gv = g[k].values;
    auto& mv = m[k].values;
    auto& vv = v[k].values;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = cfg.beta1 * mv[i] + (1.0 - cfg.beta1) * gv[i];
      vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * gv[i] * gv[i];
      const double m_hat = mv[i] / bias1;
      const double v_hat = vv[i] / bias2;
      pv[i] -= cfg.alpha * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace namerace::nn
