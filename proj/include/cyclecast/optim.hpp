#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cyclecast/autodiff.hpp"
#include "cyclecast/rng.hpp"

namespace cyclecast {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t t = 0;
};

/// One bias-corrected Adam update, in place. Moments are created on the first
/// call; afterwards their shapes must match the parameters.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state);

/// Fills t with uniform(-s, s), s = 1/sqrt(fan_in).
void init_uniform(Tensor& t, std::size_t fan_in, Rng& rng);

}  // namespace cyclecast
