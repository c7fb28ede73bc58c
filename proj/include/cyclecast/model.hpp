#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cyclecast/autodiff.hpp"
#include "cyclecast/checkpoint.hpp"
#include "cyclecast/features.hpp"
#include "cyclecast/layers.hpp"

namespace cyclecast {

struct ModelConfig {
  std::size_t input = kFeatureCount;
  std::vector<std::size_t> layer_sizes{24, 12, 8};
  bool use_attention = true;
  bool use_backward = true;
  bool use_autoencoder = true;
  std::size_t bottleneck = 4;
  bool sigmoid_head = false;
  bool lstm_relu_gates = false;
};

struct LossWeights {
  double alpha = 1.0;
  double beta = 1e-4;
};

struct TrainConfig {
  ModelConfig model;
  std::size_t epochs = 300;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  LossWeights weights;
  std::size_t horizon = 6;  // reconstruction target is the window this many rows later
  double threshold = 0.5;
  // Loss above this multiple of the first epoch's loss counts as divergence.
  double divergence_factor = 1e3;
};

struct ParameterSet {
  ModelConfig config;
  BiLstmStackParams bilstm;
  std::optional<AutoencoderParams> autoencoder;
  std::optional<AttentionParams> attention;
  Tensor head_w;  // rep x 1
  Tensor head_b;  // 1 x 1

  explicit ParameterSet(const ModelConfig& config);

  void init(std::uint64_t seed);
  /// Dimension of the representation fed to attention and the head.
  std::size_t representation() const;
  void visit(const ParamVisitor& f);
  std::vector<Tensor*> tensors();
  std::size_t count();

  std::vector<NamedTensor> to_named();
  /// Copies values by name; names and shapes must match exactly.
  void load_named(const std::vector<NamedTensor>& named);
};

/// Windows laid out per time step: steps[t] is N x width.
struct Batch {
  std::vector<Tensor> steps;
  Tensor labels;  // N x 1
  std::vector<Month> months;

  std::size_t size() const { return months.size(); }
};

Batch make_batch(const std::vector<LabeledWindow>& windows);

struct ForwardResult {
  Var probability;             // N x 1
  std::vector<Var> h;          // per-step representations, N x 16
  Var reconstruction;          // g(f(h_final)); unset without the autoencoder
  std::vector<Var> gates;      // attention gates, empty when disabled
};

ForwardResult model_forward(const ParameterSet& params, Tape& tape, const Batch& batch);

struct LossBreakdown {
  double prediction = 0.0;
  double reconstruction = 0.0;
  double regularization = 0.0;  // Omega, before scaling by beta
  double total = 0.0;
};

struct LossResult {
  Var total;
  LossBreakdown parts;
  std::size_t pairs = 0;
};

/// sum (p - y)^2 + alpha * sum ||h_{i+horizon} - g(f(h_i))||^2 + beta * Omega,
/// with Omega the squared Frobenius norm of every weight matrix.
LossResult composite_loss(const ParameterSet& params, Tape& tape, const Batch& batch, const LossWeights& weights,
                          std::size_t horizon = 6);

struct EpochRecord {
  std::size_t epoch = 0;
  LossBreakdown loss;
  double val_f1 = 0.0;
};

struct TrainResult {
  ParameterSet params;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_f1 = 0.0;
};

/// Full-batch Adam. Returns the parameters from the epoch with the best
/// validation recession F1 (latest on ties); the final epoch's parameters
/// when there is no validation set.
TrainResult train(const std::vector<LabeledWindow>& train_windows, const TrainConfig& config,
                  const std::vector<LabeledWindow>& val_windows);

struct Prediction {
  Month month;
  double probability = 0.0;
  int label = 0;
};

std::vector<Prediction> predict(const ParameterSet& params, const std::vector<LabeledWindow>& windows,
                                double threshold = 0.5);

}  // namespace cyclecast
