#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cyclecast/autodiff.hpp"
#include "cyclecast/rng.hpp"

namespace cyclecast {

/// Callback used to enumerate parameters: (name, tensor, is_weight). Biases
/// report is_weight = false and are left out of the L2 penalty.
using ParamVisitor = std::function<void(const std::string&, Tensor&, bool)>;

/// One LSTM cell. Gates are computed in one product
///   [x, h] * w + b,  w: (input + hidden) x 4*hidden,
/// with column blocks ordered input, forget, output, candidate.
struct LstmCellParams {
  std::size_t input = 0;
  std::size_t hidden = 0;
  Tensor w;
  Tensor b;

  LstmCellParams() = default;
  LstmCellParams(std::size_t input, std::size_t hidden);

  void init(Rng& rng);
  void visit(const std::string& prefix, const ParamVisitor& f);
};

struct LstmState {
  Var h;
  Var c;
};

/// One step of the recurrence on a batch (rows are samples). With relu_gates
/// the candidate and the cell-output squashing use ReLU instead of tanh.
LstmState lstm_step(const LstmCellParams& p, Var x, LstmState prev, bool relu_gates = false);

struct BiLstmLayer {
  LstmCellParams fwd;
  LstmCellParams bwd;  // hidden == 0 when the layer is unidirectional
};

/// Stacked (bi)directional LSTM, optionally followed by a time-distributed
/// linear projection. ReLU is applied between stacked layers.
struct BiLstmStackParams {
  std::size_t input = 0;
  std::vector<std::size_t> sizes;
  bool bidirectional = true;
  bool relu_gates = false;
  bool project = true;
  std::vector<BiLstmLayer> layers;
  Tensor proj_w;  // out x out, empty without projection
  Tensor proj_b;  // 1 x out

  BiLstmStackParams() = default;
  BiLstmStackParams(std::size_t input, std::vector<std::size_t> sizes, bool bidirectional, bool relu_gates = false,
                    bool project = true);

  /// Per-step representation width: last size, doubled when bidirectional.
  std::size_t output() const;
  void init(Rng& rng);
  void visit(const std::string& prefix, const ParamVisitor& f);
};

/// Runs the stack over `steps` (one N x input matrix per time step, oldest
/// first) and returns one N x output() matrix per step.
std::vector<Var> bilstm_forward(const BiLstmStackParams& p, const std::vector<Var>& steps);

/// Linear encoder f: dim -> bottleneck and decoder g: bottleneck -> dim.
struct AutoencoderParams {
  std::size_t dim = 0;
  std::size_t bottleneck = 0;
  Tensor enc_w, enc_b, dec_w, dec_b;

  AutoencoderParams() = default;
  AutoencoderParams(std::size_t dim, std::size_t bottleneck);

  void init(Rng& rng);
  void visit(const std::string& prefix, const ParamVisitor& f);
};

struct Encoded {
  Var z;
  Var reconstruction;
};

Var encode(const AutoencoderParams& p, Var h);
Var decode(const AutoencoderParams& p, Var z);
Encoded autoencode(const AutoencoderParams& p, Var h);

/// Per-step sigmoid gate a_t = sigmoid(step_t * u + c), not normalized.
struct AttentionParams {
  std::size_t dim = 0;
  Tensor u;  // dim x 1
  Tensor c;  // 1 x 1

  AttentionParams() = default;
  explicit AttentionParams(std::size_t dim);

  void init(Rng& rng);
  void visit(const std::string& prefix, const ParamVisitor& f);
};

struct Pooled {
  Var pooled;              // N x dim
  std::vector<Var> gates;  // one N x 1 per step; empty when ungated
};

/// sum_t a_t * step_t. With params == nullptr every gate is 1.
Pooled attention_pool(const AttentionParams* params, const std::vector<Var>& steps);

/// Dense layer x * w + b.
Var dense(Var x, const Tensor& w, const Tensor& b);

}  // namespace cyclecast
