#include "cyclecast/layers.hpp"

#include <array>

#include "cyclecast/error.hpp"
#include "cyclecast/optim.hpp"

namespace cyclecast {

namespace {

Tape& tape_for(Var v) {
  if (v.tape == nullptr) fail(ErrorKind::ShapeMismatch, "variable not bound to a tape");
  return *v.tape;
}

void expect_cols(Var v, std::size_t cols, const char* what) {
  if (v.cols() != cols)
    fail(ErrorKind::ShapeMismatch,
         std::string(what) + ": expected " + std::to_string(cols) + " columns, got " + std::to_string(v.cols()));
}

}  // namespace

Var dense(Var x, const Tensor& w, const Tensor& b) {
  Tape& t = tape_for(x);
  return add(matmul(x, t.param(w)), t.param(b));
}

LstmCellParams::LstmCellParams(std::size_t input_dim, std::size_t hidden_dim)
    : input(input_dim), hidden(hidden_dim), w(input_dim + hidden_dim, 4 * hidden_dim), b(1, 4 * hidden_dim) {}

void LstmCellParams::init(Rng& rng) {
  init_uniform(w, input + hidden, rng);
  init_uniform(b, input + hidden, rng);
}

void LstmCellParams::visit(const std::string& prefix, const ParamVisitor& f) {
  f(prefix + ".w", w, true);
  f(prefix + ".b", b, false);
}

LstmState lstm_step(const LstmCellParams& p, Var x, LstmState prev, bool relu_gates) {
  expect_cols(x, p.input, "lstm_step input");
  expect_cols(prev.h, p.hidden, "lstm_step hidden");
  expect_cols(prev.c, p.hidden, "lstm_step cell");
  if (x.rows() != prev.h.rows() || x.rows() != prev.c.rows())
    fail(ErrorKind::ShapeMismatch, "lstm_step: batch sizes differ");
  Tape& t = tape_for(x);
  const std::size_t H = p.hidden;
  const std::array<Var, 2> xh{x, prev.h};
  Var z = add(matmul(concat_cols(xh), t.param(p.w)), t.param(p.b));
  Var sig = sigmoid(slice_cols(z, 0, 3 * H));
  Var in_gate = slice_cols(sig, 0, H);
  Var forget = slice_cols(sig, H, H);
  Var out_gate = slice_cols(sig, 2 * H, H);
  Var pre = slice_cols(z, 3 * H, H);
  Var cand = relu_gates ? relu(pre) : tanh(pre);
  Var c = add(mul(forget, prev.c), mul(in_gate, cand));
  Var h = mul(out_gate, relu_gates ? relu(c) : tanh(c));
  return {h, c};
}

BiLstmStackParams::BiLstmStackParams(std::size_t input_dim, std::vector<std::size_t> layer_sizes, bool bidi,
                                     bool relu, bool with_projection)
    : input(input_dim), sizes(std::move(layer_sizes)), bidirectional(bidi), relu_gates(relu), project(with_projection) {
  if (sizes.empty()) fail(ErrorKind::InvalidConfig, "LSTM stack needs at least one layer");
  std::size_t in = input;
  for (std::size_t h : sizes) {
    BiLstmLayer layer;
    layer.fwd = LstmCellParams(in, h);
    if (bidirectional) layer.bwd = LstmCellParams(in, h);
    layers.push_back(std::move(layer));
    in = bidirectional ? 2 * h : h;
  }
  if (project) {
    proj_w = Tensor(in, in);
    proj_b = Tensor(1, in);
  }
}

std::size_t BiLstmStackParams::output() const { return bidirectional ? 2 * sizes.back() : sizes.back(); }

void BiLstmStackParams::init(Rng& rng) {
  for (auto& layer : layers) {
    layer.fwd.init(rng);
    if (bidirectional) layer.bwd.init(rng);
  }
  if (project) {
    init_uniform(proj_w, output(), rng);
    init_uniform(proj_b, output(), rng);
  }
}

void BiLstmStackParams::visit(const std::string& prefix, const ParamVisitor& f) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string base = prefix + ".layer" + std::to_string(l);
    layers[l].fwd.visit(base + ".fwd", f);
    if (bidirectional) layers[l].bwd.visit(base + ".bwd", f);
  }
  if (project) {
    f(prefix + ".proj.w", proj_w, true);
    f(prefix + ".proj.b", proj_b, false);
  }
}

namespace {

std::vector<Var> run_direction(const LstmCellParams& p, const std::vector<Var>& steps, bool reverse, bool relu_gates) {
  Tape& t = tape_for(steps.front());
  const std::size_t n = steps.front().rows();
  LstmState state{t.constant(Tensor(n, p.hidden)), t.constant(Tensor(n, p.hidden))};
  std::vector<Var> out(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::size_t idx = reverse ? steps.size() - 1 - i : i;
    state = lstm_step(p, steps[idx], state, relu_gates);
    out[idx] = state.h;
  }
  return out;
}

}  // namespace

std::vector<Var> bilstm_forward(const BiLstmStackParams& p, const std::vector<Var>& steps) {
  if (steps.empty()) fail(ErrorKind::ShapeMismatch, "bilstm_forward: empty window");
  for (Var s : steps) expect_cols(s, p.input, "bilstm_forward input");
  std::vector<Var> current = steps;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    if (l > 0)
      for (Var& v : current) v = relu(v);
    const BiLstmLayer& layer = p.layers[l];
    std::vector<Var> fwd = run_direction(layer.fwd, current, false, p.relu_gates);
    if (p.bidirectional) {
      std::vector<Var> bwd = run_direction(layer.bwd, current, true, p.relu_gates);
      for (std::size_t i = 0; i < current.size(); ++i) {
        const std::array<Var, 2> pair{fwd[i], bwd[i]};
        current[i] = concat_cols(pair);
      }
    } else {
      current = std::move(fwd);
    }
  }
  if (p.project)
    for (Var& v : current) v = dense(v, p.proj_w, p.proj_b);
  return current;
}

AutoencoderParams::AutoencoderParams(std::size_t d, std::size_t b)
    : dim(d), bottleneck(b), enc_w(d, b), enc_b(1, b), dec_w(b, d), dec_b(1, d) {
  if (b == 0) fail(ErrorKind::InvalidConfig, "autoencoder bottleneck must be positive");
}

void AutoencoderParams::init(Rng& rng) {
  init_uniform(enc_w, dim, rng);
  init_uniform(enc_b, dim, rng);
  init_uniform(dec_w, bottleneck, rng);
  init_uniform(dec_b, bottleneck, rng);
}

void AutoencoderParams::visit(const std::string& prefix, const ParamVisitor& f) {
  f(prefix + ".enc.w", enc_w, true);
  f(prefix + ".enc.b", enc_b, false);
  f(prefix + ".dec.w", dec_w, true);
  f(prefix + ".dec.b", dec_b, false);
}

Var encode(const AutoencoderParams& p, Var h) {
  expect_cols(h, p.dim, "encode");
  return dense(h, p.enc_w, p.enc_b);
}

Var decode(const AutoencoderParams& p, Var z) {
  expect_cols(z, p.bottleneck, "decode");
  return dense(z, p.dec_w, p.dec_b);
}

Encoded autoencode(const AutoencoderParams& p, Var h) {
  Var z = encode(p, h);
  return {z, decode(p, z)};
}

AttentionParams::AttentionParams(std::size_t d) : dim(d), u(d, 1), c(1, 1) {}

void AttentionParams::init(Rng& rng) {
  init_uniform(u, dim, rng);
  init_uniform(c, dim, rng);
}

void AttentionParams::visit(const std::string& prefix, const ParamVisitor& f) {
  f(prefix + ".u", u, true);
  f(prefix + ".c", c, false);
}

Pooled attention_pool(const AttentionParams* params, const std::vector<Var>& steps) {
  if (steps.empty()) fail(ErrorKind::ShapeMismatch, "attention_pool: no steps");
  Pooled out;
  Var acc;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    Var term = steps[i];
    if (params != nullptr) {
      expect_cols(steps[i], params->dim, "attention_pool");
      Var gate = sigmoid(dense(steps[i], params->u, params->c));
      out.gates.push_back(gate);
      term = mul(steps[i], gate);
    }
    acc = i == 0 ? term : add(acc, term);
  }
  out.pooled = acc;
  return out;
}

}  // namespace cyclecast
