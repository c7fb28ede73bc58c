#include "cyclecast/model.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "cyclecast/error.hpp"
#include "cyclecast/eval.hpp"
#include "cyclecast/optim.hpp"

namespace cyclecast {

ParameterSet::ParameterSet(const ModelConfig& c)
    : config(c), bilstm(c.input, c.layer_sizes, c.use_backward, c.lstm_relu_gates) {
  const std::size_t h = bilstm.output();
  if (c.use_autoencoder) autoencoder.emplace(h, c.bottleneck);
  if (c.use_attention) attention.emplace(representation());
  head_w = Tensor(representation(), 1);
  head_b = Tensor(1, 1);
}

std::size_t ParameterSet::representation() const {
  return config.use_autoencoder ? config.bottleneck : bilstm.output();
}

void ParameterSet::init(std::uint64_t seed) {
  // Separate streams so switching a component off leaves the others' draws
  // unchanged.
  Rng lstm_rng(derive_seed(seed, 0));
  bilstm.init(lstm_rng);
  if (autoencoder) {
    Rng rng(derive_seed(seed, 1));
    autoencoder->init(rng);
  }
  if (attention) {
    Rng rng(derive_seed(seed, 2));
    attention->init(rng);
  }
  Rng head_rng(derive_seed(seed, 3));
  init_uniform(head_w, representation(), head_rng);
  init_uniform(head_b, representation(), head_rng);
}

void ParameterSet::visit(const ParamVisitor& f) {
  bilstm.visit("bilstm", f);
  if (autoencoder) autoencoder->visit("autoencoder", f);
  if (attention) attention->visit("attention", f);
  f("head.w", head_w, true);
  f("head.b", head_b, false);
}

std::vector<Tensor*> ParameterSet::tensors() {
  std::vector<Tensor*> out;
  visit([&](const std::string&, Tensor& t, bool) { out.push_back(&t); });
  return out;
}

std::size_t ParameterSet::count() {
  std::size_t n = 0;
  visit([&](const std::string&, Tensor& t, bool) { n += t.size(); });
  return n;
}

std::vector<NamedTensor> ParameterSet::to_named() {
  std::vector<NamedTensor> out;
  visit([&](const std::string& name, Tensor& t, bool) { out.push_back({name, t}); });
  return out;
}

void ParameterSet::load_named(const std::vector<NamedTensor>& named) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& n : named) by_name[n.name] = &n.value;
  std::size_t matched = 0;
  visit([&](const std::string& name, Tensor& t, bool) {
    auto it = by_name.find(name);
    if (it == by_name.end()) fail(ErrorKind::ShapeMismatch, "checkpoint lacks parameter " + name);
    if (!it->second->same_shape(t)) fail(ErrorKind::ShapeMismatch, "checkpoint shape differs for " + name);
    t = *it->second;
    ++matched;
  });
  if (matched != named.size()) fail(ErrorKind::ShapeMismatch, "checkpoint has parameters this model lacks");
}

Batch make_batch(const std::vector<LabeledWindow>& windows) {
  Batch b;
  if (windows.empty()) return b;
  const std::size_t steps = windows.front().steps;
  const std::size_t width = windows.front().width;
  const std::size_t n = windows.size();
  b.steps.assign(steps, Tensor(n, width));
  b.labels = Tensor(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const LabeledWindow& w = windows[i];
    if (w.steps != steps || w.width != width) fail(ErrorKind::ShapeMismatch, "windows of different shapes in batch");
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t f = 0; f < width; ++f) b.steps[t](i, f) = w.at(t, f);
    b.labels[i] = w.label;
    b.months.push_back(w.end_month);
  }
  return b;
}

ForwardResult model_forward(const ParameterSet& params, Tape& tape, const Batch& batch) {
  if (batch.size() == 0) fail(ErrorKind::EmptyBatch, "model_forward on an empty batch");
  std::vector<Var> inputs;
  for (const Tensor& s : batch.steps) inputs.push_back(tape.constant(s));

  ForwardResult out;
  out.h = bilstm_forward(params.bilstm, inputs);
  std::vector<Var> reps = out.h;
  if (params.autoencoder) {
    for (Var& r : reps) r = encode(*params.autoencoder, r);
    out.reconstruction = decode(*params.autoencoder, reps.back());
  }
  Pooled pooled = attention_pool(params.attention ? &*params.attention : nullptr, reps);
  out.gates = std::move(pooled.gates);
  Var score = dense(pooled.pooled, params.head_w, params.head_b);
  out.probability = params.config.sigmoid_head ? sigmoid(score) : add_scalar(scale(tanh(score), 0.5), 0.5);
  return out;
}

LossResult composite_loss(const ParameterSet& params, Tape& tape, const Batch& batch, const LossWeights& weights,
                          std::size_t horizon) {
  if (batch.size() == 0) fail(ErrorKind::EmptyBatch, "composite_loss on an empty batch");
  if (!(weights.alpha >= 0.0) || !(weights.beta >= 0.0) || !std::isfinite(weights.alpha) ||
      !std::isfinite(weights.beta))
    fail(ErrorKind::InvalidConfig, "loss weights must be finite and non-negative");
  ForwardResult fwd = model_forward(params, tape, batch);

  LossResult r;
  Var pred = sum_squares(sub(fwd.probability, tape.constant(batch.labels)));
  r.parts.prediction = pred.value()[0];
  Var total = pred;

  const std::size_t n = batch.size();
  if (params.autoencoder && horizon > 0 && n > horizon) {
    r.pairs = n - horizon;
    Var target = slice_rows(fwd.h.back(), horizon, r.pairs);
    Var recon = slice_rows(fwd.reconstruction, 0, r.pairs);
    Var rec = sum_squares(sub(target, recon));
    r.parts.reconstruction = rec.value()[0];
    total = add(total, scale(rec, weights.alpha));
  }

  Var omega;
  bool have_omega = false;
  const_cast<ParameterSet&>(params).visit([&](const std::string&, Tensor& t, bool is_weight) {
    if (!is_weight) return;
    Var sq = sum_squares(tape.param(t));
    omega = have_omega ? add(omega, sq) : sq;
    have_omega = true;
  });
  r.parts.regularization = omega.value()[0];
  total = add(total, scale(omega, weights.beta));
  r.total = total;
  r.parts.total = total.value()[0];
  return r;
}

namespace {

std::vector<double> probabilities(const ParameterSet& params, const Batch& batch) {
  Tape tape;
  ForwardResult fwd = model_forward(params, tape, batch);
  const Tensor& p = fwd.probability.value();
  return {p.storage().begin(), p.storage().end()};
}

double recession_f1(const ParameterSet& params, const Batch& batch, double threshold) {
  std::vector<double> p = probabilities(params, batch);
  std::vector<int> predicted(p.size()), actual(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    predicted[i] = p[i] >= threshold ? 1 : 0;
    actual[i] = batch.labels[i] >= 0.5 ? 1 : 0;
  }
  return metrics(confusion(predicted, actual, 1)).f1;
}

}  // namespace

TrainResult train(const std::vector<LabeledWindow>& train_windows, const TrainConfig& config,
                  const std::vector<LabeledWindow>& val_windows) {
  if (train_windows.empty()) fail(ErrorKind::EmptyBatch, "no training windows");
  if (config.epochs < 1) fail(ErrorKind::InvalidConfig, "epochs must be at least 1");
  if (!(config.learning_rate > 0.0)) fail(ErrorKind::InvalidConfig, "learning rate must be positive");

  ModelConfig mc = config.model;
  mc.input = train_windows.front().width;
  TrainResult result{ParameterSet(mc), {}, 0, -1.0};
  ParameterSet& params = result.params;
  params.init(config.seed);
  ParameterSet best = params;

  const Batch batch = make_batch(train_windows);
  const Batch val = make_batch(val_windows);
  AdamState adam;
  adam.config.lr = config.learning_rate;
  std::vector<Tensor*> tensors = params.tensors();
  double first_loss = 0.0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Tape tape;
    LossResult loss;
    try {
      loss = composite_loss(params, tape, batch, config.weights, config.horizon);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonFinite) throw;
      fail(ErrorKind::DivergenceDetected, "epoch " + std::to_string(epoch) + ": " + e.detail());
    }
    const double total = loss.parts.total;
    if (!std::isfinite(total)) fail(ErrorKind::DivergenceDetected, "non-finite loss at epoch " + std::to_string(epoch));
    if (epoch == 0) {
      first_loss = total;
    } else if (total > config.divergence_factor * std::max(first_loss, std::numeric_limits<double>::min())) {
      fail(ErrorKind::DivergenceDetected, "loss grew from " + std::to_string(first_loss) + " to " +
                                              std::to_string(total) + " by epoch " + std::to_string(epoch));
    }

    EpochRecord rec{epoch, loss.parts, 0.0};
    if (val.size() > 0) {
      rec.val_f1 = recession_f1(params, val, config.threshold);
      if (rec.val_f1 >= result.best_val_f1) {
        result.best_val_f1 = rec.val_f1;
        result.best_epoch = epoch;
        best = params;
      }
    }
    result.history.push_back(rec);

    tape.backward(loss.total);
    std::vector<Tensor> grads;
    grads.reserve(tensors.size());
    for (Tensor* t : tensors) {
      grads.push_back(tape.grad_of(*t));
      for (double g : grads.back().storage())
        if (!std::isfinite(g))
          fail(ErrorKind::DivergenceDetected, "non-finite gradient at epoch " + std::to_string(epoch));
    }
    adam_step(tensors, grads, adam);
  }

  if (val.size() > 0) {
    params = std::move(best);
  } else {
    result.best_epoch = config.epochs;
    result.best_val_f1 = 0.0;
  }
  return result;
}

std::vector<Prediction> predict(const ParameterSet& params, const std::vector<LabeledWindow>& windows,
                                double threshold) {
  std::vector<Prediction> out;
  if (windows.empty()) return out;
  if (windows.front().width != params.bilstm.input)
    fail(ErrorKind::ShapeMismatch, "window width " + std::to_string(windows.front().width) + " vs model input " +
                                       std::to_string(params.bilstm.input));
  const Batch batch = make_batch(windows);
  std::vector<double> p = probabilities(params, batch);
  for (std::size_t i = 0; i < p.size(); ++i) out.push_back({batch.months[i], p[i], p[i] >= threshold ? 1 : 0});
  return out;
}

}  // namespace cyclecast
