#include "cyclecast/baselines.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "cyclecast/error.hpp"
#include "cyclecast/eval.hpp"
#include "cyclecast/optim.hpp"

namespace cyclecast {

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Svm: return "svm";
    case BaselineKind::Logistic: return "logistic";
    case BaselineKind::Probit: return "probit";
    case BaselineKind::Lstm: return "lstm";
    case BaselineKind::Bilstm: return "bilstm";
    case BaselineKind::Autoencoder: return "autoencoder";
    case BaselineKind::Dnn: return "dnn";
  }
  return "unknown";
}

BaselineKind parse_baseline(std::string_view name) {
  for (BaselineKind k : kAllBaselines)
    if (to_string(k) == name) return k;
  fail(ErrorKind::InvalidConfig, "unknown baseline '" + std::string(name) + "'");
}

bool is_deterministic(BaselineKind kind) {
  return kind == BaselineKind::Svm || kind == BaselineKind::Logistic || kind == BaselineKind::Probit;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// log(normal_cdf(z)) and pdf(z)/cdf(z), with asymptotic forms deep in the
// lower tail where the cdf underflows.
double log_normal_cdf(double z) {
  if (z > -30.0) return std::log(normal_cdf(z));
  return -0.5 * z * z - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log1p(-1.0 / (z * z));
}

double mills_ratio(double z) {
  if (z > -30.0) return normal_pdf(z) / normal_cdf(z);
  const double z2 = z * z;
  return -z / (1.0 - 1.0 / z2 + 3.0 / (z2 * z2));
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log1p_exp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Eigen::VectorXd scores(const LinearModel& m, const Eigen::MatrixXd& x) {
  return (x * m.coef).array() + m.intercept;
}

std::vector<int> labels_of(const std::vector<LabeledWindow>& windows) {
  std::vector<int> out;
  for (const auto& w : windows) out.push_back(w.label);
  return out;
}

double recession_f1(const std::vector<double>& probs, const std::vector<int>& actual, double threshold) {
  std::vector<int> predicted;
  for (double p : probs) predicted.push_back(p >= threshold ? 1 : 0);
  return metrics(confusion(predicted, actual, 1)).f1;
}

Batch flat_batch(const std::vector<LabeledWindow>& windows) {
  Batch b;
  if (windows.empty()) return b;
  const std::size_t width = windows.front().steps * windows.front().width;
  Tensor x(windows.size(), width);
  b.labels = Tensor(windows.size(), 1);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].block.size() != width) fail(ErrorKind::ShapeMismatch, "windows of different shapes");
    std::copy(windows[i].block.begin(), windows[i].block.end(), x.data().begin() + static_cast<std::ptrdiff_t>(i * width));
    b.labels[i] = windows[i].label;
    b.months.push_back(windows[i].end_month);
  }
  b.steps.push_back(std::move(x));
  return b;
}

std::vector<double> column(const Tensor& t) { return {t.storage().begin(), t.storage().end()}; }

using Forward = std::function<Var(Tape&, const Batch&)>;

// Full-batch Adam on sum of squared probability errors; keeps the parameters
// of the best validation recession-F1 epoch (latest on ties).
std::size_t fit_net(const std::vector<Tensor*>& params, const Forward& forward, const Batch& train, const Batch& val,
                    const BaselineConfig& config, std::vector<double>& history) {
  AdamState adam;
  adam.config.lr = config.learning_rate;
  std::vector<Tensor> best;
  for (Tensor* p : params) best.push_back(*p);
  double best_f1 = -1.0;
  std::size_t best_epoch = config.epochs;
  std::vector<int> val_labels;
  for (std::size_t i = 0; i < val.size(); ++i) val_labels.push_back(val.labels[i] >= 0.5 ? 1 : 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Tape tape;
    Var loss;
    try {
      Var p = forward(tape, train);
      loss = sum_squares(sub(p, tape.constant(train.labels)));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonFinite) throw;
      fail(ErrorKind::DivergenceDetected, e.detail());
    }
    history.push_back(loss.value()[0]);
    if (val.size() > 0) {
      Tape vt;
      const double f1 = recession_f1(column(forward(vt, val).value()), val_labels, config.threshold);
      if (f1 >= best_f1) {
        best_f1 = f1;
        best_epoch = epoch;
        for (std::size_t i = 0; i < params.size(); ++i) best[i] = *params[i];
      }
    }
    tape.backward(loss);
    std::vector<Tensor> grads;
    for (Tensor* p : params) grads.push_back(tape.grad_of(*p));
    adam_step(params, grads, adam);
  }
  if (val.size() > 0)
    for (std::size_t i = 0; i < params.size(); ++i) *params[i] = best[i];
  return best_epoch;
}

Var recurrent_forward(const RecurrentNet& net, Tape& tape, const Batch& batch) {
  std::vector<Var> steps;
  for (const Tensor& s : batch.steps) steps.push_back(tape.constant(s));
  std::vector<Var> h = bilstm_forward(net.stack, steps);
  return sigmoid(dense(h.back(), net.out_w, net.out_b));
}

Var dnn_forward(const DenseNet& net, Tape& tape, const Batch& batch) {
  Var x = tape.constant(batch.steps.front());
  for (std::size_t l = 0; l + 1 < net.w.size(); ++l) x = relu(dense(x, net.w[l], net.b[l]));
  return sigmoid(dense(x, net.w.back(), net.b.back()));
}

Var ae_code(const FlatAutoencoder& ae, Tape& tape, const Tensor& x) {
  return tanh(dense(tape.constant(x), ae.enc_w, ae.enc_b));
}

Eigen::MatrixXd to_eigen(const Tensor& t) {
  Eigen::MatrixXd m(t.rows(), t.cols());
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t(r, c);
  return m;
}

FlatAutoencoder make_autoencoder(std::size_t width, const BaselineConfig& config) {
  const std::size_t b = config.ae_bottleneck;
  FlatAutoencoder ae{Tensor(width, b), Tensor(1, b), Tensor(b, width), Tensor(1, width)};
  Rng rng(derive_seed(config.seed, 11));
  init_uniform(ae.enc_w, width, rng);
  init_uniform(ae.enc_b, width, rng);
  init_uniform(ae.dec_w, b, rng);
  init_uniform(ae.dec_b, b, rng);
  return ae;
}

// Trains the autoencoder on reconstruction alone; returns per-epoch mean
// squared reconstruction error per window.
std::vector<double> fit_autoencoder(FlatAutoencoder& ae, const Batch& train, const BaselineConfig& config) {
  std::vector<Tensor*> params{&ae.enc_w, &ae.enc_b, &ae.dec_w, &ae.dec_b};
  AdamState adam;
  adam.config.lr = config.learning_rate;
  std::vector<double> history;
  const Tensor& x = train.steps.front();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Tape tape;
    Var z = ae_code(ae, tape, x);
    Var rec = dense(z, ae.dec_w, ae.dec_b);
    Var loss = sum_squares(sub(rec, tape.constant(x)));
    history.push_back(loss.value()[0] / static_cast<double>(train.size()));
    tape.backward(loss);
    std::vector<Tensor> grads;
    for (Tensor* p : params) grads.push_back(tape.grad_of(*p));
    adam_step(params, grads, adam);
  }
  return history;
}

std::vector<double> linear_probabilities(BaselineKind kind, const LinearModel& m, const Eigen::MatrixXd& x) {
  Eigen::VectorXd s = scores(m, x);
  std::vector<double> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i)
    out[static_cast<std::size_t>(i)] = kind == BaselineKind::Probit ? normal_cdf(s(i)) : sigmoid_scalar(s(i));
  return out;
}

// Fits one model per grid value and keeps the best validation F1 (latest on
// ties). Without validation data the first grid value is used.
template <typename Fit>
std::pair<LinearModel, double> tune_linear(BaselineKind kind, const std::vector<double>& grid, Fit fit,
                                           const Eigen::MatrixXd& xv, const std::vector<int>& yv, double threshold) {
  if (grid.empty()) fail(ErrorKind::InvalidConfig, "empty tuning grid");
  std::optional<LinearModel> best;
  double best_value = grid.front();
  double best_f1 = -1.0;
  for (double g : grid) {
    LinearModel m = fit(g);
    if (yv.empty()) return {m, g};
    const double f1 = recession_f1(linear_probabilities(kind, m, xv), yv, threshold);
    if (f1 >= best_f1) {
      best_f1 = f1;
      best = std::move(m);
      best_value = g;
    }
  }
  return {*best, best_value};
}

}  // namespace

Eigen::MatrixXd flatten_windows(const std::vector<LabeledWindow>& windows) {
  if (windows.empty()) return {};
  const std::size_t width = windows.front().block.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].block.size() != width) fail(ErrorKind::ShapeMismatch, "windows of different shapes");
    for (std::size_t j = 0; j < width; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = windows[i].block[j];
  }
  return x;
}

Eigen::VectorXd window_labels(const std::vector<LabeledWindow>& windows) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(windows.size()));
  for (std::size_t i = 0; i < windows.size(); ++i) y(static_cast<Eigen::Index>(i)) = windows[i].label;
  return y;
}

LinearModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n == 0 || y.size() != n) fail(ErrorKind::ShapeMismatch, "logistic: empty or misaligned data");
  Eigen::MatrixXd a(n, p + 1);
  a.col(0).setOnes();
  a.rightCols(p) = x;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p + 1, lambda);
  penalty(0) = 0.0;

  auto objective = [&](const Eigen::VectorXd& b) {
    Eigen::VectorXd eta = a * b;
    double f = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) f += log1p_exp(eta(i)) - y(i) * eta(i);
    return f + 0.5 * (penalty.array() * b.array().square()).sum();
  };

  LinearModel m;
  double f = objective(beta);
  for (std::size_t iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd eta = a * beta;
    Eigen::VectorXd prob(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob(i) = sigmoid_scalar(eta(i));
      w(i) = prob(i) * (1.0 - prob(i));
    }
    Eigen::VectorXd grad = a.transpose() * (prob - y) + (penalty.array() * beta.array()).matrix();
    m.iterations = iter;
    if (grad.norm() < 1e-8) break;
    Eigen::MatrixXd hess = a.transpose() * w.asDiagonal() * a;
    hess.diagonal() += penalty + Eigen::VectorXd::Constant(p + 1, 1e-10);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success) fail(ErrorKind::SingularSystem, "logistic Hessian factorisation failed");
    Eigen::VectorXd step = ldlt.solve(grad);
    double t = 1.0;
    Eigen::VectorXd next = beta - step;
    double fn = objective(next);
    while (fn > f && t > 1e-10) {
      t *= 0.5;
      next = beta - t * step;
      fn = objective(next);
    }
    if (fn > f) break;
    beta = next;
    f = fn;
  }
  m.intercept = beta(0);
  m.coef = beta.tail(p);
  return m;
}

LinearModel fit_probit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n == 0 || y.size() != n) fail(ErrorKind::ShapeMismatch, "probit: empty or misaligned data");
  Eigen::MatrixXd a(n, p + 1);
  a.col(0).setOnes();
  a.rightCols(p) = x;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);

  auto loglik = [&](const Eigen::VectorXd& b) {
    Eigen::VectorXd eta = a * b;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) ll += log_normal_cdf((2.0 * y(i) - 1.0) * eta(i));
    return ll;
  };

  LinearModel m;
  double ll = loglik(beta);
  for (std::size_t iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd eta = a * beta;
    Eigen::VectorXd g_i(n), h_i(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double q = 2.0 * y(i) - 1.0;
      const double lam = q * mills_ratio(q * eta(i));
      g_i(i) = lam;
      h_i(i) = lam * (lam + eta(i));  // negative Hessian weight
    }
    Eigen::VectorXd grad = a.transpose() * g_i;
    m.iterations = iter;
    if (grad.norm() < 1e-8) break;
    Eigen::MatrixXd info = a.transpose() * h_i.asDiagonal() * a;
    info.diagonal().array() += 1e-6;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      fail(ErrorKind::SingularSystem, "probit information matrix is not positive definite");
    Eigen::VectorXd step = ldlt.solve(grad);
    if (!step.allFinite()) fail(ErrorKind::SingularSystem, "probit Newton step is not finite");
    double t = 1.0;
    Eigen::VectorXd next = beta + step;
    double lln = loglik(next);
    while (!(lln >= ll) && t > 1e-10) {
      t *= 0.5;
      next = beta + t * step;
      lln = loglik(next);
    }
    if (!(lln >= ll)) break;
    beta = next;
    ll = lln;
  }
  m.intercept = beta(0);
  m.coef = beta.tail(p);
  return m;
}

LinearModel fit_svm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double c, std::size_t iterations) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n == 0 || y.size() != n) fail(ErrorKind::ShapeMismatch, "svm: empty or misaligned data");
  if (!(c > 0.0)) fail(ErrorKind::InvalidConfig, "svm C must be positive");
  // Objective: lambda/2 ||w||^2 + mean hinge, with lambda = 1 / (C n).
  const double lambda = 1.0 / (c * static_cast<double>(n));
  Eigen::VectorXd sign = 2.0 * y.array() - 1.0;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  double b = 0.0;
  Eigen::VectorXd w_avg = Eigen::VectorXd::Zero(p);
  double b_avg = 0.0;
  std::size_t averaged = 0;
  for (std::size_t t = 1; t <= iterations; ++t) {
    const double eta = 1.0 / (lambda * static_cast<double>(t + 1));
    Eigen::VectorXd margin = sign.array() * ((x * w).array() + b);
    Eigen::VectorXd active = (margin.array() < 1.0).cast<double>() * sign.array();
    Eigen::VectorXd gw = lambda * w - x.transpose() * active / static_cast<double>(n);
    const double gb = -active.sum() / static_cast<double>(n);
    w -= eta * gw;
    b -= eta * gb;
    // Average the second half of the iterates.
    if (2 * t > iterations) {
      w_avg += w;
      b_avg += b;
      ++averaged;
    }
  }
  LinearModel m;
  m.coef = w_avg / static_cast<double>(averaged);
  m.intercept = b_avg / static_cast<double>(averaged);
  m.iterations = iterations;
  return m;
}

std::size_t BaselineModel::parameter_count() const {
  std::size_t n = 0;
  if (linear) n += static_cast<std::size_t>(linear->coef.size()) + 1;
  if (rnn) {
    BiLstmStackParams stack = rnn->stack;
    stack.visit("", [&](const std::string&, Tensor& t, bool) { n += t.size(); });
    n += rnn->out_w.size() + rnn->out_b.size();
  }
  if (dnn)
    for (std::size_t l = 0; l < dnn->w.size(); ++l) n += dnn->w[l].size() + dnn->b[l].size();
  if (ae) n += ae->enc_w.size() + ae->enc_b.size() + ae->dec_w.size() + ae->dec_b.size();
  return n;
}

std::vector<double> autoencoder_reconstruction_history(const std::vector<LabeledWindow>& train_windows,
                                                       const BaselineConfig& config) {
  if (train_windows.empty()) fail(ErrorKind::EmptyBatch, "no training windows");
  Batch train = flat_batch(train_windows);
  FlatAutoencoder ae = make_autoencoder(train.steps.front().cols(), config);
  return fit_autoencoder(ae, train, config);
}

BaselineModel train_baseline(BaselineKind kind, const std::vector<LabeledWindow>& train_windows,
                             const std::vector<LabeledWindow>& val_windows, const BaselineConfig& config) {
  if (train_windows.empty()) fail(ErrorKind::EmptyBatch, "no training windows");
  BaselineModel model;
  model.kind = kind;
  const std::vector<int> yv = labels_of(val_windows);

  switch (kind) {
    case BaselineKind::Logistic:
    case BaselineKind::Probit:
    case BaselineKind::Svm: {
      const Eigen::MatrixXd x = flatten_windows(train_windows);
      const Eigen::VectorXd y = window_labels(train_windows);
      const Eigen::MatrixXd xv = flatten_windows(val_windows);
      model.input_width = static_cast<std::size_t>(x.cols());
      if (kind == BaselineKind::Probit) {
        model.linear = fit_probit(x, y);
      } else if (kind == BaselineKind::Logistic) {
        auto [m, lambda] = tune_linear(
            kind, config.logistic_lambdas, [&](double l) { return fit_logistic(x, y, l); }, xv, yv, config.threshold);
        model.linear = std::move(m);
        model.hyperparameter = lambda;
      } else {
        auto [m, c] = tune_linear(
            kind, config.svm_cs, [&](double cc) { return fit_svm(x, y, cc, config.svm_iterations); }, xv, yv,
            config.threshold);
        model.linear = std::move(m);
        model.hyperparameter = c;
      }
      break;
    }
    case BaselineKind::Lstm:
    case BaselineKind::Bilstm: {
      const std::size_t width = train_windows.front().width;
      model.input_width = width;
      RecurrentNet net;
      net.stack = BiLstmStackParams(width, config.lstm_sizes, kind == BaselineKind::Bilstm, false, false);
      net.out_w = Tensor(net.stack.output(), 1);
      net.out_b = Tensor(1, 1);
      Rng rng(derive_seed(config.seed, 10));
      net.stack.init(rng);
      init_uniform(net.out_w, net.stack.output(), rng);
      init_uniform(net.out_b, net.stack.output(), rng);
      std::vector<Tensor*> params;
      net.stack.visit("", [&](const std::string&, Tensor& t, bool) { params.push_back(&t); });
      params.push_back(&net.out_w);
      params.push_back(&net.out_b);
      Forward fwd = [&net](Tape& t, const Batch& b) { return recurrent_forward(net, t, b); };
      model.best_epoch = fit_net(params, fwd, make_batch(train_windows), make_batch(val_windows), config, model.history);
      model.rnn = std::move(net);
      break;
    }
    case BaselineKind::Dnn: {
      const std::size_t width = train_windows.front().block.size();
      model.input_width = width;
      DenseNet net;
      Rng rng(derive_seed(config.seed, 12));
      std::size_t in = width;
      std::vector<std::size_t> sizes = config.dnn_sizes;
      sizes.push_back(1);
      for (std::size_t s : sizes) {
        net.w.emplace_back(in, s);
        net.b.emplace_back(1, s);
        init_uniform(net.w.back(), in, rng);
        init_uniform(net.b.back(), in, rng);
        in = s;
      }
      std::vector<Tensor*> params;
      for (std::size_t l = 0; l < net.w.size(); ++l) {
        params.push_back(&net.w[l]);
        params.push_back(&net.b[l]);
      }
      Forward fwd = [&net](Tape& t, const Batch& b) { return dnn_forward(net, t, b); };
      model.best_epoch = fit_net(params, fwd, flat_batch(train_windows), flat_batch(val_windows), config, model.history);
      model.dnn = std::move(net);
      break;
    }
    case BaselineKind::Autoencoder: {
      Batch train = flat_batch(train_windows);
      model.input_width = train.steps.front().cols();
      FlatAutoencoder ae = make_autoencoder(model.input_width, config);
      model.history = fit_autoencoder(ae, train, config);
      auto codes = [&](const std::vector<LabeledWindow>& ws) -> Eigen::MatrixXd {
        if (ws.empty()) return {};
        Tape tape;
        return to_eigen(ae_code(ae, tape, flat_batch(ws).steps.front()).value());
      };
      const Eigen::MatrixXd z = codes(train_windows);
      const Eigen::MatrixXd zv = codes(val_windows);
      const Eigen::VectorXd y = window_labels(train_windows);
      auto [m, lambda] = tune_linear(
          BaselineKind::Logistic, config.logistic_lambdas, [&](double l) { return fit_logistic(z, y, l); }, zv, yv,
          config.threshold);
      model.linear = std::move(m);
      model.hyperparameter = lambda;
      model.ae = std::move(ae);
      model.best_epoch = config.epochs;
      break;
    }
  }
  return model;
}

std::vector<Prediction> predict_baseline(const BaselineModel& model, const std::vector<LabeledWindow>& windows,
                                         double threshold) {
  std::vector<Prediction> out;
  if (windows.empty()) return out;
  std::vector<double> probs;
  switch (model.kind) {
    case BaselineKind::Logistic:
    case BaselineKind::Probit:
    case BaselineKind::Svm: {
      const Eigen::MatrixXd x = flatten_windows(windows);
      if (static_cast<std::size_t>(x.cols()) != model.input_width)
        fail(ErrorKind::ShapeMismatch, "window width does not match the model");
      probs = linear_probabilities(model.kind, *model.linear, x);
      break;
    }
    case BaselineKind::Lstm:
    case BaselineKind::Bilstm: {
      if (windows.front().width != model.input_width) fail(ErrorKind::ShapeMismatch, "window width does not match");
      Tape tape;
      probs = column(recurrent_forward(*model.rnn, tape, make_batch(windows)).value());
      break;
    }
    case BaselineKind::Dnn: {
      if (windows.front().block.size() != model.input_width) fail(ErrorKind::ShapeMismatch, "window size mismatch");
      Tape tape;
      probs = column(dnn_forward(*model.dnn, tape, flat_batch(windows)).value());
      break;
    }
    case BaselineKind::Autoencoder: {
      if (windows.front().block.size() != model.input_width) fail(ErrorKind::ShapeMismatch, "window size mismatch");
      Tape tape;
      Eigen::MatrixXd z = to_eigen(ae_code(*model.ae, tape, flat_batch(windows).steps.front()).value());
      probs = linear_probabilities(BaselineKind::Logistic, *model.linear, z);
      break;
    }
  }
  for (std::size_t i = 0; i < windows.size(); ++i)
    out.push_back({windows[i].end_month, probs[i], probs[i] >= threshold ? 1 : 0});
  return out;
}

}  // namespace cyclecast
