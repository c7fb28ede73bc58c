#include "cyclecast/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "cyclecast/error.hpp"
#include "cyclecast/kernels.hpp"

namespace cyclecast {

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) fail(ErrorKind::ShapeMismatch, "tensor data length does not match shape");
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

const Tensor& Var::value() const { return tape->value(*this); }

namespace {

enum Broadcast : std::size_t { kSame = 0, kRow = 1, kCol = 2, kScalar = 3 };

Broadcast broadcast_of(const Tensor& a, const Tensor& b, const char* op) {
  if (a.same_shape(b)) return kSame;
  if (b.rows() == 1 && b.cols() == 1) return kScalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return kRow;
  if (b.cols() == 1 && b.rows() == a.rows()) return kCol;
  fail(ErrorKind::ShapeMismatch, std::string(op) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                     " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

inline double bval(const Tensor& b, Broadcast mode, std::size_t r, std::size_t c) {
  switch (mode) {
    case kSame: return b(r, c);
    case kRow: return b[c];
    case kCol: return b[r];
    case kScalar: return b[0];
  }
  return 0.0;
}

void check_finite(const Tensor& t, const char* op) {
  for (double v : t.storage())
    if (!std::isfinite(v)) fail(ErrorKind::NonFinite, std::string(op) + " produced a non-finite value");
}

// Accumulates g into the shape of b according to the broadcast mode.
void reduce_into(const Tensor& g, Broadcast mode, Tensor& db, double sign) {
  const std::size_t rows = g.rows(), cols = g.cols();
  switch (mode) {
    case kSame: kernels::axpy(sign, g.data(), db.data()); break;
    case kRow:
      for (std::size_t r = 0; r < rows; ++r) kernels::axpy(sign, g.data().subspan(r * cols, cols), db.data());
      break;
    case kCol:
      for (std::size_t r = 0; r < rows; ++r) db[r] += sign * kernels::sum(g.data().subspan(r * cols, cols));
      break;
    case kScalar: db[0] += sign * kernels::sum(g.data()); break;
  }
}

Tape* tape_of(Var a) {
  if (a.tape == nullptr) fail(ErrorKind::ShapeMismatch, "variable not bound to a tape");
  return a.tape;
}

Tape* tape_of(Var a, Var b) {
  if (a.tape != b.tape) fail(ErrorKind::ShapeMismatch, "variables on different tapes");
  return tape_of(a);
}

}  // namespace

Var Tape::push(OpKind kind, Tensor value, std::vector<std::size_t> inputs, double scalar, std::size_t a,
               std::size_t b) {
  Node node;
  node.kind = kind;
  node.value = std::move(value);
  node.inputs = std::move(inputs);
  node.scalar = scalar;
  node.a = a;
  node.b = b;
  for (std::size_t in : node.inputs) node.requires_grad = node.requires_grad || nodes_[in].requires_grad;
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  check_finite(value, "leaf");
  Var v = push(OpKind::Leaf, std::move(value), {});
  nodes_[v.id].requires_grad = requires_grad;
  return v;
}

Var Tape::param(const Tensor& t) {
  if (auto it = bound_.find(&t); it != bound_.end()) return Var{this, it->second};
  Var v = leaf(t, true);
  bound_.emplace(&t, v.id);
  return v;
}

Tensor& Tape::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.empty()) return Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

Tensor Tape::grad_of(const Tensor& t) const {
  if (auto it = bound_.find(&t); it != bound_.end()) return grad(Var{const_cast<Tape*>(this), it->second});
  return Tensor(t.rows(), t.cols());
}

void Tape::backward(Var loss) {
  if (loss.tape != this) fail(ErrorKind::NotScalar, "loss is not on this tape");
  const Tensor& lv = nodes_[loss.id].value;
  if (lv.rows() != 1 || lv.cols() != 1) fail(ErrorKind::NotScalar, "backward needs a 1x1 loss");
  for (auto& n : nodes_) n.grad = Tensor();
  grad_slot(loss.id)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty() || n.kind == OpKind::Leaf) continue;
    backprop_node(i);
  }
}

void Tape::backprop_node(std::size_t id) {
  Node& n = nodes_[id];
  const Tensor& g = n.grad;
  auto wants = [&](std::size_t k) { return nodes_[n.inputs[k]].requires_grad; };
  auto in_value = [&](std::size_t k) -> const Tensor& { return nodes_[n.inputs[k]].value; };
  auto in_grad = [&](std::size_t k) -> Tensor& { return grad_slot(n.inputs[k]); };

  switch (n.kind) {
    case OpKind::Leaf: break;
    case OpKind::MatMul: {
      const Tensor& a = in_value(0);
      const Tensor& b = in_value(1);
      if (wants(0)) kernels::gemm_nt_acc(g.data(), b.data(), in_grad(0).data(), a.rows(), b.cols(), a.cols());
      if (wants(1)) kernels::gemm_tn_acc(a.data(), g.data(), in_grad(1).data(), a.rows(), a.cols(), b.cols());
      break;
    }
    case OpKind::Add:
    case OpKind::Sub: {
      if (wants(0)) kernels::axpy(1.0, g.data(), in_grad(0).data());
      if (wants(1)) reduce_into(g, static_cast<Broadcast>(n.a), in_grad(1), n.kind == OpKind::Add ? 1.0 : -1.0);
      break;
    }
    case OpKind::Mul: {
      const Tensor& a = in_value(0);
      const Tensor& b = in_value(1);
      auto mode = static_cast<Broadcast>(n.a);
      if (wants(0)) {
        Tensor& ga = in_grad(0);
        if (mode == kSame) {
          kernels::mul_acc(g.data(), b.data(), ga.data());
        } else {
          for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < g.cols(); ++c) ga(r, c) += g(r, c) * bval(b, mode, r, c);
        }
      }
      if (wants(1)) {
        Tensor& gb = in_grad(1);
        if (mode == kSame) {
          kernels::mul_acc(g.data(), a.data(), gb.data());
        } else {
          Tensor prod(g.rows(), g.cols());
          kernels::active().mul(g.data().data(), a.data().data(), prod.data().data(), g.size());
          reduce_into(prod, mode, gb, 1.0);
        }
      }
      break;
    }
    case OpKind::Scale:
      if (wants(0)) kernels::axpy(n.scalar, g.data(), in_grad(0).data());
      break;
    case OpKind::AddScalar:
      if (wants(0)) kernels::axpy(1.0, g.data(), in_grad(0).data());
      break;
    case OpKind::Tanh:
      if (wants(0)) {
        Tensor& ga = in_grad(0);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
      }
      break;
    case OpKind::Sigmoid:
      if (wants(0)) {
        Tensor& ga = in_grad(0);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
      }
      break;
    case OpKind::Relu:
      if (wants(0)) {
        const Tensor& x = in_value(0);
        Tensor& ga = in_grad(0);
        for (std::size_t i = 0; i < g.size(); ++i)
          if (x[i] > 0.0) ga[i] += g[i];
      }
      break;
    case OpKind::ConcatCols: {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const std::size_t w = in_value(k).cols();
        if (wants(k)) {
          Tensor& gk = in_grad(k);
          for (std::size_t r = 0; r < g.rows(); ++r)
            kernels::axpy(1.0, g.data().subspan(r * g.cols() + offset, w), gk.data().subspan(r * w, w));
        }
        offset += w;
      }
      break;
    }
    case OpKind::SliceCols:
      if (wants(0)) {
        Tensor& ga = in_grad(0);
        const std::size_t w = g.cols(), src = ga.cols();
        for (std::size_t r = 0; r < g.rows(); ++r)
          kernels::axpy(1.0, g.data().subspan(r * w, w), ga.data().subspan(r * src + n.a, w));
      }
      break;
    case OpKind::SliceRows:
      if (wants(0)) {
        Tensor& ga = in_grad(0);
        kernels::axpy(1.0, g.data(), ga.data().subspan(n.a * ga.cols(), g.size()));
      }
      break;
    case OpKind::Sum:
      if (wants(0)) {
        Tensor& ga = in_grad(0);
        const double gv = g[0];
        for (double& v : ga.storage()) v += gv;
      }
      break;
    case OpKind::Square:
      if (wants(0)) {
        const Tensor& x = in_value(0);
        Tensor& ga = in_grad(0);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += 2.0 * x[i] * g[i];
      }
      break;
  }
}

Var matmul(Var a, Var b) {
  Tape* t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows())
    fail(ErrorKind::ShapeMismatch, "matmul " + std::to_string(av.rows()) + "x" + std::to_string(av.cols()) + " * " +
                                       std::to_string(bv.rows()) + "x" + std::to_string(bv.cols()));
  Tensor out(av.rows(), bv.cols());
  kernels::gemm(av.data(), bv.data(), out.data(), av.rows(), av.cols(), bv.cols());
  check_finite(out, "matmul");
  return t->push(OpKind::MatMul, std::move(out), {a.id, b.id});
}

namespace {

template <typename F>
Var binary(Var a, Var b, OpKind kind, const char* name, F op) {
  Tape* t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Broadcast mode = broadcast_of(av, bv, name);
  Tensor out(av.rows(), av.cols());
  if (mode == kSame) {
    op(av.data().data(), bv.data().data(), out.data().data(), av.size());
  } else {
    for (std::size_t r = 0; r < av.rows(); ++r)
      for (std::size_t c = 0; c < av.cols(); ++c) {
        const double x = av(r, c), y = bval(bv, mode, r, c);
        op(&x, &y, &out(r, c), 1);
      }
  }
  check_finite(out, name);
  return t->push(kind, std::move(out), {a.id, b.id}, 0.0, mode);
}

template <typename F>
Var unary(Var a, OpKind kind, const char* name, F f, double scalar = 0.0) {
  Tape* t = tape_of(a);
  const Tensor& av = a.value();
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  check_finite(out, name);
  return t->push(kind, std::move(out), {a.id}, scalar);
}

}  // namespace

Var add(Var a, Var b) {
  return binary(a, b, OpKind::Add, "add", [](const double* x, const double* y, double* o, std::size_t n) {
    kernels::active().add(x, y, o, n);
  });
}

Var sub(Var a, Var b) {
  return binary(a, b, OpKind::Sub, "sub", [](const double* x, const double* y, double* o, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) o[i] = x[i] - y[i];
  });
}

Var mul(Var a, Var b) {
  return binary(a, b, OpKind::Mul, "mul", [](const double* x, const double* y, double* o, std::size_t n) {
    kernels::active().mul(x, y, o, n);
  });
}

Var scale(Var a, double s) {
  return unary(a, OpKind::Scale, "scale", [s](double x) { return s * x; }, s);
}

Var add_scalar(Var a, double s) {
  return unary(a, OpKind::AddScalar, "add_scalar", [s](double x) { return x + s; }, s);
}

Var tanh(Var a) {
  return unary(a, OpKind::Tanh, "tanh", [](double x) { return std::tanh(x); });
}

Var sigmoid(Var a) {
  return unary(a, OpKind::Sigmoid, "sigmoid", [](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
  });
}

Var relu(Var a) {
  return unary(a, OpKind::Relu, "relu", [](double x) { return x > 0.0 ? x : 0.0; });
}

Var square(Var a) {
  return unary(a, OpKind::Square, "square", [](double x) { return x * x; });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorKind::ShapeMismatch, "concat of nothing");
  Tape* t = tape_of(parts[0]);
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  std::vector<std::size_t> ids;
  for (const Var& p : parts) {
    if (p.tape != t || p.rows() != rows) fail(ErrorKind::ShapeMismatch, "concat_cols row mismatch");
    cols += p.cols();
    ids.push_back(p.id);
  }
  Tensor out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(v.data().begin() + static_cast<std::ptrdiff_t>(r * v.cols()), v.cols(),
                  out.data().begin() + static_cast<std::ptrdiff_t>(r * cols + offset));
    offset += v.cols();
  }
  return t->push(OpKind::ConcatCols, std::move(out), std::move(ids));
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  Tape* t = tape_of(a);
  const Tensor& v = a.value();
  if (begin + count > v.cols() || count == 0) fail(ErrorKind::ShapeMismatch, "slice_cols out of range");
  Tensor out(v.rows(), count);
  for (std::size_t r = 0; r < v.rows(); ++r)
    std::copy_n(v.data().begin() + static_cast<std::ptrdiff_t>(r * v.cols() + begin), count,
                out.data().begin() + static_cast<std::ptrdiff_t>(r * count));
  return t->push(OpKind::SliceCols, std::move(out), {a.id}, 0.0, begin, count);
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  Tape* t = tape_of(a);
  const Tensor& v = a.value();
  if (begin + count > v.rows() || count == 0) fail(ErrorKind::ShapeMismatch, "slice_rows out of range");
  std::vector<double> data(v.data().begin() + static_cast<std::ptrdiff_t>(begin * v.cols()),
                           v.data().begin() + static_cast<std::ptrdiff_t>((begin + count) * v.cols()));
  return t->push(OpKind::SliceRows, Tensor(count, v.cols(), std::move(data)), {a.id}, 0.0, begin, count);
}

Var sum(Var a) {
  Tape* t = tape_of(a);
  Tensor out = Tensor::scalar(kernels::sum(a.value().data()));
  check_finite(out, "sum");
  return t->push(OpKind::Sum, std::move(out), {a.id});
}

GradCheckReport compare_gradients(const std::function<double()>& eval, std::span<Tensor* const> params,
                                  std::span<const Tensor> analytic, double h, double tol, double abs_floor) {
  if (analytic.size() != params.size()) fail(ErrorKind::ShapeMismatch, "gradient count");
  GradCheckReport report;
  report.passed = true;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& t = *params[p];
    if (!analytic[p].same_shape(t)) fail(ErrorKind::ShapeMismatch, "gradient shape");
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double orig = t[i];
      t[i] = orig + h;
      const double fp = eval();
      t[i] = orig - h;
      const double fm = eval();
      t[i] = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[p][i];
      const double abs_err = std::abs(a - numeric);
      const double denom = std::max(std::abs(a), std::abs(numeric));
      const double rel = denom > 0.0 ? abs_err / denom : 0.0;
      report.max_absolute_error = std::max(report.max_absolute_error, abs_err);
      if (abs_err > abs_floor) {
        report.max_relative_error = std::max(report.max_relative_error, rel);
        if (rel > tol) report.passed = false;
      }
      ++report.checked;
    }
  }
  return report;
}

GradCheckReport grad_check(const std::function<Var(Tape&)>& loss_fn, std::span<Tensor* const> params, double h,
                           double tol, double abs_floor) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    for (Tensor* p : params) tape.param(*p);
    Var loss = loss_fn(tape);
    tape.backward(loss);
    for (Tensor* p : params) analytic.push_back(tape.grad_of(*p));
  }
  auto eval = [&] {
    Tape tape;
    return loss_fn(tape).value()[0];
  };
  return compare_gradients(eval, params, analytic, h, tol, abs_floor);
}

}  // namespace cyclecast
