#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace cyclecast {

/// Dense row-major matrix of doubles. Vectors are 1 x n or n x 1; scalars are
/// 1 x 1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(1, 1, v); }
  static Tensor identity(std::size_t n);

  std::array<std::size_t, 2> shape() const { return {rows_, cols_}; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  void fill(double v);
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool operator==(const Tensor& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

class Tape;

/// Handle to a node on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

enum class OpKind {
  Leaf,
  MatMul,
  Add,
  Sub,
  Mul,
  Scale,
  AddScalar,
  Tanh,
  Sigmoid,
  Relu,
  ConcatCols,
  SliceCols,
  SliceRows,
  Sum,
  Square,
};

/// Records operations in creation order, which is a topological order of the
/// graph. backward() walks the records in reverse, visiting each once.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  /// Leaf bound to an externally owned parameter; repeated calls with the same
  /// tensor return the same node.
  Var param(const Tensor& t);

  void backward(Var loss);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  /// Gradient of the last backward() target w.r.t. v; zeros when unreached.
  Tensor grad(Var v) const;
  /// Gradient w.r.t. a tensor previously bound with param(); zeros otherwise.
  Tensor grad_of(const Tensor& t) const;

  std::size_t size() const { return nodes_.size(); }

  // Used by the op functions.
  Var push(OpKind kind, Tensor value, std::vector<std::size_t> inputs, double scalar = 0.0, std::size_t a = 0,
           std::size_t b = 0);

 private:
  struct Node {
    OpKind kind = OpKind::Leaf;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<std::size_t> inputs;
    double scalar = 0.0;
    std::size_t a = 0, b = 0;
  };

  Tensor& grad_slot(std::size_t id);
  void backprop_node(std::size_t id);

  std::deque<Node> nodes_;  // stable addresses across push_back
  std::unordered_map<const Tensor*, std::size_t> bound_;
};

// Primitive ops. Binary elementwise ops broadcast their second operand when it
// is 1 x cols, rows x 1, or 1 x 1. Any non-finite output raises NonFinite.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var sum(Var a);
Var square(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

/// Sum of squared entries.
inline Var sum_squares(Var a) { return sum(square(a)); }

struct GradCheckReport {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t checked = 0;
  bool passed = false;
};

/// Compares backward() against central differences for every entry of every
/// parameter. An entry passes when its absolute error is below `abs_floor` or
/// its relative error is below `tol`.
GradCheckReport grad_check(const std::function<Var(Tape&)>& loss_fn, std::span<Tensor* const> params,
                           double h = 1e-5, double tol = 1e-4, double abs_floor = 1e-7);

/// Same comparison against externally supplied analytic gradients (one per
/// parameter), used to test the checker itself.
GradCheckReport compare_gradients(const std::function<double()>& eval, std::span<Tensor* const> params,
                                  std::span<const Tensor> analytic, double h, double tol, double abs_floor);

}  // namespace cyclecast
