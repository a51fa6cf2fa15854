#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

namespace transagent::numkit {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. A column vector is an n x 1 matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Plain (untaped) primitives. All throw ShapeError on incompatible sizes.
Vector matvec(const Matrix& m, std::span<const double> v);
Vector add(std::span<const double> a, std::span<const double> b);
Vector concat(std::span<const double> a, std::span<const double> b);
Vector sigmoid(std::span<const double> v);
Vector tanh(std::span<const double> v);
/// Max-shifted softmax.
Vector softmax(std::span<const double> v);
/// -ln(probabilities[target]); DomainError when that probability is <= 0.
double nll_loss(std::span<const double> probabilities, std::size_t target);
/// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> v);

/// Gradients produced by Tape::backward, keyed by parameter identity.
class Gradients {
 public:
  /// Gradient for `param`; a zero matrix of the same shape when the parameter
  /// did not take part in the recorded computation.
  Matrix of(const Matrix& param) const;
  const Matrix* find(const Matrix& param) const;
  bool contains(const Matrix& param) const { return find(param) != nullptr; }
  std::size_t size() const noexcept { return by_param_.size(); }

  Matrix& buffer_for(const Matrix& param);

 private:
  std::unordered_map<const Matrix*, Matrix> by_param_;
};

/// Records vector-valued primitive applications and replays them in reverse.
///
/// Parameters are referenced, not copied: they must outlive the tape and must
/// not be modified between recording and backward(). Each parameter maps to a
/// single leaf, so using it at several timesteps sums its contributions.
class Tape {
 public:
  struct Var {
    std::size_t id;
  };

  Var parameter(const Matrix& param);
  Var constant(Vector value);

  Var matvec(Var matrix_param, Var v);
  /// Row `r` of a parameter matrix as a vector (embedding lookup).
  Var row(Var matrix_param, std::size_t r);
  Var add(Var a, Var b);
  Var concat(Var a, Var b);
  Var sigmoid(Var v);
  Var tanh(Var v);
  Var softmax(Var v);
  /// Scalar (length-1) inner product.
  Var dot(Var a, Var b);
  /// Concatenates length-1 nodes into one vector.
  Var stack(std::span<const Var> scalars);
  /// sum_i weights[i] * items[i].
  Var weighted_sum(Var weights, std::span<const Var> items);
  Var nll(Var probabilities, std::size_t target);
  /// Arithmetic mean of length-1 nodes.
  Var mean(std::span<const Var> scalars);

  const Vector& value(Var v) const;
  double scalar(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse pass from a length-1 node. Throws TapeError if nothing was
  /// recorded or `loss` is not a scalar node of this tape.
  Gradients backward(Var loss) const;

 private:
  enum class Op {
    Parameter, Constant, MatVec, Row, Add, Concat, Sigmoid, Tanh, Softmax,
    Dot, Stack, WeightedSum, Nll, Mean
  };

  struct Node {
    Op op;
    Vector value;
    std::vector<std::size_t> inputs;
    std::size_t index = 0;  // Row: row number; Nll: target
    const Matrix* param = nullptr;
    bool needs_grad = false;
  };

  Var push(Node node);
  const Node& node(Var v) const;
  const Matrix& param_of(Var v, const char* op) const;

  std::vector<Node> nodes_;
  std::unordered_map<const Matrix*, std::size_t> leaf_of_;
};

/// Builds a loss on a fresh tape from the current parameter values.
using LossBuilder = std::function<Tape::Var(Tape&)>;

/// Compares Tape::backward with central differences over every coordinate of
/// `params`. Per parameter matrix the error is ||a - n|| / max(1e-8, ||a|| + ||n||)
/// (Euclidean norms); returns the worst one, 0 for no parameters.
/// Parameters are perturbed in place and restored.
double grad_check(const LossBuilder& loss, std::span<Matrix* const> params, double eps);

/// p <- p - lr * g.
void sgd_step(Matrix& param, const Matrix& grad, double lr);
void sgd_step(std::span<Matrix* const> params, const Gradients& grads, double lr);

/// splitmix64 stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n); n must be positive.
  std::size_t below(std::size_t n);

 private:
  std::uint64_t state_;
};

}  // namespace transagent::numkit
