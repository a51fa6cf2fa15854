#include "transagent/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "transagent/error.hpp"

namespace transagent::numkit {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": length mismatch " + std::to_string(a) + " vs " +
                     std::to_string(b));
  }
}

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix data holds " + std::to_string(data_.size()) + " values, expected " +
                     std::to_string(rows * cols));
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t cols = rows.size() == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    require_same_length(r.size(), cols, "Matrix::from_rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(rows.size(), cols, std::move(data));
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

// ---------------------------------------------------------------------------
// Plain primitives

Vector matvec(const Matrix& m, std::span<const double> v) {
  require_same_length(m.cols(), v.size(), "matvec");
  Vector out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector concat(std::span<const double> a, std::span<const double> b) {
  Vector out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Vector sigmoid(std::span<const double> v) {
  Vector out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), sigm);
  return out;
}

Vector tanh(std::span<const double> v) {
  Vector out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::tanh(x); });
  return out;
}

Vector softmax(std::span<const double> v) {
  if (v.empty()) return {};
  const double shift = *std::max_element(v.begin(), v.end());
  Vector out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - shift);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

double nll_loss(std::span<const double> probabilities, std::size_t target) {
  if (target >= probabilities.size()) {
    throw ShapeError("nll_loss: target " + std::to_string(target) + " outside distribution of " +
                     std::to_string(probabilities.size()));
  }
  const double p = probabilities[target];
  if (!(p > 0.0)) throw DomainError("nll_loss: probability of target is not positive");
  return -std::log(p);
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw ShapeError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Gradients

Matrix Gradients::of(const Matrix& param) const {
  if (const Matrix* g = find(param)) return *g;
  return Matrix(param.rows(), param.cols());
}

const Matrix* Gradients::find(const Matrix& param) const {
  auto it = by_param_.find(&param);
  return it == by_param_.end() ? nullptr : &it->second;
}

Matrix& Gradients::buffer_for(const Matrix& param) {
  auto it = by_param_.find(&param);
  if (it == by_param_.end()) {
    it = by_param_.emplace(&param, Matrix(param.rows(), param.cols())).first;
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Tape: forward recording

Tape::Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw TapeError("variable does not belong to this tape");
  return nodes_[v.id];
}

const Matrix& Tape::param_of(Var v, const char* op) const {
  const Node& n = node(v);
  if (n.op != Op::Parameter) throw TapeError(std::string(op) + ": operand must be a parameter");
  return *n.param;
}

Tape::Var Tape::parameter(const Matrix& param) {
  if (auto it = leaf_of_.find(&param); it != leaf_of_.end()) return Var{it->second};
  // Column parameters (biases, score vectors) take part in vector ops, so
  // they carry their value; full matrices are only read through matvec/row.
  Node n{Op::Parameter, {}, {}, 0, &param, true};
  if (param.cols() == 1) n.value.assign(param.data().begin(), param.data().end());
  const Var v = push(std::move(n));
  leaf_of_.emplace(&param, v.id);
  return v;
}

Tape::Var Tape::constant(Vector value) { return push(Node{Op::Constant, std::move(value), {}}); }

Tape::Var Tape::matvec(Var matrix_param, Var v) {
  const Matrix& m = param_of(matrix_param, "matvec");
  Vector out = numkit::matvec(m, node(v).value);
  const bool grad = node(matrix_param).needs_grad || node(v).needs_grad;
  return push(Node{Op::MatVec, std::move(out), {matrix_param.id, v.id}, 0, nullptr, grad});
}

Tape::Var Tape::row(Var matrix_param, std::size_t r) {
  const Matrix& m = param_of(matrix_param, "row");
  if (r >= m.rows()) {
    throw OutOfRangeError("row " + std::to_string(r) + " outside matrix with " +
                          std::to_string(m.rows()) + " rows");
  }
  const auto src = m.row(r);
  return push(Node{Op::Row, Vector(src.begin(), src.end()), {matrix_param.id}, r, nullptr, true});
}

Tape::Var Tape::add(Var a, Var b) {
  Vector out = numkit::add(node(a).value, node(b).value);
  const bool grad = node(a).needs_grad || node(b).needs_grad;
  return push(Node{Op::Add, std::move(out), {a.id, b.id}, 0, nullptr, grad});
}

Tape::Var Tape::concat(Var a, Var b) {
  Vector out = numkit::concat(node(a).value, node(b).value);
  const bool grad = node(a).needs_grad || node(b).needs_grad;
  return push(Node{Op::Concat, std::move(out), {a.id, b.id}, 0, nullptr, grad});
}

Tape::Var Tape::sigmoid(Var v) {
  return push(Node{Op::Sigmoid, numkit::sigmoid(node(v).value), {v.id}, 0, nullptr,
                   node(v).needs_grad});
}

Tape::Var Tape::tanh(Var v) {
  return push(Node{Op::Tanh, numkit::tanh(node(v).value), {v.id}, 0, nullptr, node(v).needs_grad});
}

Tape::Var Tape::softmax(Var v) {
  return push(Node{Op::Softmax, numkit::softmax(node(v).value), {v.id}, 0, nullptr,
                   node(v).needs_grad});
}

Tape::Var Tape::dot(Var a, Var b) {
  const Vector& x = node(a).value;
  const Vector& y = node(b).value;
  require_same_length(x.size(), y.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  const bool grad = node(a).needs_grad || node(b).needs_grad;
  return push(Node{Op::Dot, Vector{acc}, {a.id, b.id}, 0, nullptr, grad});
}

Tape::Var Tape::stack(std::span<const Var> scalars) {
  Node n{Op::Stack, {}, {}};
  for (Var s : scalars) {
    const Node& src = node(s);
    require_same_length(src.value.size(), 1, "stack");
    n.value.push_back(src.value[0]);
    n.inputs.push_back(s.id);
    n.needs_grad = n.needs_grad || src.needs_grad;
  }
  return push(std::move(n));
}

Tape::Var Tape::weighted_sum(Var weights, std::span<const Var> items) {
  const Vector& w = node(weights).value;
  require_same_length(w.size(), items.size(), "weighted_sum");
  if (items.empty()) throw ShapeError("weighted_sum over no items");
  Node n{Op::WeightedSum, Vector(node(items[0]).value.size(), 0.0), {weights.id}};
  n.needs_grad = node(weights).needs_grad;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Node& item = node(items[i]);
    require_same_length(item.value.size(), n.value.size(), "weighted_sum");
    for (std::size_t k = 0; k < n.value.size(); ++k) n.value[k] += w[i] * item.value[k];
    n.inputs.push_back(items[i].id);
    n.needs_grad = n.needs_grad || item.needs_grad;
  }
  return push(std::move(n));
}

Tape::Var Tape::nll(Var probabilities, std::size_t target) {
  const double loss = nll_loss(node(probabilities).value, target);
  return push(Node{Op::Nll, Vector{loss}, {probabilities.id}, target, nullptr,
                   node(probabilities).needs_grad});
}

Tape::Var Tape::mean(std::span<const Var> scalars) {
  if (scalars.empty()) throw ShapeError("mean of no values");
  Node n{Op::Mean, Vector{0.0}, {}};
  for (Var s : scalars) {
    const Node& src = node(s);
    require_same_length(src.value.size(), 1, "mean");
    n.value[0] += src.value[0];
    n.inputs.push_back(s.id);
    n.needs_grad = n.needs_grad || src.needs_grad;
  }
  n.value[0] /= static_cast<double>(scalars.size());
  return push(std::move(n));
}

const Vector& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar(Var v) const {
  const Vector& x = node(v).value;
  require_same_length(x.size(), 1, "scalar");
  return x[0];
}

// ---------------------------------------------------------------------------
// Tape: reverse pass

Gradients Tape::backward(Var loss) const {
  if (nodes_.empty()) throw TapeError("backward called before any forward computation");
  if (loss.id >= nodes_.size()) throw TapeError("loss variable does not belong to this tape");
  if (nodes_[loss.id].value.size() != 1) throw TapeError("backward needs a scalar loss");

  std::vector<Vector> adj(nodes_.size());
  adj[loss.id] = Vector{1.0};
  Gradients grads;

  auto accumulate = [&](std::size_t id) -> Vector& {
    Vector& a = adj[id];
    if (a.empty()) {
      const Node& n = nodes_[id];
      a.assign(n.param ? n.param->size() : n.value.size(), 0.0);
    }
    return a;
  };

  for (std::size_t id = loss.id + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    const Vector& g = adj[id];
    if (g.empty() || !n.needs_grad) continue;

    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Parameter: {
        Matrix& buf = grads.buffer_for(*n.param);
        auto dst = buf.data();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += g[k];
        break;
      }
      case Op::MatVec: {
        const Node& mnode = nodes_[n.inputs[0]];
        const Node& vnode = nodes_[n.inputs[1]];
        const Matrix& m = *mnode.param;
        const Vector& v = vnode.value;
        // A parameter leaf's adjoint is its flattened matrix.
        Vector& gm = accumulate(n.inputs[0]);
        for (std::size_t r = 0; r < m.rows(); ++r) {
          double* dst = gm.data() + r * m.cols();
          for (std::size_t c = 0; c < m.cols(); ++c) dst[c] += g[r] * v[c];
        }
        if (vnode.needs_grad) {
          Vector& gv = accumulate(n.inputs[1]);
          for (std::size_t r = 0; r < m.rows(); ++r) {
            const auto mrow = m.row(r);
            for (std::size_t c = 0; c < m.cols(); ++c) gv[c] += mrow[c] * g[r];
          }
        }
        break;
      }
      case Op::Row: {
        const Matrix& m = *nodes_[n.inputs[0]].param;
        Vector& gm = accumulate(n.inputs[0]);
        double* dst = gm.data() + n.index * m.cols();
        for (std::size_t c = 0; c < m.cols(); ++c) dst[c] += g[c];
        break;
      }
      case Op::Add:
        for (std::size_t in : n.inputs) {
          if (!nodes_[in].needs_grad) continue;
          Vector& ga = accumulate(in);
          for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k];
        }
        break;
      case Op::Concat: {
        const std::size_t split = nodes_[n.inputs[0]].value.size();
        if (nodes_[n.inputs[0]].needs_grad) {
          Vector& ga = accumulate(n.inputs[0]);
          for (std::size_t k = 0; k < split; ++k) ga[k] += g[k];
        }
        if (nodes_[n.inputs[1]].needs_grad) {
          Vector& gb = accumulate(n.inputs[1]);
          for (std::size_t k = split; k < g.size(); ++k) gb[k - split] += g[k];
        }
        break;
      }
      case Op::Sigmoid: {
        Vector& gx = accumulate(n.inputs[0]);
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double s = n.value[k];
          gx[k] += g[k] * s * (1.0 - s);
        }
        break;
      }
      case Op::Tanh: {
        Vector& gx = accumulate(n.inputs[0]);
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double t = n.value[k];
          gx[k] += g[k] * (1.0 - t * t);
        }
        break;
      }
      case Op::Softmax: {
        double gp = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) gp += g[k] * n.value[k];
        Vector& gx = accumulate(n.inputs[0]);
        for (std::size_t k = 0; k < g.size(); ++k) gx[k] += n.value[k] * (g[k] - gp);
        break;
      }
      case Op::Dot: {
        const Vector& a = nodes_[n.inputs[0]].value;
        const Vector& b = nodes_[n.inputs[1]].value;
        if (nodes_[n.inputs[0]].needs_grad) {
          Vector& ga = accumulate(n.inputs[0]);
          for (std::size_t k = 0; k < a.size(); ++k) ga[k] += g[0] * b[k];
        }
        if (nodes_[n.inputs[1]].needs_grad) {
          Vector& gb = accumulate(n.inputs[1]);
          for (std::size_t k = 0; k < b.size(); ++k) gb[k] += g[0] * a[k];
        }
        break;
      }
      case Op::Stack:
        for (std::size_t i = 0; i < n.inputs.size(); ++i) {
          if (nodes_[n.inputs[i]].needs_grad) accumulate(n.inputs[i])[0] += g[i];
        }
        break;
      case Op::WeightedSum: {
        const std::size_t wid = n.inputs[0];
        const Vector& w = nodes_[wid].value;
        for (std::size_t i = 1; i < n.inputs.size(); ++i) {
          const Node& item = nodes_[n.inputs[i]];
          if (nodes_[wid].needs_grad) {
            double acc = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k) acc += g[k] * item.value[k];
            accumulate(wid)[i - 1] += acc;
          }
          if (item.needs_grad) {
            Vector& gi = accumulate(n.inputs[i]);
            for (std::size_t k = 0; k < g.size(); ++k) gi[k] += w[i - 1] * g[k];
          }
        }
        break;
      }
      case Op::Nll: {
        const Vector& p = nodes_[n.inputs[0]].value;
        accumulate(n.inputs[0])[n.index] += -g[0] / p[n.index];
        break;
      }
      case Op::Mean: {
        const double share = g[0] / static_cast<double>(n.inputs.size());
        for (std::size_t in : n.inputs) {
          if (nodes_[in].needs_grad) accumulate(in)[0] += share;
        }
        break;
      }
    }
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Verification and update

double grad_check(const LossBuilder& loss, std::span<Matrix* const> params, double eps) {
  if (!(eps > 0.0)) throw DomainError("grad_check: eps must be positive");
  if (params.empty()) return 0.0;

  Gradients analytic;
  {
    Tape tape;
    const Tape::Var l = loss(tape);
    analytic = tape.backward(l);
  }

  auto evaluate = [&] {
    Tape tape;
    return tape.scalar(loss(tape));
  };

  double worst = 0.0;
  for (Matrix* p : params) {
    const Matrix g = analytic.of(*p);
    auto values = p->data();
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double saved = values[k];
      values[k] = saved + eps;
      const double up = evaluate();
      values[k] = saved - eps;
      const double down = evaluate();
      values[k] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = g.data()[k];
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
    }
    const double err = std::sqrt(diff2) / std::max(1e-8, std::sqrt(a2) + std::sqrt(n2));
    worst = std::max(worst, err);
  }
  return worst;
}

void sgd_step(Matrix& param, const Matrix& grad, double lr) {
  if (!param.same_shape(grad)) {
    throw ShapeError("sgd_step: parameter " + std::to_string(param.rows()) + "x" +
                     std::to_string(param.cols()) + " vs gradient " +
                     std::to_string(grad.rows()) + "x" + std::to_string(grad.cols()));
  }
  auto p = param.data();
  const auto g = grad.data();
  for (std::size_t k = 0; k < p.size(); ++k) p[k] -= lr * g[k];
}

void sgd_step(std::span<Matrix* const> params, const Gradients& grads, double lr) {
  for (Matrix* p : params) {
    if (const Matrix* g = grads.find(*p)) sgd_step(*p, *g, lr);
  }
}

// ---------------------------------------------------------------------------
// SplitMix64

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::size_t SplitMix64::below(std::size_t n) {
  if (n == 0) throw DomainError("SplitMix64::below(0)");
  return static_cast<std::size_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
}

}  // namespace transagent::numkit
