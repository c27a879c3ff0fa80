// SPDX-License-Identifier: Apache-2.0
#include "ctcf/tensor.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "ctcf/error.hpp"

namespace ctcf {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor() : data_(1, 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != data_.size()) {
    fail(ErrorKind::ShapeMismatch, "tensor shape " + shape_to_string(shape_) + " does not match " +
                                       std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }
Tensor Tensor::zeros(Shape shape) { return filled(std::move(shape), 0.0); }
Tensor Tensor::ones(Shape shape) { return filled(std::move(shape), 1.0); }
Tensor Tensor::filled(Shape shape, double value) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

double Tensor::item() const {
  if (data_.size() != 1) {
    fail(ErrorKind::ShapeMismatch, "item() on tensor of shape " + shape_to_string(shape_));
  }
  return data_[0];
}

// ---------------------------------------------------------------------------

namespace {

Tape* common_tape(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = nullptr;
  for (const Tensor* t : inputs) {
    if (!t->on_tape()) continue;
    if (tape && tape != t->tape()) {
      fail(ErrorKind::InvalidArgument, "operands recorded on different tapes");
    }
    tape = t->tape();
  }
  return tape;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    fail(ErrorKind::ShapeMismatch, std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                                       " vs " + shape_to_string(b.shape()));
  }
}

// C[m x n] = A[m x k] . B[k x n]; each C[i][j] accumulates in increasing k.
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m x n] += A[m x k] . B[n x k]^T
void gemm_bt_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
      c[i * n + j] += acc;
    }
  }
}

// C[m x n] += A[k x m]^T . B[k x n]
void gemm_at_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < m; ++i) {
      const double av = a[p * m + i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

Tensor Tape::record(Node node, Shape shape, std::vector<double> data) {
  for (std::size_t p : node.parents) {
    if (p >= nodes_.size()) fail(ErrorKind::InvalidArgument, "tape parent index out of order");
  }
  node.shape = shape;
  Tensor out(std::move(shape), std::move(data));
  out.tape_ = this;
  out.node_ = nodes_.size();
  nodes_.push_back(std::move(node));
  return out;
}

Tensor Tape::variable(Tensor value) {
  Node node;
  node.kind = OpKind::Leaf;
  Shape shape = value.shape();
  return record(std::move(node), std::move(shape), value.data());
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  Tape* tape = common_tape({&a, &b});
  if (!tape) return Tensor(a.shape(), std::move(out));
  Tape::Node node;
  node.kind = OpKind::Add;
  if (a.on_tape()) { node.parents.push_back(*a.node_id()); node.slots.push_back(0); }
  if (b.on_tape()) { node.parents.push_back(*b.node_id()); node.slots.push_back(1); }
  return tape->record(std::move(node), a.shape(), std::move(out));
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  Tape* tape = common_tape({&a, &b});
  if (!tape) return Tensor(a.shape(), std::move(out));
  Tape::Node node;
  node.kind = OpKind::Sub;
  if (a.on_tape()) { node.parents.push_back(*a.node_id()); node.slots.push_back(0); }
  if (b.on_tape()) { node.parents.push_back(*b.node_id()); node.slots.push_back(1); }
  return tape->record(std::move(node), a.shape(), std::move(out));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  Tape* tape = common_tape({&a, &b});
  if (!tape) return Tensor(a.shape(), std::move(out));
  Tape::Node node;
  node.kind = OpKind::Mul;
  // The gradient of each side needs the other side's values.
  if (a.on_tape()) { node.parents.push_back(*a.node_id()); node.slots.push_back(0); node.saved.push_back(b.data()); }
  if (b.on_tape()) { node.parents.push_back(*b.node_id()); node.slots.push_back(1); node.saved.push_back(a.data()); }
  return tape->record(std::move(node), a.shape(), std::move(out));
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * c;
  if (!a.on_tape()) return Tensor(a.shape(), std::move(out));
  Tape::Node node;
  node.kind = OpKind::Scale;
  node.parents.push_back(*a.node_id());
  node.scalar = c;
  return a.tape()->record(std::move(node), a.shape(), std::move(out));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    fail(ErrorKind::ShapeMismatch,
         "matmul: incompatible shapes " + shape_to_string(a.shape()) + " and " + shape_to_string(b.shape()));
  }
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<double> out(m * n);
  gemm(a.data().data(), b.data().data(), out.data(), m, k, n);
  Tape* tape = common_tape({&a, &b});
  if (!tape) return Tensor({m, n}, std::move(out));
  Tape::Node node;
  node.kind = OpKind::Matmul;
  node.m = m;
  node.k = k;
  node.n = n;
  if (a.on_tape()) { node.parents.push_back(*a.node_id()); node.slots.push_back(0); node.saved.push_back(b.data()); }
  if (b.on_tape()) { node.parents.push_back(*b.node_id()); node.slots.push_back(1); node.saved.push_back(a.data()); }
  return tape->record(std::move(node), {m, n}, std::move(out));
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
  if (!a.on_tape()) return Tensor(a.shape(), std::move(out));
  Tape::Node node;
  node.kind = OpKind::Relu;
  node.parents.push_back(*a.node_id());
  node.saved.push_back(a.data());
  return a.tape()->record(std::move(node), a.shape(), std::move(out));
}

Tensor sigmoid(const Tensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-a[i]));
  if (!a.on_tape()) return Tensor(a.shape(), std::move(out));
  Tape::Node node;
  node.kind = OpKind::Sigmoid;
  node.parents.push_back(*a.node_id());
  node.saved.push_back(out);
  return a.tape()->record(std::move(node), a.shape(), std::move(out));
}

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  if (!a.on_tape()) return Tensor::scalar(acc);
  Tape::Node node;
  node.kind = OpKind::Sum;
  node.parents.push_back(*a.node_id());
  return a.tape()->record(std::move(node), {}, {acc});
}

Tensor mean_abs(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += std::abs(v);
  acc /= static_cast<double>(a.numel());
  if (!a.on_tape()) return Tensor::scalar(acc);
  Tape::Node node;
  node.kind = OpKind::MeanAbs;
  node.parents.push_back(*a.node_id());
  node.saved.push_back(a.data());
  return a.tape()->record(std::move(node), {}, {acc});
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    fail(ErrorKind::ShapeMismatch,
         "reshape: cannot view " + shape_to_string(a.shape()) + " as " + shape_to_string(shape));
  }
  if (!a.on_tape()) return Tensor(std::move(shape), a.data());
  Tape::Node node;
  node.kind = OpKind::Reshape;
  node.parents.push_back(*a.node_id());
  return a.tape()->record(std::move(node), std::move(shape), a.data());
}

Tensor concat_slices(std::span<const Tensor> slices) {
  if (slices.empty()) fail(ErrorKind::InvalidArgument, "concat_slices: no slices");
  const Shape& first = slices.front().shape();
  if (first.size() != 2) {
    fail(ErrorKind::ShapeMismatch, "concat_slices: slices must be 2-D, got " + shape_to_string(first));
  }
  const std::size_t per = shape_numel(first);
  std::vector<double> out;
  out.reserve(per * slices.size());
  Tape* tape = nullptr;
  for (const Tensor& s : slices) {
    if (s.shape() != first) {
      fail(ErrorKind::ShapeMismatch, "concat_slices: inconsistent slice shapes " + shape_to_string(first) +
                                         " and " + shape_to_string(s.shape()));
    }
    out.insert(out.end(), s.data().begin(), s.data().end());
    if (s.on_tape()) {
      if (tape && tape != s.tape()) fail(ErrorKind::InvalidArgument, "operands recorded on different tapes");
      tape = s.tape();
    }
  }
  Shape shape{slices.size(), first[0], first[1]};
  if (!tape) return Tensor(std::move(shape), std::move(out));
  Tape::Node node;
  node.kind = OpKind::Concat;
  node.k = per;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    if (!slices[i].on_tape()) continue;
    node.parents.push_back(*slices[i].node_id());
    node.slots.push_back(i);
  }
  return tape->record(std::move(node), std::move(shape), std::move(out));
}

std::vector<Tensor> split_slices(const Tensor& volume) {
  if (volume.rank() != 3) {
    fail(ErrorKind::ShapeMismatch, "split_slices: expected [D,H,W], got " + shape_to_string(volume.shape()));
  }
  const std::size_t depth = volume.shape()[0];
  const Shape slice_shape{volume.shape()[1], volume.shape()[2]};
  const std::size_t per = shape_numel(slice_shape);
  std::vector<Tensor> slices;
  slices.reserve(depth);
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<double> values(volume.data().begin() + static_cast<std::ptrdiff_t>(d * per),
                               volume.data().begin() + static_cast<std::ptrdiff_t>((d + 1) * per));
    if (!volume.on_tape()) {
      slices.emplace_back(slice_shape, std::move(values));
      continue;
    }
    Tape::Node node;
    node.kind = OpKind::Slice;
    node.parents.push_back(*volume.node_id());
    node.slots.push_back(d * per);
    slices.push_back(volume.tape()->record(std::move(node), slice_shape, std::move(values)));
  }
  return slices;
}

Tensor block_gradient(const Tensor& a) { return Tensor(a.shape(), a.data()); }

// ---------------------------------------------------------------------------

Tensor Gradients::of(const Tensor& x) const {
  if (!has(x)) return Tensor::zeros(x.shape());
  return Tensor(x.shape(), grads_[*x.node_id()]);
}

bool Gradients::has(const Tensor& x) const {
  return x.on_tape() && x.tape() == tape_ && *x.node_id() < grads_.size() && !grads_[*x.node_id()].empty();
}

Gradients Tape::backward(const Tensor& output) const {
  if (output.numel() != 1) {
    fail(ErrorKind::ShapeMismatch, "backward: output must be scalar, got " + shape_to_string(output.shape()));
  }
  Gradients result;
  result.tape_ = this;
  if (!output.on_tape()) return result;
  if (output.tape() != this) fail(ErrorKind::InvalidArgument, "backward: output belongs to another tape");

  auto& grads = result.grads_;
  grads.assign(nodes_.size(), {});
  const std::size_t root = *output.node_id();
  grads[root] = {1.0};

  auto accumulate = [&](std::size_t parent) -> std::vector<double>& {
    auto& g = grads[parent];
    if (g.empty()) g.assign(shape_numel(nodes_[parent].shape), 0.0);
    return g;
  };

  for (std::size_t id = root + 1; id-- > 0;) {
    const Node& node = nodes_[id];
    if (grads[id].empty() || node.parents.empty()) continue;
    const std::vector<double>& up = grads[id];
    switch (node.kind) {
      case OpKind::Leaf:
        break;
      case OpKind::Add:
        for (std::size_t p : node.parents) {
          auto& g = accumulate(p);
          for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i];
        }
        break;
      case OpKind::Sub:
        for (std::size_t j = 0; j < node.parents.size(); ++j) {
          auto& g = accumulate(node.parents[j]);
          const double sign = node.slots[j] == 0 ? 1.0 : -1.0;
          for (std::size_t i = 0; i < up.size(); ++i) g[i] += sign * up[i];
        }
        break;
      case OpKind::Mul:
        for (std::size_t j = 0; j < node.parents.size(); ++j) {
          auto& g = accumulate(node.parents[j]);
          const auto& other = node.saved[j];
          for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i] * other[i];
        }
        break;
      case OpKind::Scale: {
        auto& g = accumulate(node.parents[0]);
        for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i] * node.scalar;
        break;
      }
      case OpKind::Matmul:
        for (std::size_t j = 0; j < node.parents.size(); ++j) {
          auto& g = accumulate(node.parents[j]);
          if (node.slots[j] == 0) {
            // dA = up . B^T, saved B is [k x n]
            gemm_bt_acc(up.data(), node.saved[j].data(), g.data(), node.m, node.n, node.k);
          } else {
            // dB = A^T . up, saved A is [m x k]
            gemm_at_acc(node.saved[j].data(), up.data(), g.data(), node.k, node.m, node.n);
          }
        }
        break;
      case OpKind::Relu: {
        auto& g = accumulate(node.parents[0]);
        const auto& in = node.saved[0];
        for (std::size_t i = 0; i < up.size(); ++i) {
          if (in[i] > 0.0) g[i] += up[i];
        }
        break;
      }
      case OpKind::Sigmoid: {
        auto& g = accumulate(node.parents[0]);
        const auto& s = node.saved[0];
        for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i] * (s[i] * (1.0 - s[i]));
        break;
      }
      case OpKind::Sum: {
        auto& g = accumulate(node.parents[0]);
        for (double& v : g) v += up[0];
        break;
      }
      case OpKind::MeanAbs: {
        auto& g = accumulate(node.parents[0]);
        const auto& in = node.saved[0];
        const double w = up[0] / static_cast<double>(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) {
          if (in[i] > 0.0) g[i] += w;
          else if (in[i] < 0.0) g[i] -= w;
        }
        break;
      }
      case OpKind::Reshape: {
        auto& g = accumulate(node.parents[0]);
        for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i];
        break;
      }
      case OpKind::Concat:
        for (std::size_t j = 0; j < node.parents.size(); ++j) {
          auto& g = accumulate(node.parents[j]);
          const std::size_t offset = node.slots[j] * node.k;
          for (std::size_t i = 0; i < node.k; ++i) g[i] += up[offset + i];
        }
        break;
      case OpKind::Slice: {
        auto& g = accumulate(node.parents[0]);
        const std::size_t offset = node.slots[0];
        for (std::size_t i = 0; i < up.size(); ++i) g[offset + i] += up[i];
        break;
      }
    }
  }

  return result;
}

Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& fn, const Tensor& x, double step) {
  if (!(step > 0.0)) fail(ErrorKind::InvalidArgument, "finite_diff_gradient: step must be positive");
  std::vector<double> values = x.data();
  std::vector<double> grad(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double orig = values[i];
    values[i] = orig + step;
    const double plus = fn(Tensor(x.shape(), values));
    values[i] = orig - step;
    const double minus = fn(Tensor(x.shape(), values));
    values[i] = orig;
    grad[i] = (plus - minus) / (2.0 * step);
  }
  return Tensor(x.shape(), std::move(grad));
}

}  // namespace ctcf
