// SPDX-License-Identifier: Apache-2.0
//
// Dense 64-bit tensors with define-by-run reverse-mode differentiation.
//
// A Tensor either carries a node on a Tape (it was produced by a recorded
// operation or registered with Tape::variable) or it is a constant. Ops whose
// inputs are all constants produce constants and record nothing, so work done
// on constants never grows the tape. block_gradient() turns any tensor into a
// constant with identical values.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ctcf {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

class Tape;

class Tensor {
 public:
  /// Scalar zero.
  Tensor();
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor zeros(Shape shape);
  static Tensor ones(Shape shape);
  static Tensor filled(Shape shape, double value);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t numel() const noexcept { return data_.size(); }
  const std::vector<double>& data() const noexcept { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }
  /// Value of a single-element tensor.
  double item() const;

  bool on_tape() const noexcept { return node_.has_value(); }
  std::optional<std::size_t> node_id() const noexcept { return node_; }
  Tape* tape() const noexcept { return tape_; }

 private:
  friend class Tape;
  Shape shape_;
  std::vector<double> data_;
  Tape* tape_ = nullptr;
  std::optional<std::size_t> node_;
};

enum class OpKind {
  Leaf,
  Add,
  Sub,
  Mul,
  Scale,
  Matmul,
  Relu,
  Sigmoid,
  Sum,
  MeanAbs,
  Reshape,
  Concat,
  Slice,
};

/// Gradients produced by Tape::backward, keyed by node id.
class Gradients {
 public:
  Gradients() = default;

  /// Gradient with respect to `x`. Zeros when `x` is a constant, belongs to
  /// another tape, or received no gradient.
  Tensor of(const Tensor& x) const;
  bool has(const Tensor& x) const;

 private:
  const Tape* tape_ = nullptr;
  std::vector<std::vector<double>> grads_;
  friend class Tape;
};

/// Append-only record of the operations of one forward pass. Single writer:
/// a Tape must not be shared between threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Registers `value` as a differentiable leaf.
  Tensor variable(Tensor value);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  OpKind node_kind(std::size_t id) const { return nodes_.at(id).kind; }
  const std::vector<std::size_t>& node_parents(std::size_t id) const { return nodes_.at(id).parents; }

  /// Reverse sweep seeded with d(output)/d(output) = 1. `output` must hold a
  /// single element. A constant output yields empty gradients.
  Gradients backward(const Tensor& output) const;

 private:
  struct Node {
    OpKind kind = OpKind::Leaf;
    Shape shape;
    std::vector<std::size_t> parents;
    // Per-parent auxiliary index (concat slot, slice offset, matmul side).
    std::vector<std::size_t> slots;
    std::vector<std::vector<double>> saved;
    double scalar = 0.0;
    std::size_t m = 0, k = 0, n = 0;
  };

  Tensor record(Node node, Shape shape, std::vector<double> data);

  friend Tensor add(const Tensor&, const Tensor&);
  friend Tensor sub(const Tensor&, const Tensor&);
  friend Tensor mul(const Tensor&, const Tensor&);
  friend Tensor scale(const Tensor&, double);
  friend Tensor matmul(const Tensor&, const Tensor&);
  friend Tensor relu(const Tensor&);
  friend Tensor sigmoid(const Tensor&);
  friend Tensor sum(const Tensor&);
  friend Tensor mean_abs(const Tensor&);
  friend Tensor reshape(const Tensor&, Shape);
  friend Tensor concat_slices(std::span<const Tensor>);
  friend std::vector<Tensor> split_slices(const Tensor&);

  std::vector<Node> nodes_;
};

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise product.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
/// [m x k] . [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);
/// Subgradient at exactly 0 is 0.
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor mean_abs(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

/// Stacks equally shaped [H x W] slices into [D x H x W].
Tensor concat_slices(std::span<const Tensor> slices);
/// Exact inverse of concat_slices.
std::vector<Tensor> split_slices(const Tensor& volume);

/// Same values, no tape node: nothing upstream of the result receives
/// gradient.
Tensor block_gradient(const Tensor& a);

/// Central differences (fn(x + h e_i) - fn(x - h e_i)) / 2h for every entry.
Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& fn, const Tensor& x,
                            double step);

}  // namespace ctcf
