#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cadet/errors.hpp"

namespace cadet {

using Shape = std::vector<int>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorImpl {
  Shape shape;
  std::vector<double> data;   // row-major
  std::vector<double> grad;   // same length as data iff requires_grad
  bool requires_grad = false;
  bool leaf = true;           // false for op outputs recorded on a tape
};

/// Dense double-precision tensor with an optional gradient buffer.
/// Copies are shallow (shared storage); immutable after forward creation
/// except for gradient accumulation.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int ndim() const { return static_cast<int>(impl_->shape.size()); }
  int dim(int axis) const { return impl_->shape[static_cast<std::size_t>(axis)]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(impl_->data.size()); }

  std::vector<double>& values() { return impl_->data; }
  const std::vector<double>& values() const { return impl_->data; }
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool requires_grad);
  bool is_leaf() const { return impl_->leaf; }

  /// Gradient buffer; throws ValidationError when the tensor does not track gradients.
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  void zero_grad();

  /// Deep copy of the values only (no grad, no tape linkage).
  Tensor clone_values() const;

  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

/// Record of one differentiable forward pass. Operations append themselves in
/// execution order, which keeps the list topologically sorted by construction.
/// A tape is confined to a single thread; rebuild one per forward pass.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::vector<std::shared_ptr<TensorImpl>> inputs,
              std::shared_ptr<TensorImpl> output, BackwardFn backward);

  /// Reverse sweep from a scalar loss. Non-leaf grads are recomputed from
  /// scratch on every call; leaf grads accumulate across calls.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  static Tape* active();

 private:
  struct Node {
    std::vector<std::shared_ptr<TensorImpl>> inputs;
    std::shared_ptr<TensorImpl> output;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

/// Makes a tape the recording target for the current thread (RAII).
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

/// Backward through the active tape. Requires a scalar loss.
void backward(const Tensor& loss);

// ---- differentiable primitives -------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise ops broadcast a one-element tensor against any shape; otherwise
// shapes must match exactly.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, double scalar);
Tensor relu(const Tensor& x);        // subgradient at 0 is 0
Tensor sigmoid(const Tensor& x);     // branch on sign, no overflow

Tensor reshape(const Tensor& x, Shape shape);
Tensor transpose(const Tensor& x);   // 2-D only
Tensor slice1d(const Tensor& x, std::int64_t start, std::int64_t count);
Tensor add_rowvec(const Tensor& matrix, const Tensor& row);  // (K,d) + (d)
Tensor mean_rows(const Tensor& matrix);                      // (K,d) -> (d)
Tensor stack_rows(const std::vector<Tensor>& rows);          // K x (d) -> (K,d)
Tensor concat1d(const std::vector<Tensor>& parts);
Tensor sum(const Tensor& x);                                 // -> scalar

/// Stable log-softmax negative log likelihood of one target class.
/// logits: 1-D with at least two entries; gradient is softmax - onehot.
Tensor softmax_cross_entropy(const Tensor& logits, int target);

/// Plain stable softmax of raw values (inference path, no tape).
std::vector<double> softmax(const std::vector<double>& logits);

// ---- optimization ---------------------------------------------------------

/// SGD with classical momentum: v <- momentum*v + grad; p <- p - lr*v.
/// step() zeroes the gradients it consumed.
class SgdMomentum {
 public:
  SgdMomentum(std::vector<Tensor> params, double lr, double momentum);
  void step();

  double lr() const { return lr_; }
  double momentum() const { return momentum_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> velocity_;
  double lr_;
  double momentum_;
};

// ---- verification ---------------------------------------------------------

/// Max over checked coordinates of |analytic - central difference| /
/// max(1, |analytic|, |numeric|). Non-finite values surface as infinity.
/// `forward` must rebuild the whole computation from current tensor values;
/// gradients are taken with respect to `x`, which is perturbed in place.
/// With max_coords > 0 only a seeded random subset of coordinates is probed
/// (needed for large parameter matrices).
double check_gradients(const std::function<Tensor()>& forward, Tensor x, double eps,
                       std::int64_t max_coords = 0, std::uint64_t coord_seed = 0);

/// Convenience overload for a unary scalar-valued function of x.
double check_gradients(const std::function<Tensor(const Tensor&)>& f, Tensor x,
                       double eps);

}  // namespace cadet
