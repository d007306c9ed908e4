#include "cadet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cadet/rng.hpp"

namespace cadet {

namespace {

thread_local Tape* g_active_tape = nullptr;

bool is_scalar_like(const Tensor& t) { return t.numel() == 1; }

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
}

// Output of a recorded op: requires_grad when any input does and a tape is
// recording; otherwise a plain value tensor.
Tensor make_output(Shape shape, std::vector<double> data, bool inputs_require_grad) {
  const bool rg = inputs_require_grad && Tape::active() != nullptr;
  Tensor out(std::move(shape), std::move(data), rg);
  if (rg) out.impl()->leaf = false;
  return out;
}

void record(std::vector<std::shared_ptr<TensorImpl>> inputs, const Tensor& out,
            Tape::BackwardFn fn) {
  if (!out.requires_grad()) return;
  Tape::active()->record(std::move(inputs), out.impl(), std::move(fn));
}

}  // namespace

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (const int d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  for (const int d : shape) {
    if (d <= 0) throw ShapeError("tensor extents must be positive, got " + shape_str(shape));
  }
  if (shape_numel(shape) != static_cast<std::int64_t>(data.size())) {
    throw ShapeError("data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_str(shape));
  }
  impl_ = std::make_shared<TensorImpl>();
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
  if (requires_grad) impl_->grad.assign(impl_->data.size(), 0.0);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = static_cast<std::size_t>(shape_numel(shape));
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = static_cast<std::size_t>(shape_numel(shape));
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(Shape{1}, std::vector<double>{value}, requires_grad);
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError("item() needs a one-element tensor, got " + shape_str(shape()));
  }
  return impl_->data[0];
}

void Tensor::set_requires_grad(bool requires_grad) {
  impl_->requires_grad = requires_grad;
  if (requires_grad) {
    impl_->grad.assign(impl_->data.size(), 0.0);
  } else {
    impl_->grad.clear();
  }
}

std::vector<double>& Tensor::grad() {
  if (!impl_->requires_grad) {
    throw ValidationError("tensor has no gradient buffer (requires_grad is false)");
  }
  return impl_->grad;
}

const std::vector<double>& Tensor::grad() const {
  return const_cast<Tensor*>(this)->grad();
}

void Tensor::zero_grad() {
  if (impl_->requires_grad) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

Tensor Tensor::clone_values() const {
  return Tensor(impl_->shape, impl_->data, false);
}

// ---- tape ------------------------------------------------------------------

Tape* Tape::active() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }

TapeScope::~TapeScope() { g_active_tape = previous_; }

void Tape::record(std::vector<std::shared_ptr<TensorImpl>> inputs,
                  std::shared_ptr<TensorImpl> output, BackwardFn backward) {
  output->leaf = false;
  nodes_.push_back(Node{std::move(inputs), std::move(output), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ShapeError("backward requires a scalar loss");
  }
  // Non-leaf grads are scratch state from any previous sweep.
  for (auto& node : nodes_) {
    if (node.output->requires_grad) {
      std::fill(node.output->grad.begin(), node.output->grad.end(), 0.0);
    }
  }
  if (!loss.requires_grad()) return;  // loss depends on no tracked parameter
  loss.impl()->grad[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    it->backward();
  }
}

void backward(const Tensor& loss) {
  Tape* tape = Tape::active();
  if (tape == nullptr) {
    throw ValidationError("backward called without an active tape");
  }
  tape->backward(loss);
}

// ---- primitives -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2) {
    throw ShapeError("matmul needs 2-D operands, got " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  }
  const int m = a.dim(0), n = a.dim(1), n2 = b.dim(0), p = b.dim(1);
  if (n != n2) {
    throw ShapeError("matmul inner dimensions disagree: " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  }
  std::vector<double> out(static_cast<std::size_t>(m) * p, 0.0);
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < n; ++k) {
      const double aik = pa[static_cast<std::size_t>(i) * n + k];
      if (aik == 0.0) continue;
      const double* brow = pb + static_cast<std::size_t>(k) * p;
      double* orow = out.data() + static_cast<std::size_t>(i) * p;
      for (int j = 0; j < p; ++j) orow[j] += aik * brow[j];
    }
  }
  Tensor result = make_output({m, p}, std::move(out), a.requires_grad() || b.requires_grad());
  record({a.impl(), b.impl()}, result, [ia = a.impl(), ib = b.impl(), io = result.impl(), m, n, p] {
    const std::vector<double>& g = io->grad;
    if (ia->requires_grad) {
      // dA = G * B^T
      for (int i = 0; i < m; ++i) {
        for (int k = 0; k < n; ++k) {
          double acc = 0.0;
          const double* grow = g.data() + static_cast<std::size_t>(i) * p;
          const double* brow = ib->data.data() + static_cast<std::size_t>(k) * p;
          for (int j = 0; j < p; ++j) acc += grow[j] * brow[j];
          ia->grad[static_cast<std::size_t>(i) * n + k] += acc;
        }
      }
    }
    if (ib->requires_grad) {
      // dB = A^T * G
      for (int i = 0; i < m; ++i) {
        const double* arow = ia->data.data() + static_cast<std::size_t>(i) * n;
        const double* grow = g.data() + static_cast<std::size_t>(i) * p;
        for (int k = 0; k < n; ++k) {
          const double aik = arow[k];
          if (aik == 0.0) continue;
          double* brow = ib->grad.data() + static_cast<std::size_t>(k) * p;
          for (int j = 0; j < p; ++j) brow[j] += aik * grow[j];
        }
      }
    }
  });
  return result;
}

namespace {

enum class Broadcast { kNone, kLeftScalar, kRightScalar };

Broadcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::kNone;
  if (is_scalar_like(a)) return Broadcast::kLeftScalar;
  if (is_scalar_like(b)) return Broadcast::kRightScalar;
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                   " vs " + shape_str(b.shape()));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  const Broadcast kind = broadcast_kind(a, b, "add");
  const Tensor& big = (kind == Broadcast::kLeftScalar) ? b : a;
  std::vector<double> out(big.values());
  if (kind == Broadcast::kNone) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.values()[i];
  } else {
    const double s = (kind == Broadcast::kLeftScalar) ? a.item() : b.item();
    for (double& v : out) v += s;
  }
  Tensor result = make_output(big.shape(), std::move(out), a.requires_grad() || b.requires_grad());
  record({a.impl(), b.impl()}, result, [ia = a.impl(), ib = b.impl(), io = result.impl()] {
    const std::vector<double>& g = io->grad;
    for (auto* in : {ia.get(), ib.get()}) {
      if (!in->requires_grad) continue;
      if (in->data.size() == g.size()) {
        for (std::size_t i = 0; i < g.size(); ++i) in->grad[i] += g[i];
      } else {
        double acc = 0.0;
        for (const double v : g) acc += v;
        in->grad[0] += acc;
      }
    }
  });
  return result;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const Broadcast kind = broadcast_kind(a, b, "mul");
  const Tensor& big = (kind == Broadcast::kLeftScalar) ? b : a;
  std::vector<double> out(big.numel());
  if (kind == Broadcast::kNone) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  } else {
    const double s = (kind == Broadcast::kLeftScalar) ? a.item() : b.item();
    const std::vector<double>& v = big.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] * s;
  }
  Tensor result = make_output(big.shape(), std::move(out), a.requires_grad() || b.requires_grad());
  record({a.impl(), b.impl()}, result, [ia = a.impl(), ib = b.impl(), io = result.impl()] {
    const std::vector<double>& g = io->grad;
    auto side = [&](TensorImpl* self, TensorImpl* other) {
      if (!self->requires_grad) return;
      if (self->data.size() == g.size()) {
        if (other->data.size() == g.size()) {
          for (std::size_t i = 0; i < g.size(); ++i) self->grad[i] += g[i] * other->data[i];
        } else {
          const double s = other->data[0];
          for (std::size_t i = 0; i < g.size(); ++i) self->grad[i] += g[i] * s;
        }
      } else {
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * other->data[i];
        self->grad[0] += acc;
      }
    };
    side(ia.get(), ib.get());
    side(ib.get(), ia.get());
  });
  return result;
}

Tensor mul(const Tensor& a, double scalar) { return mul(a, Tensor::scalar(scalar)); }

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.values());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  Tensor result = make_output(x.shape(), std::move(out), x.requires_grad());
  record({x.impl()}, result, [ix = x.impl(), io = result.impl()] {
    for (std::size_t i = 0; i < ix->data.size(); ++i) {
      if (ix->data[i] > 0.0) ix->grad[i] += io->grad[i];
    }
  });
  return result;
}

namespace {

double stable_sigmoid(double v) {
  if (v >= 0.0) {
    return 1.0 / (1.0 + std::exp(-v));
  }
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.values());
  for (double& v : out) v = stable_sigmoid(v);
  Tensor result = make_output(x.shape(), std::move(out), x.requires_grad());
  record({x.impl()}, result, [ix = x.impl(), io = result.impl()] {
    for (std::size_t i = 0; i < ix->data.size(); ++i) {
      const double s = io->data[i];
      ix->grad[i] += io->grad[i] * s * (1.0 - s);
    }
  });
  return result;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape from " + shape_str(x.shape()) + " to " + shape_str(shape) +
                     " changes element count");
  }
  Tensor result = make_output(std::move(shape), x.values(), x.requires_grad());
  record({x.impl()}, result, [ix = x.impl(), io = result.impl()] {
    for (std::size_t i = 0; i < ix->data.size(); ++i) ix->grad[i] += io->grad[i];
  });
  return result;
}

Tensor transpose(const Tensor& x) {
  if (x.ndim() != 2) throw ShapeError("transpose needs a 2-D tensor, got " + shape_str(x.shape()));
  const int r = x.dim(0), c = x.dim(1);
  std::vector<double> out(static_cast<std::size_t>(r) * c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      out[static_cast<std::size_t>(j) * r + i] = x.values()[static_cast<std::size_t>(i) * c + j];
  Tensor result = make_output({c, r}, std::move(out), x.requires_grad());
  record({x.impl()}, result, [ix = x.impl(), io = result.impl(), r, c] {
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        ix->grad[static_cast<std::size_t>(i) * c + j] +=
            io->grad[static_cast<std::size_t>(j) * r + i];
  });
  return result;
}

Tensor slice1d(const Tensor& x, std::int64_t start, std::int64_t count) {
  if (x.ndim() != 1) throw ShapeError("slice1d needs a 1-D tensor, got " + shape_str(x.shape()));
  if (start < 0 || count <= 0 || start + count > x.numel()) {
    throw ShapeError("slice1d range [" + std::to_string(start) + "," +
                     std::to_string(start + count) + ") out of bounds for " +
                     shape_str(x.shape()));
  }
  std::vector<double> out(x.values().begin() + start, x.values().begin() + start + count);
  Tensor result = make_output({static_cast<int>(count)}, std::move(out), x.requires_grad());
  record({x.impl()}, result, [ix = x.impl(), io = result.impl(), start] {
    for (std::size_t i = 0; i < io->data.size(); ++i) {
      ix->grad[static_cast<std::size_t>(start) + i] += io->grad[i];
    }
  });
  return result;
}

Tensor add_rowvec(const Tensor& matrix, const Tensor& row) {
  if (matrix.ndim() != 2 || row.ndim() != 1 || matrix.dim(1) != row.dim(0)) {
    throw ShapeError("add_rowvec: " + shape_str(matrix.shape()) + " + " + shape_str(row.shape()));
  }
  const int k = matrix.dim(0), d = matrix.dim(1);
  std::vector<double> out(matrix.values());
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(i) * d + j] += row.values()[static_cast<std::size_t>(j)];
  Tensor result =
      make_output(matrix.shape(), std::move(out), matrix.requires_grad() || row.requires_grad());
  record({matrix.impl(), row.impl()}, result,
         [im = matrix.impl(), ir = row.impl(), io = result.impl(), k, d] {
           if (im->requires_grad) {
             for (std::size_t i = 0; i < im->grad.size(); ++i) im->grad[i] += io->grad[i];
           }
           if (ir->requires_grad) {
             for (int i = 0; i < k; ++i)
               for (int j = 0; j < d; ++j)
                 ir->grad[static_cast<std::size_t>(j)] += io->grad[static_cast<std::size_t>(i) * d + j];
           }
         });
  return result;
}

Tensor mean_rows(const Tensor& matrix) {
  if (matrix.ndim() != 2) {
    throw ShapeError("mean_rows needs a 2-D tensor, got " + shape_str(matrix.shape()));
  }
  const int k = matrix.dim(0), d = matrix.dim(1);
  std::vector<double> out(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(j)] += matrix.values()[static_cast<std::size_t>(i) * d + j];
  for (double& v : out) v /= k;
  Tensor result = make_output({d}, std::move(out), matrix.requires_grad());
  record({matrix.impl()}, result, [im = matrix.impl(), io = result.impl(), k, d] {
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < d; ++j)
        im->grad[static_cast<std::size_t>(i) * d + j] += io->grad[static_cast<std::size_t>(j)] / k;
  });
  return result;
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw ShapeError("stack_rows needs at least one row");
  const int d = rows.front().dim(0);
  bool rg = false;
  for (const Tensor& r : rows) {
    if (r.ndim() != 1 || r.dim(0) != d) {
      throw ShapeError("stack_rows: row shape " + shape_str(r.shape()) + " does not match (" +
                       std::to_string(d) + ")");
    }
    rg = rg || r.requires_grad();
  }
  const int k = static_cast<int>(rows.size());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k) * d);
  for (const Tensor& r : rows) out.insert(out.end(), r.values().begin(), r.values().end());
  Tensor result = make_output({k, d}, std::move(out), rg);
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  inputs.reserve(rows.size());
  for (const Tensor& r : rows) inputs.push_back(r.impl());
  record(inputs, result, [inputs, io = result.impl(), d] {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (!inputs[i]->requires_grad) continue;
      for (int j = 0; j < d; ++j) {
        inputs[i]->grad[static_cast<std::size_t>(j)] += io->grad[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
      }
    }
  });
  return result;
}

Tensor concat1d(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat1d needs at least one part");
  bool rg = false;
  std::int64_t total = 0;
  for (const Tensor& p : parts) {
    if (p.ndim() != 1) throw ShapeError("concat1d parts must be 1-D, got " + shape_str(p.shape()));
    total += p.numel();
    rg = rg || p.requires_grad();
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(total));
  for (const Tensor& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  Tensor result = make_output({static_cast<int>(total)}, std::move(out), rg);
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  for (const Tensor& p : parts) inputs.push_back(p.impl());
  record(inputs, result, [inputs, io = result.impl()] {
    std::size_t offset = 0;
    for (const auto& in : inputs) {
      if (in->requires_grad) {
        for (std::size_t i = 0; i < in->data.size(); ++i) in->grad[i] += io->grad[offset + i];
      }
      offset += in->data.size();
    }
  });
  return result;
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (const double v : x.values()) acc += v;
  Tensor result = make_output({1}, {acc}, x.requires_grad());
  record({x.impl()}, result, [ix = x.impl(), io = result.impl()] {
    const double g = io->grad[0];
    for (double& gv : ix->grad) gv += g;
  });
  return result;
}

Tensor softmax_cross_entropy(const Tensor& logits, int target) {
  if (logits.ndim() != 1 || logits.dim(0) < 2) {
    throw ShapeError("softmax_cross_entropy needs a 1-D logit vector with >= 2 classes, got " +
                     shape_str(logits.shape()));
  }
  const int n = logits.dim(0);
  if (target < 0 || target >= n) {
    throw ValidationError("softmax_cross_entropy target " + std::to_string(target) +
                          " out of range [0," + std::to_string(n) + ")");
  }
  const std::vector<double>& z = logits.values();
  const double zmax = *std::max_element(z.begin(), z.end());
  double lse = 0.0;
  for (const double v : z) lse += std::exp(v - zmax);
  lse = std::log(lse) + zmax;
  const double loss = lse - z[static_cast<std::size_t>(target)];
  Tensor result = make_output({1}, {loss}, logits.requires_grad());
  record({logits.impl()}, result, [iz = logits.impl(), io = result.impl(), target, lse] {
    const double g = io->grad[0];
    for (std::size_t i = 0; i < iz->data.size(); ++i) {
      const double p = std::exp(iz->data[i] - lse);
      iz->grad[i] += g * (p - (static_cast<int>(i) == target ? 1.0 : 0.0));
    }
  });
  return result;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  std::vector<double> out(logits.size());
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double norm = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - zmax);
    norm += out[i];
  }
  for (double& v : out) v /= norm;
  return out;
}

// ---- optimization -----------------------------------------------------------

SgdMomentum::SgdMomentum(std::vector<Tensor> params, double lr, double momentum)
    : params_(std::move(params)), lr_(lr), momentum_(momentum) {
  if (lr <= 0.0) throw ValidationError("sgd: learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ValidationError("sgd: momentum must be in [0,1)");
  velocity_.reserve(params_.size());
  for (const Tensor& p : params_) {
    velocity_.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
  }
}

void SgdMomentum::step() {
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Tensor& p = params_[pi];
    if (!p.requires_grad()) {
      throw ValidationError("sgd: parameter " + std::to_string(pi) + " has no gradient");
    }
    std::vector<double>& v = velocity_[pi];
    std::vector<double>& g = p.grad();
    std::vector<double>& x = p.values();
    for (std::size_t i = 0; i < x.size(); ++i) {
      v[i] = momentum_ * v[i] + g[i];
      x[i] -= lr_ * v[i];
      g[i] = 0.0;
    }
  }
}

// ---- verification -----------------------------------------------------------

double check_gradients(const std::function<Tensor()>& forward, Tensor x, double eps,
                       std::int64_t max_coords, std::uint64_t coord_seed) {
  if (!x.requires_grad()) x.set_requires_grad(true);
  x.zero_grad();
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor loss = forward();
    tape.backward(loss);
  }
  const std::vector<double> analytic = x.grad();

  std::vector<std::int64_t> coords;
  const std::int64_t n = x.numel();
  if (max_coords <= 0 || n <= max_coords) {
    coords.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) coords[static_cast<std::size_t>(i)] = i;
  } else {
    // Seeded sample without replacement.
    Rng rng(coord_seed);
    std::vector<std::int64_t> all(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    for (std::int64_t i = 0; i < max_coords; ++i) {
      const int j = uniform_int(rng, static_cast<int>(i), static_cast<int>(n - 1));
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    coords.assign(all.begin(), all.begin() + max_coords);
  }

  double max_err = 0.0;
  std::vector<double>& vals = x.values();
  for (const std::int64_t c : coords) {
    const std::size_t i = static_cast<std::size_t>(c);
    const double saved = vals[i];
    vals[i] = saved + eps;
    const double f_plus = forward().item();
    vals[i] = saved - eps;
    const double f_minus = forward().item();
    vals[i] = saved;
    const double numeric = (f_plus - f_minus) / (2.0 * eps);
    const double a = analytic[i];
    double err;
    if (!std::isfinite(numeric) || !std::isfinite(a)) {
      err = std::numeric_limits<double>::infinity();
    } else {
      err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
    }
    max_err = std::max(max_err, err);
  }
  return max_err;
}

double check_gradients(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps) {
  return check_gradients([&] { return f(x); }, x, eps);
}

}  // namespace cadet
