#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "drivesal/errors.hpp"

namespace drivesal {

enum class Act { Tanh, Sigmoid, Relu, Exp, Log, Softplus };
enum class Pad { Same, Valid };

namespace detail {

// One record of the compute graph. Interior nodes keep their operands alive
// through `parents` and know how to push their gradient one level down.
struct Node {
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated iff requires_grad
  bool requires_grad = false;
  bool leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  std::size_t size() const { return value.size(); }
  void ensure_grad() {
    if (requires_grad && grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

std::size_t shape_numel(const std::vector<int>& shape);

}  // namespace detail

// Dense row-major tensor with an attached derivative record. Copies are
// shallow; the underlying node is immutable after construction except for
// gradient accumulation and explicit leaf updates (set_data / sgd_step).
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
  static Tensor from_data(std::vector<int> shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const;
  int dim(std::size_t axis) const;
  std::size_t size() const;
  bool requires_grad() const;
  bool is_leaf() const;

  const std::vector<double>& data() const;
  double at(std::size_t i) const;
  double scalar_value() const;

  // Gradient of the last backward pass; zeros until one reaches this tensor.
  const std::vector<double>& grad() const;

  // Reverse-mode sweep from a scalar loss. Every reachable requires_grad
  // tensor accumulates into its grad buffer; each node is visited once, in
  // reverse topological order.
  void backward() const;

  void zero_grad() const;
  // Leaf-only updates used by the optimizers.
  void sgd_step(double lr) const;
  void set_data(const std::vector<double>& values) const;
  void set_value(std::size_t i, double v) const;

  std::shared_ptr<detail::Node> handle() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// --- graph construction -----------------------------------------------------

// Builds an interior node; requires_grad is inherited from the parents.
// Exposed so callers (and tests) can define custom differentiable ops.
Tensor make_op(std::vector<int> shape, std::vector<double> value,
               std::vector<Tensor> parents,
               std::function<void(detail::Node&)> backward_fn);

// --- elementwise ------------------------------------------------------------
// Binary ops accept equal shapes or a scalar (1-element) on either side.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

Tensor activation(const Tensor& x, Act kind);
inline Tensor tanh(const Tensor& x) { return activation(x, Act::Tanh); }
inline Tensor sigmoid(const Tensor& x) { return activation(x, Act::Sigmoid); }
inline Tensor relu(const Tensor& x) { return activation(x, Act::Relu); }
inline Tensor exp(const Tensor& x) { return activation(x, Act::Exp); }
inline Tensor log(const Tensor& x) { return activation(x, Act::Log); }
inline Tensor softplus(const Tensor& x) { return activation(x, Act::Softplus); }

Tensor sqrt(const Tensor& x);
Tensor clamp(const Tensor& x, double lo, double hi);

// --- reductions and restructuring -------------------------------------------

Tensor sum(const Tensor& x);         // -> [1]
Tensor mean(const Tensor& x);        // -> [1]
Tensor reduce_max(const Tensor& x);  // -> [1], grad to first max (row-major)
Tensor softmax(const Tensor& v);     // 1-d, max-subtracted
Tensor reshape(const Tensor& x, std::vector<int> shape);
Tensor index1d(const Tensor& v, int i);                    // -> [1]
Tensor stack_scalars(const std::vector<Tensor>& scalars);  // n x [1] -> [n]
Tensor concat_channels(const std::vector<Tensor>& maps);   // [H,W,Ck] -> [H,W,sum Ck]

// --- spatial ops over [H,W,C] maps -------------------------------------------

// kernel layout is [kh,kw,Cin,Cout]; "same" pads with zeros.
Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride, int dilation,
              Pad padding);
Tensor add_channel_bias(const Tensor& x, const Tensor& bias);  // bias [C]
Tensor maxpool2d(const Tensor& x, int window, int stride, Pad padding = Pad::Valid);
Tensor avgpool2d(const Tensor& x, int window);  // stride == window, valid
Tensor upsample_bilinear(const Tensor& x, int factor);  // half-pixel centers

// --- dense layer --------------------------------------------------------------

Tensor dense(const Tensor& x, const Tensor& weights, const Tensor& bias);  // y = xW + b

}  // namespace drivesal
