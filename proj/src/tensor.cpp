#include "drivesal/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

namespace drivesal {

namespace detail {

std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int e : shape) {
    if (e <= 0) throw DimensionError("tensor extents must be positive");
    n *= static_cast<std::size_t>(e);
  }
  return n;
}

}  // namespace detail

using detail::Node;

// --- construction ------------------------------------------------------------

static std::shared_ptr<Node> make_leaf(std::vector<int> shape, std::vector<double> data,
                                       bool requires_grad) {
  const std::size_t n = detail::shape_numel(shape);
  if (data.size() != n) throw DimensionError("data length does not match shape");
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  node->leaf = true;
  node->ensure_grad();
  return node;
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  const std::size_t n = detail::shape_numel(shape);
  return Tensor(make_leaf(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
  const std::size_t n = detail::shape_numel(shape);
  return Tensor(make_leaf(std::move(shape), std::vector<double>(n, value), requires_grad));
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<double> data, bool requires_grad) {
  return Tensor(make_leaf(std::move(shape), std::move(data), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(make_leaf({1}, {value}, requires_grad));
}

// --- accessors ---------------------------------------------------------------

static const Node& req(const std::shared_ptr<Node>& n) {
  if (!n) throw ArgumentError("operation on undefined tensor");
  return *n;
}

const std::vector<int>& Tensor::shape() const { return req(node_).shape; }

int Tensor::dim(std::size_t axis) const {
  const auto& s = req(node_).shape;
  if (axis >= s.size()) throw DimensionError("axis out of range");
  return s[axis];
}

std::size_t Tensor::size() const { return req(node_).value.size(); }
bool Tensor::requires_grad() const { return req(node_).requires_grad; }
bool Tensor::is_leaf() const { return req(node_).leaf; }
const std::vector<double>& Tensor::data() const { return req(node_).value; }

double Tensor::at(std::size_t i) const {
  const auto& v = req(node_).value;
  if (i >= v.size()) throw DimensionError("flat index out of range");
  return v[i];
}

double Tensor::scalar_value() const {
  const auto& v = req(node_).value;
  if (v.size() != 1) throw ArgumentError("scalar_value on non-scalar tensor");
  return v[0];
}

const std::vector<double>& Tensor::grad() const {
  req(node_);
  if (!node_->requires_grad) throw ArgumentError("grad requested on a tensor without requires_grad");
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() const {
  req(node_);
  if (!node_->requires_grad) return;
  node_->grad.assign(node_->value.size(), 0.0);
}

void Tensor::sgd_step(double lr) const {
  req(node_);
  if (!node_->leaf) throw ArgumentError("sgd_step is a leaf-only operation");
  node_->ensure_grad();
  for (std::size_t i = 0; i < node_->value.size(); ++i) node_->value[i] -= lr * node_->grad[i];
}

void Tensor::set_data(const std::vector<double>& values) const {
  req(node_);
  if (!node_->leaf) throw ArgumentError("set_data is a leaf-only operation");
  if (values.size() != node_->value.size()) throw DimensionError("set_data size mismatch");
  node_->value = values;
}

void Tensor::set_value(std::size_t i, double v) const {
  req(node_);
  if (!node_->leaf) throw ArgumentError("set_value is a leaf-only operation");
  if (i >= node_->value.size()) throw DimensionError("flat index out of range");
  node_->value[i] = v;
}

// --- backward ----------------------------------------------------------------

void Tensor::backward() const {
  req(node_);
  if (node_->value.size() != 1) throw ArgumentError("backward requires a scalar loss");
  if (!node_->requires_grad) return;

  // Post-order DFS; traversal is pruned below nodes that carry no gradient.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  struct Frame {
    Node* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({node_.get(), 0});
  visited.insert(node_.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      Node* p = f.node->parents[f.next_parent++].get();
      if (p->requires_grad && visited.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  // Interior grads are transient per sweep; leaf grads accumulate until
  // explicitly zeroed by the caller.
  for (Node* n : order) {
    if (n->leaf) {
      n->ensure_grad();
    } else {
      n->grad.assign(n->value.size(), 0.0);
    }
  }
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

// --- op plumbing ---------------------------------------------------------------

Tensor make_op(std::vector<int> shape, std::vector<double> value, std::vector<Tensor> parents,
               std::function<void(Node&)> backward_fn) {
  const std::size_t n = detail::shape_numel(shape);
  if (value.size() != n) throw DimensionError("op output length does not match shape");
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->leaf = false;
  for (const Tensor& p : parents) {
    if (!p.defined()) throw ArgumentError("op on undefined tensor");
    node->requires_grad = node->requires_grad || p.requires_grad();
    node->parents.push_back(p.handle());
  }
  if (node->requires_grad) node->backward_fn = std::move(backward_fn);
  return Tensor(node);
}

// Adds src into dst.grad if dst participates in the sweep.
static void accumulate(Node& dst, const double* src, std::size_t n) {
  if (!dst.requires_grad) return;
  dst.ensure_grad();
  for (std::size_t i = 0; i < n; ++i) dst.grad[i] += src[i];
}

// --- elementwise binary --------------------------------------------------------

namespace {

enum class BinKind { Add, Sub, Mul, Div };

bool same_shape(const std::vector<int>& a, const std::vector<int>& b) { return a == b; }

Tensor binary_op(const Tensor& a, const Tensor& b, BinKind kind) {
  const bool a_scalar = a.size() == 1;
  const bool b_scalar = b.size() == 1;
  if (!same_shape(a.shape(), b.shape()) && !a_scalar && !b_scalar)
    throw DimensionError("elementwise op on mismatched shapes");

  const std::vector<int>& out_shape = a_scalar && !b_scalar ? b.shape() : a.shape();
  const std::size_t n = a_scalar && !b_scalar ? b.size() : a.size();
  const auto& av = a.data();
  const auto& bv = b.data();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = av[a_scalar ? 0 : i];
    const double y = bv[b_scalar ? 0 : i];
    switch (kind) {
      case BinKind::Add: out[i] = x + y; break;
      case BinKind::Sub: out[i] = x - y; break;
      case BinKind::Mul: out[i] = x * y; break;
      case BinKind::Div: out[i] = x / y; break;
    }
  }

  return make_op(out_shape, std::move(out), {a, b}, [kind, a_scalar, b_scalar, n](Node& self) {
    Node& na = *self.parents[0];
    Node& nb = *self.parents[1];
    std::vector<double> ga(na.value.size(), 0.0);
    std::vector<double> gb(nb.value.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = self.grad[i];
      const double x = na.value[a_scalar ? 0 : i];
      const double y = nb.value[b_scalar ? 0 : i];
      double dx = 0.0, dy = 0.0;
      switch (kind) {
        case BinKind::Add: dx = g; dy = g; break;
        case BinKind::Sub: dx = g; dy = -g; break;
        case BinKind::Mul: dx = g * y; dy = g * x; break;
        case BinKind::Div: dx = g / y; dy = -g * x / (y * y); break;
      }
      ga[a_scalar ? 0 : i] += dx;
      gb[b_scalar ? 0 : i] += dy;
    }
    accumulate(na, ga.data(), ga.size());
    accumulate(nb, gb.data(), gb.size());
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinKind::Add); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinKind::Sub); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinKind::Mul); }
Tensor div(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinKind::Div); }
Tensor neg(const Tensor& a) { return mul(a, Tensor::scalar(-1.0)); }

// --- elementwise unary ---------------------------------------------------------

static double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor activation(const Tensor& x, Act kind) {
  const auto& xv = x.data();
  if (kind == Act::Log) {
    for (double v : xv)
      if (!(v > 0.0)) throw DomainError("log requires strictly positive elements");
  }
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double v = xv[i];
    switch (kind) {
      case Act::Tanh: out[i] = std::tanh(v); break;
      case Act::Sigmoid: out[i] = stable_sigmoid(v); break;
      case Act::Relu: out[i] = v > 0.0 ? v : 0.0; break;
      case Act::Exp: out[i] = std::exp(v); break;
      case Act::Log: out[i] = std::log(v); break;
      case Act::Softplus: out[i] = std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); break;
    }
  }
  return make_op(x.shape(), std::move(out), {x}, [kind](Node& self) {
    Node& nx = *self.parents[0];
    std::vector<double> gx(nx.value.size());
    for (std::size_t i = 0; i < gx.size(); ++i) {
      const double g = self.grad[i];
      const double v = nx.value[i];
      const double y = self.value[i];
      double d = 0.0;
      switch (kind) {
        case Act::Tanh: d = 1.0 - y * y; break;
        case Act::Sigmoid: d = y * (1.0 - y); break;
        case Act::Relu: d = v > 0.0 ? 1.0 : 0.0; break;
        case Act::Exp: d = y; break;
        case Act::Log: d = 1.0 / v; break;
        case Act::Softplus: d = stable_sigmoid(v); break;
      }
      gx[i] = g * d;
    }
    accumulate(nx, gx.data(), gx.size());
  });
}

Tensor sqrt(const Tensor& x) {
  const auto& xv = x.data();
  for (double v : xv)
    if (v < 0.0) throw DomainError("sqrt requires non-negative elements");
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = std::sqrt(xv[i]);
  return make_op(x.shape(), std::move(out), {x}, [](Node& self) {
    Node& nx = *self.parents[0];
    std::vector<double> gx(nx.value.size());
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = self.grad[i] * 0.5 / self.value[i];
    accumulate(nx, gx.data(), gx.size());
  });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  if (!(lo <= hi)) throw ArgumentError("clamp requires lo <= hi");
  const auto& xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = std::min(std::max(xv[i], lo), hi);
  return make_op(x.shape(), std::move(out), {x}, [lo, hi](Node& self) {
    Node& nx = *self.parents[0];
    std::vector<double> gx(nx.value.size());
    for (std::size_t i = 0; i < gx.size(); ++i) {
      const double v = nx.value[i];
      gx[i] = (v > lo && v < hi) ? self.grad[i] : 0.0;
    }
    accumulate(nx, gx.data(), gx.size());
  });
}

// --- reductions -----------------------------------------------------------------

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return make_op({1}, {acc}, {x}, [](Node& self) {
    Node& nx = *self.parents[0];
    const double g = self.grad[0];
    std::vector<double> gx(nx.value.size(), g);
    accumulate(nx, gx.data(), gx.size());
  });
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.size());
  return div(sum(x), Tensor::scalar(n));
}

Tensor reduce_max(const Tensor& x) {
  const auto& xv = x.data();
  if (xv.empty()) throw ArgumentError("reduce_max on empty tensor");
  std::size_t arg = 0;
  for (std::size_t i = 1; i < xv.size(); ++i)
    if (xv[i] > xv[arg]) arg = i;
  return make_op({1}, {xv[arg]}, {x}, [arg](Node& self) {
    Node& nx = *self.parents[0];
    std::vector<double> gx(nx.value.size(), 0.0);
    gx[arg] = self.grad[0];
    accumulate(nx, gx.data(), gx.size());
  });
}

Tensor softmax(const Tensor& v) {
  if (v.shape().size() != 1) throw ArgumentError("softmax expects a rank-1 tensor");
  const auto& xv = v.data();
  if (xv.empty()) throw ArgumentError("softmax on empty input");
  const double m = *std::max_element(xv.begin(), xv.end());
  std::vector<double> out(xv.size());
  double z = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    out[i] = std::exp(xv[i] - m);
    z += out[i];
  }
  for (double& o : out) o /= z;
  return make_op(v.shape(), std::move(out), {v}, [](Node& self) {
    Node& nx = *self.parents[0];
    double dot = 0.0;
    for (std::size_t i = 0; i < self.value.size(); ++i) dot += self.grad[i] * self.value[i];
    std::vector<double> gx(nx.value.size());
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = self.value[i] * (self.grad[i] - dot);
    accumulate(nx, gx.data(), gx.size());
  });
}

// --- restructuring ----------------------------------------------------------------

Tensor reshape(const Tensor& x, std::vector<int> shape) {
  if (detail::shape_numel(shape) != x.size())
    throw DimensionError("reshape changes the number of elements");
  std::vector<double> out = x.data();
  return make_op(std::move(shape), std::move(out), {x}, [](Node& self) {
    accumulate(*self.parents[0], self.grad.data(), self.grad.size());
  });
}

Tensor index1d(const Tensor& v, int i) {
  if (v.shape().size() != 1) throw ArgumentError("index1d expects a rank-1 tensor");
  if (i < 0 || static_cast<std::size_t>(i) >= v.size())
    throw DimensionError("index1d out of range");
  return make_op({1}, {v.data()[static_cast<std::size_t>(i)]}, {v}, [i](Node& self) {
    Node& nv = *self.parents[0];
    std::vector<double> gx(nv.value.size(), 0.0);
    gx[static_cast<std::size_t>(i)] = self.grad[0];
    accumulate(nv, gx.data(), gx.size());
  });
}

Tensor stack_scalars(const std::vector<Tensor>& scalars) {
  if (scalars.empty()) throw ArgumentError("stack_scalars on empty list");
  std::vector<double> out;
  std::vector<Tensor> parents;
  out.reserve(scalars.size());
  for (const Tensor& s : scalars) {
    if (s.size() != 1) throw DimensionError("stack_scalars expects 1-element tensors");
    out.push_back(s.data()[0]);
    parents.push_back(s);
  }
  const int n = static_cast<int>(scalars.size());
  return make_op({n}, std::move(out), std::move(parents), [](Node& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      const double g = self.grad[i];
      accumulate(*self.parents[i], &g, 1);
    }
  });
}

Tensor concat_channels(const std::vector<Tensor>& maps) {
  if (maps.empty()) throw ArgumentError("concat_channels on empty list");
  const auto& s0 = maps[0].shape();
  if (s0.size() != 3) throw DimensionError("concat_channels expects [H,W,C] tensors");
  const int h = s0[0], w = s0[1];
  int c_total = 0;
  std::vector<Tensor> parents;
  for (const Tensor& m : maps) {
    const auto& s = m.shape();
    if (s.size() != 3 || s[0] != h || s[1] != w)
      throw DimensionError("concat_channels spatial shape mismatch");
    c_total += s[2];
    parents.push_back(m);
  }
  std::vector<double> out(static_cast<std::size_t>(h) * w * c_total);
  std::vector<int> channels;
  for (const Tensor& m : maps) channels.push_back(m.shape()[2]);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::size_t dst = (static_cast<std::size_t>(y) * w + x) * c_total;
      for (std::size_t k = 0; k < maps.size(); ++k) {
        const int ck = channels[k];
        const auto& src = maps[k].data();
        const std::size_t base = (static_cast<std::size_t>(y) * w + x) * ck;
        for (int c = 0; c < ck; ++c) out[dst + c] = src[base + c];
        dst += ck;
      }
    }
  return make_op({h, w, c_total}, std::move(out), std::move(parents),
                 [h, w, c_total, channels](Node& self) {
                   for (std::size_t k = 0, c_off = 0; k < self.parents.size();
                        c_off += channels[k], ++k) {
                     Node& nk = *self.parents[k];
                     if (!nk.requires_grad) continue;
                     const int ck = channels[k];
                     std::vector<double> gk(nk.value.size());
                     for (int y = 0; y < h; ++y)
                       for (int x = 0; x < w; ++x) {
                         const std::size_t src =
                             (static_cast<std::size_t>(y) * w + x) * c_total + c_off;
                         const std::size_t dst = (static_cast<std::size_t>(y) * w + x) * ck;
                         for (int c = 0; c < ck; ++c) gk[dst + c] = self.grad[src + c];
                       }
                     accumulate(nk, gk.data(), gk.size());
                   }
                 });
}

}  // namespace drivesal
