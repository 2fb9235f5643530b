#include "rdhp/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rdhp/errors.hpp"
#include "rdhp/rng.hpp"

namespace rdhp::ad {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

NodePtr new_node(Shape shape, std::vector<double> value, const char* op) {
  auto n = std::make_shared<Node>();
  n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->op = op;
  return n;
}

using BackwardFn = std::function<void(Node&)>;

Tensor make_op(Shape shape, std::vector<double> value, std::initializer_list<const Tensor*> parents,
               const char* op, BackwardFn backward) {
  auto n = new_node(std::move(shape), std::move(value), op);
  bool rg = false;
  for (const Tensor* p : parents) rg = rg || p->requires_grad();
  if (rg) {
    n->requires_grad = true;
    for (const Tensor* p : parents) n->parents.push_back(p->node_ptr());
    n->backward = std::move(backward);
  }
  return Tensor::from_node(std::move(n));
}

Tensor make_op(Shape shape, std::vector<double> value, const std::vector<Tensor>& parents,
               const char* op, BackwardFn backward) {
  auto n = new_node(std::move(shape), std::move(value), op);
  bool rg = false;
  for (const auto& p : parents) rg = rg || p.requires_grad();
  if (rg) {
    n->requires_grad = true;
    for (const auto& p : parents) n->parents.push_back(p.node_ptr());
    n->backward = std::move(backward);
  }
  return Tensor::from_node(std::move(n));
}

// Accumulation target for parent i, or nullptr when it needs no gradient.
double* grad_of(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  if (!p.requires_grad) return nullptr;
  return p.grad_buffer().data();
}

const std::vector<double>& value_of(const Node& self, std::size_t i) { return self.parents[i]->value; }

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

struct BroadcastPlan {
  Shape out;
  std::size_t na = 0;
  std::size_t nb = 0;
};

BroadcastPlan plan_broadcast(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return {a.shape(), a.size(), b.size()};
  if (b.size() == 1 || is_suffix(b.shape(), a.shape())) return {a.shape(), a.size(), b.size()};
  if (a.size() == 1 || is_suffix(a.shape(), b.shape())) return {b.shape(), a.size(), b.size()};
  throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a.shape()) + " and " +
                   to_string(b.shape()));
}

template <typename F, typename DA, typename DB>
Tensor binary(const Tensor& a, const Tensor& b, const char* op, F f, DA da, DB db) {
  const auto plan = plan_broadcast(a, b, op);
  const std::size_t n = numel(plan.out);
  const std::size_t na = plan.na, nb = plan.nb;
  std::vector<double> out(n);
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = f(av[i % na], bv[i % nb]);
  return make_op(plan.out, std::move(out), {&a, &b}, op, [na, nb, da, db](Node& self) {
    const auto& x = value_of(self, 0);
    const auto& y = value_of(self, 1);
    const auto& g = self.grad;
    if (double* ga = grad_of(self, 0))
      for (std::size_t i = 0; i < g.size(); ++i) ga[i % na] += g[i] * da(x[i % na], y[i % nb]);
    if (double* gb = grad_of(self, 1))
      for (std::size_t i = 0; i < g.size(); ++i) gb[i % nb] += g[i] * db(x[i % na], y[i % nb]);
  });
}

// d(x, y) is the derivative given input x and output y.
template <typename F, typename D>
Tensor unary(const Tensor& a, const char* op, F f, D d) {
  const auto av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  return make_op(a.shape(), std::move(out), {&a}, op, [d](Node& self) {
    double* ga = grad_of(self, 0);
    if (!ga) return;
    const auto& x = value_of(self, 0);
    const auto& y = self.value;
    const auto& g = self.grad;
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * d(x[i], y[i]);
  });
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Splits a shape around an axis into (outer, axis extent, inner).
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
  AxisSplit r;
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  r.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

}  // namespace

std::string to_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::vector<double>& Node::grad_buffer() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  if (numel(shape) != data.size())
    throw ShapeError("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                     to_string(shape));
  node_ = new_node(std::move(shape), std::move(data), "leaf");
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({}, {value}, requires_grad); }

Tensor Tensor::vector(std::vector<double> data, bool requires_grad) {
  const std::size_t n = data.size();
  return Tensor({n}, std::move(data), requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> data, bool requires_grad) {
  return Tensor({rows, cols}, std::move(data), requires_grad);
}

Tensor Tensor::from_node(NodePtr node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

std::size_t Tensor::rows() const {
  if (rank() == 2) return dim(0);
  if (rank() <= 1) return 1;
  throw ShapeError("rows() needs rank <= 2, got " + to_string(shape()));
}

std::size_t Tensor::cols() const {
  if (rank() == 2) return dim(1);
  if (rank() == 1) return dim(0);
  if (rank() == 0) return 1;
  throw ShapeError("cols() needs rank <= 2, got " + to_string(shape()));
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape()));
  return node_->value[0];
}

void Tensor::set_requires_grad(bool on) { node_->requires_grad = on; }

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(shape(), node_->value, false); }

Tensor Tensor::clone_leaf() const { return Tensor(shape(), node_->value, node_->requires_grad); }

void Tensor::backward() const {
  if (!node_) throw ContractError("backward on an undefined tensor");
  if (size() != 1) throw ContractError("backward requires a scalar loss, got shape " + to_string(shape()));
  if (!node_->requires_grad) throw ContractError("backward on a tensor that is not on the tape");

  std::vector<Node*> order;
  std::vector<Node*> stack{node_.get()};
  std::vector<const Node*> seen;
  // Iterative DFS; graphs are small enough that a sorted visited list is
  // cheaper than hashing.
  auto visited = [&](const Node* n) {
    auto it = std::lower_bound(seen.begin(), seen.end(), n);
    if (it != seen.end() && *it == n) return true;
    seen.insert(it, n);
    return false;
  };
  visited(node_.get());
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents)
      if (p->requires_grad && !visited(p.get())) stack.push_back(p.get());
  }
  std::sort(order.begin(), order.end(), [](const Node* a, const Node* b) { return a->id > b->id; });
  for (Node* n : order)
    if (!n->is_leaf()) n->grad.assign(n->value.size(), 0.0);
  node_->grad_buffer()[0] += 1.0;
  for (Node* n : order)
    if (n->backward) n->backward(*n);
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "div", [](double x, double y) { return x / y; }, [](double, double y) { return 1.0 / y; },
      [](double x, double y) { return -x / (y * y); });
}

Tensor neg(const Tensor& a) {
  return unary(a, "neg", [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Tensor scale(const Tensor& a, double c) {
  return unary(a, "scale", [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Tensor add_scalar(const Tensor& a, double c) {
  return unary(a, "add_scalar", [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (b.rank() != 2 || a.rank() < 1 || a.rank() > 2)
    throw ShapeError("matmul: unsupported shapes " + to_string(a.shape()) + " and " + to_string(b.shape()));
  const std::size_t m = a.rows(), k = a.cols(), n = b.dim(1);
  if (b.dim(0) != k)
    throw ShapeError("matmul: inner dimensions differ for " + to_string(a.shape()) + " and " +
                     to_string(b.shape()));
  std::vector<double> out(m * n, 0.0);
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t l = 0; l < k; ++l) {
      const double x = av[i * k + l];
      if (x == 0.0) continue;
      const double* brow = bv.data() + l * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += x * brow[j];
    }
  }
  Shape shape = a.rank() == 1 ? Shape{n} : Shape{m, n};
  return make_op(std::move(shape), std::move(out), {&a, &b}, "matmul", [m, k, n](Node& self) {
    const auto& A = value_of(self, 0);
    const auto& B = value_of(self, 1);
    const auto& G = self.grad;
    if (double* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += G[i * n + j] * B[l * n + j];
          ga[i * k + l] += s;
        }
    }
    if (double* gb = grad_of(self, 1)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l) {
          const double x = A[i * k + l];
          if (x == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) gb[l * n + j] += x * G[i * n + j];
        }
    }
  });
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("transpose needs rank 2, got " + to_string(a.shape()));
  const std::size_t r = a.dim(0), c = a.dim(1);
  std::vector<double> out(r * c);
  const auto av = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  return make_op({c, r}, std::move(out), {&a}, "transpose", [r, c](Node& self) {
    double* ga = grad_of(self, 0);
    if (!ga) return;
    const auto& g = self.grad;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j * r + i];
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel(shape) != a.size())
    throw ShapeError("reshape: " + to_string(a.shape()) + " cannot become " + to_string(shape));
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_op(std::move(shape), std::move(out), {&a}, "reshape", [](Node& self) {
    double* ga = grad_of(self, 0);
    if (!ga) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
  });
}

Tensor exp(const Tensor& a) {
  return unary(a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor pow(const Tensor& a, double e) {
  return unary(
      a, "pow", [e](double x) { return std::pow(x, e); },
      [e](double x, double) { return e * std::pow(x, e - 1.0); });
}

Tensor abs(const Tensor& a) {
  return unary(
      a, "abs", [](double x) { return std::abs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor tanh(const Tensor& a) {
  return unary(a, "tanh", [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor gelu(const Tensor& a) {
  static const double c = std::sqrt(2.0 / std::numbers::pi);
  constexpr double k = 0.044715;
  return unary(
      a, "gelu", [](double x) { return 0.5 * x * (1.0 + std::tanh(c * (x + k * x * x * x))); },
      [](double x, double) {
        const double t = std::tanh(c * (x + k * x * x * x));
        return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * c * (1.0 + 3.0 * k * x * x);
      });
}

Tensor softplus(const Tensor& a) {
  return unary(a, "softplus", stable_softplus, [](double x, double) { return stable_sigmoid(x); });
}

Tensor sigmoid(const Tensor& a) {
  return unary(a, "sigmoid", stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  return unary(
      a, "clamp", [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.data()) s += x;
  return make_op({}, {s}, {&a}, "sum", [](Node& self) {
    double* ga = grad_of(self, 0);
    if (!ga) return;
    const double g = self.grad[0];
    const std::size_t n = self.parents[0]->value.size();
    for (std::size_t i = 0; i < n; ++i) ga[i] += g;
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor sum_rows(const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("sum_rows needs rank 2, got " + to_string(a.shape()));
  const std::size_t r = a.dim(0), c = a.dim(1);
  std::vector<double> out(c, 0.0);
  const auto av = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j] += av[i * c + j];
  return make_op({c}, std::move(out), {&a}, "sum_rows", [r, c](Node& self) {
    double* ga = grad_of(self, 0);
    if (!ga) return;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += self.grad[j];
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  const Shape& ref = parts.front().shape();
  if (axis >= ref.size()) throw ShapeError("concat axis out of range for " + to_string(ref));
  Shape out_shape = ref;
  out_shape[axis] = 0;
  std::vector<std::size_t> extents;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == ref.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == ref[i];
    if (!ok) throw ShapeError("concat: shape " + to_string(s) + " does not match " + to_string(ref));
    extents.push_back(s[axis]);
    out_shape[axis] += s[axis];
  }
  const auto geo = split_axis(out_shape, axis);
  std::vector<double> out(numel(out_shape));
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto pv = parts[p].data();
    const std::size_t e = extents[p];
    for (std::size_t o = 0; o < geo.outer; ++o)
      std::copy_n(pv.data() + o * e * geo.inner, e * geo.inner,
                  out.data() + (o * geo.extent + offset) * geo.inner);
    offset += e;
  }
  return make_op(out_shape, std::move(out), parts, "concat", [geo, extents](Node& self) {
    std::size_t off = 0;
    for (std::size_t p = 0; p < extents.size(); ++p) {
      const std::size_t e = extents[p];
      if (double* gp = grad_of(self, p)) {
        for (std::size_t o = 0; o < geo.outer; ++o)
          for (std::size_t q = 0; q < e * geo.inner; ++q)
            gp[o * e * geo.inner + q] += self.grad[(o * geo.extent + off) * geo.inner + q];
      }
      off += e;
    }
  });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end) {
  if (axis >= a.rank() || begin > end || end > a.dim(axis))
    throw ShapeError("slice [" + std::to_string(begin) + ", " + std::to_string(end) + ") on axis " +
                     std::to_string(axis) + " of " + to_string(a.shape()));
  const auto geo = split_axis(a.shape(), axis);
  Shape out_shape = a.shape();
  out_shape[axis] = end - begin;
  const std::size_t e = end - begin;
  std::vector<double> out(numel(out_shape));
  const auto av = a.data();
  for (std::size_t o = 0; o < geo.outer; ++o)
    std::copy_n(av.data() + (o * geo.extent + begin) * geo.inner, e * geo.inner,
                out.data() + o * e * geo.inner);
  return make_op(out_shape, std::move(out), {&a}, "slice", [geo, begin, e](Node& self) {
    double* ga = grad_of(self, 0);
    if (!ga) return;
    for (std::size_t o = 0; o < geo.outer; ++o)
      for (std::size_t q = 0; q < e * geo.inner; ++q)
        ga[(o * geo.extent + begin) * geo.inner + q] += self.grad[o * e * geo.inner + q];
  });
}

Tensor softmax(const Tensor& a) {
  if (a.rank() == 0) throw ShapeError("softmax of a scalar");
  const std::size_t c = a.shape().back();
  const std::size_t r = a.size() / c;
  std::vector<double> out(a.size());
  const auto av = a.data();
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = av.data() + i * c;
    double* y = out.data() + i * c;
    const double mx = *std::max_element(x, x + c);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += (y[j] = std::exp(x[j] - mx));
    for (std::size_t j = 0; j < c; ++j) y[j] /= s;
  }
  return make_op(a.shape(), std::move(out), {&a}, "softmax", [r, c](Node& self) {
    double* ga = grad_of(self, 0);
    if (!ga) return;
    const auto& y = self.value;
    const auto& g = self.grad;
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * y[i * c + j];
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += y[i * c + j] * (g[i * c + j] - dot);
    }
  });
}

Tensor log_softmax(const Tensor& a) {
  if (a.rank() == 0) throw ShapeError("log_softmax of a scalar");
  const std::size_t c = a.shape().back();
  const std::size_t r = a.size() / c;
  std::vector<double> out(a.size());
  const auto av = a.data();
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = av.data() + i * c;
    const double mx = *std::max_element(x, x + c);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += std::exp(x[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = x[j] - lse;
  }
  return make_op(a.shape(), std::move(out), {&a}, "log_softmax", [r, c](Node& self) {
    double* ga = grad_of(self, 0);
    if (!ga) return;
    const auto& y = self.value;
    const auto& g = self.grad;
    for (std::size_t i = 0; i < r; ++i) {
      double gs = 0.0;
      for (std::size_t j = 0; j < c; ++j) gs += g[i * c + j];
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[i * c + j] - std::exp(y[i * c + j]) * gs;
    }
  });
}

Tensor pick(const Tensor& a, const std::vector<std::size_t>& index) {
  if (a.rank() != 2 || index.size() != a.dim(0))
    throw ShapeError("pick: " + std::to_string(index.size()) + " indices for shape " + to_string(a.shape()));
  const std::size_t c = a.dim(1);
  std::vector<double> out(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= c) throw ShapeError("pick: index " + std::to_string(index[i]) + " out of range");
    out[i] = a.data()[i * c + index[i]];
  }
  return make_op({index.size()}, std::move(out), {&a}, "pick", [index, c](Node& self) {
    double* ga = grad_of(self, 0);
    if (!ga) return;
    for (std::size_t i = 0; i < index.size(); ++i) ga[i * c + index[i]] += self.grad[i];
  });
}

Tensor layer_norm(const Tensor& a, double eps) {
  if (a.rank() == 0) throw ShapeError("layer_norm of a scalar");
  const std::size_t c = a.shape().back();
  const std::size_t r = a.size() / c;
  std::vector<double> out(a.size());
  std::vector<double> inv_std(r);
  const auto av = a.data();
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = av.data() + i * c;
    double m = 0.0;
    for (std::size_t j = 0; j < c; ++j) m += x[j];
    m /= static_cast<double>(c);
    double v = 0.0;
    for (std::size_t j = 0; j < c; ++j) v += (x[j] - m) * (x[j] - m);
    v /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(v + eps);
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = (x[j] - m) * inv_std[i];
  }
  return make_op(a.shape(), std::move(out), {&a}, "layer_norm", [r, c, inv_std](Node& self) {
    double* ga = grad_of(self, 0);
    if (!ga) return;
    const auto& xh = self.value;
    const auto& g = self.grad;
    const double inv_c = 1.0 / static_cast<double>(c);
    for (std::size_t i = 0; i < r; ++i) {
      double gm = 0.0, gx = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        gm += g[i * c + j];
        gx += g[i * c + j] * xh[i * c + j];
      }
      gm *= inv_c;
      gx *= inv_c;
      for (std::size_t j = 0; j < c; ++j)
        ga[i * c + j] += inv_std[i] * (g[i * c + j] - gm - xh[i * c + j] * gx);
    }
  });
}

Tensor causal_gaussian_weights(const Tensor& q, const Tensor& k, double temperature) {
  if (q.rank() != 2 || k.shape() != q.shape())
    throw ShapeError("causal_gaussian_weights: shapes " + to_string(q.shape()) + " and " +
                     to_string(k.shape()));
  if (!(temperature > 0.0)) throw DomainError("causal_gaussian_weights: temperature must be > 0");
  const std::size_t L = q.dim(0), h = q.dim(1);
  const auto qv = q.data();
  const auto kv = k.data();
  std::vector<double> w(L * L, 0.0);
  for (std::size_t i = 0; i < L; ++i) {
    double mx = -INFINITY;
    for (std::size_t j = 0; j <= i; ++j) {
      double d = 0.0;
      for (std::size_t c = 0; c < h; ++c) {
        const double diff = qv[i * h + c] - kv[j * h + c];
        d += diff * diff;
      }
      w[i * L + j] = -d / temperature;
      mx = std::max(mx, w[i * L + j]);
    }
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += (w[i * L + j] = std::exp(w[i * L + j] - mx));
    for (std::size_t j = 0; j <= i; ++j) w[i * L + j] /= s;
  }
  return make_op({L, L}, std::move(w), {&q, &k}, "causal_gaussian", [L, h, temperature](Node& self) {
    double* gq = grad_of(self, 0);
    double* gk = grad_of(self, 1);
    const auto& Q = value_of(self, 0);
    const auto& K = value_of(self, 1);
    const auto& W = self.value;
    const auto& G = self.grad;
    for (std::size_t i = 0; i < L; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j <= i; ++j) dot += W[i * L + j] * G[i * L + j];
      for (std::size_t j = 0; j <= i; ++j) {
        const double ds = W[i * L + j] * (G[i * L + j] - dot);
        // d score / d D = -1 / temperature; d D / d q_i = 2 (q_i - k_j).
        const double coef = -2.0 * ds / temperature;
        for (std::size_t c = 0; c < h; ++c) {
          const double diff = Q[i * h + c] - K[j * h + c];
          if (gq) gq[i * h + c] += coef * diff;
          if (gk) gk[j * h + c] -= coef * diff;
        }
      }
    }
  });
}

Tensor dropout(const Tensor& a, double rate, CounterRng& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw DomainError("dropout rate must be < 1");
  std::vector<double> mask(a.size());
  const double keep = 1.0 / (1.0 - rate);
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep;
  return mul(a, Tensor(a.shape(), std::move(mask)));
}

double grad_norm(const std::vector<Tensor*>& leaves) {
  double s = 0.0;
  for (const Tensor* t : leaves)
    for (double g : t->grad()) s += g * g;
  return std::sqrt(s);
}

}  // namespace rdhp::ad
