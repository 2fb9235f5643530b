#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rdhp {
class CounterRng;
}

namespace rdhp::ad {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t numel(const Shape& shape);

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// One entry of the gradient tape. Nodes are numbered at creation, so
/// visiting them by descending id is a reverse topological order.
struct Node {
  std::uint64_t id = 0;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward;
  const char* op = "leaf";

  bool is_leaf() const noexcept { return parents.empty(); }
  /// Grad buffer, allocated (zeroed) on first use.
  std::vector<double>& grad_buffer();
};

/// Dense row-major tensor. Copies share the underlying node; use
/// clone_leaf() for a deep copy.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor vector(std::vector<double> data, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data,
                       bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  /// Rows/cols of a rank-2 tensor; a rank-1 tensor reads as one row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return node_->value; }
  std::span<double> mutable_data() { return node_->value; }
  std::span<const double> grad() const { return node_->grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  double item() const;
  double at(std::size_t i) const { return node_->value.at(i); }
  double at(std::size_t r, std::size_t c) const { return node_->value.at(r * cols() + c); }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on);
  void zero_grad();

  /// Reverse sweep from this scalar. Leaf grads accumulate across calls;
  /// intermediate grads are reset at the start of each sweep.
  void backward() const;

  /// Leaf with the same values and no history.
  Tensor detach() const;
  /// Independent leaf copy (values and requires_grad flag).
  Tensor clone_leaf() const;

  Node* node() const noexcept { return node_.get(); }
  const NodePtr& node_ptr() const noexcept { return node_; }
  static Tensor from_node(NodePtr node);

 private:
  NodePtr node_;
};

// Element-wise arithmetic. One operand may be broadcast when its shape equals
// the trailing dimensions of the other (or it has a single element).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator*(const Tensor& a, double c) { return scale(a, c); }
inline Tensor operator*(double c, const Tensor& a) { return scale(a, c); }
inline Tensor operator+(const Tensor& a, double c) { return add_scalar(a, c); }
inline Tensor operator-(double c, const Tensor& a) { return add_scalar(neg(a), c); }

/// (m x k) @ (k x n). A rank-1 left operand is treated as a single row and
/// the result is rank-1.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor pow(const Tensor& a, double exponent);
/// Subgradient 0 at the origin.
Tensor abs(const Tensor& a);
Tensor tanh(const Tensor& a);
/// tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
Tensor gelu(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor sigmoid(const Tensor& a);
/// Gradient passes where lo <= x <= hi, zero elsewhere.
Tensor clamp(const Tensor& a, double lo, double hi);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Sum over rows of a rank-2 tensor -> vector of length cols.
Tensor sum_rows(const Tensor& a);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end);

/// Softmax over the last axis.
Tensor softmax(const Tensor& a);
Tensor log_softmax(const Tensor& a);
/// out[r] = a[r, index[r]] for a rank-2 tensor.
Tensor pick(const Tensor& a, const std::vector<std::size_t>& index);

/// Normalises each row to zero mean and unit variance (no affine part).
Tensor layer_norm(const Tensor& a, double eps = 1e-5);

/// Row i of the result holds softmax_j(-||q_i - k_j||^2 / temperature) over
/// j <= i and zero for j > i, i.e. normalised Gaussian-kernel weights with a
/// causal mask. q and k are (L x h).
Tensor causal_gaussian_weights(const Tensor& q, const Tensor& k, double temperature);

/// Inverted dropout; identity when rate == 0.
Tensor dropout(const Tensor& a, double rate, CounterRng& rng);

/// Global L2 norm of the gradients of the given leaves.
double grad_norm(const std::vector<Tensor*>& leaves);

}  // namespace rdhp::ad
