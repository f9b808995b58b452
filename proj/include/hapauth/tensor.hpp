#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hapauth {
class Rng;
}

namespace hapauth::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until first touched by backward
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into its inputs' grads.
  std::function<void(Node&)> backward;

  std::vector<T>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), T(0));
    return grad;
  }
};

// Dense row-major tensor participating in a reverse-mode graph. Copies share
// the underlying node (handle semantics, like a framework tensor).
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }

  std::span<T> data() { return node_->value; }
  std::span<const T> data() const { return node_->value; }
  // Gradient buffer; zeros if backward has not reached this tensor.
  std::span<const T> grad() const { return node_->grad_buffer(); }
  std::span<T> mutable_grad() { return node_->grad_buffer(); }
  bool has_grad() const { return !node_->grad.empty(); }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }
  void zero_grad() { node_->grad.clear(); }

  T item() const;

  // Reverse-mode sweep from a scalar. Leaf gradients accumulate across calls.
  void backward() const;

  // Same values, no graph history.
  Tensor detach() const;

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> v(node_->value.begin(), node_->value.end());
    return Tensor<U>::from(node_->shape, std::move(v), node_->requires_grad);
  }

  const std::shared_ptr<Node<T>>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<Node<T>> node_;
};

// ---- ops ----
// Shape errors throw hapauth::DimensionError naming both shapes.

// a: [..., m, k]; b: [k, n] (shared across leading dims) or [..., k, n] with
// the same leading dims as a. Result [..., m, n].
template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
// b's shape must equal a trailing suffix of a's shape (broadcast over leading dims).
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul_scalar(const Tensor<T>& a, T c);
template <typename T> Tensor<T> relu(const Tensor<T>& x);
template <typename T> Tensor<T> softmax(const Tensor<T>& x);  // last axis
template <typename T> Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma,
                                           const Tensor<T>& beta, T eps = T(1e-5));
template <typename T> Tensor<T> mean(const Tensor<T>& x, std::size_t axis);
template <typename T> Tensor<T> sum(const Tensor<T>& x);  // all elements -> scalar
template <typename T> Tensor<T> transpose(const Tensor<T>& x, const std::vector<std::size_t>& axes);
template <typename T> Tensor<T> reshape(const Tensor<T>& x, Shape shape);
// Inverted dropout; identity when p == 0.
template <typename T> Tensor<T> dropout(const Tensor<T>& x, double p, Rng& rng);
// Mean over the batch of -log softmax(logits)[label], via log-sum-exp. logits: [B, K].
template <typename T> Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

// ---- instrumentation used by gradient checking ----

// While alive, accumulates a hash of the sign pattern of every relu input
// evaluated on this thread.
class ReluSignTrace {
 public:
  ReluSignTrace();
  ~ReluSignTrace();
  ReluSignTrace(const ReluSignTrace&) = delete;
  ReluSignTrace& operator=(const ReluSignTrace&) = delete;

  std::uint64_t digest() const { return hash_; }
  void mix(std::uint64_t bits);

 private:
  std::uint64_t hash_;
  ReluSignTrace* prev_;
};

// Negative control for the gradient checker: while alive, relu's backward
// on this thread scales its gradient by 1.5.
class InjectBackwardFault {
 public:
  InjectBackwardFault();
  ~InjectBackwardFault();
  InjectBackwardFault(const InjectBackwardFault&) = delete;
  InjectBackwardFault& operator=(const InjectBackwardFault&) = delete;

 private:
  bool prev_;
};

namespace kernel {
// c[m x n] (+)= a[m x k] * b[k x n]
template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate);
}  // namespace kernel

}  // namespace hapauth::ad
