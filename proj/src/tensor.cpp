#include "hapauth/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "hapauth/error.hpp"
#include "hapauth/rng.hpp"

namespace hapauth::ad {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

thread_local ReluSignTrace* g_sign_trace = nullptr;
thread_local bool g_inject_fault = false;

[[noreturn]] void dim_error(const char* op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> value, std::vector<std::shared_ptr<Node<T>>> inputs,
                      std::function<void(Node<T>&)> backward) {
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool any = std::any_of(inputs.begin(), inputs.end(), [](const auto& n) { return n->requires_grad; });
  if (any) {
    node->requires_grad = true;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
  }
  return Tensor<T>(std::move(node));
}

// b[k x n] -> bt[n x k]
template <typename T>
void transpose2d(std::size_t k, std::size_t n, const T* b, T* bt) {
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
  }
}

}  // namespace

namespace kernel {

template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    T* ci = c + i * n;
    const T* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T ap = ai[p];
      const T* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += ap * bp[j];
    }
  }
}

template void gemm<float>(std::size_t, std::size_t, std::size_t, const float*, const float*, float*, bool);
template void gemm<double>(std::size_t, std::size_t, std::size_t, const double*, const double*, double*, bool);

}  // namespace kernel

// ---- Tensor ----

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  std::vector<T> v(numel(shape), value);
  return from(std::move(shape), std::move(v), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> values, bool requires_grad) {
  if (numel(shape) != values.size()) {
    throw DimensionError("tensor data length " + std::to_string(values.size()) + " does not match shape " +
                         shape_str(shape));
  }
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return from({}, {value}, requires_grad);
}

template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return from(node_->shape, node_->value, false);
}

template <typename T>
void Tensor<T>::backward() const {
  if (size() != 1) throw DimensionError("backward() needs a scalar loss, got shape " + shape_str(shape()));
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order (inputs before outputs).
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node<T>* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior gradients are recomputed from scratch; leaves accumulate.
  for (Node<T>* n : order) {
    if (n->backward) n->grad.clear();
  }
  node_->grad_buffer()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

// ---- ops ----

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() < 2 || sb.size() < 2) dim_error("matmul", sa, sb);
  const std::size_t m = sa[sa.size() - 2];
  const std::size_t k = sa.back();
  const std::size_t n = sb.back();
  if (sb[sb.size() - 2] != k) dim_error("matmul", sa, sb);
  const bool shared_b = sb.size() == 2;
  if (!shared_b && (sb.size() != sa.size() || !std::equal(sa.begin(), sa.end() - 2, sb.begin()))) {
    dim_error("matmul", sa, sb);
  }
  const std::size_t batch = numel(sa) / (m * k);

  Shape out_shape(sa.begin(), sa.end() - 2);
  out_shape.push_back(m);
  out_shape.push_back(n);
  std::vector<T> out(batch * m * n);
  const T* av = a.data().data();
  const T* bv = b.data().data();
  if (shared_b) {
    kernel::gemm(batch * m, n, k, av, bv, out.data(), false);
  } else {
    for (std::size_t i = 0; i < batch; ++i) {
      kernel::gemm(m, n, k, av + i * m * k, bv + i * k * n, out.data() + i * m * n, false);
    }
  }

  auto backward = [m, n, k, batch, shared_b](Node<T>& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    const T* dc = self.grad.data();
    if (na.requires_grad) {
      T* da = na.grad_buffer().data();
      if (shared_b) {
        std::vector<T> bt(k * n);
        transpose2d(k, n, nb.value.data(), bt.data());
        kernel::gemm(batch * m, k, n, dc, bt.data(), da, true);
      } else {
        std::vector<T> bt(k * n);
        for (std::size_t i = 0; i < batch; ++i) {
          transpose2d(k, n, nb.value.data() + i * k * n, bt.data());
          kernel::gemm(m, k, n, dc + i * m * n, bt.data(), da + i * m * k, true);
        }
      }
    }
    if (nb.requires_grad) {
      T* db = nb.grad_buffer().data();
      // db += a^T dc, with a^T materialized so the product runs through the blocked kernel
      if (shared_b) {
        std::vector<T> at(batch * m * k);
        transpose2d(batch * m, k, na.value.data(), at.data());
        kernel::gemm(k, n, batch * m, at.data(), dc, db, true);
      } else {
        std::vector<T> at(m * k);
        for (std::size_t i = 0; i < batch; ++i) {
          transpose2d(m, k, na.value.data() + i * m * k, at.data());
          kernel::gemm(k, n, m, at.data(), dc + i * m * n, db + i * k * n, true);
        }
      }
    }
  };
  return make_result<T>(std::move(out_shape), std::move(out), {a.node(), b.node()}, backward);
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sb.size() > sa.size() || !std::equal(sb.begin(), sb.end(), sa.end() - static_cast<std::ptrdiff_t>(sb.size()))) {
    dim_error("add", sa, sb);
  }
  const std::size_t inner = b.size();
  const std::size_t outer = inner == 0 ? 0 : a.size() / inner;
  std::vector<T> out(a.data().begin(), a.data().end());
  const T* bv = b.data().data();
  for (std::size_t o = 0; o < outer; ++o) {
    T* dst = out.data() + o * inner;
    for (std::size_t i = 0; i < inner; ++i) dst[i] += bv[i];
  }
  auto backward = [outer, inner](Node<T>& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    const T* g = self.grad.data();
    if (na.requires_grad) {
      T* da = na.grad_buffer().data();
      for (std::size_t i = 0; i < outer * inner; ++i) da[i] += g[i];
    }
    if (nb.requires_grad) {
      T* db = nb.grad_buffer().data();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) db[i] += g[o * inner + i];
      }
    }
  };
  return make_result<T>(sa, std::move(out), {a.node(), b.node()}, backward);
}

template <typename T>
Tensor<T> mul_scalar(const Tensor<T>& a, T c) {
  std::vector<T> out(a.data().begin(), a.data().end());
  for (auto& v : out) v *= c;
  auto backward = [c](Node<T>& self) {
    auto& in = *self.inputs[0];
    T* d = in.grad_buffer().data();
    for (std::size_t i = 0; i < self.grad.size(); ++i) d[i] += c * self.grad[i];
  };
  return make_result<T>(a.shape(), std::move(out), {a.node()}, backward);
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  auto xv = x.data();
  std::vector<T> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > T(0) ? xv[i] : T(0);
  if (g_sign_trace != nullptr) {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      bits = (bits << 1) | (xv[i] > T(0) ? 1u : 0u);
      if (i % 64 == 63) {
        g_sign_trace->mix(bits);
        bits = 0;
      }
    }
    g_sign_trace->mix(bits);
  }
  const T scale = g_inject_fault ? T(1.5) : T(1);
  auto backward = [scale](Node<T>& self) {
    auto& in = *self.inputs[0];
    T* d = in.grad_buffer().data();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (in.value[i] > T(0)) d[i] += scale * self.grad[i];
    }
  };
  return make_result<T>(x.shape(), std::move(out), {x.node()}, backward);
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
  if (x.rank() == 0) throw DimensionError("softmax needs at least one axis");
  const std::size_t n = x.shape().back();
  const std::size_t rows = n == 0 ? 0 : x.size() / n;
  const T* xv = x.data().data();
  std::vector<T> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = xv + r * n;
    T* yr = out.data() + r * n;
    const T mx = *std::max_element(xr, xr + n);
    T total = 0;
    for (std::size_t j = 0; j < n; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      total += yr[j];
    }
    const T inv = T(1) / total;
    for (std::size_t j = 0; j < n; ++j) yr[j] *= inv;
  }
  auto backward = [rows, n](Node<T>& self) {
    auto& in = *self.inputs[0];
    T* d = in.grad_buffer().data();
    for (std::size_t r = 0; r < rows; ++r) {
      const T* y = self.value.data() + r * n;
      const T* g = self.grad.data() + r * n;
      T dot = 0;
      for (std::size_t j = 0; j < n; ++j) dot += g[j] * y[j];
      for (std::size_t j = 0; j < n; ++j) d[r * n + j] += y[j] * (g[j] - dot);
    }
  };
  return make_result<T>(x.shape(), std::move(out), {x.node()}, backward);
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  if (x.rank() == 0) throw DimensionError("layer_norm needs at least one axis");
  const std::size_t n = x.shape().back();
  if (gamma.shape() != Shape{n}) dim_error("layer_norm gamma", x.shape(), gamma.shape());
  if (beta.shape() != Shape{n}) dim_error("layer_norm beta", x.shape(), beta.shape());
  const std::size_t rows = n == 0 ? 0 : x.size() / n;

  const T* xv = x.data().data();
  const T* gv = gamma.data().data();
  const T* bv = beta.data().data();
  std::vector<T> out(x.size());
  auto xhat = std::make_shared<std::vector<T>>(x.size());
  auto rstd = std::make_shared<std::vector<T>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = xv + r * n;
    T mu = 0;
    for (std::size_t j = 0; j < n; ++j) mu += xr[j];
    mu /= static_cast<T>(n);
    T var = 0;
    for (std::size_t j = 0; j < n; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<T>(n);
    const T rs = T(1) / std::sqrt(var + eps);
    (*rstd)[r] = rs;
    for (std::size_t j = 0; j < n; ++j) {
      const T h = (xr[j] - mu) * rs;
      (*xhat)[r * n + j] = h;
      out[r * n + j] = h * gv[j] + bv[j];
    }
  }

  auto backward = [rows, n, xhat, rstd](Node<T>& self) {
    auto& nx = *self.inputs[0];
    auto& ng = *self.inputs[1];
    auto& nbeta = *self.inputs[2];
    const T* g = self.grad.data();
    const T* gam = ng.value.data();
    if (ng.requires_grad) {
      T* dg = ng.grad_buffer().data();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < n; ++j) dg[j] += g[r * n + j] * (*xhat)[r * n + j];
      }
    }
    if (nbeta.requires_grad) {
      T* db = nbeta.grad_buffer().data();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < n; ++j) db[j] += g[r * n + j];
      }
    }
    if (nx.requires_grad) {
      T* dx = nx.grad_buffer().data();
      const T inv_n = T(1) / static_cast<T>(n);
      for (std::size_t r = 0; r < rows; ++r) {
        const T* h = xhat->data() + r * n;
        const T* gr = g + r * n;
        T mean_dh = 0;
        T mean_dh_h = 0;
        for (std::size_t j = 0; j < n; ++j) {
          const T dh = gr[j] * gam[j];
          mean_dh += dh;
          mean_dh_h += dh * h[j];
        }
        mean_dh *= inv_n;
        mean_dh_h *= inv_n;
        const T rs = (*rstd)[r];
        for (std::size_t j = 0; j < n; ++j) {
          dx[r * n + j] += rs * (gr[j] * gam[j] - mean_dh - h[j] * mean_dh_h);
        }
      }
    }
  };
  return make_result<T>(x.shape(), std::move(out), {x.node(), gamma.node(), beta.node()}, backward);
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x, std::size_t axis) {
  const Shape& s = x.shape();
  if (axis >= s.size()) {
    throw DimensionError("mean: axis " + std::to_string(axis) + " out of range for shape " + shape_str(s));
  }
  const std::size_t len = s[axis];
  const std::size_t inner = numel(Shape(s.begin() + static_cast<std::ptrdiff_t>(axis) + 1, s.end()));
  const std::size_t outer = numel(Shape(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(axis)));
  Shape out_shape = s;
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  std::vector<T> out(outer * inner, T(0));
  const T* xv = x.data().data();
  const T inv = T(1) / static_cast<T>(len);
  for (std::size_t o = 0; o < outer; ++o) {
    T* dst = out.data() + o * inner;
    for (std::size_t l = 0; l < len; ++l) {
      const T* src = xv + (o * len + l) * inner;
      for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
    }
    for (std::size_t i = 0; i < inner; ++i) dst[i] *= inv;
  }
  auto backward = [outer, len, inner, inv](Node<T>& self) {
    auto& in = *self.inputs[0];
    T* d = in.grad_buffer().data();
    for (std::size_t o = 0; o < outer; ++o) {
      const T* g = self.grad.data() + o * inner;
      for (std::size_t l = 0; l < len; ++l) {
        T* dst = d + (o * len + l) * inner;
        for (std::size_t i = 0; i < inner; ++i) dst[i] += g[i] * inv;
      }
    }
  };
  return make_result<T>(std::move(out_shape), std::move(out), {x.node()}, backward);
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T total = 0;
  for (T v : x.data()) total += v;
  auto backward = [](Node<T>& self) {
    auto& in = *self.inputs[0];
    T* d = in.grad_buffer().data();
    const T g = self.grad[0];
    for (std::size_t i = 0; i < in.value.size(); ++i) d[i] += g;
  };
  return make_result<T>({}, {total}, {x.node()}, backward);
}

namespace {

// Gathers src (shape `in`) into dst with axes permuted: dst shape[i] = in[axes[i]].
template <typename T>
void permute_copy(const Shape& in, const std::vector<std::size_t>& axes, const T* src, T* dst, bool accumulate) {
  const std::size_t r = in.size();
  std::vector<std::size_t> in_strides(r, 1);
  for (std::size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * in[i];
  Shape out(r);
  std::vector<std::size_t> stride(r);
  for (std::size_t i = 0; i < r; ++i) {
    out[i] = in[axes[i]];
    stride[i] = in_strides[axes[i]];
  }
  const std::size_t total = numel(in);
  if (total == 0) return;
  if (r == 0) {
    dst[0] = accumulate ? dst[0] + src[0] : src[0];
    return;
  }
  // Odometer over the output; innermost axis handled as a strided run.
  std::vector<std::size_t> idx(r, 0);
  std::size_t offset = 0;
  const std::size_t last = out[r - 1];
  const std::size_t last_stride = stride[r - 1];
  for (std::size_t o = 0; o < total; o += last) {
    const T* s = src + offset;
    T* d = dst + o;
    if (accumulate) {
      for (std::size_t j = 0; j < last; ++j) d[j] += s[j * last_stride];
    } else {
      for (std::size_t j = 0; j < last; ++j) d[j] = s[j * last_stride];
    }
    for (std::size_t ax = r - 1; ax-- > 0;) {
      ++idx[ax];
      offset += stride[ax];
      if (idx[ax] < out[ax]) break;
      offset -= stride[ax] * out[ax];
      idx[ax] = 0;
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> transpose(const Tensor<T>& x, const std::vector<std::size_t>& axes) {
  const Shape& s = x.shape();
  if (axes.size() != s.size()) {
    throw DimensionError("transpose: permutation of length " + std::to_string(axes.size()) + " for shape " +
                         shape_str(s));
  }
  std::vector<bool> seen(axes.size(), false);
  for (auto a : axes) {
    if (a >= axes.size() || seen[a]) throw DimensionError("transpose: invalid permutation for shape " + shape_str(s));
    seen[a] = true;
  }
  Shape out_shape(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out_shape[i] = s[axes[i]];
  std::vector<T> out(x.size());
  permute_copy(s, axes, x.data().data(), out.data(), false);

  std::vector<std::size_t> inverse(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) inverse[axes[i]] = i;
  auto backward = [out_shape, inverse](Node<T>& self) {
    auto& in = *self.inputs[0];
    permute_copy(out_shape, inverse, self.grad.data(), in.grad_buffer().data(), true);
  };
  return make_result<T>(std::move(out_shape), std::move(out), {x.node()}, backward);
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (numel(shape) != x.size()) dim_error("reshape", x.shape(), shape);
  std::vector<T> out(x.data().begin(), x.data().end());
  auto backward = [](Node<T>& self) {
    auto& in = *self.inputs[0];
    T* d = in.grad_buffer().data();
    for (std::size_t i = 0; i < self.grad.size(); ++i) d[i] += self.grad[i];
  };
  return make_result<T>(std::move(shape), std::move(out), {x.node()}, backward);
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must lie in [0, 1)");
  if (p == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  auto mask = std::make_shared<std::vector<T>>(x.size());
  std::vector<T> out(x.size());
  auto xv = x.data();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    (*mask)[i] = rng.uniform() < p ? T(0) : keep_scale;
    out[i] = xv[i] * (*mask)[i];
  }
  auto backward = [mask](Node<T>& self) {
    auto& in = *self.inputs[0];
    T* d = in.grad_buffer().data();
    for (std::size_t i = 0; i < self.grad.size(); ++i) d[i] += self.grad[i] * (*mask)[i];
  };
  return make_result<T>(x.shape(), std::move(out), {x.node()}, backward);
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw DimensionError("cross_entropy expects [B, K] logits, got " + shape_str(logits.shape()));
  const std::size_t batch = logits.dim(0);
  const std::size_t k = logits.dim(1);
  if (labels.size() != batch) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for batch of " +
                         std::to_string(batch));
  }
  if (batch == 0) throw DimensionError("cross_entropy: empty batch");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw DataError("cross_entropy: label " + std::to_string(y) + " outside [0, " + std::to_string(k) + ")");
    }
  }
  const T* lv = logits.data().data();
  auto probs = std::make_shared<std::vector<T>>(batch * k);
  T total = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    const T* row = lv + b * k;
    const T mx = *std::max_element(row, row + k);
    T s = 0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(row[j] - mx);
    const T lse = mx + std::log(s);
    for (std::size_t j = 0; j < k; ++j) (*probs)[b * k + j] = std::exp(row[j] - lse);
    total += lse - row[labels[b]];
  }
  std::vector<int> ys(labels.begin(), labels.end());
  auto backward = [probs, ys = std::move(ys), batch, k](Node<T>& self) {
    auto& in = *self.inputs[0];
    T* d = in.grad_buffer().data();
    const T g = self.grad[0] / static_cast<T>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < k; ++j) {
        const T onehot = static_cast<std::size_t>(ys[b]) == j ? T(1) : T(0);
        d[b * k + j] += g * ((*probs)[b * k + j] - onehot);
      }
    }
  };
  return make_result<T>({}, {total / static_cast<T>(batch)}, {logits.node()}, backward);
}

// ---- instrumentation ----

ReluSignTrace::ReluSignTrace() : hash_(0xcbf29ce484222325ULL), prev_(g_sign_trace) { g_sign_trace = this; }
ReluSignTrace::~ReluSignTrace() { g_sign_trace = prev_; }

void ReluSignTrace::mix(std::uint64_t bits) {
  hash_ ^= bits + 0x9e3779b97f4a7c15ULL + (hash_ << 6) + (hash_ >> 2);
  hash_ *= 0x100000001b3ULL;
}

InjectBackwardFault::InjectBackwardFault() : prev_(g_inject_fault) { g_inject_fault = true; }
InjectBackwardFault::~InjectBackwardFault() { g_inject_fault = prev_; }

// ---- instantiations ----

#define HAPAUTH_INSTANTIATE(T)                                                                  \
  template class Tensor<T>;                                                                     \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> mul_scalar(const Tensor<T>&, T);                                           \
  template Tensor<T> relu(const Tensor<T>&);                                                    \
  template Tensor<T> softmax(const Tensor<T>&);                                                 \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);      \
  template Tensor<T> mean(const Tensor<T>&, std::size_t);                                       \
  template Tensor<T> sum(const Tensor<T>&);                                                     \
  template Tensor<T> transpose(const Tensor<T>&, const std::vector<std::size_t>&);              \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                          \
  template Tensor<T> dropout(const Tensor<T>&, double, Rng&);                                   \
  template Tensor<T> cross_entropy(const Tensor<T>&, std::span<const int>);

HAPAUTH_INSTANTIATE(float)
HAPAUTH_INSTANTIATE(double)

#undef HAPAUTH_INSTANTIATE

}  // namespace hapauth::ad
