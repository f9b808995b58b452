#include "hapauth/model.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "hapauth/error.hpp"
#include "hapauth/rng.hpp"

namespace hapauth {

using ad::Shape;
using ad::Tensor;

void ModelConfig::validate() const {
  if (input_channels == 0) throw ConfigError("input_channels must be positive");
  if (d_model == 0 || num_heads == 0) throw ConfigError("d_model and num_heads must be positive");
  if (d_model % num_heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by num_heads " +
                      std::to_string(num_heads));
  }
  if (d_model % 2 != 0) throw ConfigError("d_model must be even for sinusoidal positional encoding");
  if (ffn_dim == 0) throw ConfigError("ffn_dim must be positive");
  if (num_layers == 0) throw ConfigError("num_layers must be positive");
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  if (seq_len < 2) throw ConfigError("seq_len must be >= 2");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

std::size_t parameter_count(const ModelConfig& cfg) {
  const std::size_t d = cfg.d_model;
  const std::size_t f = cfg.ffn_dim;
  const std::size_t per_layer = 4 * d * d + (d * f + f) + (f * d + d) + 4 * d;
  return cfg.input_channels * d + d + cfg.num_layers * per_layer + d * cfg.num_classes + cfg.num_classes;
}

template <typename T>
void ModelParams<T>::add(std::string name, Tensor<T> tensor) {
  if (contains(name)) throw ConfigError("duplicate parameter name " + name);
  entries_.emplace_back(std::move(name), std::move(tensor));
}

template <typename T>
const Tensor<T>& ModelParams<T>::operator[](std::string_view name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw ConfigError("unknown parameter " + std::string(name));
}

template <typename T>
bool ModelParams<T>::contains(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.first == name) return true;
  }
  return false;
}

template <typename T>
std::vector<Tensor<T>> ModelParams<T>::tensors() const {
  std::vector<Tensor<T>> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.second);
  return out;
}

template <typename T>
std::size_t ModelParams<T>::count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

template <typename T>
ModelParams<T> build_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  ModelParams<T> params;
  auto linear = [&](const std::string& name, std::size_t in, std::size_t out) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::vector<T> w(in * out);
    for (auto& v : w) v = static_cast<T>(rng.uniform(-bound, bound));
    params.add(name, Tensor<T>::from({in, out}, std::move(w), true));
  };
  auto constant = [&](const std::string& name, std::size_t n, T value) {
    params.add(name, Tensor<T>::full({n}, value, true));
  };

  const std::size_t d = cfg.d_model;
  linear("input.weight", cfg.input_channels, d);
  constant("input.bias", d, T(0));
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    linear(p + "attn.wq", d, d);
    linear(p + "attn.wk", d, d);
    linear(p + "attn.wv", d, d);
    linear(p + "attn.wo", d, d);
    constant(p + "norm1.gamma", d, T(1));
    constant(p + "norm1.beta", d, T(0));
    linear(p + "ffn.w1", d, cfg.ffn_dim);
    constant(p + "ffn.b1", cfg.ffn_dim, T(0));
    linear(p + "ffn.w2", cfg.ffn_dim, d);
    constant(p + "ffn.b2", d, T(0));
    constant(p + "norm2.gamma", d, T(1));
    constant(p + "norm2.beta", d, T(0));
  }
  linear("head.weight", d, cfg.num_classes);
  constant("head.bias", cfg.num_classes, T(0));
  return params;
}

std::vector<double> positional_encoding(std::size_t length, std::size_t dim) {
  if (length == 0 || dim == 0) throw ConfigError("positional encoding needs positive length and dim");
  if (dim % 2 != 0) throw ConfigError("positional encoding dim must be even, got " + std::to_string(dim));
  std::vector<double> table(length * dim);
  for (std::size_t i = 0; i < dim / 2; ++i) {
    const double freq = std::pow(10000.0, -static_cast<double>(2 * i) / static_cast<double>(dim));
    for (std::size_t p = 0; p < length; ++p) {
      const double angle = static_cast<double>(p) * freq;
      table[p * dim + 2 * i] = std::sin(angle);
      table[p * dim + 2 * i + 1] = std::cos(angle);
    }
  }
  return table;
}

namespace {

template <typename T>
Tensor<T> pe_tensor(std::size_t length, std::size_t dim) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::size_t>, Tensor<T>> cache;
  std::lock_guard lock(mu);
  auto key = std::make_pair(length, dim);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto table = positional_encoding(length, dim);
    std::vector<T> v(table.begin(), table.end());
    it = cache.emplace(key, Tensor<T>::from({length, dim}, std::move(v), false)).first;
  }
  return it->second;
}

}  // namespace

template <typename T>
Tensor<T> mhsa(const Tensor<T>& x, const Tensor<T>& wq, const Tensor<T>& wk, const Tensor<T>& wv,
               const Tensor<T>& wo, std::size_t heads, Tensor<T>* weights_out) {
  if (x.rank() != 3) throw DimensionError("mhsa expects [B, L, d] input, got " + ad::shape_str(x.shape()));
  const std::size_t b = x.dim(0);
  const std::size_t len = x.dim(1);
  const std::size_t d = x.dim(2);
  if (heads == 0 || d % heads != 0) {
    throw DimensionError("mhsa: model dim " + std::to_string(d) + " not divisible by " + std::to_string(heads) +
                         " heads");
  }
  const std::size_t dh = d / heads;

  auto split = [&](const Tensor<T>& w, const std::vector<std::size_t>& perm) {
    return ad::transpose(ad::reshape(ad::matmul(x, w), {b, len, heads, dh}), perm);
  };
  const Tensor<T> q = split(wq, {0, 2, 1, 3});   // [B, h, L, dh]
  const Tensor<T> kt = split(wk, {0, 2, 3, 1});  // [B, h, dh, L]
  const Tensor<T> v = split(wv, {0, 2, 1, 3});   // [B, h, L, dh]

  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  Tensor<T> weights = ad::softmax(ad::mul_scalar(ad::matmul(q, kt), scale));  // [B, h, L, L]
  if (weights_out != nullptr) *weights_out = weights;
  Tensor<T> ctx = ad::matmul(weights, v);                                       // [B, h, L, dh]
  ctx = ad::reshape(ad::transpose(ctx, {0, 2, 1, 3}), {b, len, d});
  return ad::matmul(ctx, wo);
}

template <typename T>
Tensor<T> forward(const ModelParams<T>& params, const ModelConfig& cfg, const Tensor<T>& batch,
                  const ForwardOptions& opts) {
  if (batch.rank() != 3 || batch.dim(2) != cfg.input_channels) {
    throw DimensionError("forward expects [B, L, " + std::to_string(cfg.input_channels) + "] input, got " +
                         ad::shape_str(batch.shape()));
  }
  const bool use_dropout = opts.training && cfg.dropout > 0.0;
  if (use_dropout && opts.rng == nullptr) throw ConfigError("dropout during training needs an rng");
  auto maybe_dropout = [&](const Tensor<T>& t) { return use_dropout ? ad::dropout(t, cfg.dropout, *opts.rng) : t; };

  const std::size_t len = batch.dim(1);
  Tensor<T> h = ad::add(ad::matmul(batch, params["input.weight"]), params["input.bias"]);
  if (cfg.positional_encoding) h = ad::add(h, pe_tensor<T>(len, cfg.d_model));

  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    Tensor<T> attn = mhsa(h, params[p + "attn.wq"], params[p + "attn.wk"], params[p + "attn.wv"],
                          params[p + "attn.wo"], cfg.num_heads);
    h = ad::layer_norm(ad::add(h, maybe_dropout(attn)), params[p + "norm1.gamma"], params[p + "norm1.beta"]);
    Tensor<T> ff = ad::relu(ad::add(ad::matmul(h, params[p + "ffn.w1"]), params[p + "ffn.b1"]));
    ff = ad::add(ad::matmul(ff, params[p + "ffn.w2"]), params[p + "ffn.b2"]);
    h = ad::layer_norm(ad::add(h, maybe_dropout(ff)), params[p + "norm2.gamma"], params[p + "norm2.beta"]);
  }
  Tensor<T> pooled = ad::mean(h, 1);  // [B, d]
  return ad::add(ad::matmul(pooled, params["head.weight"]), params["head.bias"]);
}

template class ModelParams<float>;
template class ModelParams<double>;
template ModelParams<float> build_model<float>(const ModelConfig&, std::uint64_t);
template ModelParams<double> build_model<double>(const ModelConfig&, std::uint64_t);
template Tensor<float> mhsa(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                            const Tensor<float>&, std::size_t, Tensor<float>*);
template Tensor<double> mhsa(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                             const Tensor<double>&, const Tensor<double>&, std::size_t, Tensor<double>*);
template Tensor<float> forward(const ModelParams<float>&, const ModelConfig&, const Tensor<float>&,
                               const ForwardOptions&);
template Tensor<double> forward(const ModelParams<double>&, const ModelConfig&, const Tensor<double>&,
                                const ForwardOptions&);

}  // namespace hapauth
