#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hapauth/tensor.hpp"

namespace hapauth {

class Rng;

struct ModelConfig {
  std::size_t input_channels = 13;
  std::size_t d_model = 256;
  std::size_t num_heads = 16;
  std::size_t ffn_dim = 256;
  std::size_t num_layers = 2;
  std::size_t num_classes = 2;
  std::size_t seq_len = 64;
  double dropout = 0.0;
  // Disabling this is only meant for tests of the pooling path.
  bool positional_encoding = true;

  std::size_t head_dim() const { return d_model / num_heads; }
  // Throws ConfigError.
  void validate() const;
  // seq_len is one of the two lengths used by the reference protocol (64, 512).
  bool standard_seq_len() const { return seq_len == 64 || seq_len == 512; }

  bool operator==(const ModelConfig&) const = default;
};

// Trainable parameter count implied by a config.
std::size_t parameter_count(const ModelConfig& cfg);

// Named tensors in a fixed order (the checkpoint order).
template <typename T>
class ModelParams {
 public:
  void add(std::string name, ad::Tensor<T> tensor);

  const ad::Tensor<T>& operator[](std::string_view name) const;
  bool contains(std::string_view name) const;

  const std::vector<std::pair<std::string, ad::Tensor<T>>>& entries() const { return entries_; }
  std::vector<ad::Tensor<T>> tensors() const;
  std::size_t count() const;  // total scalar parameters

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    for (const auto& [name, t] : entries_) out.add(name, t.template cast<U>());
    return out;
  }

 private:
  std::vector<std::pair<std::string, ad::Tensor<T>>> entries_;
};

// Deterministic in `seed`. Linear weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
// biases 0, layer-norm gamma 1 / beta 0. All tensors require grad.
template <typename T>
ModelParams<T> build_model(const ModelConfig& cfg, std::uint64_t seed);

// Sinusoidal table, row-major L x d: PE[p, 2i] = sin(p / 10000^(2i/d)),
// PE[p, 2i+1] = cos(p / 10000^(2i/d)). d must be even.
std::vector<double> positional_encoding(std::size_t length, std::size_t dim);

// Bidirectional multi-head self-attention on x: [B, L, d] with weights [d, d].
// When `weights_out` is given it receives the softmax weights [B, h, L, L].
template <typename T>
ad::Tensor<T> mhsa(const ad::Tensor<T>& x, const ad::Tensor<T>& wq, const ad::Tensor<T>& wk,
                   const ad::Tensor<T>& wv, const ad::Tensor<T>& wo, std::size_t heads,
                   ad::Tensor<T>* weights_out = nullptr);

struct ForwardOptions {
  bool training = false;
  Rng* rng = nullptr;  // required when training with dropout > 0
};

// batch: [B, L, input_channels] -> logits [B, num_classes].
template <typename T>
ad::Tensor<T> forward(const ModelParams<T>& params, const ModelConfig& cfg, const ad::Tensor<T>& batch,
                      const ForwardOptions& opts = {});

struct Model {
  ModelConfig config;
  ModelParams<float> params;
};

}  // namespace hapauth
