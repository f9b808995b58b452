#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hapauth/features.hpp"
#include "hapauth/model.hpp"

namespace hapauth {

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 100;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  double lr_min = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  bool normalize = true;
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 20;

  void validate() const;
};

// Single cosine cycle over the run, evaluated per epoch:
// floor + (base - floor) * (1 + cos(pi * epoch / (total - 1))) / 2.
double cosine_lr(int epoch, int total, double base, double floor);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  std::int64_t step = 0;
};

// One bias-corrected Adam update using each tensor's accumulated grad.
// Lazily sizes the moment buffers on the first call. Tensors whose gradient is
// absent or entirely zero are skipped.
template <typename T>
void adam_step(std::span<ad::Tensor<T>> params, AdamState<T>& state, const AdamOptions& opts, double lr);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double learning_rate = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  Model model;
  TrainHistory history;
};

// Argmax with ties broken toward the lowest index.
template <typename T>
int argmax(std::span<const T> values);

// Every label in [0, num_classes) must occur; sequences must be seq_len x input_channels.
TrainResult train(const TrainConfig& cfg, const ModelConfig& model_cfg, std::span<const FeatureSequence> train_set);

}  // namespace hapauth
