#pragma once

#include <vector>

#include "hapauth/dataset_io.hpp"
#include "hapauth/experiment.hpp"
#include "hapauth/features.hpp"
#include "hapauth/model.hpp"
#include "hapauth/rng.hpp"
#include "hapauth/trainer.hpp"

namespace hapauth::test {

// Eight random 16x13 sequences, alternating between two labels.
inline std::vector<FeatureSequence> toy_set() {
  Rng rng(11);
  std::vector<FeatureSequence> set;
  for (int i = 0; i < 8; ++i) {
    FeatureSequence s;
    s.values = Matrix(16, 13);
    for (auto& v : s.values.data) v = static_cast<float>(rng.normal());
    s.label = i % 2;
    s.source = {"toy", "x", i, Variant::raw};
    set.push_back(std::move(s));
  }
  return set;
}

inline ModelConfig toy_model_config() {
  ModelConfig cfg;
  cfg.d_model = 32;
  cfg.num_heads = 4;
  cfg.ffn_dim = 32;
  cfg.seq_len = 16;
  cfg.num_classes = 2;
  return cfg;
}

inline TrainConfig toy_train_config() {
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.learning_rate = 1e-3;
  cfg.seed = 5;
  return cfg;
}

// Five users with well-separated signatures, writing letters a-c.
inline SynthConfig benchmark_synth_config(int trials_per_task) {
  SynthConfig sc;
  sc.num_users = 5;
  sc.tasks = {"a", "b", "c"};
  sc.trials_per_task = trials_per_task;
  sc.seed = 7;
  for (int u = 0; u < 5; ++u) {
    UserSignature s;
    s.press_force = 1.0 + 0.9 * u;
    s.press_variance = 0.002;
    s.tremor_frequency = 4.0 + 2.0 * u;
    s.tremor_amplitude = 0.05 + 0.05 * u;
    s.speed_scale = 0.8 + 0.12 * u;
    s.stiffness = 0.6 + 0.3 * u;
    s.noise_std = 0.001;
    sc.users.push_back(s);
  }
  return sc;
}

// Reduced model for the desk-scale benchmark: d=64, 8 heads, length 64, 50 epochs.
inline ExperimentConfig benchmark_experiment_config(ExperimentKind kind, std::size_t train_per_class,
                                                    std::size_t test_per_class) {
  ExperimentConfig cfg = default_experiment_config(kind);
  cfg.model.d_model = 64;
  cfg.model.num_heads = 8;
  cfg.model.ffn_dim = 64;
  cfg.model.seq_len = 64;
  cfg.train.epochs = 50;
  cfg.train.learning_rate = 1e-3;
  cfg.train.train_per_class = train_per_class;
  cfg.train.test_per_class = test_per_class;
  cfg.train.seed = 3;
  cfg.workers = 0;
  return cfg;
}

}  // namespace hapauth::test
