#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hapauth/dataset_io.hpp"
#include "hapauth/eval.hpp"
#include "hapauth/features.hpp"
#include "hapauth/trainer.hpp"

namespace hapauth {

enum class ExperimentKind { user_id, task };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view s);

struct GroupSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded shuffle inside each group; first n_train go to train, the next n_test
// to test. Throws CoverageError naming the first group that is too small.
std::map<GroupKey, GroupSplit> split_dataset(const std::map<GroupKey, std::vector<std::size_t>>& groups,
                                             std::size_t n_train, std::size_t n_test, std::uint64_t seed);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::user_id;
  Variant variant = Variant::raw;
  TrainConfig train;
  // num_classes is filled in per model from the data.
  ModelConfig model;
  bool append_raw_force = false;
  // 0 = hardware concurrency.
  unsigned workers = 0;
};

// Reference-protocol defaults: user-id models see length-512 sequences, task
// models length 64; everything else comes from TrainConfig/ModelConfig defaults.
ExperimentConfig default_experiment_config(ExperimentKind kind);

// Train/test features for one model of an experiment.
struct ModelData {
  std::string model_id;
  std::size_t model_index = 0;
  std::vector<std::string> labels;  // class index -> label
  std::vector<FeatureSequence> train;
  std::vector<FeatureSequence> test;
};

// Splits the collection and runs the feature pipeline (without normalization)
// for every model. User-id: one model per task, classes = users. Task: one
// model per user, classes = tasks.
std::vector<ModelData> prepare_experiment(const TraceCollection& data, const ExperimentConfig& cfg);

struct ModelRun {
  std::string model_id;
  std::vector<std::string> labels;
  Model model;
  std::optional<NormStats> norm;
  TrainHistory history;
  std::uint64_t seed = 0;
  std::vector<FeatureSequence> test;  // normalized like the training data
  std::vector<TraceKey> train_keys;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ModelRun> runs;
};

// Fits normalization (if enabled) on `train`, trains, and normalizes `test`.
ModelRun train_model(const ExperimentConfig& cfg, const ModelData& data);

ExperimentResult train_user_id_models(const TraceCollection& data, ExperimentConfig cfg);
ExperimentResult train_task_models(const TraceCollection& data, ExperimentConfig cfg);
ExperimentResult run_experiment(const TraceCollection& data, const ExperimentConfig& cfg);

AggregateReport evaluate_runs(const ExperimentResult& result);

// 5, 10, ..., 100
std::vector<std::size_t> default_sweep_sizes();

struct SweepPoint {
  std::size_t size = 0;
  double mean_accuracy = 0.0;
  std::vector<double> model_accuracy;
};

// For each size s, draws s training sequences per class from each model's fixed
// train split (seeded, original order kept), trains, and scores on the fixed test split.
std::vector<SweepPoint> sweep_training_size(const TraceCollection& data, const ExperimentConfig& cfg,
                                            std::span<const std::size_t> sizes);

// Keeps `per_class` items of each class, chosen by a seeded permutation, in their original order.
std::vector<FeatureSequence> subsample_per_class(const std::vector<FeatureSequence>& seqs, std::size_t per_class,
                                                 std::uint64_t seed);

// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first failure.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace hapauth
