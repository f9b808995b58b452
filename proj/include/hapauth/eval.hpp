#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hapauth/features.hpp"
#include "hapauth/model.hpp"

namespace hapauth {

struct Prediction {
  int label = -1;
  std::vector<double> probabilities;
};

// argmax of softmax(logits); ties go to the lowest class index.
Prediction predict(const Model& model, const FeatureSequence& seq);
std::vector<Prediction> predict_batch(const Model& model, std::span<const FeatureSequence> seqs,
                                      std::size_t batch_size = 32);

// K x K counts, row = true class, column = predicted class.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {}

  std::size_t classes() const { return k_; }
  std::int64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }
  std::int64_t& at(std::size_t truth, std::size_t predicted) { return counts_[truth * k_ + predicted]; }
  std::int64_t total() const;
  std::int64_t column_sum(std::size_t predicted) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::int64_t> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> labels, std::size_t k);

struct Metrics {
  double accuracy = 0.0;
  // M[k,k] / column_sum(k); 0 for a never-predicted class.
  std::vector<double> precision;
};

// Throws DataError on an all-zero matrix.
Metrics metrics(const ConfusionMatrix& m);

struct EvalReport {
  std::string model_id;
  std::string config_digest;
  std::vector<std::string> labels;
  ConfusionMatrix matrix;
  double accuracy = 0.0;
  std::vector<double> precision;
};

std::string config_digest(const ModelConfig& cfg);

EvalReport evaluate_model(const Model& model, std::span<const FeatureSequence> test_set,
                          const std::vector<std::string>& labels, const std::string& model_id);

struct ModelUnderTest {
  std::string model_id;
  const Model* model = nullptr;
  std::vector<std::string> labels;
  std::span<const FeatureSequence> test_set;
};

// Per-model reports plus cross-model aggregates. All models must share one
// label list. In the user-id experiment classes are users, so the per-class
// mean precision is each user's precision averaged over the task models; in
// the task experiment models are users, so per-model accuracy is per user.
struct AggregateReport {
  std::string kind;
  std::vector<EvalReport> reports;
  std::vector<std::string> class_labels;
  std::vector<double> mean_precision_per_class;
  std::vector<double> per_model_accuracy;
  double mean_accuracy = 0.0;
  double mean_precision = 0.0;
};

AggregateReport aggregate_reports(const std::string& kind, std::vector<EvalReport> reports);
AggregateReport evaluate_experiment(const std::string& kind, std::span<const ModelUnderTest> models);

}  // namespace hapauth
