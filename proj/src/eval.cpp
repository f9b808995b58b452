#include "hapauth/eval.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "hapauth/checkpoint.hpp"
#include "hapauth/error.hpp"
#include "hapauth/rng.hpp"
#include "hapauth/trainer.hpp"

namespace hapauth {

std::vector<Prediction> predict_batch(const Model& model, std::span<const FeatureSequence> seqs,
                                      std::size_t batch_size) {
  const auto& cfg = model.config;
  for (const auto& s : seqs) {
    if (s.values.rows != cfg.seq_len || s.values.cols != cfg.input_channels) {
      throw DimensionError("predict: sequence is " + std::to_string(s.values.rows) + "x" +
                           std::to_string(s.values.cols) + ", model expects " + std::to_string(cfg.seq_len) + "x" +
                           std::to_string(cfg.input_channels));
    }
  }
  std::vector<Prediction> out;
  out.reserve(seqs.size());
  const std::size_t per = cfg.seq_len * cfg.input_channels;
  const std::size_t k = cfg.num_classes;
  batch_size = std::max<std::size_t>(1, batch_size);
  for (std::size_t start = 0; start < seqs.size(); start += batch_size) {
    const std::size_t b = std::min(batch_size, seqs.size() - start);
    std::vector<float> data(b * per);
    for (std::size_t i = 0; i < b; ++i) {
      std::copy(seqs[start + i].values.data.begin(), seqs[start + i].values.data.end(),
                data.begin() + static_cast<std::ptrdiff_t>(i * per));
    }
    auto logits = forward(model.params, cfg, ad::Tensor<float>::from({b, cfg.seq_len, cfg.input_channels}, std::move(data)));
    for (std::size_t i = 0; i < b; ++i) {
      auto row = logits.data().subspan(i * k, k);
      Prediction p;
      p.label = argmax<float>(row);
      const double mx = row[static_cast<std::size_t>(p.label)];
      double total = 0.0;
      p.probabilities.resize(k);
      for (std::size_t j = 0; j < k; ++j) {
        p.probabilities[j] = std::exp(static_cast<double>(row[j]) - mx);
        total += p.probabilities[j];
      }
      for (auto& v : p.probabilities) v /= total;
      out.push_back(std::move(p));
    }
  }
  return out;
}

Prediction predict(const Model& model, const FeatureSequence& seq) {
  return std::move(predict_batch(model, std::span(&seq, 1)).front());
}

std::int64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0}); }

std::int64_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::int64_t s = 0;
  for (std::size_t t = 0; t < k_; ++t) s += at(t, predicted);
  return s;
}

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> labels, std::size_t k) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("confusion_matrix: " + std::to_string(predictions.size()) + " predictions vs " +
                         std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix m(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int t = labels[i];
    const int p = predictions[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= k || static_cast<std::size_t>(p) >= k) {
      throw DataError("confusion_matrix: pair " + std::to_string(i) + " (" + std::to_string(t) + ", " +
                      std::to_string(p) + ") outside [0, " + std::to_string(k) + ")");
    }
    ++m.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
  }
  return m;
}

Metrics metrics(const ConfusionMatrix& m) {
  const std::int64_t total = m.total();
  if (total == 0) throw DataError("metrics: confusion matrix is empty");
  Metrics out;
  std::int64_t diag = 0;
  out.precision.resize(m.classes());
  for (std::size_t k = 0; k < m.classes(); ++k) {
    diag += m.at(k, k);
    const std::int64_t col = m.column_sum(k);
    out.precision[k] = col == 0 ? 0.0 : static_cast<double>(m.at(k, k)) / static_cast<double>(col);
  }
  out.accuracy = static_cast<double>(diag) / static_cast<double>(total);
  return out;
}

std::string config_digest(const ModelConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(cfg).dump())));
  return buf;
}

EvalReport evaluate_model(const Model& model, std::span<const FeatureSequence> test_set,
                          const std::vector<std::string>& labels, const std::string& model_id) {
  const std::size_t k = model.config.num_classes;
  if (labels.size() != k) {
    throw DataError("evaluate " + model_id + ": " + std::to_string(labels.size()) + " labels for a " +
                    std::to_string(k) + "-class model");
  }
  if (test_set.empty()) throw DataError("evaluate " + model_id + ": empty test set");
  auto preds = predict_batch(model, test_set);
  std::vector<int> p(preds.size());
  std::vector<int> y(test_set.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    p[i] = preds[i].label;
    y[i] = test_set[i].label;
  }
  EvalReport r;
  r.model_id = model_id;
  r.config_digest = config_digest(model.config);
  r.labels = labels;
  r.matrix = confusion_matrix(p, y, k);
  auto mt = metrics(r.matrix);
  r.accuracy = mt.accuracy;
  r.precision = std::move(mt.precision);
  return r;
}

AggregateReport aggregate_reports(const std::string& kind, std::vector<EvalReport> reports) {
  if (reports.empty()) throw DataError("aggregate: no reports");
  AggregateReport agg;
  agg.kind = kind;
  agg.class_labels = reports.front().labels;
  const std::size_t k = agg.class_labels.size();
  agg.mean_precision_per_class.assign(k, 0.0);
  for (const auto& r : reports) {
    if (r.labels != agg.class_labels) {
      throw DataError("aggregate: model " + r.model_id + " uses a different label set than " +
                      reports.front().model_id);
    }
    for (std::size_t c = 0; c < k; ++c) agg.mean_precision_per_class[c] += r.precision[c];
    agg.per_model_accuracy.push_back(r.accuracy);
  }
  const double n = static_cast<double>(reports.size());
  for (auto& v : agg.mean_precision_per_class) v /= n;
  agg.mean_accuracy = std::accumulate(agg.per_model_accuracy.begin(), agg.per_model_accuracy.end(), 0.0) / n;
  agg.mean_precision =
      std::accumulate(agg.mean_precision_per_class.begin(), agg.mean_precision_per_class.end(), 0.0) /
      static_cast<double>(k);
  agg.reports = std::move(reports);
  return agg;
}

AggregateReport evaluate_experiment(const std::string& kind, std::span<const ModelUnderTest> models) {
  std::vector<EvalReport> reports;
  for (const auto& m : models) {
    if (m.model == nullptr) throw DataError("evaluate_experiment: missing model " + m.model_id);
    reports.push_back(evaluate_model(*m.model, m.test_set, m.labels, m.model_id));
  }
  return aggregate_reports(kind, std::move(reports));
}

}  // namespace hapauth
