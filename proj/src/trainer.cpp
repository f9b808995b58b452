#include "hapauth/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "hapauth/error.hpp"
#include "hapauth/rng.hpp"

namespace hapauth {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(lr_min >= 0.0 && lr_min <= learning_rate)) throw ConfigError("lr_min must lie in [0, learning_rate]");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw ConfigError("Adam eps must be > 0");
}

double cosine_lr(int epoch, int total, double base, double floor) {
  if (total < 1 || epoch < 0 || epoch >= total) {
    throw ConfigError("cosine_lr: epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(total) + ")");
  }
  if (total == 1) return base;
  const double phase = std::numbers::pi * static_cast<double>(epoch) / static_cast<double>(total - 1);
  return floor + (base - floor) * (1.0 + std::cos(phase)) / 2.0;
}

template <typename T>
void adam_step(std::span<ad::Tensor<T>> params, AdamState<T>& state, const AdamOptions& opts, double lr) {
  if (state.m.empty() && state.step == 0) {
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), T(0));
      state.v.emplace_back(p.size(), T(0));
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DimensionError("adam_step: state holds " + std::to_string(state.m.size()) + " buffers for " +
                         std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].size() != params[i].size() || state.v[i].size() != params[i].size()) {
      throw DimensionError("adam_step: moment buffer " + std::to_string(i) + " does not match parameter shape " +
                           ad::shape_str(params[i].shape()));
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(opts.beta1);
  const T b2 = static_cast<T>(opts.beta2);
  const T c1 = static_cast<T>(1.0 / (1.0 - std::pow(opts.beta1, t)));
  const T c2 = static_cast<T>(1.0 / (1.0 - std::pow(opts.beta2, t)));
  const T step = static_cast<T>(lr);
  const T eps = static_cast<T>(opts.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].has_grad()) continue;
    auto g = params[i].grad();
    // A tensor with an all-zero gradient is left alone, moments included.
    if (std::all_of(g.begin(), g.end(), [](T x) { return x == T(0); })) continue;
    auto theta = params[i].data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const T m_hat = m[j] * c1;
      const T v_hat = v[j] * c2;
      theta[j] -= step * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

template <typename T>
int argmax(std::span<const T> values) {
  if (values.empty()) throw DimensionError("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

TrainResult train(const TrainConfig& cfg, const ModelConfig& model_cfg, std::span<const FeatureSequence> train_set) {
  cfg.validate();
  model_cfg.validate();
  if (train_set.empty()) throw DataError("train: empty training set");

  std::vector<std::size_t> class_counts(model_cfg.num_classes, 0);
  for (const auto& s : train_set) {
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= model_cfg.num_classes) {
      throw DataError("train: label " + std::to_string(s.label) + " outside [0, " +
                      std::to_string(model_cfg.num_classes) + ")");
    }
    if (s.values.rows != model_cfg.seq_len || s.values.cols != model_cfg.input_channels) {
      throw DimensionError("train: sequence " + to_string(s.source) + " is " + std::to_string(s.values.rows) + "x" +
                           std::to_string(s.values.cols) + ", model expects " + std::to_string(model_cfg.seq_len) +
                           "x" + std::to_string(model_cfg.input_channels));
    }
    ++class_counts[static_cast<std::size_t>(s.label)];
  }
  for (std::size_t k = 0; k < class_counts.size(); ++k) {
    if (class_counts[k] == 0) throw DataError("train: no training samples for class " + std::to_string(k));
  }

  TrainResult result;
  result.model.config = model_cfg;
  result.model.params = build_model<float>(model_cfg, derive_seed(cfg.seed, "init"));
  auto params = result.model.params.tensors();

  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  Rng dropout_rng(derive_seed(cfg.seed, "dropout"));
  AdamState<float> adam;
  const AdamOptions adam_opts{cfg.beta1, cfg.beta2, cfg.adam_eps};

  const std::size_t n = train_set.size();
  const std::size_t len = model_cfg.seq_len;
  const std::size_t ch = model_cfg.input_channels;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cosine_lr(epoch, cfg.epochs, cfg.learning_rate, cfg.lr_min);
    shuffle_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, n - start);
      std::vector<float> batch(b * len * ch);
      std::vector<int> labels(b);
      for (std::size_t i = 0; i < b; ++i) {
        const auto& s = train_set[order[start + i]];
        std::copy(s.values.data.begin(), s.values.data.end(), batch.begin() + static_cast<std::ptrdiff_t>(i * len * ch));
        labels[i] = s.label;
      }
      for (auto& p : params) p.zero_grad();
      auto input = ad::Tensor<float>::from({b, len, ch}, std::move(batch));
      auto logits = forward(result.model.params, model_cfg, input, {true, &dropout_rng});
      auto loss = ad::cross_entropy(logits, std::span<const int>(labels));
      loss.backward();
      adam_step(std::span(params), adam, adam_opts, lr);

      loss_sum += static_cast<double>(loss.item()) * static_cast<double>(b);
      const std::size_t k = model_cfg.num_classes;
      for (std::size_t i = 0; i < b; ++i) {
        if (argmax<float>(logits.data().subspan(i * k, k)) == labels[i]) ++correct;
      }
    }
    result.history.epochs.push_back(
        {epoch, loss_sum / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n), lr});
  }
  return result;
}

template void adam_step<float>(std::span<ad::Tensor<float>>, AdamState<float>&, const AdamOptions&, double);
template void adam_step<double>(std::span<ad::Tensor<double>>, AdamState<double>&, const AdamOptions&, double);
template int argmax<float>(std::span<const float>);
template int argmax<double>(std::span<const double>);

}  // namespace hapauth
