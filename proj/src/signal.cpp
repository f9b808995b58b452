#include "hapauth/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hapauth/error.hpp"

namespace hapauth {

Matrix ema_filter(const Matrix& values, float alpha) {
  if (!(alpha > 0.0f && alpha <= 1.0f)) {
    throw ConfigError("EMA alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  if (values.rows == 0) throw TooShortError("EMA filter needs at least one sample");
  // alpha == 1 is the identity; the incremental form can round away from x in that case.
  if (alpha == 1.0f) return values;

  Matrix out(values.rows, values.cols);
  for (std::size_t c = 0; c < values.cols; ++c) out(0, c) = values(0, c);
  for (std::size_t t = 1; t < values.rows; ++t) {
    for (std::size_t c = 0; c < values.cols; ++c) {
      const float prev = out(t - 1, c);
      out(t, c) = prev + alpha * (values(t, c) - prev);
    }
  }
  return out;
}

Matrix resample(const Matrix& seq, std::size_t target_len) {
  if (seq.rows < 2) throw TooShortError("resample needs at least 2 rows, got " + std::to_string(seq.rows));
  if (target_len < 2) throw ConfigError("resample target length must be >= 2");

  Matrix out(target_len, seq.cols);
  const double span = static_cast<double>(seq.rows - 1);
  const double denom = static_cast<double>(target_len - 1);
  for (std::size_t i = 0; i < target_len; ++i) {
    auto dst = out.row(i);
    if (i + 1 == target_len) {
      std::copy_n(seq.row(seq.rows - 1).begin(), seq.cols, dst.begin());
      continue;
    }
    const double pos = static_cast<double>(i) * span / denom;
    const auto lo = std::min(static_cast<std::size_t>(pos), seq.rows - 2);
    const double frac = pos - static_cast<double>(lo);
    auto a = seq.row(lo);
    auto b = seq.row(lo + 1);
    for (std::size_t c = 0; c < seq.cols; ++c) {
      const double va = a[c];
      dst[c] = static_cast<float>(va + (static_cast<double>(b[c]) - va) * frac);
    }
  }
  return out;
}

NormStats zscore_fit(std::span<const Matrix* const> train_seqs) {
  if (train_seqs.empty()) throw DataError("zscore_fit needs at least one sequence");
  const std::size_t channels = train_seqs.front()->cols;

  // Welford's running update, pooled over all rows.
  std::vector<double> mean(channels, 0.0);
  std::vector<double> m2(channels, 0.0);
  double count = 0.0;
  for (const Matrix* seq : train_seqs) {
    if (seq->cols != channels) throw DimensionError("zscore_fit: channel count mismatch across sequences");
    for (std::size_t t = 0; t < seq->rows; ++t) {
      count += 1.0;
      for (std::size_t c = 0; c < channels; ++c) {
        const double x = (*seq)(t, c);
        const double delta = x - mean[c];
        mean[c] += delta / count;
        m2[c] += delta * (x - mean[c]);
      }
    }
  }
  if (count == 0.0) throw DataError("zscore_fit: sequences have no rows");

  NormStats stats;
  stats.mean = std::move(mean);
  stats.std.resize(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    stats.std[c] = std::max(std::sqrt(m2[c] / count), kStdFloor);
  }
  return stats;
}

NormStats zscore_fit(std::span<const Matrix> train_seqs) {
  std::vector<const Matrix*> ptrs;
  ptrs.reserve(train_seqs.size());
  for (const auto& m : train_seqs) ptrs.push_back(&m);
  return zscore_fit(std::span<const Matrix* const>(ptrs));
}

Matrix zscore_apply(const Matrix& seq, const NormStats& stats) {
  if (seq.cols != stats.channels() || stats.std.size() != stats.channels()) {
    throw DimensionError("zscore_apply: sequence has " + std::to_string(seq.cols) +
                         " channels, stats have " + std::to_string(stats.channels()));
  }
  Matrix out(seq.rows, seq.cols);
  for (std::size_t t = 0; t < seq.rows; ++t) {
    for (std::size_t c = 0; c < seq.cols; ++c) {
      out(t, c) = static_cast<float>((seq(t, c) - stats.mean[c]) / stats.std[c]);
    }
  }
  return out;
}

Matrix zscore_invert(const Matrix& seq, const NormStats& stats) {
  if (seq.cols != stats.channels() || stats.std.size() != stats.channels()) {
    throw DimensionError("zscore_invert: channel count mismatch");
  }
  Matrix out(seq.rows, seq.cols);
  for (std::size_t t = 0; t < seq.rows; ++t) {
    for (std::size_t c = 0; c < seq.cols; ++c) {
      out(t, c) = static_cast<float>(seq(t, c) * stats.std[c] + stats.mean[c]);
    }
  }
  return out;
}

}  // namespace hapauth
