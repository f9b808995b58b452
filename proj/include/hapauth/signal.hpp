#pragma once

#include <span>
#include <vector>

#include "hapauth/matrix.hpp"

namespace hapauth {

inline constexpr float kDefaultEmaAlpha = 0.001f;
inline constexpr double kStdFloor = 1e-8;

// Per-channel exponential moving average, y[0] = x[0],
// y[t] = y[t-1] + alpha * (x[t] - y[t-1]). alpha must lie in (0, 1].
Matrix ema_filter(const Matrix& values, float alpha);

// Linear interpolation at `target_len` evenly spaced positions over [0, T-1].
// Endpoints are reproduced exactly. Requires T >= 2 and target_len >= 2.
Matrix resample(const Matrix& seq, std::size_t target_len);

struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t channels() const { return mean.size(); }
};

// Pooled per-channel mean and population std over every row of every
// sequence; std is clamped below by kStdFloor.
NormStats zscore_fit(std::span<const Matrix> train_seqs);
NormStats zscore_fit(std::span<const Matrix* const> train_seqs);

Matrix zscore_apply(const Matrix& seq, const NormStats& stats);
Matrix zscore_invert(const Matrix& seq, const NormStats& stats);

}  // namespace hapauth
