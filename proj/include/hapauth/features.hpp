#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "hapauth/dataset_io.hpp"
#include "hapauth/matrix.hpp"
#include "hapauth/signal.hpp"

namespace hapauth {

inline constexpr std::size_t kFeatureChannels = 13;

// Channel layout of the derived feature matrix.
enum FeatureChannel : std::size_t {
  kForceDiffNorm = 0,
  kVelX = 1, kVelY = 2, kVelZ = 3, kVelNorm = 4,
  kAccX = 5, kAccY = 6, kAccZ = 7, kAccNorm = 8,
  kJerkX = 9, kJerkY = 10, kJerkZ = 11, kJerkNorm = 12,
};

const std::array<std::string_view, kFeatureChannels>& feature_channel_names();

// out[t] = (seq[t+1] - seq[t]) * rate. Requires T >= 2.
Matrix differentiate(const Matrix& seq, double rate);

// T x 3 forces -> (T-3) x 13 features: force-difference norm, velocity,
// acceleration and jerk vectors with their norms. Streams are truncated at the
// end so that row t of every channel starts at force sample t.
Matrix extract_features(const Matrix& forces, double rate = kNominalSampleRate);

struct FeatureSequence {
  Matrix values;  // L x C
  int label = -1;
  TraceKey source;
};

struct PipelineOptions {
  std::size_t target_len = 64;
  // Appends the raw (fx, fy, fz) channels after the 13 derived ones.
  bool append_raw_force = false;
};

std::size_t pipeline_channels(const PipelineOptions& opts);

// extract_features -> resample -> optional z-score. Label is left at -1.
FeatureSequence pipeline(const ForceTrace& trace, const PipelineOptions& opts,
                         const NormStats* stats = nullptr);

}  // namespace hapauth
