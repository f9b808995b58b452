#include "hapauth/features.hpp"

#include <cmath>
#include <string>

#include "hapauth/error.hpp"

namespace hapauth {

namespace {

float norm3(float x, float y, float z) {
  const double dx = x, dy = y, dz = z;
  return static_cast<float>(std::sqrt(dx * dx + dy * dy + dz * dz));
}

}  // namespace

const std::array<std::string_view, kFeatureChannels>& feature_channel_names() {
  static const std::array<std::string_view, kFeatureChannels> names = {
      "dF_norm", "vx", "vy", "vz", "v_norm", "ax", "ay", "az", "a_norm", "jx", "jy", "jz", "j_norm"};
  return names;
}

Matrix differentiate(const Matrix& seq, double rate) {
  if (seq.rows < 2) throw TooShortError("differentiate needs at least 2 rows, got " + std::to_string(seq.rows));
  const auto s = static_cast<float>(rate);
  Matrix out(seq.rows - 1, seq.cols);
  for (std::size_t t = 0; t + 1 < seq.rows; ++t) {
    for (std::size_t c = 0; c < seq.cols; ++c) {
      out(t, c) = (seq(t + 1, c) - seq(t, c)) * s;
    }
  }
  return out;
}

Matrix extract_features(const Matrix& forces, double rate) {
  if (forces.cols != 3) throw DimensionError("extract_features expects 3 force channels, got " + std::to_string(forces.cols));
  if (forces.rows < 4) throw TooShortError("feature extraction needs at least 4 samples, got " + std::to_string(forces.rows));

  const Matrix vel = differentiate(forces, rate);
  const Matrix acc = differentiate(vel, rate);
  const Matrix jerk = differentiate(acc, rate);

  const std::size_t len = forces.rows - 3;
  Matrix out(len, kFeatureChannels);
  for (std::size_t t = 0; t < len; ++t) {
    auto row = out.row(t);
    row[kForceDiffNorm] = norm3(forces(t + 1, 0) - forces(t, 0), forces(t + 1, 1) - forces(t, 1),
                                forces(t + 1, 2) - forces(t, 2));
    const Matrix* streams[3] = {&vel, &acc, &jerk};
    for (std::size_t k = 0; k < 3; ++k) {
      const Matrix& m = *streams[k];
      const std::size_t base = 1 + 4 * k;
      row[base] = m(t, 0);
      row[base + 1] = m(t, 1);
      row[base + 2] = m(t, 2);
      row[base + 3] = norm3(m(t, 0), m(t, 1), m(t, 2));
    }
  }
  return out;
}

std::size_t pipeline_channels(const PipelineOptions& opts) {
  return kFeatureChannels + (opts.append_raw_force ? 3 : 0);
}

FeatureSequence pipeline(const ForceTrace& trace, const PipelineOptions& opts, const NormStats* stats) {
  if (trace.size() < 4) {
    throw TooShortError("trace " + to_string(trace.key) + " has " + std::to_string(trace.size()) +
                        " samples, need >= 4");
  }
  if (opts.target_len < 2) throw ConfigError("pipeline target length must be >= 2");
  const Matrix forces = trace.forces();
  Matrix feats = extract_features(forces, trace.sample_rate);
  if (opts.append_raw_force) {
    Matrix wide(feats.rows, kFeatureChannels + 3);
    for (std::size_t t = 0; t < feats.rows; ++t) {
      auto dst = wide.row(t);
      std::copy(feats.row(t).begin(), feats.row(t).end(), dst.begin());
      dst[kFeatureChannels] = forces(t, 0);
      dst[kFeatureChannels + 1] = forces(t, 1);
      dst[kFeatureChannels + 2] = forces(t, 2);
    }
    feats = std::move(wide);
  }

  FeatureSequence out;
  out.source = trace.key;
  if (feats.rows == 1) {
    // A 4-sample trace yields a single feature row; hold it constant.
    out.values = Matrix(opts.target_len, feats.cols);
    for (std::size_t t = 0; t < opts.target_len; ++t) {
      std::copy(feats.row(0).begin(), feats.row(0).end(), out.values.row(t).begin());
    }
  } else {
    out.values = resample(feats, opts.target_len);
  }
  if (stats != nullptr) out.values = zscore_apply(out.values, *stats);
  return out;
}

}  // namespace hapauth
