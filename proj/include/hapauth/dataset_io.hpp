#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hapauth/matrix.hpp"

namespace hapauth {

inline constexpr double kNominalSampleRate = 250.0;

enum class Variant { raw, filtered };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

struct ForceSample {
  double timestamp = 0.0;  // seconds
  float fx = 0.0f;         // newtons
  float fy = 0.0f;
  float fz = 0.0f;

  bool operator==(const ForceSample&) const = default;
};

// Identity of one recorded trial.
struct TraceKey {
  std::string user_id;
  std::string task_id;
  int trial_index = 0;
  Variant variant = Variant::raw;

  auto operator<=>(const TraceKey&) const = default;
};

std::string to_string(const TraceKey& key);

struct ForceTrace {
  TraceKey key;
  double sample_rate = kNominalSampleRate;
  std::vector<ForceSample> samples;

  std::size_t size() const { return samples.size(); }
  // T x 3 matrix of (fx, fy, fz).
  Matrix forces() const;
  // Throws EmptyTraceError / OrderingError / ParseError when an invariant is broken.
  void validate() const;
};

// Parses `timestamp,fx,fy,fz` CSV text. Row indices in errors are 1-based data rows.
ForceTrace parse_trace_csv(std::string_view text, const TraceKey& key,
                           double sample_rate = kNominalSampleRate);

// Shortest round-trip formatting; parse(write(t)) reproduces samples bit-exactly.
std::string write_trace_csv(const ForceTrace& trace);

struct ManifestEntry {
  std::filesystem::path path;  // relative paths resolve against the manifest directory
  TraceKey key;
};

struct DatasetManifest {
  double sample_rate = kNominalSampleRate;
  std::vector<ManifestEntry> entries;

  // Throws SchemaError on malformed JSON or duplicate keys.
  static DatasetManifest from_json_text(std::string_view text);
  std::string to_json_text() const;
  void validate() const;
};

DatasetManifest read_manifest(const std::filesystem::path& file);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& file);

using GroupKey = std::pair<std::string, std::string>;  // (user_id, task_id)

// Immutable after construction; safe to share across threads.
class TraceCollection {
 public:
  TraceCollection() = default;
  explicit TraceCollection(std::vector<ForceTrace> traces);

  std::size_t size() const { return traces_.size(); }
  bool empty() const { return traces_.empty(); }
  const ForceTrace& operator[](std::size_t i) const { return traces_[i]; }
  const std::vector<ForceTrace>& traces() const { return traces_; }

  // Sorted unique labels.
  std::vector<std::string> users() const;
  std::vector<std::string> tasks() const;

  // Indices grouped by (user, task) for one data variant, in trial order.
  std::map<GroupKey, std::vector<std::size_t>> groups(Variant variant) const;

  std::optional<std::size_t> find(const TraceKey& key) const;

 private:
  std::vector<ForceTrace> traces_;
  std::map<TraceKey, std::size_t> index_;
};

// Relative entry paths are resolved against `base_dir`.
TraceCollection load_dataset(const DatasetManifest& manifest,
                             const std::filesystem::path& base_dir = {});

std::string read_text_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, std::string_view text);

// ---- synthetic generator ----

// Per-user force signature.
struct UserSignature {
  double press_force = 2.0;      // mean normal force, N
  double press_variance = 0.04;  // trial-to-trial variance of the press force, N^2
  double tremor_frequency = 8.0; // Hz
  double tremor_amplitude = 0.1; // N (0 disables tremor)
  double speed_scale = 1.0;      // >1 writes faster (shorter trials)
  double stiffness = 1.0;        // lateral force gain
  double noise_std = 0.002;      // sensor white noise, N
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Ranges from which per-user signatures are drawn.
struct SignatureRanges {
  Range press_force{0.5, 5.0};
  Range press_variance{0.001, 0.01};
  Range tremor_frequency{4.0, 12.0};
  Range tremor_amplitude{0.02, 0.3};
  Range speed_scale{0.7, 1.4};
  Range stiffness{0.5, 2.0};
  Range noise_std{0.0005, 0.003};
};

struct SynthConfig {
  int num_users = 15;
  std::vector<std::string> tasks{"a", "b", "c", "d", "e", "f", "g"};
  int trials_per_task = 120;
  std::uint64_t seed = 1;
  Range duration_range{1.5, 3.0};  // seconds, at speed_scale 1
  double sample_rate = kNominalSampleRate;
  SignatureRanges ranges;
  // When non-empty, used verbatim instead of drawing from `ranges`; size must equal num_users.
  std::vector<UserSignature> users;

  void validate() const;
};

std::string synth_user_id(int index);

// The signature actually used for each user (drawn or explicit).
std::vector<UserSignature> synth_signatures(const SynthConfig& cfg);

// Raw-variant traces ordered by (user, task, trial).
TraceCollection synth_dataset(const SynthConfig& cfg);

}  // namespace hapauth
