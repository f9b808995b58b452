#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "hapauth/dataset_io.hpp"
#include "hapauth/error.hpp"
#include "hapauth/rng.hpp"

namespace hapauth {

namespace {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Letter-like stroke templates in a unit box (y up). Unknown task labels get a
// random stroke seeded from the label.
std::vector<Point> stroke_template(const std::string& task) {
  static const std::vector<std::pair<std::string, std::vector<Point>>> letters = {
      {"a", {{0.8, 0.7}, {0.5, 0.9}, {0.2, 0.7}, {0.2, 0.3}, {0.5, 0.1}, {0.8, 0.3}, {0.8, 0.8}, {0.85, 0.0}}},
      {"b", {{0.2, 1.0}, {0.2, 0.0}, {0.2, 0.4}, {0.5, 0.6}, {0.8, 0.4}, {0.7, 0.1}, {0.4, 0.0}, {0.2, 0.1}}},
      {"c", {{0.8, 0.8}, {0.5, 0.95}, {0.2, 0.7}, {0.15, 0.4}, {0.3, 0.1}, {0.6, 0.05}, {0.85, 0.2}}},
      {"d", {{0.8, 0.5}, {0.5, 0.7}, {0.2, 0.5}, {0.25, 0.15}, {0.55, 0.05}, {0.8, 0.3}, {0.8, 1.0}, {0.85, 0.0}}},
      {"e", {{0.2, 0.5}, {0.8, 0.55}, {0.7, 0.85}, {0.4, 0.9}, {0.15, 0.6}, {0.25, 0.2}, {0.55, 0.05}, {0.85, 0.2}}},
      {"f", {{0.75, 0.95}, {0.5, 1.0}, {0.4, 0.8}, {0.4, 0.0}, {0.4, 0.5}, {0.2, 0.5}, {0.7, 0.5}}},
      {"g", {{0.8, 0.8}, {0.5, 0.95}, {0.2, 0.75}, {0.3, 0.45}, {0.6, 0.45}, {0.8, 0.7}, {0.8, -0.2}, {0.5, -0.45}, {0.2, -0.3}}},
  };
  for (const auto& [name, pts] : letters) {
    if (name == task) return pts;
  }
  Rng rng(derive_seed(0x5eed, task));
  std::vector<Point> pts(8);
  for (auto& p : pts) p = {rng.uniform(), rng.uniform()};
  return pts;
}

Point catmull_rom(const Point& p0, const Point& p1, const Point& p2, const Point& p3, double s) {
  double s2 = s * s;
  double s3 = s2 * s;
  auto blend = [&](double a, double b, double c, double d) {
    return 0.5 * (2.0 * b + (-a + c) * s + (2.0 * a - 5.0 * b + 4.0 * c - d) * s2 +
                  (-a + 3.0 * b - 3.0 * c + d) * s3);
  };
  return {blend(p0.x, p1.x, p2.x, p3.x), blend(p0.y, p1.y, p2.y, p3.y)};
}

// Dense polyline through the control points with cumulative arc length.
// segment_end[i] is the arc length at control point i + 1.
struct Path {
  std::vector<Point> pts;
  std::vector<double> arc;
  std::vector<double> segment_end;

  explicit Path(const std::vector<Point>& ctrl) {
    constexpr int kPerSegment = 1024;
    const std::size_t n = ctrl.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const Point& p0 = ctrl[i == 0 ? 0 : i - 1];
      const Point& p3 = ctrl[std::min(i + 2, n - 1)];
      for (int k = 0; k < kPerSegment; ++k) {
        pts.push_back(catmull_rom(p0, ctrl[i], ctrl[i + 1], p3, static_cast<double>(k) / kPerSegment));
      }
    }
    pts.push_back(ctrl.back());
    arc.assign(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      arc[i] = arc[i - 1] + std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
    }
    for (std::size_t i = 1; i < n; ++i) segment_end.push_back(arc[i * kPerSegment]);
  }

  double length() const { return arc.back(); }

  Point at(double s) const {
    s = std::clamp(s, 0.0, length());
    auto it = std::upper_bound(arc.begin(), arc.end(), s);
    std::size_t j = it == arc.end() ? arc.size() - 1 : static_cast<std::size_t>(it - arc.begin());
    if (j == 0) return pts.front();
    double seg = arc[j] - arc[j - 1];
    double f = seg > 0.0 ? (s - arc[j - 1]) / seg : 0.0;
    return {pts[j - 1].x + f * (pts[j].x - pts[j - 1].x), pts[j - 1].y + f * (pts[j].y - pts[j - 1].y)};
  }
};

// Minimum-jerk progress profile, 0 -> 1 with zero velocity/acceleration at both ends.
double min_jerk(double u) {
  u = std::clamp(u, 0.0, 1.0);
  double u3 = u * u * u;
  return u3 * (10.0 - 15.0 * u + 6.0 * u * u);
}

// Point-to-point motion: each segment between control points is its own
// minimum-jerk movement, so the pen comes to rest at every control point and
// sharp turns do not produce force impulses. Segment durations scale with
// segment length.
class Motion {
 public:
  Motion(const Path& path, double duration) : path_(path) {
    double total = path.length();
    double start = 0.0;
    for (double end : path.segment_end) {
      ends_.push_back(duration * end / total);
      starts_.push_back(duration * start / total);
      arc_start_.push_back(start);
      arc_len_.push_back(end - start);
      start = end;
    }
  }

  Point at(double t) const {
    if (t <= 0.0) return path_.at(0.0);
    auto it = std::lower_bound(ends_.begin(), ends_.end(), t);
    if (it == ends_.end()) return path_.at(path_.length());
    auto i = static_cast<std::size_t>(it - ends_.begin());
    double span = ends_[i] - starts_[i];
    double u = span > 0.0 ? (t - starts_[i]) / span : 1.0;
    return path_.at(arc_start_[i] + arc_len_[i] * min_jerk(u));
  }

 private:
  const Path& path_;
  std::vector<double> starts_, ends_, arc_start_, arc_len_;
};

void check_range(const Range& r, const char* name, bool allow_zero) {
  bool ok = std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi &&
            (allow_zero ? r.lo >= 0.0 : r.lo > 0.0);
  if (!ok) throw ConfigError(std::string("invalid synth range for ") + name);
}

void check_signature(const UserSignature& s) {
  auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!pos(s.press_force) || !pos(s.press_variance) || !pos(s.tremor_frequency) ||
      !pos(s.speed_scale) || !pos(s.stiffness) || !pos(s.noise_std) ||
      !(std::isfinite(s.tremor_amplitude) && s.tremor_amplitude >= 0.0)) {
    throw ConfigError("user signature parameters must be positive (tremor amplitude >= 0)");
  }
}

constexpr double kLateralDamping = 0.5;   // N per (letter height / s)
constexpr double kLateralInertia = 0.02;  // N per (letter height / s^2)
constexpr double kRampSeconds = 0.1;
constexpr double kShapeJitter = 0.02;

ForceTrace synth_trace(const SynthConfig& cfg, const UserSignature& sig, const std::string& user,
                       const std::string& task, int trial) {
  Rng rng(derive_seed(cfg.seed, user + "/" + task + "/" + std::to_string(trial)));

  auto ctrl = stroke_template(task);
  for (auto& p : ctrl) {
    p.x += rng.normal(0.0, kShapeJitter);
    p.y += rng.normal(0.0, kShapeJitter);
  }
  const Path path(ctrl);

  const double duration = rng.uniform(cfg.duration_range.lo, cfg.duration_range.hi) / sig.speed_scale;
  const double press = std::max(0.1 * sig.press_force,
                                rng.normal(sig.press_force, std::sqrt(sig.press_variance)));
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double dt = 1.0 / cfg.sample_rate;
  const auto n = static_cast<std::size_t>(std::max(4.0, std::floor(duration * cfg.sample_rate)));

  const Motion motion(path, duration);
  auto position = [&](double t) { return motion.at(t); };

  ForceTrace trace;
  trace.key = {user, task, trial, Variant::raw};
  trace.sample_rate = cfg.sample_rate;
  trace.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const Point pm = position(t - dt);
    const Point p0 = position(t);
    const Point pp = position(t + dt);
    const double vx = (pp.x - pm.x) / (2.0 * dt);
    const double vy = (pp.y - pm.y) / (2.0 * dt);
    const double ax = (pp.x - 2.0 * p0.x + pm.x) / (dt * dt);
    const double ay = (pp.y - 2.0 * p0.y + pm.y) / (dt * dt);

    const double ramp_in = std::min(1.0, t / kRampSeconds);
    const double ramp_out = std::min(1.0, (duration - t) / kRampSeconds);
    const double envelope =
        0.5 - 0.5 * std::cos(std::numbers::pi * std::clamp(std::min(ramp_in, ramp_out), 0.0, 1.0));

    const double fx = sig.stiffness * (kLateralDamping * vx + kLateralInertia * ax);
    const double fy = sig.stiffness * (kLateralDamping * vy + kLateralInertia * ay);
    const double fz = press * envelope +
                      sig.tremor_amplitude * std::sin(2.0 * std::numbers::pi * sig.tremor_frequency * t + phase);

    auto& s = trace.samples[i];
    s.timestamp = t;
    s.fx = static_cast<float>(fx + rng.normal(0.0, sig.noise_std));
    s.fy = static_cast<float>(fy + rng.normal(0.0, sig.noise_std));
    s.fz = static_cast<float>(fz + rng.normal(0.0, sig.noise_std));
  }
  return trace;
}

}  // namespace

void SynthConfig::validate() const {
  if (num_users < 2) throw ConfigError("num_users must be >= 2");
  if (trials_per_task < 1) throw ConfigError("trials_per_task must be >= 1");
  if (tasks.empty()) throw ConfigError("at least one task label is required");
  if (std::set<std::string>(tasks.begin(), tasks.end()).size() != tasks.size()) {
    throw ConfigError("task labels must be unique");
  }
  for (const auto& t : tasks) {
    if (t.empty()) throw ConfigError("task labels must be non-empty");
  }
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) throw ConfigError("sample_rate must be positive");
  check_range(duration_range, "duration", false);
  check_range(ranges.press_force, "press_force", false);
  check_range(ranges.press_variance, "press_variance", false);
  check_range(ranges.tremor_frequency, "tremor_frequency", false);
  check_range(ranges.tremor_amplitude, "tremor_amplitude", true);
  check_range(ranges.speed_scale, "speed_scale", false);
  check_range(ranges.stiffness, "stiffness", false);
  check_range(ranges.noise_std, "noise_std", false);
  if (!users.empty()) {
    if (users.size() != static_cast<std::size_t>(num_users)) {
      throw ConfigError("explicit user signatures must match num_users");
    }
    for (const auto& u : users) check_signature(u);
  }
}

std::string synth_user_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "u%02d", index + 1);
  return buf;
}

std::vector<UserSignature> synth_signatures(const SynthConfig& cfg) {
  cfg.validate();
  if (!cfg.users.empty()) return cfg.users;
  Rng rng(derive_seed(cfg.seed, "signatures"));
  const auto& r = cfg.ranges;
  std::vector<UserSignature> out(static_cast<std::size_t>(cfg.num_users));
  for (auto& s : out) {
    s.press_force = rng.uniform(r.press_force.lo, r.press_force.hi);
    s.press_variance = rng.uniform(r.press_variance.lo, r.press_variance.hi);
    s.tremor_frequency = rng.uniform(r.tremor_frequency.lo, r.tremor_frequency.hi);
    s.tremor_amplitude = rng.uniform(r.tremor_amplitude.lo, r.tremor_amplitude.hi);
    s.speed_scale = rng.uniform(r.speed_scale.lo, r.speed_scale.hi);
    s.stiffness = rng.uniform(r.stiffness.lo, r.stiffness.hi);
    s.noise_std = rng.uniform(r.noise_std.lo, r.noise_std.hi);
  }
  return out;
}

TraceCollection synth_dataset(const SynthConfig& cfg) {
  auto sigs = synth_signatures(cfg);
  std::vector<ForceTrace> traces;
  traces.reserve(sigs.size() * cfg.tasks.size() * static_cast<std::size_t>(cfg.trials_per_task));
  for (int u = 0; u < cfg.num_users; ++u) {
    const std::string user = synth_user_id(u);
    for (const auto& task : cfg.tasks) {
      for (int trial = 0; trial < cfg.trials_per_task; ++trial) {
        traces.push_back(synth_trace(cfg, sigs[static_cast<std::size_t>(u)], user, task, trial));
      }
    }
  }
  return TraceCollection(std::move(traces));
}

}  // namespace hapauth
