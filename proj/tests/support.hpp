#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "hapauth/dataset_io.hpp"
#include "hapauth/matrix.hpp"
#include "hapauth/rng.hpp"

namespace hapauth::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hapauth_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (auto& v : m.data) v = static_cast<float>(rng.normal(0.0, scale));
  return m;
}

// Random valid trace: 4 ms spacing, forces a random walk plus jitter.
inline ForceTrace random_trace(std::size_t n, Rng& rng, TraceKey key = {"u", "a", 0, Variant::raw}) {
  ForceTrace t;
  t.key = std::move(key);
  double f[3] = {rng.normal(), rng.normal(), rng.normal(0.0, 2.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (double& c : f) c += rng.normal(0.0, 0.05);
    t.samples.push_back({static_cast<double>(i) * 0.004, static_cast<float>(f[0] + rng.normal(0.0, 0.01)),
                         static_cast<float>(f[1] + rng.normal(0.0, 0.01)),
                         static_cast<float>(f[2] + rng.normal(0.0, 0.01))});
  }
  return t;
}

inline double rel_diff(double a, double b) {
  double d = std::max({std::abs(a), std::abs(b), 1e-30});
  return std::abs(a - b) / d;
}

}  // namespace hapauth::test
