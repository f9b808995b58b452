#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "hapauth/error.hpp"
#include "hapauth/signal.hpp"
#include "support.hpp"

using namespace hapauth;

namespace {

// Direct per-element recurrence in float, written independently of the library loop order.
Matrix ema_oracle(const Matrix& x, float alpha) {
  Matrix y = x;
  for (std::size_t c = 0; c < x.cols; ++c) {
    float state = x(0, c);
    for (std::size_t t = 1; t < x.rows; ++t) {
      state = state + alpha * (x(t, c) - state);
      y(t, c) = state;
    }
  }
  return y;
}

}  // namespace

TEST_CASE("ema_filter: unit step at alpha 0.001 follows the closed form") {
  Matrix step(1001, 1, 1.0f);
  step(0, 0) = 0.0f;
  auto y = ema_filter(step, 0.001f);
  auto oracle = ema_oracle(step, 0.001f);
  CHECK(y(1000, 0) == oracle(1000, 0));
  CHECK(y(1000, 0) == doctest::Approx(1.0 - std::pow(0.999, 1000)).epsilon(1e-4));
  CHECK(y(1000, 0) == doctest::Approx(0.6323).epsilon(1e-3));
}

TEST_CASE("ema_filter matches the direct recurrence bit for bit") {
  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    auto x = test::random_matrix(1 + rng.below(500), 3, rng, 2.0);
    const float alpha = static_cast<float>(rng.uniform(0.0005, 1.0));
    CHECK(ema_filter(x, alpha) == ema_oracle(x, alpha));
  }
}

TEST_CASE("ema_filter identity and fixed-point cases are exact") {
  Rng rng(3);
  auto x = test::random_matrix(200, 3, rng, 5.0);
  CHECK(ema_filter(x, 1.0f) == x);

  Matrix constant(300, 3);
  for (std::size_t t = 0; t < 300; ++t) {
    constant(t, 0) = 0.1f;
    constant(t, 1) = -7.3f;
    constant(t, 2) = 1e6f;
  }
  for (float alpha : {0.001f, 0.3f, 0.77f, 1.0f}) CHECK(ema_filter(constant, alpha) == constant);
}

TEST_CASE("ema_filter stays within the running min and max of its input") {
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    auto x = test::random_matrix(300, 3, rng);
    auto y = ema_filter(x, static_cast<float>(rng.uniform(0.001, 1.0)));
    for (std::size_t c = 0; c < 3; ++c) {
      float lo = x(0, c), hi = x(0, c);
      for (std::size_t t = 0; t < x.rows; ++t) {
        lo = std::min(lo, x(t, c));
        hi = std::max(hi, x(t, c));
        CHECK(y(t, c) >= lo);
        CHECK(y(t, c) <= hi);
      }
    }
  }
}

TEST_CASE("ema_filter commutes with channel scaling") {
  Rng rng(21);
  auto x = test::random_matrix(400, 3, rng);
  Matrix scaled = x;
  const float k = 3.7f;
  for (auto& v : scaled.data) v *= k;
  auto a = ema_filter(scaled, 0.01f);
  auto b = ema_filter(x, 0.01f);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    CHECK(std::abs(a.data[i] - k * b.data[i]) <= 1e-5 * std::max(1.0f, std::abs(a.data[i])));
  }
}

TEST_CASE("ema_filter rejects bad parameters") {
  Matrix x(3, 3, 1.0f);
  CHECK_THROWS_AS(ema_filter(x, 0.0f), ConfigError);
  CHECK_THROWS_AS(ema_filter(x, 1.5f), ConfigError);
  CHECK_THROWS_AS(ema_filter(x, -0.1f), ConfigError);
  CHECK_THROWS_AS(ema_filter(x, std::nanf("")), ConfigError);
  CHECK_THROWS_AS(ema_filter(Matrix(0, 3), 0.5f), TooShortError);
  CHECK(ema_filter(Matrix(1, 3, 2.0f), 0.5f) == Matrix(1, 3, 2.0f));
}

TEST_CASE("resample of a ramp is exact") {
  Matrix ramp(5, 1);
  for (std::size_t t = 0; t < 5; ++t) ramp(t, 0) = static_cast<float>(t);
  auto r = resample(ramp, 3);
  REQUIRE(r.rows == 3);
  CHECK(r(0, 0) == 0.0f);
  CHECK(r(1, 0) == 2.0f);
  CHECK(r(2, 0) == 4.0f);

  auto up = resample(ramp, 9);
  for (std::size_t i = 0; i < 9; ++i) CHECK(up(i, 0) == doctest::Approx(0.5 * static_cast<double>(i)));
}

TEST_CASE("resample identity, constants, endpoints and bounds") {
  Rng rng(4);
  auto x = test::random_matrix(37, 13, rng);
  CHECK(resample(x, 37) == x);

  Matrix c(50, 2, 4.25f);
  for (std::size_t len : {2u, 7u, 64u, 512u}) CHECK(resample(c, len) == Matrix(len, 2, 4.25f));

  for (int i = 0; i < 20; ++i) {
    auto s = test::random_matrix(2 + rng.below(1000), 3, rng);
    const std::size_t len = 2 + rng.below(600);
    auto r = resample(s, len);
    REQUIRE(r.rows == len);
    for (std::size_t ch = 0; ch < 3; ++ch) {
      CHECK(r(0, ch) == s(0, ch));
      CHECK(r(len - 1, ch) == s(s.rows - 1, ch));
      float lo = s(0, ch), hi = s(0, ch);
      for (std::size_t t = 0; t < s.rows; ++t) {
        lo = std::min(lo, s(t, ch));
        hi = std::max(hi, s(t, ch));
      }
      for (std::size_t t = 0; t < len; ++t) {
        CHECK(r(t, ch) >= lo);
        CHECK(r(t, ch) <= hi);
      }
    }
  }
}

TEST_CASE("resample rejects short input") {
  CHECK_THROWS_AS(resample(Matrix(1, 3), 5), TooShortError);
  CHECK_THROWS_AS(resample(Matrix(4, 3), 1), ConfigError);
}

TEST_CASE("zscore_fit analytic cases") {
  std::vector<Matrix> zeros{Matrix(10, 13)};
  auto s = zscore_fit(zeros);
  for (std::size_t c = 0; c < 13; ++c) {
    CHECK(s.mean[c] == 0.0);
    CHECK(s.std[c] == kStdFloor);
  }

  Matrix a(1, 1, 1.0f), b(1, 1, 3.0f);
  std::vector<Matrix> two{a, b};
  auto t = zscore_fit(two);
  CHECK(t.mean[0] == doctest::Approx(2.0));
  CHECK(t.std[0] == doctest::Approx(1.0));

  CHECK_THROWS_AS(zscore_fit(std::vector<Matrix>{}), DataError);
  CHECK_THROWS_AS(zscore_fit(std::vector<Matrix>{Matrix(2, 3), Matrix(2, 4)}), DimensionError);
}

TEST_CASE("zscore_fit matches a two-pass computation") {
  Rng rng(99);
  std::vector<Matrix> corpus;
  for (int i = 0; i < 12; ++i) {
    auto m = test::random_matrix(64, 13, rng, 3.0);
    for (std::size_t t = 0; t < m.rows; ++t) m(t, 5) += 1000.0f;  // large offset stresses the variance update
    corpus.push_back(m);
  }
  auto s = zscore_fit(corpus);
  for (std::size_t c = 0; c < 13; ++c) {
    double sum = 0.0, n = 0.0;
    for (const auto& m : corpus) {
      for (std::size_t t = 0; t < m.rows; ++t) {
        sum += m(t, c);
        n += 1.0;
      }
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& m : corpus) {
      for (std::size_t t = 0; t < m.rows; ++t) sq += (m(t, c) - mean) * (m(t, c) - mean);
    }
    CHECK(s.mean[c] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(s.std[c] == doctest::Approx(std::sqrt(sq / n)).epsilon(1e-9));
  }
}

TEST_CASE("zscore_apply normalizes, inverts and checks dimensions") {
  Rng rng(12);
  std::vector<Matrix> corpus;
  for (int i = 0; i < 8; ++i) corpus.push_back(test::random_matrix(64, 13, rng, 4.0));
  for (auto& m : corpus) {
    for (std::size_t t = 0; t < m.rows; ++t) m(t, 2) += 25.0f;
  }
  auto stats = zscore_fit(corpus);

  std::vector<double> sum(13, 0.0), sq(13, 0.0);
  double n = 0.0;
  for (const auto& m : corpus) {
    auto z = zscore_apply(m, stats);
    for (std::size_t t = 0; t < z.rows; ++t) {
      for (std::size_t c = 0; c < 13; ++c) {
        sum[c] += z(t, c);
        sq[c] += static_cast<double>(z(t, c)) * z(t, c);
      }
      n += 1.0;
    }
    auto back = zscore_invert(z, stats);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      CHECK(std::abs(back.data[i] - m.data[i]) <= 1e-5 * std::max(1.0f, std::abs(m.data[i])));
    }
  }
  for (std::size_t c = 0; c < 13; ++c) {
    const double mean = sum[c] / n;
    CHECK(std::abs(mean) < 1e-5);
    CHECK(std::abs(std::sqrt(sq[c] / n - mean * mean) - 1.0) < 1e-3);
  }

  // Stats fit on a single sequence centre that sequence.
  auto single = zscore_fit(std::vector<Matrix>{corpus[0]});
  auto z = zscore_apply(corpus[0], single);
  for (std::size_t c = 0; c < 13; ++c) {
    double m = 0.0;
    for (std::size_t t = 0; t < z.rows; ++t) m += z(t, c);
    CHECK(std::abs(m / static_cast<double>(z.rows)) < 1e-5);
  }

  NormStats unit{std::vector<double>(13, 0.0), std::vector<double>(13, 1.0)};
  CHECK(zscore_apply(corpus[1], unit) == corpus[1]);

  CHECK_THROWS_AS(zscore_apply(Matrix(4, 12), stats), DimensionError);
  CHECK_THROWS_AS(zscore_invert(Matrix(4, 12), stats), DimensionError);
}
