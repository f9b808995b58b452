#include <cmath>
#include <cstring>

#include "doctest.h"
#include "hapauth/checkpoint.hpp"
#include "hapauth/error.hpp"
#include "hapauth/gradcheck.hpp"
#include "hapauth/model.hpp"
#include "hapauth/rng.hpp"
#include "support.hpp"

using namespace hapauth;
using ad::Shape;
using ad::Tensor;

namespace {

template <typename T>
Tensor<T> random_batch(std::size_t b, std::size_t len, std::size_t c, Rng& rng) {
  std::vector<T> v(b * len * c);
  for (auto& x : v) x = static_cast<T>(rng.normal());
  return Tensor<T>::from({b, len, c}, std::move(v));
}

ModelConfig small_config(std::size_t classes = 3) {
  ModelConfig cfg;
  cfg.d_model = 16;
  cfg.num_heads = 4;
  cfg.ffn_dim = 24;
  cfg.num_classes = classes;
  cfg.seq_len = 10;
  return cfg;
}

}  // namespace

TEST_CASE("parameter count is pinned for the reference architecture") {
  ModelConfig cfg;
  cfg.num_classes = 7;
  CHECK(parameter_count(cfg) == 794887);
  CHECK(build_model<float>(cfg, 1).count() == 794887);
  cfg.num_classes = 15;
  CHECK(parameter_count(cfg) == 796943);
  CHECK(build_model<float>(cfg, 1).count() == 796943);
  CHECK(cfg.head_dim() == 16);
}

TEST_CASE("config validation") {
  ModelConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.d_model = 250;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(build_model<float>(cfg, 0), ConfigError);
  cfg = {};
  cfg.num_classes = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  CHECK(cfg.standard_seq_len());
  cfg.seq_len = 100;
  CHECK_NOTHROW(cfg.validate());
  CHECK_FALSE(cfg.standard_seq_len());
}

TEST_CASE("build_model is deterministic and follows the init contract") {
  auto cfg = small_config();
  auto a = build_model<float>(cfg, 11);
  auto b = build_model<float>(cfg, 11);
  auto c = build_model<float>(cfg, 12);
  REQUIRE(a.entries().size() == b.entries().size());
  bool differs = false;
  for (std::size_t i = 0; i < a.entries().size(); ++i) {
    const auto& [name, t] = a.entries()[i];
    CHECK(name == b.entries()[i].first);
    CHECK(std::equal(t.data().begin(), t.data().end(), b.entries()[i].second.data().begin()));
    CHECK(t.requires_grad());
    const auto& other = c.entries()[i].second;
    differs = differs || !std::equal(t.data().begin(), t.data().end(), other.data().begin());

    if (t.rank() == 2) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(t.dim(0)));
      for (float v : t.data()) CHECK(std::abs(v) <= bound);
    } else if (name.ends_with("gamma")) {
      for (float v : t.data()) CHECK(v == 1.0f);
    } else {
      for (float v : t.data()) CHECK(v == 0.0f);
    }
  }
  CHECK(differs);
  CHECK(a["layers.1.attn.wq"].shape() == Shape{16, 16});
  CHECK(a["layers.0.ffn.w1"].shape() == Shape{16, 24});
  CHECK(a["head.weight"].shape() == Shape{16, 3});
  CHECK_THROWS_AS(a["nope"], ConfigError);
}

TEST_CASE("positional encoding values") {
  auto pe = positional_encoding(50, 16);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(pe[2 * i] == 0.0);
    CHECK(pe[2 * i + 1] == 1.0);
  }
  for (double v : pe) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  CHECK(pe[1 * 16 + 0] == doctest::Approx(0.8415).epsilon(1e-4));
  CHECK(pe[1 * 16 + 1] == doctest::Approx(std::cos(1.0)));
  CHECK(pe[7 * 16 + 6] == doctest::Approx(std::sin(7.0 / std::pow(10000.0, 6.0 / 16.0))));
  CHECK_THROWS_AS(positional_encoding(4, 7), ConfigError);
}

TEST_CASE("mhsa matches a naive per-head loop") {
  Rng rng(3);
  const std::size_t len = 3, d = 8, h = 2, dh = 4;
  auto x = random_batch<double>(1, len, d, rng);
  std::vector<Tensor<double>> w;
  for (int i = 0; i < 4; ++i) {
    std::vector<double> v(d * d);
    for (auto& e : v) e = rng.normal(0.0, 0.5);
    w.push_back(Tensor<double>::from({d, d}, v));
  }
  Tensor<double> weights;
  auto out = mhsa(x, w[0], w[1], w[2], w[3], h, &weights);
  REQUIRE(out.shape() == Shape{1, len, d});
  REQUIRE(weights.shape() == Shape{1, h, len, len});

  auto proj = [&](const Tensor<double>& m) {
    std::vector<double> r(len * d, 0.0);
    for (std::size_t t = 0; t < len; ++t)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k) r[t * d + j] += x.data()[t * d + k] * m.data()[k * d + j];
    return r;
  };
  auto q = proj(w[0]), k = proj(w[1]), v = proj(w[2]);
  std::vector<double> ctx(len * d, 0.0);
  for (std::size_t head = 0; head < h; ++head) {
    for (std::size_t i = 0; i < len; ++i) {
      std::vector<double> s(len);
      double mx = -1e300;
      for (std::size_t j = 0; j < len; ++j) {
        double dot = 0.0;
        for (std::size_t e = 0; e < dh; ++e) dot += q[i * d + head * dh + e] * k[j * d + head * dh + e];
        s[j] = dot / std::sqrt(double(dh));
        mx = std::max(mx, s[j]);
      }
      double z = 0.0;
      for (auto& e : s) z += (e = std::exp(e - mx));
      for (std::size_t j = 0; j < len; ++j) {
        s[j] /= z;
        CHECK(weights.data()[(head * len + i) * len + j] == doctest::Approx(s[j]).epsilon(1e-12));
        for (std::size_t e = 0; e < dh; ++e) ctx[i * d + head * dh + e] += s[j] * v[j * d + head * dh + e];
      }
    }
  }
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t j = 0; j < d; ++j) {
      double want = 0.0;
      for (std::size_t e = 0; e < d; ++e) want += ctx[t * d + e] * w[3].data()[e * d + j];
      CHECK(std::abs(out.data()[t * d + j] - want) <= 1e-5 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("mhsa with a single position reduces to the projected values") {
  Rng rng(4);
  const std::size_t d = 8;
  auto x = random_batch<double>(2, 1, d, rng);
  std::vector<Tensor<double>> w;
  for (int i = 0; i < 4; ++i) {
    std::vector<double> v(d * d);
    for (auto& e : v) e = rng.normal();
    w.push_back(Tensor<double>::from({d, d}, v));
  }
  Tensor<double> weights;
  auto out = mhsa(x, w[0], w[1], w[2], w[3], 4, &weights);
  for (double a : weights.data()) CHECK(a == 1.0);
  auto want = ad::matmul(ad::matmul(x, w[2]), w[3]);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == doctest::Approx(want.data()[i]).epsilon(1e-12));

  auto y = random_batch<float>(2, 9, 16, rng);
  auto p = build_model<float>(small_config(), 1);
  Tensor<float> rows;
  mhsa(y, p["layers.0.attn.wq"], p["layers.0.attn.wk"], p["layers.0.attn.wv"], p["layers.0.attn.wo"], 4, &rows);
  REQUIRE(rows.shape() == Shape{2, 4, 9, 9});
  // Rows of random attention weights sum to one.
  for (std::size_t r = 0; r < rows.size() / 9; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < 9; ++j) s += rows.data()[r * 9 + j];
    CHECK(std::abs(s - 1.0) < 1e-6);
  }
  auto z = random_batch<float>(2, 9, 8, rng);
  CHECK_THROWS_AS(mhsa(z, w[0].cast<float>(), w[1].cast<float>(), w[2].cast<float>(), w[3].cast<float>(), 3),
                  DimensionError);
}

TEST_CASE("forward output shapes for the protocol configurations") {
  Rng rng(5);
  ModelConfig task;
  task.num_classes = 7;
  task.seq_len = 64;
  auto pt = build_model<float>(task, 1);
  CHECK(forward(pt, task, random_batch<float>(16, 64, 13, rng)).shape() == Shape{16, 7});

  ModelConfig user;
  user.num_classes = 15;
  user.seq_len = 512;
  auto pu = build_model<float>(user, 2);
  CHECK(forward(pu, user, random_batch<float>(16, 512, 13, rng)).shape() == Shape{16, 15});

  CHECK_THROWS_AS(forward(pt, task, random_batch<float>(2, 64, 12, rng)), DimensionError);
}

TEST_CASE("forward: determinism and no cross-sample interaction") {
  Rng rng(6);
  auto cfg = small_config();
  auto p = build_model<float>(cfg, 3);
  auto batch = random_batch<float>(5, 10, 13, rng);
  auto a = forward(p, cfg, batch);
  auto b = forward(p, cfg, batch);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));

  // Reverse the batch order.
  const std::size_t per = 10 * 13;
  std::vector<float> rev(batch.size());
  for (std::size_t i = 0; i < 5; ++i) {
    std::copy_n(batch.data().begin() + (4 - i) * per, per, rev.begin() + i * per);
  }
  auto r = forward(p, cfg, Tensor<float>::from({5, 10, 13}, rev));
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t k = 0; k < 3; ++k) CHECK(r.data()[i * 3 + k] == doctest::Approx(a.data()[(4 - i) * 3 + k]).epsilon(1e-6));
  }
}

TEST_CASE("mean pooling: duplicating every time step leaves logits unchanged without positional encoding") {
  Rng rng(7);
  auto cfg = small_config();
  cfg.positional_encoding = false;
  auto p = build_model<float>(cfg, 4);
  auto batch = random_batch<float>(3, 10, 13, rng);
  std::vector<float> dup(3 * 20 * 13);
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t t = 0; t < 20; ++t)
      std::copy_n(batch.data().begin() + (b * 10 + t / 2) * 13, 13, dup.begin() + (b * 20 + t) * 13);
  auto a = forward(p, cfg, batch);
  auto d = forward(p, cfg, Tensor<float>::from({3, 20, 13}, dup));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.data()[i] - d.data()[i]) <= 1e-5);

  // With positional encoding the duplicated sequence is a different input.
  cfg.positional_encoding = true;
  auto a2 = forward(p, cfg, batch);
  auto d2 = forward(p, cfg, Tensor<float>::from({3, 20, 13}, dup));
  double diff = 0.0;
  for (std::size_t i = 0; i < a2.size(); ++i) diff = std::max(diff, double(std::abs(a2.data()[i] - d2.data()[i])));
  CHECK(diff > 1e-4);
}

TEST_CASE("adding a constant to the head bias shifts logits but not probabilities") {
  Rng rng(8);
  auto cfg = small_config(4);
  auto p = build_model<double>(cfg, 5);
  auto batch = random_batch<double>(2, 10, 13, rng);
  auto before = forward(p, cfg, batch);
  for (double& b : p["head.bias"].node()->value) b += 3.25;
  auto after = forward(p, cfg, batch);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(after.data()[i] - before.data()[i] == doctest::Approx(3.25));
  auto pb = ad::softmax(before), pa = ad::softmax(after);
  for (std::size_t i = 0; i < pb.size(); ++i) CHECK(std::abs(pa.data()[i] - pb.data()[i]) < 1e-6);
}

TEST_CASE("cross-entropy contracts") {
  const std::size_t k = 5;
  std::vector<float> uniform(2 * k, 0.3f);
  std::vector<int> labels{1, 4};
  auto l = ad::cross_entropy(Tensor<float>::from({2, k}, uniform), std::span<const int>(labels));
  CHECK(l.item() == doctest::Approx(std::log(5.0)).epsilon(1e-6));

  std::vector<float> confident(2 * k, 0.0f);
  confident[1] = 100.0f;
  confident[k + 4] = 100.0f;
  CHECK(ad::cross_entropy(Tensor<float>::from({2, k}, confident), std::span<const int>(labels)).item() < 1e-6);

  Rng rng(9);
  auto logits = random_batch<double>(1, 4, 3, rng);
  auto flat = ad::reshape(logits, {4, 3});
  std::vector<int> lab{2, 0, 1, 1};
  double want = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double z = 0.0;
    for (std::size_t c = 0; c < 3; ++c) z += std::exp(flat.data()[i * 3 + c]);
    want += -std::log(std::exp(flat.data()[i * 3 + lab[i]]) / z);
  }
  CHECK(ad::cross_entropy(flat, std::span<const int>(lab)).item() == doctest::Approx(want / 4.0).epsilon(1e-12));
}

TEST_CASE("full model gradients agree with central differences in 64-bit") {
  Rng rng(10);
  ModelConfig cfg;
  cfg.num_classes = 4;
  cfg.d_model = 32;
  cfg.num_heads = 4;
  cfg.ffn_dim = 32;
  cfg.seq_len = 8;
  auto params = build_model<double>(cfg, 6);
  auto batch = random_batch<double>(2, 8, 13, rng);
  std::vector<int> labels{1, 3};
  auto r = ad::grad_check([&] { return ad::cross_entropy(forward(params, cfg, batch), std::span<const int>(labels)); },
                          params.tensors());
  CHECK(r.checked == 200);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("checkpoint round trip is lossless and byte-stable") {
  auto cfg = small_config();
  Checkpoint ck{{cfg, build_model<float>(cfg, 21)}, {}};
  ck.metadata["model_id"] = "m";
  auto bytes = serialize_checkpoint(ck);
  auto header_end = bytes.find('\n');
  REQUIRE(header_end != std::string::npos);
  auto header = nlohmann::json::parse(bytes.substr(0, header_end));
  CHECK(header["format_version"] == kCheckpointFormatVersion);
  CHECK(header["tensors"].size() == ck.model.params.entries().size());
  CHECK(bytes.size() == header_end + 1 + 4 * parameter_count(cfg));

  // First float after the header is input.weight[0] in little-endian.
  float first = 0.0f;
  std::memcpy(&first, bytes.data() + header_end + 1, 4);
  CHECK(first == ck.model.params["input.weight"].data()[0]);

  auto back = parse_checkpoint(bytes);
  CHECK(back.model.config == cfg);
  CHECK(back.metadata["model_id"] == "m");
  CHECK(serialize_checkpoint(back) == bytes);

  test::TempDir dir;
  save_checkpoint(ck, dir / "m.ckpt");
  CHECK(serialize_checkpoint(load_checkpoint(dir / "m.ckpt")) == bytes);
}

TEST_CASE("checkpoint parsing rejects corrupted input") {
  auto cfg = small_config();
  auto bytes = serialize_checkpoint({{cfg, build_model<float>(cfg, 1)}, {}});
  CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, bytes.size() - 1)), DataError);
  CHECK_THROWS_AS(parse_checkpoint(bytes + "x"), DataError);
  CHECK_THROWS_AS(parse_checkpoint("not json\n"), DataError);
  CHECK_THROWS_AS(parse_checkpoint(""), DataError);

  auto header_end = bytes.find('\n');
  auto header = nlohmann::json::parse(bytes.substr(0, header_end));
  auto bad_shape = header;
  bad_shape["tensors"][0]["shape"] = {13, 17};
  CHECK_THROWS_AS(parse_checkpoint(bad_shape.dump() + bytes.substr(header_end)), DataError);
  auto bad_version = header;
  bad_version["format_version"] = 99;
  CHECK_THROWS_AS(parse_checkpoint(bad_version.dump() + bytes.substr(header_end)), DataError);
}
