#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hapauth/error.hpp"
#include "hapauth/eval.hpp"
#include "hapauth/report.hpp"
#include "metric_oracle.hpp"
#include "support.hpp"

using namespace hapauth;

namespace {

Model small_model(std::size_t classes, std::uint64_t seed = 1) {
  ModelConfig cfg;
  cfg.d_model = 16;
  cfg.num_heads = 4;
  cfg.ffn_dim = 16;
  cfg.seq_len = 8;
  cfg.num_classes = classes;
  return {cfg, build_model<float>(cfg, seed)};
}

FeatureSequence random_seq(Rng& rng, int label = 0) {
  FeatureSequence s;
  s.values = test::random_matrix(8, 13, rng);
  s.label = label;
  return s;
}

void set_head(Model& m, std::vector<float> bias) {
  for (float& w : m.params["head.weight"].node()->value) w = 0.0f;
  std::copy(bias.begin(), bias.end(), m.params["head.bias"].node()->value.begin());
}

ConfusionMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  ConfusionMatrix m(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t p = 0; p < rows.size(); ++p) m.at(t, p) = rows[t][p];
  return m;
}

}  // namespace

TEST_CASE("predict: probabilities sum to one and argmax follows the logits") {
  Rng rng(1);
  auto m = small_model(5);
  for (int i = 0; i < 10; ++i) {
    auto s = random_seq(rng);
    auto p = predict(m, s);
    CHECK(std::abs(std::accumulate(p.probabilities.begin(), p.probabilities.end(), 0.0) - 1.0) < 1e-6);
    auto logits = forward(m.params, m.config, ad::Tensor<float>::from({1, 8, 13}, s.values.data));
    auto best = std::max_element(logits.data().begin(), logits.data().end()) - logits.data().begin();
    CHECK(p.label == best);
  }
  CHECK_THROWS_AS(predict(m, FeatureSequence{Matrix(9, 13), 0, {}}), DimensionError);
}

TEST_CASE("predict: exact ties go to the lowest class index") {
  Rng rng(2);
  auto m = small_model(3);
  set_head(m, {1.0f, 5.0f, 5.0f});
  auto p = predict(m, random_seq(rng));
  CHECK(p.label == 1);
  CHECK(p.probabilities[1] == p.probabilities[2]);
  set_head(m, {2.0f, 2.0f, 2.0f});
  CHECK(predict(m, random_seq(rng)).label == 0);
}

TEST_CASE("predict is unchanged by a constant shift of all logits") {
  Rng rng(3);
  auto m = small_model(4);
  std::vector<FeatureSequence> seqs;
  for (int i = 0; i < 12; ++i) seqs.push_back(random_seq(rng));
  auto before = predict_batch(m, seqs, 5);
  for (float& b : m.params["head.bias"].node()->value) b += 17.0f;
  auto after = predict_batch(m, seqs, 7);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    CHECK(before[i].label == after[i].label);
    for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(before[i].probabilities[c] - after[i].probabilities[c]) < 1e-5);
  }
}

TEST_CASE("confusion matrix hand cases") {
  std::vector<int> preds{0, 1, 1}, labels{0, 1, 0};
  auto m = confusion_matrix(preds, labels, 2);
  CHECK(m == from_rows({{1, 1}, {0, 1}}));
  auto mt = metrics(m);
  CHECK(mt.accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(mt.precision[0] == 1.0);
  CHECK(mt.precision[1] == 0.5);

  std::vector<int> same{2, 0, 1, 2};
  auto d = confusion_matrix(same, same, 3);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t p = 0; p < 3; ++p)
      if (t != p) CHECK(d.at(t, p) == 0);
  auto dm = metrics(d);
  CHECK(dm.accuracy == 1.0);
  for (double p : dm.precision) CHECK(p == 1.0);

  auto u = metrics(from_rows({{3, 3, 3, 3}, {3, 3, 3, 3}, {3, 3, 3, 3}, {3, 3, 3, 3}}));
  CHECK(u.accuracy == 0.25);
  for (double p : u.precision) CHECK(p == 0.25);

  // A never-predicted class has precision 0.
  auto z = metrics(from_rows({{2, 0}, {3, 0}}));
  CHECK(z.precision[1] == 0.0);

  CHECK_THROWS_AS(metrics(ConfusionMatrix(3)), DataError);
  std::vector<int> bad{0, 2};
  std::vector<int> ok{0, 1};
  CHECK_THROWS_AS(confusion_matrix(bad, ok, 2), DataError);
  CHECK_THROWS_AS(confusion_matrix(ok, bad, 2), DataError);
  std::vector<int> neg{-1, 0};
  CHECK_THROWS_AS(confusion_matrix(neg, ok, 2), DataError);
  CHECK_THROWS_AS(confusion_matrix(preds, ok, 2), DimensionError);
}

TEST_CASE("confusion matrix and metrics match the counting oracle on 500 random pairs") {
  Rng rng(4);
  const int k = 6;
  std::vector<int> preds(500), labels(500);
  for (int i = 0; i < 500; ++i) {
    labels[i] = static_cast<int>(rng.below(k));
    preds[i] = rng.uniform() < 0.6 ? labels[i] : static_cast<int>(rng.below(k));
  }
  auto m = confusion_matrix(preds, labels, k);
  auto want = test::count_metrics(preds, labels, k);
  CHECK(m.total() == 500);
  for (int t = 0; t < k; ++t)
    for (int p = 0; p < k; ++p) CHECK(m.at(t, p) == want.matrix[t][p]);
  auto mt = metrics(m);
  CHECK(mt.accuracy == want.accuracy);
  CHECK(mt.precision == want.precision);
  for (double p : mt.precision) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("relabelling classes permutes the matrix and keeps accuracy") {
  Rng rng(5);
  const int k = 4;
  std::vector<int> preds(200), labels(200);
  for (int i = 0; i < 200; ++i) {
    labels[i] = static_cast<int>(rng.below(k));
    preds[i] = static_cast<int>(rng.below(k));
  }
  const int perm[k] = {2, 0, 3, 1};
  std::vector<int> pp(200), pl(200);
  for (int i = 0; i < 200; ++i) {
    pp[i] = perm[preds[i]];
    pl[i] = perm[labels[i]];
  }
  auto a = confusion_matrix(preds, labels, k);
  auto b = confusion_matrix(pp, pl, k);
  for (int t = 0; t < k; ++t)
    for (int p = 0; p < k; ++p) CHECK(b.at(perm[t], perm[p]) == a.at(t, p));
  auto ma = metrics(a), mb = metrics(b);
  CHECK(ma.accuracy == mb.accuracy);
  for (int c = 0; c < k; ++c) CHECK(mb.precision[perm[c]] == ma.precision[c]);
}

TEST_CASE("evaluate_model ties predictions, matrix and metrics together") {
  Rng rng(6);
  auto m = small_model(3);
  std::vector<FeatureSequence> test;
  for (int i = 0; i < 30; ++i) test.push_back(random_seq(rng, i % 3));
  auto r = evaluate_model(m, test, {"x", "y", "z"}, "model-1");
  CHECK(r.matrix.total() == 30);
  auto preds = predict_batch(m, test);
  std::vector<int> p, y;
  for (std::size_t i = 0; i < test.size(); ++i) {
    p.push_back(preds[i].label);
    y.push_back(test[i].label);
  }
  auto want = test::count_metrics(p, y, 3);
  CHECK(r.accuracy == want.accuracy);
  CHECK(r.precision == want.precision);
  CHECK(r.config_digest == config_digest(m.config));
  CHECK(r.config_digest.size() == 16);

  CHECK_THROWS_AS(evaluate_model(m, test, {"x", "y"}, "bad"), DataError);
  CHECK_THROWS_AS(evaluate_model(m, std::vector<FeatureSequence>{}, {"x", "y", "z"}, "empty"), DataError);
}

TEST_CASE("aggregates are arithmetic means of the per-model values") {
  Rng rng(7);
  std::vector<EvalReport> reports;
  for (int i = 0; i < 7; ++i) {
    std::vector<int> preds(300), labels(300);
    for (int j = 0; j < 300; ++j) {
      labels[j] = j % 15;
      preds[j] = rng.uniform() < 0.8 ? labels[j] : static_cast<int>(rng.below(15));
    }
    EvalReport r;
    r.model_id = "m" + std::to_string(i);
    for (int c = 0; c < 15; ++c) r.labels.push_back("u" + std::to_string(c));
    r.matrix = confusion_matrix(preds, labels, 15);
    auto mt = metrics(r.matrix);
    r.accuracy = mt.accuracy;
    r.precision = mt.precision;
    reports.push_back(r);
  }
  auto agg = aggregate_reports("user-id", reports);
  CHECK(agg.reports.size() == 7);
  REQUIRE(agg.mean_precision_per_class.size() == 15);
  for (int c = 0; c < 15; ++c) {
    double s = 0.0;
    for (const auto& r : reports) s += r.precision[c];
    CHECK(agg.mean_precision_per_class[c] == doctest::Approx(s / 7.0).epsilon(1e-14));
  }
  double acc = 0.0;
  for (const auto& r : reports) acc += r.accuracy;
  CHECK(agg.mean_accuracy == doctest::Approx(acc / 7.0).epsilon(1e-14));
  CHECK(agg.per_model_accuracy.size() == 7);

  reports[3].labels[0] = "other";
  CHECK_THROWS_AS(aggregate_reports("user-id", reports), DataError);
  CHECK_THROWS_AS(aggregate_reports("user-id", {}), DataError);
}

TEST_CASE("a single perfect model aggregates to accuracy 1") {
  Rng rng(8);
  auto m = small_model(2);
  set_head(m, {0.0f, 1.0f});  // always predicts class 1
  std::vector<FeatureSequence> test;
  for (int i = 0; i < 5; ++i) test.push_back(random_seq(rng, 1));
  std::vector<ModelUnderTest> models{{"only", &m, {"a", "b"}, test}};
  auto agg = evaluate_experiment("task", models);
  CHECK(agg.mean_accuracy == 1.0);
  CHECK(agg.per_model_accuracy == std::vector<double>{1.0});

  std::vector<ModelUnderTest> missing{{"gone", nullptr, {"a", "b"}, test}};
  CHECK_THROWS_AS(evaluate_experiment("task", missing), DataError);
}

TEST_CASE("report serialization: JSON round trip, CSV and SVG") {
  EvalReport r;
  r.model_id = "user-id_task-a";
  r.config_digest = "0123456789abcdef";
  r.labels = {"u01", "u,02"};
  r.matrix = from_rows({{4, 1}, {2, 3}});
  auto mt = metrics(r.matrix);
  r.accuracy = mt.accuracy;
  r.precision = mt.precision;

  auto j = report_json(r);
  CHECK(j["model"] == "user-id_task-a");
  CHECK(j["matrix"][1][0] == 2);
  auto back = report_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.matrix == r.matrix);
  CHECK(back.labels == r.labels);
  CHECK(back.accuracy == r.accuracy);
  CHECK(back.precision == r.precision);

  // Metrics re-derived from the serialized matrix agree with the stored ones.
  auto again = metrics(back.matrix);
  CHECK(again.accuracy == back.accuracy);
  CHECK(again.precision == back.precision);

  CHECK(matrix_csv(r) == "true\\predicted,u01,\"u,02\"\nu01,4,1\n\"u,02\",2,3\n");
  auto svg = matrix_svg(r);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 4);
  CHECK(svg.find("</svg>") != std::string::npos);

  CHECK_THROWS_AS(report_from_json(nlohmann::json::parse(R"({"model":"x"})")), DataError);
}
