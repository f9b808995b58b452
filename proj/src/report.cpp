#include "hapauth/report.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "hapauth/checkpoint.hpp"
#include "hapauth/error.hpp"

namespace hapauth {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

nlohmann::ordered_json report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model_id;
  j["config_digest"] = r.config_digest;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < r.matrix.classes(); ++t) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < r.matrix.classes(); ++p) row.push_back(r.matrix.at(t, p));
    rows.push_back(std::move(row));
  }
  j["matrix"] = std::move(rows);
  j["accuracy"] = r.accuracy;
  j["precision"] = r.precision;
  j["labels"] = r.labels;
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.model_id = j.at("model").get<std::string>();
    r.config_digest = j.at("config_digest").get<std::string>();
    r.labels = j.at("labels").get<std::vector<std::string>>();
    const auto& rows = j.at("matrix");
    r.matrix = ConfusionMatrix(rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t) {
      if (rows[t].size() != rows.size()) throw DataError("report matrix is not square");
      for (std::size_t p = 0; p < rows.size(); ++p) r.matrix.at(t, p) = rows[t][p].get<std::int64_t>();
    }
    r.accuracy = j.at("accuracy").get<double>();
    r.precision = j.at("precision").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("invalid report: ") + ex.what());
  }
  return r;
}

std::string matrix_csv(const EvalReport& r) {
  std::string out = "true\\predicted";
  for (const auto& l : r.labels) out += "," + csv_field(l);
  out += "\n";
  for (std::size_t t = 0; t < r.matrix.classes(); ++t) {
    out += csv_field(r.labels[t]);
    for (std::size_t p = 0; p < r.matrix.classes(); ++p) out += "," + std::to_string(r.matrix.at(t, p));
    out += "\n";
  }
  return out;
}

std::string matrix_svg(const EvalReport& r) {
  const std::size_t k = r.matrix.classes();
  constexpr int kCell = 36;
  constexpr int kMargin = 80;
  const int size = kMargin + static_cast<int>(k) * kCell + 20;
  std::vector<std::int64_t> row_sums(k, 0);
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t p = 0; p < k; ++p) row_sums[t] += r.matrix.at(t, p);
  }

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) + "\" height=\"" +
                    std::to_string(size + 20) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<text x=\"" + std::to_string(kMargin) + "\" y=\"14\">" + xml_escape(r.model_id) + " (acc " +
         fmt_double(r.accuracy) + ")</text>\n";
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t p = 0; p < k; ++p) {
      const double frac = row_sums[t] == 0 ? 0.0 : static_cast<double>(r.matrix.at(t, p)) / static_cast<double>(row_sums[t]);
      const int shade = 255 - static_cast<int>(frac * 200.0);
      const int x = kMargin + static_cast<int>(p) * kCell;
      const int y = kMargin + static_cast<int>(t) * kCell;
      svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" + std::to_string(kCell) +
             "\" height=\"" + std::to_string(kCell) + "\" fill=\"rgb(" + std::to_string(shade) + "," +
             std::to_string(shade) + ",255)\" stroke=\"#999\"/>\n";
      svg += "<text x=\"" + std::to_string(x + kCell / 2) + "\" y=\"" + std::to_string(y + kCell / 2 + 4) +
             "\" text-anchor=\"middle\">" + std::to_string(r.matrix.at(t, p)) + "</text>\n";
    }
    const int y = kMargin + static_cast<int>(t) * kCell + kCell / 2 + 4;
    svg += "<text x=\"" + std::to_string(kMargin - 6) + "\" y=\"" + std::to_string(y) + "\" text-anchor=\"end\">" +
           xml_escape(r.labels[t]) + "</text>\n";
    const int x = kMargin + static_cast<int>(t) * kCell + kCell / 2;
    svg += "<text x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(kMargin - 6) + "\" text-anchor=\"middle\">" +
           xml_escape(r.labels[t]) + "</text>\n";
  }
  svg += "<text x=\"" + std::to_string(kMargin) + "\" y=\"" + std::to_string(size + 10) +
         "\">rows: true class, columns: predicted</text>\n</svg>\n";
  return svg;
}

nlohmann::ordered_json aggregate_json(const AggregateReport& agg) {
  nlohmann::ordered_json j;
  j["kind"] = agg.kind;
  j["labels"] = agg.class_labels;
  j["mean_accuracy"] = agg.mean_accuracy;
  j["mean_precision"] = agg.mean_precision;
  j["mean_precision_per_class"] = agg.mean_precision_per_class;
  auto models = nlohmann::ordered_json::array();
  for (const auto& r : agg.reports) models.push_back({{"model", r.model_id}, {"accuracy", r.accuracy}});
  j["models"] = std::move(models);
  return j;
}

std::string aggregate_models_csv(const AggregateReport& agg) {
  std::string out = "model,accuracy,mean_precision\n";
  for (const auto& r : agg.reports) {
    const double mp = std::accumulate(r.precision.begin(), r.precision.end(), 0.0) /
                      static_cast<double>(std::max<std::size_t>(1, r.precision.size()));
    out += csv_field(r.model_id) + "," + fmt_double(r.accuracy) + "," + fmt_double(mp) + "\n";
  }
  return out;
}

std::string aggregate_classes_csv(const AggregateReport& agg) {
  std::string out = "label,mean_precision\n";
  for (std::size_t c = 0; c < agg.class_labels.size(); ++c) {
    out += csv_field(agg.class_labels[c]) + "," + fmt_double(agg.mean_precision_per_class[c]) + "\n";
  }
  return out;
}

nlohmann::ordered_json to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["learning_rate"] = cfg.learning_rate;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["seed"] = cfg.seed;
  j["lr_min"] = cfg.lr_min;
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["adam_eps"] = cfg.adam_eps;
  j["normalize"] = cfg.normalize;
  j["train_per_class"] = cfg.train_per_class;
  j["test_per_class"] = cfg.test_per_class;
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.learning_rate = j.at("learning_rate").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.lr_min = j.at("lr_min").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.adam_eps = j.at("adam_eps").get<double>();
    c.normalize = j.at("normalize").get<bool>();
    c.train_per_class = j.at("train_per_class").get<std::size_t>();
    c.test_per_class = j.at("test_per_class").get<std::size_t>();
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("invalid train config: ") + ex.what());
  }
  return c;
}

nlohmann::ordered_json history_json(const std::string& model_id, const TrainConfig& tcfg, const ModelConfig& mcfg,
                                    const TrainHistory& history) {
  nlohmann::ordered_json j;
  j["model"] = model_id;
  j["config"] = {{"train", to_json(tcfg)}, {"model", to_json(mcfg)}};
  auto epochs = nlohmann::ordered_json::array();
  for (const auto& e : history.epochs) {
    epochs.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}, {"lr", e.learning_rate}});
  }
  j["epochs"] = std::move(epochs);
  return j;
}

nlohmann::ordered_json norm_stats_json(const NormStats& s) {
  return {{"mean", s.mean}, {"std", s.std}};
}

NormStats norm_stats_from_json(const nlohmann::json& j) {
  NormStats s;
  try {
    s.mean = j.at("mean").get<std::vector<double>>();
    s.std = j.at("std").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("invalid normalization stats: ") + ex.what());
  }
  if (s.mean.size() != s.std.size()) throw DataError("normalization stats: mean/std length mismatch");
  return s;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = "size,accuracy\n";
  for (const auto& p : points) out += std::to_string(p.size) + "," + fmt_double(p.mean_accuracy) + "\n";
  return out;
}

}  // namespace hapauth
