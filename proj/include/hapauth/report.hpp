#pragma once

#include <string>

#include "hapauth/eval.hpp"
#include "hapauth/experiment.hpp"
#include "json.hpp"

namespace hapauth {

// {model, config_digest, matrix, accuracy, precision[], labels[]}
nlohmann::ordered_json report_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);

// Header row and first column carry the class labels; rows are true classes.
std::string matrix_csv(const EvalReport& r);
std::string matrix_svg(const EvalReport& r);

nlohmann::ordered_json aggregate_json(const AggregateReport& agg);
// model,accuracy,mean_precision rows
std::string aggregate_models_csv(const AggregateReport& agg);
// label,mean_precision rows
std::string aggregate_classes_csv(const AggregateReport& agg);

nlohmann::ordered_json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

// {model, config: {train, model}, epochs: [{epoch, loss, accuracy, lr}]}
nlohmann::ordered_json history_json(const std::string& model_id, const TrainConfig& tcfg, const ModelConfig& mcfg,
                                    const TrainHistory& history);

nlohmann::ordered_json norm_stats_json(const NormStats& s);
NormStats norm_stats_from_json(const nlohmann::json& j);

std::string sweep_csv(const std::vector<SweepPoint>& points);

}  // namespace hapauth
