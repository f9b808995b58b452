#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hapauth/model.hpp"
#include "json.hpp"

namespace hapauth {

inline constexpr int kCheckpointFormatVersion = 1;

nlohmann::ordered_json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

struct Checkpoint {
  Model model;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

// One JSON header line {format_version, config, tensors: [{name, shape}], metadata}
// followed by every tensor's little-endian float32 values in header order.
std::string serialize_checkpoint(const Checkpoint& ckpt);
// Throws DataError on malformed input or shape/size mismatches.
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace hapauth
