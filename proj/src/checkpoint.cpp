#include "hapauth/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "hapauth/dataset_io.hpp"
#include "hapauth/error.hpp"

namespace hapauth {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

nlohmann::ordered_json to_json(const ModelConfig& cfg) {
  nlohmann::ordered_json j;
  j["input_channels"] = cfg.input_channels;
  j["d_model"] = cfg.d_model;
  j["num_heads"] = cfg.num_heads;
  j["ffn_dim"] = cfg.ffn_dim;
  j["num_layers"] = cfg.num_layers;
  j["num_classes"] = cfg.num_classes;
  j["seq_len"] = cfg.seq_len;
  j["dropout"] = cfg.dropout;
  j["positional_encoding"] = cfg.positional_encoding;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  try {
    cfg.input_channels = j.at("input_channels").get<std::size_t>();
    cfg.d_model = j.at("d_model").get<std::size_t>();
    cfg.num_heads = j.at("num_heads").get<std::size_t>();
    cfg.ffn_dim = j.at("ffn_dim").get<std::size_t>();
    cfg.num_layers = j.at("num_layers").get<std::size_t>();
    cfg.num_classes = j.at("num_classes").get<std::size_t>();
    cfg.seq_len = j.at("seq_len").get<std::size_t>();
    cfg.dropout = j.value("dropout", 0.0);
    cfg.positional_encoding = j.value("positional_encoding", true);
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("invalid model config: ") + ex.what());
  }
  return cfg;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::ordered_json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["config"] = to_json(ckpt.model.config);
  auto tensors = nlohmann::ordered_json::array();
  for (const auto& [name, t] : ckpt.model.params.entries()) {
    tensors.push_back({{"name", name}, {"shape", t.shape()}});
  }
  header["tensors"] = std::move(tensors);
  header["metadata"] = ckpt.metadata;

  std::string out = header.dump() + "\n";
  const std::size_t header_size = out.size();
  out.resize(header_size + ckpt.model.params.count() * sizeof(float));
  char* dst = out.data() + header_size;
  for (const auto& [name, t] : ckpt.model.params.entries()) {
    const std::size_t bytes = t.size() * sizeof(float);
    std::memcpy(dst, t.data().data(), bytes);
    dst += bytes;
  }
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  const std::size_t newline = bytes.find('\n');
  if (newline == std::string_view::npos) throw DataError("checkpoint: missing header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("checkpoint: bad header: ") + ex.what());
  }
  if (header.value("format_version", -1) != kCheckpointFormatVersion) {
    throw DataError("checkpoint: unsupported format version");
  }

  Checkpoint ckpt;
  ckpt.model.config = model_config_from_json(header.at("config"));
  try {
    ckpt.model.config.validate();
  } catch (const ConfigError& ex) {
    throw DataError(std::string("checkpoint: ") + ex.what());
  }
  if (header.contains("metadata")) ckpt.metadata = header["metadata"];

  // Shapes must agree with what the config implies, in the same order.
  const auto expected = build_model<float>(ckpt.model.config, 0);
  const auto& tensors = header.at("tensors");
  if (tensors.size() != expected.entries().size()) {
    throw DataError("checkpoint: expected " + std::to_string(expected.entries().size()) + " tensors, header lists " +
                    std::to_string(tensors.size()));
  }
  const char* src = bytes.data() + newline + 1;
  const char* end = bytes.data() + bytes.size();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto name = tensors[i].at("name").get<std::string>();
    const auto shape = tensors[i].at("shape").get<ad::Shape>();
    const auto& [exp_name, exp_tensor] = expected.entries()[i];
    if (name != exp_name || shape != exp_tensor.shape()) {
      throw DataError("checkpoint: tensor " + name + " " + ad::shape_str(shape) + " does not match expected " +
                      exp_name + " " + ad::shape_str(exp_tensor.shape()));
    }
    const std::size_t n = ad::numel(shape);
    if (static_cast<std::size_t>(end - src) < n * sizeof(float)) throw DataError("checkpoint: truncated tensor data");
    std::vector<float> values(n);
    std::memcpy(values.data(), src, n * sizeof(float));
    src += n * sizeof(float);
    ckpt.model.params.add(name, ad::Tensor<float>::from(shape, std::move(values), true));
  }
  if (src != end) throw DataError("checkpoint: trailing bytes after tensor data");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file) {
  write_text_file(file, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  try {
    return parse_checkpoint(read_text_file(file));
  } catch (const DataError& ex) {
    throw DataError(file.string() + ": " + ex.what());
  }
}

}  // namespace hapauth
