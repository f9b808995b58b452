#include "hapauth/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hapauth/error.hpp"
#include "json.hpp"

namespace hapauth {

namespace {

constexpr std::string_view kHeader = "timestamp,fx,fy,fz";

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

template <typename T>
T parse_number(std::string_view field, std::size_t row) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("row " + std::to_string(row) + ": not a number: '" + std::string(field) + "'",
                     row);
  }
  if (!std::isfinite(value)) {
    throw ParseError("row " + std::to_string(row) + ": non-finite value '" + std::string(field) + "'",
                     row);
  }
  return value;
}

template <typename T>
void append_number(std::string& out, T value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

std::string_view to_string(Variant v) { return v == Variant::raw ? "raw" : "filtered"; }

Variant parse_variant(std::string_view s) {
  if (s == "raw") return Variant::raw;
  if (s == "filtered") return Variant::filtered;
  throw SchemaError("unknown variant '" + std::string(s) + "' (expected raw|filtered)");
}

std::string to_string(const TraceKey& key) {
  return key.user_id + "/" + key.task_id + "/" + std::to_string(key.trial_index) + "/" +
         std::string(to_string(key.variant));
}

Matrix ForceTrace::forces() const {
  Matrix m(samples.size(), 3);
  for (std::size_t t = 0; t < samples.size(); ++t) {
    m(t, 0) = samples[t].fx;
    m(t, 1) = samples[t].fy;
    m(t, 2) = samples[t].fz;
  }
  return m;
}

void ForceTrace::validate() const {
  if (samples.empty()) throw EmptyTraceError("trace " + to_string(key) + " has no samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.timestamp) || !std::isfinite(s.fx) || !std::isfinite(s.fy) ||
        !std::isfinite(s.fz)) {
      throw ParseError("trace " + to_string(key) + ": non-finite sample at row " +
                           std::to_string(i + 1),
                       i + 1);
    }
    if (s.timestamp < 0.0) {
      throw OrderingError("trace " + to_string(key) + ": negative timestamp at row " +
                          std::to_string(i + 1));
    }
    if (i > 0 && !(s.timestamp > samples[i - 1].timestamp)) {
      throw OrderingError("trace " + to_string(key) + ": timestamps not increasing at row " +
                          std::to_string(i + 1));
    }
  }
}

ForceTrace parse_trace_csv(std::string_view text, const TraceKey& key, double sample_rate) {
  ForceTrace trace;
  trace.key = key;
  trace.sample_rate = sample_rate;

  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    line = trim_cr(text.substr(pos, end - pos));
    pos = end + 1;
    return true;
  };

  std::string_view line;
  if (!next_line(line) || line != kHeader) {
    throw SchemaError("missing or incorrect header (expected '" + std::string(kHeader) + "')");
  }

  std::size_t row = 0;
  while (next_line(line)) {
    if (line.empty()) continue;
    ++row;
    std::string_view fields[4];
    std::size_t n = 0;
    std::string_view rest = line;
    for (; n < 4; ++n) {
      std::size_t comma = rest.find(',');
      fields[n] = rest.substr(0, comma);
      if (comma == std::string_view::npos) {
        rest = {};
        ++n;
        break;
      }
      rest.remove_prefix(comma + 1);
    }
    if (n != 4 || !rest.empty()) {
      throw ParseError("row " + std::to_string(row) + ": expected 4 fields", row);
    }
    ForceSample s;
    s.timestamp = parse_number<double>(fields[0], row);
    s.fx = parse_number<float>(fields[1], row);
    s.fy = parse_number<float>(fields[2], row);
    s.fz = parse_number<float>(fields[3], row);
    if (!trace.samples.empty() && !(s.timestamp > trace.samples.back().timestamp)) {
      throw OrderingError("row " + std::to_string(row) + ": timestamp not increasing");
    }
    if (s.timestamp < 0.0) {
      throw OrderingError("row " + std::to_string(row) + ": negative timestamp");
    }
    trace.samples.push_back(s);
  }
  if (trace.samples.empty()) throw EmptyTraceError("trace has no data rows");
  return trace;
}

std::string write_trace_csv(const ForceTrace& trace) {
  trace.validate();
  std::string out;
  out.reserve(32 + trace.samples.size() * 48);
  out.append(kHeader);
  out.push_back('\n');
  for (const auto& s : trace.samples) {
    append_number(out, s.timestamp);
    out.push_back(',');
    append_number(out, s.fx);
    out.push_back(',');
    append_number(out, s.fy);
    out.push_back(',');
    append_number(out, s.fz);
    out.push_back('\n');
  }
  return out;
}

// ---- manifest ----

DatasetManifest DatasetManifest::from_json_text(std::string_view text) {
  DatasetManifest m;
  try {
    auto j = nlohmann::json::parse(text);
    m.sample_rate = j.at("sample_rate").get<double>();
    for (const auto& e : j.at("entries")) {
      ManifestEntry entry;
      entry.path = e.at("path").get<std::string>();
      entry.key.user_id = e.at("user").get<std::string>();
      entry.key.task_id = e.at("task").get<std::string>();
      entry.key.trial_index = e.at("trial").get<int>();
      entry.key.variant = parse_variant(e.at("variant").get<std::string>());
      m.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw SchemaError(std::string("invalid manifest: ") + ex.what());
  }
  m.validate();
  return m;
}

std::string DatasetManifest::to_json_text() const {
  nlohmann::ordered_json j;
  j["sample_rate"] = sample_rate;
  auto entries_json = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json ej;
    ej["path"] = e.path.generic_string();
    ej["user"] = e.key.user_id;
    ej["task"] = e.key.task_id;
    ej["trial"] = e.key.trial_index;
    ej["variant"] = std::string(to_string(e.key.variant));
    entries_json.push_back(std::move(ej));
  }
  j["entries"] = std::move(entries_json);
  return j.dump(1) + "\n";
}

void DatasetManifest::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw SchemaError("manifest sample_rate must be positive");
  }
  std::set<TraceKey> seen;
  for (const auto& e : entries) {
    if (e.key.trial_index < 0) throw SchemaError("negative trial index in " + to_string(e.key));
    if (!seen.insert(e.key).second) throw SchemaError("duplicate manifest entry " + to_string(e.key));
  }
}

std::string read_text_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw DataError("error reading " + file.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& file, std::string_view text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + file.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("error writing " + file.string());
}

DatasetManifest read_manifest(const std::filesystem::path& file) {
  try {
    return DatasetManifest::from_json_text(read_text_file(file));
  } catch (const SchemaError& ex) {
    throw SchemaError(file.string() + ": " + ex.what());
  }
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& file) {
  write_text_file(file, manifest.to_json_text());
}

// ---- collection ----

TraceCollection::TraceCollection(std::vector<ForceTrace> traces) : traces_(std::move(traces)) {
  for (std::size_t i = 0; i < traces_.size(); ++i) {
    if (!index_.emplace(traces_[i].key, i).second) {
      throw DataError("duplicate trace " + to_string(traces_[i].key));
    }
  }
}

std::vector<std::string> TraceCollection::users() const {
  std::set<std::string> s;
  for (const auto& t : traces_) s.insert(t.key.user_id);
  return {s.begin(), s.end()};
}

std::vector<std::string> TraceCollection::tasks() const {
  std::set<std::string> s;
  for (const auto& t : traces_) s.insert(t.key.task_id);
  return {s.begin(), s.end()};
}

std::map<GroupKey, std::vector<std::size_t>> TraceCollection::groups(Variant variant) const {
  std::map<GroupKey, std::vector<std::size_t>> out;
  // index_ is ordered by (user, task, trial, variant), so each group comes out in trial order
  for (const auto& [key, i] : index_) {
    if (key.variant != variant) continue;
    out[{key.user_id, key.task_id}].push_back(i);
  }
  return out;
}

std::optional<std::size_t> TraceCollection::find(const TraceKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TraceCollection load_dataset(const DatasetManifest& manifest,
                             const std::filesystem::path& base_dir) {
  manifest.validate();
  std::vector<ForceTrace> traces;
  traces.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    auto path = e.path.is_absolute() || base_dir.empty() ? e.path : base_dir / e.path;
    try {
      traces.push_back(parse_trace_csv(read_text_file(path), e.key, manifest.sample_rate));
    } catch (const DataError& ex) {
      throw DataError(path.string() + ": " + ex.what());
    }
  }
  return TraceCollection(std::move(traces));
}

}  // namespace hapauth
