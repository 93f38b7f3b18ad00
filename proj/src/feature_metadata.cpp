#include "psguard/feature_metadata.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "psguard/error.hpp"

namespace psguard {
namespace {

constexpr const char* kModule = "feature_metadata";

const std::set<std::string> kAllowedKeys = {
    "name",      "is_protocol_id",         "is_critical_identifier", "is_functional_integrity",
    "direction", "is_flow_wide_aggregate", "declared_cardinality"};

// Line numbers (1-based) at which each top-level array element object starts.
std::vector<std::size_t> element_lines(std::string_view text) {
  std::vector<std::size_t> lines;
  std::size_t line = 1;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (char c : text) {
    if (c == '\n') ++line;
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    switch (c) {
      case '"': in_string = true; break;
      case '[':
      case '{':
        if (depth == 1) lines.push_back(line);
        ++depth;
        break;
      case ']':
      case '}': --depth; break;
      default: break;
    }
  }
  return lines;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

}  // namespace

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Forward: return "forward";
    case Direction::Backward: return "backward";
    case Direction::Interflow: return "interflow";
    case Direction::Bidirectional: return "bidirectional";
    case Direction::None: return "none";
  }
  return "none";
}

Direction parse_direction(std::string_view text) {
  if (text == "forward") return Direction::Forward;
  if (text == "backward") return Direction::Backward;
  if (text == "interflow") return Direction::Interflow;
  if (text == "bidirectional") return Direction::Bidirectional;
  if (text == "none") return Direction::None;
  throw Error(ErrorKind::Data, kModule, "unknown direction '" + std::string(text) + "'");
}

MetadataCatalog::MetadataCatalog(std::vector<FeatureMetadata> entries) : entries_(std::move(entries)) {
  std::unordered_set<std::string> seen;
  for (const auto& e : entries_) {
    if (e.name.empty()) throw Error(ErrorKind::Data, kModule, "entry with empty name");
    if (!seen.insert(e.name).second) {
      throw Error(ErrorKind::Data, kModule, "duplicate feature name '" + e.name + "'");
    }
    if (e.declared_cardinality && *e.declared_cardinality < 1) {
      throw Error(ErrorKind::Data, kModule,
                  "feature '" + e.name + "': declared_cardinality must be >= 1");
    }
  }
}

const FeatureMetadata* MetadataCatalog::find(std::string_view name) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const FeatureMetadata& e) { return e.name == name; });
  return it == entries_.end() ? nullptr : &*it;
}

const FeatureMetadata& MetadataCatalog::at(std::string_view name) const {
  if (const auto* e = find(name)) return *e;
  throw Error(ErrorKind::Data, kModule, "feature '" + std::string(name) + "' is not annotated");
}

MetadataCatalog parse_catalog(std::string_view text, std::string_view source) {
  using nlohmann::json;
  const std::string where(source);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Data, kModule,
                where + ":" + std::to_string(line_of_offset(text, e.byte)) + ": parse error: " + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorKind::Data, kModule, where + ":1: top-level value must be an array");
  }

  const auto lines = element_lines(text);
  std::vector<FeatureMetadata> entries;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& obj = doc[i];
    const std::string at =
        where + ":" + std::to_string(i < lines.size() ? lines[i] : 1) + ": entry " + std::to_string(i);
    auto fail = [&](const std::string& msg) -> void {
      throw Error(ErrorKind::Data, kModule, at + ": " + msg);
    };
    if (!obj.is_object()) fail("expected an object");
    for (const auto& [key, value] : obj.items()) {
      if (!kAllowedKeys.contains(key)) fail("unknown key \"" + key + "\"");
    }
    auto require = [&](const char* key) -> const json& {
      if (!obj.contains(key)) fail(std::string("missing required key \"") + key + "\"");
      return obj.at(key);
    };
    auto boolean = [&](const char* key) {
      const json& v = require(key);
      if (!v.is_boolean()) fail(std::string("\"") + key + "\" must be a boolean");
      return v.get<bool>();
    };

    FeatureMetadata meta;
    const json& name = require("name");
    if (!name.is_string() || name.get<std::string>().empty()) fail("\"name\" must be a nonempty string");
    meta.name = name.get<std::string>();
    if (!seen.insert(meta.name).second) fail("duplicate feature name '" + meta.name + "'");
    meta.is_protocol_id = boolean("is_protocol_id");
    meta.is_critical_identifier = boolean("is_critical_identifier");
    meta.is_functional_integrity = boolean("is_functional_integrity");
    const json& dir = require("direction");
    if (!dir.is_string()) fail("\"direction\" must be a string");
    try {
      meta.direction = parse_direction(dir.get<std::string>());
    } catch (const Error&) {
      fail("\"direction\" has unknown value '" + dir.get<std::string>() + "'");
    }
    meta.is_flow_wide_aggregate = boolean("is_flow_wide_aggregate");
    if (obj.contains("declared_cardinality") && !obj.at("declared_cardinality").is_null()) {
      const json& card = obj.at("declared_cardinality");
      if (!card.is_number_integer() || card.get<std::int64_t>() < 1) {
        fail("\"declared_cardinality\" must be a positive integer");
      }
      meta.declared_cardinality = card.get<std::int64_t>();
    }
    entries.push_back(std::move(meta));
  }
  return MetadataCatalog(std::move(entries));
}

MetadataCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Data, kModule, "cannot open catalog '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_catalog(buf.str(), path.string());
}

std::string serialize_catalog(const MetadataCatalog& catalog) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& e : catalog.entries()) {
    nlohmann::ordered_json obj;
    obj["name"] = e.name;
    obj["is_protocol_id"] = e.is_protocol_id;
    obj["is_critical_identifier"] = e.is_critical_identifier;
    obj["is_functional_integrity"] = e.is_functional_integrity;
    obj["direction"] = std::string(to_string(e.direction));
    obj["is_flow_wide_aggregate"] = e.is_flow_wide_aggregate;
    if (e.declared_cardinality) obj["declared_cardinality"] = *e.declared_cardinality;
    doc.push_back(std::move(obj));
  }
  return doc.dump(2) + "\n";
}

std::vector<std::string> contradictions(const FeatureMetadata& meta) {
  std::vector<std::string> out;
  const bool inaccessible_side =
      meta.direction == Direction::Backward || meta.direction == Direction::Interflow;
  if (meta.is_critical_identifier && inaccessible_side) {
    out.push_back("critical identifier annotated as a " + std::string(to_string(meta.direction)) +
                  " feature");
  }
  if (meta.is_protocol_id && meta.is_flow_wide_aggregate) {
    out.push_back("protocol identifier annotated as a flow-wide aggregate");
  }
  if (meta.declared_cardinality == 1 && meta.is_flow_wide_aggregate) {
    out.push_back("flow-wide aggregate declared with a single possible value");
  }
  return out;
}

std::vector<ValidationIssue> validate_catalog(const MetadataCatalog& catalog,
                                              std::span<const std::string> feature_names) {
  std::vector<ValidationIssue> issues;
  std::unordered_set<std::string> columns(feature_names.begin(), feature_names.end());
  for (const auto& name : feature_names) {
    if (!catalog.find(name)) {
      issues.push_back({ValidationIssue::Kind::Unannotated, name, "column '" + name + "' is unannotated"});
    }
  }
  for (const auto& e : catalog.entries()) {
    if (!columns.contains(e.name)) {
      issues.push_back({ValidationIssue::Kind::NoColumn, e.name,
                        "catalog entry '" + e.name + "' has no dataset column"});
    }
    for (auto& why : contradictions(e)) {
      issues.push_back({ValidationIssue::Kind::Contradictory, e.name, e.name + ": " + why});
    }
  }
  return issues;
}

std::int64_t effective_cardinality(std::span<const double> column,
                                   std::optional<std::int64_t> declared) {
  if (column.empty()) throw Error(ErrorKind::Data, kModule, "effective_cardinality: empty column");
  if (declared) return *declared;
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::int64_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

void ThresholdConfig::validate() const {
  if (min_r < 1 || min_r >= max_r) {
    throw Error(ErrorKind::Usage, "ps_engine", "thresholds require 1 <= min_r < max_r");
  }
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorKind::Usage, "ps_engine", "tau must lie in (0, 1]");
  if (!(corr_threshold > 0.0 && corr_threshold < 1.0)) {
    throw Error(ErrorKind::Usage, "ps_engine", "corr_threshold must lie in (0, 1)");
  }
}

}  // namespace psguard
