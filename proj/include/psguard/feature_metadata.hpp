#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace psguard {

/// Which side of a connection a feature is measured on.
enum class Direction {
  Forward,        // client -> server packets
  Backward,       // server -> client packets
  Interflow,      // computed across several flows/connections
  Bidirectional,  // whole-flow aggregate over both directions
  None,           // not directional (e.g. protocol)
};

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view text);

/// Human-supplied annotation for one feature column.
struct FeatureMetadata {
  std::string name;
  bool is_protocol_id = false;
  bool is_critical_identifier = false;
  bool is_functional_integrity = false;
  Direction direction = Direction::None;
  bool is_flow_wide_aggregate = false;
  std::optional<std::int64_t> declared_cardinality;

  bool operator==(const FeatureMetadata&) const = default;
};

class MetadataCatalog {
 public:
  MetadataCatalog() = default;
  /// Throws on empty or duplicate names and on declared_cardinality < 1.
  explicit MetadataCatalog(std::vector<FeatureMetadata> entries);

  const std::vector<FeatureMetadata>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  const FeatureMetadata* find(std::string_view name) const;
  /// Like find(), but throws a Data error naming the missing feature.
  const FeatureMetadata& at(std::string_view name) const;

  bool operator==(const MetadataCatalog&) const = default;

 private:
  std::vector<FeatureMetadata> entries_;
};

/// Parses the JSON annotation format. `source` only labels error messages.
MetadataCatalog parse_catalog(std::string_view text, std::string_view source = "<catalog>");
MetadataCatalog load_catalog(const std::filesystem::path& path);
std::string serialize_catalog(const MetadataCatalog& catalog);

struct ValidationIssue {
  enum class Kind { Unannotated, NoColumn, Contradictory };
  Kind kind;
  std::string feature;
  std::string message;
};

std::vector<ValidationIssue> validate_catalog(const MetadataCatalog& catalog,
                                              std::span<const std::string> feature_names);

/// Reasons an entry's flags cannot all hold at once; empty when consistent.
std::vector<std::string> contradictions(const FeatureMetadata& meta);

/// PV: the declared cardinality when present, else the number of distinct
/// values in `column`.
std::int64_t effective_cardinality(std::span<const double> column,
                                   std::optional<std::int64_t> declared);

struct ThresholdConfig {
  std::int64_t min_r = 2;
  std::int64_t max_r = 255;
  double tau = 0.87;
  double corr_threshold = 0.80;

  /// Throws a Usage error when a bound is out of range.
  void validate() const;

  bool operator==(const ThresholdConfig&) const = default;
};

}  // namespace psguard
