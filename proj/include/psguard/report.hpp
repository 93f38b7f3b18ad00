#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "psguard/correlation.hpp"
#include "psguard/dataset.hpp"
#include "psguard/defense.hpp"
#include "psguard/models.hpp"
#include "psguard/ps_engine.hpp"

namespace psguard {

inline constexpr std::string_view kSchemaVersion = "1.0.0";
inline constexpr std::string_view kProducedBy = "psguard 0.1.0";

/// One row of the baseline / defense table.
struct DefenseCell {
  std::string defense;      // "baseline", "option_a", "option_b1", "option_b2"
  std::string description;  // e.g. "green-only", "high/mean"
  bool ok = true;
  std::string error;
  Metrics metrics;
  double asr_pre = 0.0;
  double asr_post = 0.0;

  bool operator==(const DefenseCell&) const = default;
};

struct ModelExperiment {
  std::string model;
  std::vector<DefenseCell> cells;  // baseline first

  bool operator==(const ModelExperiment&) const = default;
};

struct AttackSummary {
  std::string kind;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  int budget = 0;
  std::vector<std::string> allowed;
  std::size_t rows_attacked = 0;

  bool operator==(const AttackSummary&) const = default;
};

struct ExperimentReport {
  std::string dataset;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::map<std::string, std::uint64_t> seeds;
  std::string scaler;
  std::size_t low = 0, medium = 0, high = 0;
  AttackSummary attack;
  std::vector<ModelExperiment> models;

  bool operator==(const ExperimentReport&) const = default;
};

using Payload =
    std::variant<ScoreReport, CorrGraph, SelectionPlan, MaskPlan, ExperimentReport, DropReport>;

enum class Format { Json, Csv, Dot };

std::string_view to_string(Format f);
std::string_view payload_kind(const Payload& payload);

/// Serialized file contents. Throws a Usage error naming the pair when the
/// payload has no representation in `format`.
std::string render(const Payload& payload, Format format);
/// render() followed by an atomic write.
void emit(const Payload& payload, Format format, const std::filesystem::path& path);

/// Parses an enveloped JSON document back into its payload. Rejects unknown
/// major schema versions and unknown kinds.
Payload parse_payload(std::string_view text);
Payload read_payload(const std::filesystem::path& path);

/// Aligned plain-text tables for terminals.
std::string format_class_table(const ScoreReport& report, std::string_view dataset_name);
std::string format_experiment_table(const ExperimentReport& report);

}  // namespace psguard
