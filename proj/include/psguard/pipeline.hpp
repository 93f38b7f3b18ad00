#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psguard/attack.hpp"
#include "psguard/correlation.hpp"
#include "psguard/dataset.hpp"
#include "psguard/defense.hpp"
#include "psguard/feature_metadata.hpp"
#include "psguard/models.hpp"
#include "psguard/ps_engine.hpp"
#include "psguard/report.hpp"

namespace psguard {

/// Which columns an attack may touch.
enum class AllowedRule { High, HighAndMedium, All, Morph };

std::string_view to_string(AllowedRule r);
AllowedRule parse_allowed_rule(std::string_view text);

struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path catalog;
  std::filesystem::path fixture;
  std::filesystem::path morph_map;
  std::filesystem::path out_dir = "psguard-out";

  std::string label_column = "label";
  std::optional<std::string> benign_label;
  std::vector<std::string> exclude;

  ThresholdConfig thresholds;
  ScalerMethod scaler = ScalerMethod::Standardize;
  double test_fraction = 0.2;
  bool undersample = true;
  std::uint64_t seed_split = 1;
  std::uint64_t seed_undersample = 2;
  std::uint64_t seed_train = 3;
  std::uint64_t seed_attack = 4;

  std::vector<ModelKind> models = {ModelKind::LogReg, ModelKind::Mlp};
  TrainConfig train;

  /// Tokens: a-green, a-green-yellow, b-high, b-high-medium.
  std::vector<std::string> defenses;
  std::optional<MaskPhase> phase;
  NeutralStrategy neutral;

  AttackKind attack = AttackKind::GradientSign;
  double epsilon = 2.0;  // L-inf radius, or shift magnitude for morphs
  int budget = 200;
  AllowedRule allowed = AllowedRule::High;
  std::vector<std::string> morphs;  // empty means every morph in the map
};

/// Ingested, split, balanced, scaled and scored data shared by the commands.
struct PreparedData {
  DropReport drop;
  MetadataCatalog catalog;
  Dataset train_raw, test_raw;
  Dataset train, test;  // scaled
  ScalerParams scaler;
  CorrMatrix corr;
  ScoreReport score;
  std::vector<std::string> warnings;
};

PreparedData prepare(const RunConfig& config);

/// PV from the raw training split (declared cardinality wins), CF and forward
/// counts from correlations on the scaled training split.
std::vector<FeatureInput> feature_inputs(const MetadataCatalog& catalog, const Dataset& train_raw,
                                         const CorrMatrix& corr, double corr_threshold);

struct CommandOutput {
  std::vector<std::filesystem::path> files;
  std::string text;  // table printed to stdout
  std::vector<std::string> warnings;
};

CommandOutput cmd_score(const RunConfig& config);
CommandOutput cmd_defend(const RunConfig& config);
CommandOutput cmd_experiment(const RunConfig& config);
CommandOutput cmd_synth(std::size_t n_rows, std::uint64_t seed, const std::filesystem::path& out_dir);

ExperimentReport run_experiment(const RunConfig& config, const PreparedData& data);

/// Runs the configured attack on the rows of `x` against `model`.
Matrix run_attack(const RunConfig& config, const Model& model, const Matrix& x, const Labels& y,
                  const AttackConstraints& constraints, const std::vector<std::string>& columns,
                  const MorphMap* morph_map);

}  // namespace psguard
