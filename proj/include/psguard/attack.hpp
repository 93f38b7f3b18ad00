#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psguard/dataset.hpp"
#include "psguard/models.hpp"

namespace psguard {

struct AttackConstraints {
  std::vector<std::size_t> allowed;
  std::vector<double> lower, upper;
  /// Columns whose values live on the grid origin + k * step.
  std::vector<char> integer_snap;
  std::vector<double> grid_origin, grid_step;
  double epsilon = 0.1;

  /// Throws on an empty allowed set, out-of-range indices or inverted bounds.
  void validate(std::size_t dim) const;
};

/// Box bounds from the scaled training matrix. Columns whose raw training values
/// are all integral get a snapping grid mapped through the scaler.
AttackConstraints make_constraints(const Matrix& scaled_train, const Matrix& raw_train,
                                   const ScalerParams& scaler, std::vector<std::size_t> allowed,
                                   double epsilon);

/// Moves `target` into [min(lower, x), max(upper, x)] and within `radius` of x,
/// then snaps it to the feature grid when requested. A snapped value that
/// leaves the feasible interval steps one grid point back toward x; failing
/// that, x is returned.
double project_value(double target, double x, double radius, std::size_t feature,
                     const AttackConstraints& c);

/// One-step signed-gradient attack on the cross-entropy loss for the true label.
Matrix gradient_sign_attack(const Model& model, const Matrix& x, const Labels& y,
                            const AttackConstraints& constraints);

using ScoreOracle = std::function<std::vector<double>(const Matrix&)>;

/// Black-box coordinate search: two-point finite differences pick a direction,
/// the coordinate jumps to the edge of the epsilon ball, and the move is kept
/// only if the true-label objective improves. At most `budget` oracle calls per row.
Matrix query_attack(const ScoreOracle& oracle, const Matrix& x, const Labels& y,
                    const AttackConstraints& constraints, int budget, std::uint64_t seed);

enum class MorphDirection { Increase, Decrease, Either };

struct MorphEntry {
  std::string morph;
  std::vector<std::string> features;
  MorphDirection direction = MorphDirection::Either;

  bool operator==(const MorphEntry&) const = default;
};

struct MorphMap {
  std::vector<MorphEntry> entries;

  /// Union of affected columns, sorted. Throws if a name is not a column.
  std::vector<std::size_t> feature_indices(const std::vector<std::string>& columns) const;
  bool operator==(const MorphMap&) const = default;
};

std::string_view to_string(MorphDirection d);
MorphMap parse_morph_map(std::string_view text, std::string_view source = "<morph map>");
MorphMap load_morph_map(const std::filesystem::path& path);
std::string serialize_morph_map(const MorphMap& map);

/// Shifts every feature of each selected morph by `magnitude` in its hinted
/// direction ("either" draws one sign per morph and row), then clips to the box.
Matrix morph_attack(const Matrix& x, const MorphMap& map, const std::vector<std::string>& columns,
                    double magnitude, std::uint64_t seed, const AttackConstraints& bounds,
                    const std::vector<std::string>& selected = {});

/// Fraction of all N rows that were classified correctly and then flipped.
double asr(const Labels& pred_orig, const Labels& pred_adv, const Labels& y);

enum class AttackKind { GradientSign, Query, Morph };
std::string_view to_string(AttackKind k);
AttackKind parse_attack_kind(std::string_view text);

struct AttackRun {
  AttackKind kind = AttackKind::GradientSign;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  int budget = 0;
  std::vector<std::size_t> allowed;
  Matrix x_orig, x_adv;
  Labels y;
  Labels pred_orig, pred_adv;
  double asr = 0.0;
};

/// A defended inference path: an input transform followed by a model.
struct DefendedPipeline {
  std::string name;
  const Model* model = nullptr;
  std::function<Matrix(const Matrix&)> transform;
};

struct DefenseOutcome {
  std::string name;
  Metrics metrics;  // on the clean test set
  double asr = 0.0;
  Labels pred_orig, pred_adv;
};

/// Replays x_adv through each pipeline and measures post-defense ASR.
DefenseOutcome evaluate_pipeline(const DefendedPipeline& pipeline, const Dataset& clean_test,
                                 const Matrix& x_orig, const Matrix& x_adv, const Labels& y);

}  // namespace psguard
