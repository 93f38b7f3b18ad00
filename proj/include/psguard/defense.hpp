#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psguard/dataset.hpp"
#include "psguard/ps_engine.hpp"

namespace psguard {

enum class SelectionPolicy { GreenOnly, GreenYellow };

/// Option A: keep only features an attacker cannot easily move.
struct SelectionPlan {
  SelectionPolicy policy = SelectionPolicy::GreenOnly;
  std::vector<std::size_t> keep_indices;
  std::vector<std::string> keep_names;
  std::vector<std::pair<std::string, PsClass>> dropped;

  bool operator==(const SelectionPlan&) const = default;
};

enum class MaskScope { HighOnly, HighAndMedium };
enum class MaskPhase { TrainAndInference, InferenceOnly };

struct NeutralStrategy {
  enum class Kind { TrainMean, TrainMedian, Constant };
  Kind kind = Kind::TrainMean;
  double constant = 0.0;

  bool operator==(const NeutralStrategy&) const = default;
};

/// Option B: masked columns (mask[i] == 0) are overwritten with neutral[i].
struct MaskPlan {
  MaskScope scope = MaskScope::HighOnly;
  MaskPhase phase = MaskPhase::TrainAndInference;
  NeutralStrategy strategy;
  std::vector<int> mask;
  std::vector<double> neutral;

  std::vector<std::size_t> masked_indices() const;
  bool operator==(const MaskPlan&) const = default;
};

std::string_view to_string(SelectionPolicy p);
std::string_view to_string(MaskScope s);
std::string_view to_string(MaskPhase p);
std::string to_string(const NeutralStrategy& s);
SelectionPolicy parse_selection_policy(std::string_view text);
MaskScope parse_mask_scope(std::string_view text);
MaskPhase parse_mask_phase(std::string_view text);
/// Accepts "mean", "median" or "const:<value>".
NeutralStrategy parse_neutral(std::string_view text);

SelectionPlan selection_plan(const ScoreReport& report, SelectionPolicy policy);
std::vector<int> mask_vector(const ScoreReport& report, MaskScope scope);
/// Median uses the lower-middle element for even counts.
std::vector<double> neutral_values(const Matrix& train_x, const NeutralStrategy& strategy);
std::vector<double> neutral_values(const Dataset& train, const NeutralStrategy& strategy);

Matrix apply_mask(std::span<const int> mask, std::span<const double> neutral, const Matrix& x);
Matrix apply_mask(const MaskPlan& plan, const Matrix& x);

Matrix apply_selection(const SelectionPlan& plan, const Matrix& x);
Dataset apply_selection(const SelectionPlan& plan, const Dataset& data);

MaskPlan make_mask_plan(const ScoreReport& report, const Matrix& scaled_train_x, MaskScope scope,
                        MaskPhase phase, const NeutralStrategy& strategy);

}  // namespace psguard
