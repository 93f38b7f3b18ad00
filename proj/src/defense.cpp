#include "psguard/defense.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "psguard/error.hpp"

namespace psguard {
namespace {

constexpr const char* kModule = "defense";

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorKind::Usage, kModule, msg); }

}  // namespace

std::string_view to_string(SelectionPolicy p) {
  return p == SelectionPolicy::GreenOnly ? "green-only" : "green-yellow";
}
std::string_view to_string(MaskScope s) { return s == MaskScope::HighOnly ? "high" : "high-medium"; }
std::string_view to_string(MaskPhase p) {
  return p == MaskPhase::TrainAndInference ? "train-inference" : "inference-only";
}

std::string to_string(const NeutralStrategy& s) {
  switch (s.kind) {
    case NeutralStrategy::Kind::TrainMean: return "mean";
    case NeutralStrategy::Kind::TrainMedian: return "median";
    case NeutralStrategy::Kind::Constant: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "const:%.17g", s.constant);
      return buf;
    }
  }
  return "mean";
}

SelectionPolicy parse_selection_policy(std::string_view text) {
  if (text == "green-only") return SelectionPolicy::GreenOnly;
  if (text == "green-yellow") return SelectionPolicy::GreenYellow;
  usage("unknown selection policy '" + std::string(text) + "'");
}

MaskScope parse_mask_scope(std::string_view text) {
  if (text == "high") return MaskScope::HighOnly;
  if (text == "high-medium") return MaskScope::HighAndMedium;
  usage("unknown mask scope '" + std::string(text) + "'");
}

MaskPhase parse_mask_phase(std::string_view text) {
  if (text == "train-inference") return MaskPhase::TrainAndInference;
  if (text == "inference-only") return MaskPhase::InferenceOnly;
  usage("unknown phase '" + std::string(text) + "'");
}

NeutralStrategy parse_neutral(std::string_view text) {
  if (text == "mean") return {NeutralStrategy::Kind::TrainMean, 0.0};
  if (text == "median") return {NeutralStrategy::Kind::TrainMedian, 0.0};
  if (text.starts_with("const:")) {
    std::string v(text.substr(6));
    char* end = nullptr;
    double c = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(c)) {
      usage("bad neutral constant '" + v + "'");
    }
    return {NeutralStrategy::Kind::Constant, c};
  }
  usage("unknown neutral strategy '" + std::string(text) + "' (expected mean, median or const:<v>)");
}

std::vector<std::size_t> MaskPlan::masked_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0) out.push_back(i);
  }
  return out;
}

SelectionPlan selection_plan(const ScoreReport& report, SelectionPolicy policy) {
  if (report.breakdowns.empty()) throw Error(ErrorKind::Data, kModule, "empty score report");
  SelectionPlan plan;
  plan.policy = policy;
  for (std::size_t i = 0; i < report.breakdowns.size(); ++i) {
    const auto& b = report.breakdowns[i];
    bool keep = b.class_label == PsClass::Low ||
                (policy == SelectionPolicy::GreenYellow && b.class_label == PsClass::Medium);
    if (keep) {
      plan.keep_indices.push_back(i);
      plan.keep_names.push_back(b.feature);
    } else {
      plan.dropped.emplace_back(b.feature, b.class_label);
    }
  }
  if (plan.keep_indices.empty()) {
    throw Error(ErrorKind::Data, kModule,
                "selection policy " + std::string(to_string(policy)) + " keeps no features");
  }
  return plan;
}

std::vector<int> mask_vector(const ScoreReport& report, MaskScope scope) {
  std::vector<int> m;
  m.reserve(report.breakdowns.size());
  for (const auto& b : report.breakdowns) {
    bool masked = b.class_label == PsClass::High ||
                  (scope == MaskScope::HighAndMedium && b.class_label == PsClass::Medium);
    m.push_back(masked ? 0 : 1);
  }
  return m;
}

std::vector<double> neutral_values(const Matrix& train_x, const NeutralStrategy& strategy) {
  if (train_x.rows() == 0) throw Error(ErrorKind::Data, kModule, "empty training matrix");
  const std::size_t d = train_x.cols();
  std::vector<double> out(d, strategy.constant);
  if (strategy.kind == NeutralStrategy::Kind::Constant) return out;
  for (std::size_t j = 0; j < d; ++j) {
    auto col = train_x.column(j);
    if (strategy.kind == NeutralStrategy::Kind::TrainMean) {
      out[j] = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
    } else {
      auto mid = col.begin() + static_cast<std::ptrdiff_t>((col.size() - 1) / 2);
      std::nth_element(col.begin(), mid, col.end());
      out[j] = *mid;
    }
  }
  return out;
}

std::vector<double> neutral_values(const Dataset& train, const NeutralStrategy& strategy) {
  return neutral_values(train.x, strategy);
}

Matrix apply_mask(std::span<const int> mask, std::span<const double> neutral, const Matrix& x) {
  if (mask.size() != x.cols() || neutral.size() != x.cols()) {
    throw Error(ErrorKind::Data, kModule,
                "mask/neutral length does not match " + std::to_string(x.cols()) + " columns");
  }
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (mask[j] == 0) out(r, j) = neutral[j];
    }
  }
  return out;
}

Matrix apply_mask(const MaskPlan& plan, const Matrix& x) { return apply_mask(plan.mask, plan.neutral, x); }

Matrix apply_selection(const SelectionPlan& plan, const Matrix& x) {
  for (auto i : plan.keep_indices) {
    if (i >= x.cols()) {
      throw Error(ErrorKind::Data, kModule,
                  "selection index " + std::to_string(i) + " out of range for " +
                      std::to_string(x.cols()) + " columns");
    }
  }
  return x.select_cols(plan.keep_indices);
}

Dataset apply_selection(const SelectionPlan& plan, const Dataset& data) {
  Dataset out;
  out.x = apply_selection(plan, data.x);
  for (auto i : plan.keep_indices) out.feature_names.push_back(data.feature_names[i]);
  out.y = data.y;
  return out;
}

MaskPlan make_mask_plan(const ScoreReport& report, const Matrix& scaled_train_x, MaskScope scope,
                        MaskPhase phase, const NeutralStrategy& strategy) {
  if (report.breakdowns.size() != scaled_train_x.cols()) {
    throw Error(ErrorKind::Data, kModule, "score report and training matrix disagree on feature count");
  }
  return {scope, phase, strategy, mask_vector(report, scope), neutral_values(scaled_train_x, strategy)};
}

}  // namespace psguard
