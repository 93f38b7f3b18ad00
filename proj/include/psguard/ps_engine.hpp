#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psguard/feature_metadata.hpp"

namespace psguard {

enum class PsClass { Low, Medium, High };

std::string_view to_string(PsClass c);
PsClass parse_ps_class(std::string_view text);

/// Everything score_all needs for one feature.
struct FeatureInput {
  FeatureMetadata meta;
  std::int64_t pv = 1;
  int cf = 0;
  int forward_corr_count = 0;

  bool operator==(const FeatureInput&) const = default;
};

struct PsBreakdown {
  std::string feature;
  double ps1 = 0, ps2 = 0, ps3 = 0, ps4 = 0, ps5 = 0;
  double ps_total = 0;
  PsClass class_label = PsClass::Low;
  FeatureInput inputs;

  std::array<double, 5> fields() const { return {ps1, ps2, ps3, ps4, ps5}; }
  bool operator==(const PsBreakdown&) const = default;
};

struct HistogramBin {
  double lower;
  std::size_t count;

  bool operator==(const HistogramBin&) const = default;
};

struct ClassCounts {
  std::size_t low = 0, medium = 0, high = 0;
  std::size_t total() const { return low + medium + high; }
};

struct ScoreReport {
  std::vector<PsBreakdown> breakdowns;
  ThresholdConfig thresholds;
  double bin_width = 0.05;
  std::vector<HistogramBin> histogram;

  ClassCounts counts() const;
  std::vector<PsClass> classes() const;
  bool operator==(const ScoreReport&) const = default;
};

double ps1(const FeatureMetadata& meta);
double ps2(std::int64_t pv, std::int64_t min_r, std::int64_t max_r);
double ps3(int cf);
double ps4(const FeatureMetadata& meta, int forward_corr_count);
double ps5(const FeatureMetadata& meta);
/// Geometric mean; exactly 0 when any field is 0.
double ps_total(double f1, double f2, double f3, double f4, double f5);
PsClass classify(double total, double tau);

std::vector<HistogramBin> histogram(std::span<const double> totals, double bin_width);

ScoreReport score_all(std::span<const FeatureInput> inputs, const ThresholdConfig& config,
                      double bin_width = 0.05);

/// Pinned per-feature {pv, cf, forward_corr_count} used in place of data.
struct FixtureEntry {
  std::string name;
  std::int64_t pv = 1;
  int cf = 0;
  int forward_corr_count = 0;
};

std::vector<FixtureEntry> load_fixture(const std::filesystem::path& path);
/// Joins fixture rows onto catalog entries by name, in catalog order. A
/// declared cardinality takes precedence over the fixture's pv.
std::vector<FeatureInput> fixture_inputs(const MetadataCatalog& catalog,
                                         std::span<const FixtureEntry> fixture);

}  // namespace psguard
