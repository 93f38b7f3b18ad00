#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psguard/matrix.hpp"

namespace psguard {

/// Numeric flow features with binary labels (0 = benign, 1 = malicious).
struct Dataset {
  std::vector<std::string> feature_names;
  Matrix x;
  Labels y;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t num_features() const noexcept { return feature_names.size(); }
  /// Throws unless shapes agree and every value is finite.
  void check() const;
  Dataset select_rows(std::span<const std::size_t> indices) const;

  bool operator==(const Dataset&) const = default;
};

struct DropReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::map<std::string, std::size_t> per_column_failures;
  /// Raw label string to encoded class, sorted by label string.
  std::vector<std::pair<std::string, int>> label_encoding;

  bool operator==(const DropReport&) const = default;
};

struct CsvOptions {
  std::string label_column = "label";
  /// When unset, "benign"/"normal" (any case) is used if present, else the
  /// alphabetically first of exactly two labels.
  std::optional<std::string> benign_label;
  /// Columns ignored entirely (identifiers, timestamps, attack-category text).
  std::vector<std::string> exclude;
};

struct LoadedCsv {
  Dataset data;
  DropReport report;
};

LoadedCsv read_csv(std::istream& in, const CsvOptions& options);
LoadedCsv load_csv(const std::filesystem::path& path, const CsvOptions& options);

/// Returns (train, test). Both sides keep the input row order.
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed);

enum class ScalerMethod { Standardize, MinMax };

std::string_view to_string(ScalerMethod m);
ScalerMethod parse_scaler_method(std::string_view text);

struct ScalerParams {
  ScalerMethod method = ScalerMethod::Standardize;
  std::vector<double> a;  // mean or min
  std::vector<double> b;  // population std (1 when constant) or max

  bool operator==(const ScalerParams&) const = default;
};

ScalerParams fit_scaler(const Dataset& train, ScalerMethod method);
Matrix apply_scaler(const ScalerParams& params, const Matrix& x);
Dataset apply_scaler(const ScalerParams& params, const Dataset& data);

/// Randomly drops majority-class rows until both classes have equal counts.
Dataset undersample(const Dataset& train, std::uint64_t seed);

std::size_t count_label(const Labels& y, int label);

}  // namespace psguard
