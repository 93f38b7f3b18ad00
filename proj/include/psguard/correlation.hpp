#pragma once

#include <string>
#include <vector>

#include "psguard/dataset.hpp"
#include "psguard/feature_metadata.hpp"
#include "psguard/matrix.hpp"

namespace psguard {

/// Pearson correlations between feature columns. Symmetric, unit diagonal.
struct CorrMatrix {
  std::vector<std::string> feature_names;
  Matrix r;

  bool operator==(const CorrMatrix&) const = default;
};

struct CorrelationProfile {
  std::vector<int> cf;
  std::vector<int> forward_corr_count;
};

struct CorrEdge {
  std::size_t a;
  std::size_t b;
  double abs_r;

  bool operator==(const CorrEdge&) const = default;
};

struct CorrGraph {
  std::vector<std::string> nodes;
  std::vector<CorrEdge> edges;  // a < b, row-major order

  bool operator==(const CorrGraph&) const = default;
};

/// Population moments. A constant column correlates 0 with every other column.
CorrMatrix pearson_matrix(const Dataset& data);
CorrMatrix pearson_matrix(const Matrix& x, std::vector<std::string> names);

std::vector<int> high_corr_counts(const CorrMatrix& m, double corr_threshold);
/// For each feature, the number of other Forward features with |r| >= threshold.
std::vector<int> forward_corr_profile(const CorrMatrix& m, const MetadataCatalog& catalog,
                                      double corr_threshold);
CorrelationProfile correlation_profile(const CorrMatrix& m, const MetadataCatalog& catalog,
                                       double corr_threshold);

CorrGraph export_graph(const CorrMatrix& m, double corr_threshold);
std::string to_dot(const CorrGraph& g);

}  // namespace psguard
