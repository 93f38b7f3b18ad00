#include "psguard/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "psguard/error.hpp"

namespace psguard {
namespace {

constexpr const char* kModule = "correlation";

void check_threshold(double t) {
  if (!(t > 0.0 && t < 1.0)) throw Error(ErrorKind::Usage, kModule, "corr_threshold must lie in (0, 1)");
}

bool is_constant(const Matrix& x, std::size_t c) {
  for (std::size_t r = 1; r < x.rows(); ++r) {
    if (x(r, c) != x(0, c)) return false;
  }
  return true;
}

std::string dot_id(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

CorrMatrix pearson_matrix(const Matrix& x, std::vector<std::string> names) {
  if (x.rows() < 2) throw Error(ErrorKind::Data, kModule, "need at least 2 rows for correlation");
  if (names.size() != x.cols()) throw Error(ErrorKind::Internal, kModule, "name/column count mismatch");
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();

  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(r, j);
  }
  for (auto& m : mean) m /= static_cast<double>(n);

  Matrix centered(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) centered(r, j) = x(r, j) - mean[j];
  }
  std::vector<char> constant(d);
  std::vector<double> sd(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    constant[j] = is_constant(x, j);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += centered(r, j) * centered(r, j);
    sd[j] = std::sqrt(ss / static_cast<double>(n));
    if (sd[j] == 0.0) constant[j] = 1;
  }

  CorrMatrix out{std::move(names), Matrix(d, d, 0.0)};
  for (std::size_t i = 0; i < d; ++i) {
    out.r(i, i) = 1.0;
    if (constant[i]) continue;
    for (std::size_t j = i + 1; j < d; ++j) {
      if (constant[j]) continue;
      double cov = 0.0;
      for (std::size_t r = 0; r < n; ++r) cov += centered(r, i) * centered(r, j);
      cov /= static_cast<double>(n);
      double v = std::clamp(cov / (sd[i] * sd[j]), -1.0, 1.0);
      out.r(i, j) = v;
      out.r(j, i) = v;
    }
  }
  return out;
}

CorrMatrix pearson_matrix(const Dataset& data) { return pearson_matrix(data.x, data.feature_names); }

std::vector<int> high_corr_counts(const CorrMatrix& m, double corr_threshold) {
  check_threshold(corr_threshold);
  const std::size_t d = m.r.rows();
  std::vector<int> cf(d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i != j && std::abs(m.r(i, j)) >= corr_threshold) ++cf[i];
    }
  }
  return cf;
}

std::vector<int> forward_corr_profile(const CorrMatrix& m, const MetadataCatalog& catalog,
                                      double corr_threshold) {
  check_threshold(corr_threshold);
  const std::size_t d = m.r.rows();
  std::vector<char> forward(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto* meta = catalog.find(m.feature_names[j]);
    if (!meta) {
      throw Error(ErrorKind::Data, kModule,
                  "catalog has no entry for column '" + m.feature_names[j] + "'");
    }
    forward[j] = meta->direction == Direction::Forward;
  }
  std::vector<int> out(d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i != j && forward[j] && std::abs(m.r(i, j)) >= corr_threshold) ++out[i];
    }
  }
  return out;
}

CorrelationProfile correlation_profile(const CorrMatrix& m, const MetadataCatalog& catalog,
                                       double corr_threshold) {
  return {high_corr_counts(m, corr_threshold), forward_corr_profile(m, catalog, corr_threshold)};
}

CorrGraph export_graph(const CorrMatrix& m, double corr_threshold) {
  check_threshold(corr_threshold);
  CorrGraph g{m.feature_names, {}};
  const std::size_t d = m.r.rows();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      double a = std::abs(m.r(i, j));
      if (a >= corr_threshold) g.edges.push_back({i, j, a});
    }
  }
  return g;
}

std::string to_dot(const CorrGraph& g) {
  std::string out = "graph correlation {\n";
  for (const auto& n : g.nodes) out += "  " + dot_id(n) + ";\n";
  char buf[32];
  for (const auto& e : g.edges) {
    std::snprintf(buf, sizeof buf, "%.4f", e.abs_r);
    out += "  " + dot_id(g.nodes[e.a]) + " -- " + dot_id(g.nodes[e.b]) + " [weight=\"" + buf + "\"];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace psguard
