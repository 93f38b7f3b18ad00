#include "psguard/ps_engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "psguard/error.hpp"

namespace psguard {
namespace {

constexpr const char* kModule = "ps_engine";

bool inaccessible(Direction d) { return d == Direction::Backward || d == Direction::Interflow; }

}  // namespace

std::string_view to_string(PsClass c) {
  switch (c) {
    case PsClass::Low: return "Low";
    case PsClass::Medium: return "Medium";
    case PsClass::High: return "High";
  }
  return "Low";
}

PsClass parse_ps_class(std::string_view text) {
  if (text == "Low") return PsClass::Low;
  if (text == "Medium") return PsClass::Medium;
  if (text == "High") return PsClass::High;
  throw Error(ErrorKind::Data, kModule, "unknown class '" + std::string(text) + "'");
}

double ps1(const FeatureMetadata& meta) {
  return meta.is_protocol_id || meta.is_critical_identifier || meta.is_functional_integrity ? 0.0 : 1.0;
}

double ps2(std::int64_t pv, std::int64_t min_r, std::int64_t max_r) {
  if (pv < 1) throw Error(ErrorKind::Data, kModule, "cardinality must be >= 1, got " + std::to_string(pv));
  if (min_r >= max_r) throw Error(ErrorKind::Usage, kModule, "min_r must be below max_r");
  if (pv > max_r) return 1.0;
  if (pv < min_r) return 0.0;
  return 0.5 + 0.5 * static_cast<double>(pv - min_r) / static_cast<double>(max_r - min_r);
}

double ps3(int cf) {
  if (cf < 0) throw Error(ErrorKind::Data, kModule, "correlated-feature count must be >= 0");
  return 0.5 + 0.5 / std::exp2(static_cast<double>(cf));
}

double ps4(const FeatureMetadata& meta, int forward_corr_count) {
  if (forward_corr_count < 0) {
    throw Error(ErrorKind::Data, kModule, "forward correlation count must be >= 0");
  }
  if (!inaccessible(meta.direction)) return 1.0;
  if (forward_corr_count == 1) return 1.0;
  if (forward_corr_count >= 2) return 0.5;
  return 0.0;
}

double ps5(const FeatureMetadata& meta) { return meta.is_flow_wide_aggregate ? 0.5 : 1.0; }

double ps_total(double f1, double f2, double f3, double f4, double f5) {
  const double fields[] = {f1, f2, f3, f4, f5};
  double product = 1.0;
  for (double f : fields) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw Error(ErrorKind::Internal, kModule, "PS field outside [0, 1]: " + std::to_string(f));
    }
    if (f == 0.0) return 0.0;
    product *= f;
  }
  return std::pow(product, 0.2);
}

PsClass classify(double total, double tau) {
  if (std::abs(total) <= 1e-12) return PsClass::Low;
  if (total >= tau) return PsClass::High;
  return PsClass::Medium;
}

std::vector<HistogramBin> histogram(std::span<const double> totals, double bin_width) {
  if (!(bin_width > 0.0 && bin_width <= 1.0)) {
    throw Error(ErrorKind::Usage, kModule, "histogram bin width must lie in (0, 1]");
  }
  const auto nbins = static_cast<std::size_t>(std::ceil(1.0 / bin_width - 1e-9));
  std::vector<HistogramBin> bins(nbins);
  for (std::size_t k = 0; k < nbins; ++k) bins[k] = {static_cast<double>(k) * bin_width, 0};
  for (double t : totals) {
    auto k = static_cast<std::size_t>(std::max(0.0, std::floor(t / bin_width + 1e-9)));
    ++bins[std::min(k, nbins - 1)].count;
  }
  return bins;
}

ScoreReport score_all(std::span<const FeatureInput> inputs, const ThresholdConfig& config,
                      double bin_width) {
  config.validate();
  ScoreReport report;
  report.thresholds = config;
  report.bin_width = bin_width;
  std::vector<double> totals;
  for (const auto& in : inputs) {
    PsBreakdown b;
    b.feature = in.meta.name;
    b.ps1 = ps1(in.meta);
    b.ps2 = ps2(in.pv, config.min_r, config.max_r);
    b.ps3 = ps3(in.cf);
    b.ps4 = ps4(in.meta, in.forward_corr_count);
    b.ps5 = ps5(in.meta);
    b.ps_total = ps_total(b.ps1, b.ps2, b.ps3, b.ps4, b.ps5);
    b.class_label = classify(b.ps_total, config.tau);
    b.inputs = in;
    totals.push_back(b.ps_total);
    report.breakdowns.push_back(std::move(b));
  }
  report.histogram = histogram(totals, bin_width);
  return report;
}

ClassCounts ScoreReport::counts() const {
  ClassCounts c;
  for (const auto& b : breakdowns) {
    switch (b.class_label) {
      case PsClass::Low: ++c.low; break;
      case PsClass::Medium: ++c.medium; break;
      case PsClass::High: ++c.high; break;
    }
  }
  return c;
}

std::vector<PsClass> ScoreReport::classes() const {
  std::vector<PsClass> out;
  for (const auto& b : breakdowns) out.push_back(b.class_label);
  return out;
}

std::vector<FixtureEntry> load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Data, kModule, "cannot open fixture '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Data, kModule, path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorKind::Data, kModule, path.string() + ": expected an array");
  std::vector<FixtureEntry> out;
  for (const auto& obj : doc) {
    try {
      out.push_back({obj.at("name").get<std::string>(), obj.at("pv").get<std::int64_t>(),
                     obj.at("cf").get<int>(), obj.at("forward_corr_count").get<int>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Data, kModule, path.string() + ": entry " + std::to_string(out.size()) +
                                                ": " + e.what());
    }
  }
  return out;
}

std::vector<FeatureInput> fixture_inputs(const MetadataCatalog& catalog,
                                         std::span<const FixtureEntry> fixture) {
  std::map<std::string, const FixtureEntry*> by_name;
  for (const auto& f : fixture) by_name[f.name] = &f;
  std::vector<FeatureInput> out;
  for (const auto& meta : catalog.entries()) {
    auto it = by_name.find(meta.name);
    if (it == by_name.end()) {
      throw Error(ErrorKind::Data, kModule, "fixture has no row for feature '" + meta.name + "'");
    }
    const FixtureEntry& f = *it->second;
    out.push_back({meta, meta.declared_cardinality.value_or(f.pv), f.cf, f.forward_corr_count});
  }
  if (by_name.size() != catalog.size()) {
    throw Error(ErrorKind::Data, kModule, "fixture rows do not match catalog entries");
  }
  return out;
}

}  // namespace psguard
