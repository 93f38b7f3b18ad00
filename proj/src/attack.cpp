#include "psguard/attack.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "json_text.hpp"
#include "psguard/error.hpp"

namespace psguard {
namespace {

constexpr const char* kModule = "attack_harness";

[[noreturn]] void data_error(const std::string& msg) { throw Error(ErrorKind::Data, kModule, msg); }

bool is_integral(double v) { return std::floor(v) == v; }

// Lower objective means closer to evasion: the score of the true class.
double objective(double score, int y) { return y == 1 ? score : 1.0 - score; }

void check_rows(const Matrix& x, const Labels& y, const AttackConstraints& c) {
  if (x.rows() != y.size()) data_error("attack inputs: row count does not match labels");
  c.validate(x.cols());
}

}  // namespace

void AttackConstraints::validate(std::size_t dim) const {
  if (allowed.empty()) data_error("attack allowed-feature set is empty");
  if (lower.size() != dim || upper.size() != dim || integer_snap.size() != dim ||
      grid_origin.size() != dim || grid_step.size() != dim) {
    data_error("attack constraint vectors do not match " + std::to_string(dim) + " features");
  }
  for (auto i : allowed) {
    if (i >= dim) data_error("allowed feature index " + std::to_string(i) + " out of range");
  }
  for (std::size_t j = 0; j < dim; ++j) {
    if (lower[j] > upper[j]) data_error("attack bounds inverted for feature " + std::to_string(j));
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) data_error("epsilon must be finite and >= 0");
}

AttackConstraints make_constraints(const Matrix& scaled_train, const Matrix& raw_train,
                                   const ScalerParams& scaler, std::vector<std::size_t> allowed,
                                   double epsilon) {
  const std::size_t d = scaled_train.cols();
  if (raw_train.cols() != d || scaler.a.size() != d || scaled_train.rows() == 0) {
    data_error("cannot derive attack constraints: inconsistent training inputs");
  }
  AttackConstraints c;
  std::sort(allowed.begin(), allowed.end());
  allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());
  c.allowed = std::move(allowed);
  c.epsilon = epsilon;
  c.lower.resize(d);
  c.upper.resize(d);
  c.integer_snap.assign(d, 0);
  c.grid_origin.assign(d, 0.0);
  c.grid_step.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    auto col = scaled_train.column(j);
    auto [mn, mx] = std::minmax_element(col.begin(), col.end());
    c.lower[j] = *mn;
    c.upper[j] = *mx;

    bool integral = true;
    for (std::size_t r = 0; r < raw_train.rows() && integral; ++r) integral = is_integral(raw_train(r, j));
    const double a = scaler.a[j];
    const double span = scaler.method == ScalerMethod::Standardize ? scaler.b[j] : scaler.b[j] - scaler.a[j];
    if (integral && span > 0.0) {
      c.integer_snap[j] = 1;
      c.grid_origin[j] = (0.0 - a) / span;
      c.grid_step[j] = 1.0 / span;
    }
  }
  return c;
}

double project_value(double target, double x, double radius, std::size_t j, const AttackConstraints& c) {
  const double lo = std::max(std::min(c.lower[j], x), x - radius);
  const double hi = std::min(std::max(c.upper[j], x), x + radius);
  double v = std::clamp(target, lo, hi);
  if (!c.integer_snap[j] || v == x) return v;

  const double step = c.grid_step[j];
  const double origin = c.grid_origin[j];
  double snapped = origin + std::round((v - origin) / step) * step;
  auto feasible = [&](double s) { return s >= lo - 1e-12 && s <= hi + 1e-12; };
  if (feasible(snapped)) return snapped;
  snapped += snapped > x ? -step : step;
  if (feasible(snapped)) return snapped;
  return x;
}

Matrix gradient_sign_attack(const Model& model, const Matrix& x, const Labels& y,
                            const AttackConstraints& constraints) {
  check_rows(x, y, constraints);
  Matrix out = x;
  if (constraints.epsilon == 0.0) return out;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    const auto g = model.input_gradient(row, y[r]);
    for (auto j : constraints.allowed) {
      const double s = g[j] > 0.0 ? 1.0 : (g[j] < 0.0 ? -1.0 : 0.0);
      if (s == 0.0) continue;
      out(r, j) = project_value(row[j] + constraints.epsilon * s, row[j], constraints.epsilon, j, constraints);
    }
  }
  return out;
}

Matrix query_attack(const ScoreOracle& oracle, const Matrix& x, const Labels& y,
                    const AttackConstraints& constraints, int budget, std::uint64_t seed) {
  check_rows(x, y, constraints);
  if (budget < 1) throw Error(ErrorKind::Usage, kModule, "query budget must be >= 1");
  const double eps = constraints.epsilon;
  const double h = std::max(1e-4, 0.05 * eps);
  Matrix out = x;
  Matrix probe(1, x.cols());

  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto orig = x.row(r);
    std::vector<double> cur(orig.begin(), orig.end());
    int calls = 0;
    auto query = [&](const std::vector<double>& v) {
      std::copy(v.begin(), v.end(), probe.row(0).begin());
      ++calls;
      auto s = oracle(probe);
      if (s.size() != 1) throw Error(ErrorKind::Internal, kModule, "oracle returned wrong score count");
      return s[0];
    };
    if (eps == 0.0) continue;

    std::vector<std::size_t> order = constraints.allowed;
    std::mt19937_64 rng(seed + r);
    std::shuffle(order.begin(), order.end(), rng);

    const double start_score = query(cur);
    const bool start_label = start_score >= 0.5;
    double best = objective(start_score, y[r]);
    bool flipped = false;
    bool improved_in_pass = true;
    while (!flipped && improved_in_pass && calls < budget) {
      improved_in_pass = false;
      for (auto j : order) {
        if (flipped || calls + 3 > budget) break;
        const double base = cur[j];
        auto plus = cur;
        auto minus = cur;
        plus[j] = base + h;
        minus[j] = base - h;
        const double diff = objective(query(plus), y[r]) - objective(query(minus), y[r]);
        if (diff == 0.0) continue;
        const double target = orig[j] + (diff > 0.0 ? -eps : eps);
        const double next = project_value(target, orig[j], eps, j, constraints);
        if (next == base) continue;
        auto cand = cur;
        cand[j] = next;
        const double s = query(cand);
        const double obj = objective(s, y[r]);
        if (obj < best) {
          best = obj;
          cur = std::move(cand);
          improved_in_pass = true;
          flipped = (s >= 0.5) != start_label;
        }
      }
    }
    std::copy(cur.begin(), cur.end(), out.row(r).begin());
  }
  return out;
}

std::string_view to_string(MorphDirection d) {
  switch (d) {
    case MorphDirection::Increase: return "increase";
    case MorphDirection::Decrease: return "decrease";
    case MorphDirection::Either: return "either";
  }
  return "either";
}

std::vector<std::size_t> MorphMap::feature_indices(const std::vector<std::string>& columns) const {
  std::set<std::size_t> out;
  for (const auto& e : entries) {
    for (const auto& f : e.features) {
      auto it = std::find(columns.begin(), columns.end(), f);
      if (it == columns.end()) {
        data_error("morph '" + e.morph + "' references unknown feature '" + f + "'");
      }
      out.insert(static_cast<std::size_t>(it - columns.begin()));
    }
  }
  return {out.begin(), out.end()};
}

MorphMap parse_morph_map(std::string_view text, std::string_view source) {
  const std::string where(source);
  MorphMap map;
  try {
    auto doc = nlohmann::json::parse(text);
    if (!doc.is_array()) data_error(where + ": expected a top-level array");
    for (const auto& obj : doc) {
      for (const auto& [key, _] : obj.items()) {
        if (key != "morph" && key != "features" && key != "direction") {
          data_error(where + ": unknown key \"" + key + "\"");
        }
      }
      MorphEntry e;
      e.morph = obj.at("morph").get<std::string>();
      e.features = obj.at("features").get<std::vector<std::string>>();
      const auto dir = obj.at("direction").get<std::string>();
      if (dir == "increase") e.direction = MorphDirection::Increase;
      else if (dir == "decrease") e.direction = MorphDirection::Decrease;
      else if (dir == "either") e.direction = MorphDirection::Either;
      else data_error(where + ": morph '" + e.morph + "' has unknown direction '" + dir + "'");
      if (e.features.empty()) data_error(where + ": morph '" + e.morph + "' lists no features");
      map.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    data_error(where + ": " + e.what());
  }
  if (map.entries.empty()) data_error(where + ": morph map is empty");
  return map;
}

MorphMap load_morph_map(const std::filesystem::path& path) {
  return parse_morph_map(detail::read_file(path, kModule), path.string());
}

std::string serialize_morph_map(const MorphMap& map) {
  detail::ojson doc = detail::ojson::array();
  for (const auto& e : map.entries) {
    detail::ojson obj;
    obj["morph"] = e.morph;
    obj["features"] = e.features;
    obj["direction"] = std::string(to_string(e.direction));
    doc.push_back(std::move(obj));
  }
  return detail::dump_json(doc, "%.6f");
}

Matrix morph_attack(const Matrix& x, const MorphMap& map, const std::vector<std::string>& columns,
                    double magnitude, std::uint64_t seed, const AttackConstraints& bounds,
                    const std::vector<std::string>& selected) {
  if (map.entries.empty()) data_error("morph map is empty");
  if (columns.size() != x.cols()) data_error("column names do not match the matrix");
  struct Resolved {
    std::vector<std::size_t> idx;
    MorphDirection dir;
  };
  std::vector<Resolved> morphs;
  for (const auto& e : map.entries) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), e.morph) == selected.end()) continue;
    MorphMap single{{e}};
    morphs.push_back({single.feature_indices(columns), e.direction});
  }
  for (const auto& name : selected) {
    bool found = std::any_of(map.entries.begin(), map.entries.end(),
                             [&](const MorphEntry& e) { return e.morph == name; });
    if (!found) data_error("unknown morph '" + name + "'");
  }

  Matrix out = x;
  if (magnitude == 0.0) return out;
  std::vector<double> shift(x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::mt19937_64 rng(seed + r);
    std::bernoulli_distribution coin(0.5);
    std::fill(shift.begin(), shift.end(), 0.0);
    for (const auto& m : morphs) {
      double sign = 1.0;
      if (m.dir == MorphDirection::Decrease) sign = -1.0;
      if (m.dir == MorphDirection::Either) sign = coin(rng) ? 1.0 : -1.0;
      for (auto j : m.idx) shift[j] += sign * magnitude;
    }
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (shift[j] == 0.0) continue;
      out(r, j) = project_value(x(r, j) + shift[j], x(r, j), std::abs(shift[j]), j, bounds);
    }
  }
  return out;
}

double asr(const Labels& pred_orig, const Labels& pred_adv, const Labels& y) {
  if (pred_orig.size() != y.size() || pred_adv.size() != y.size()) {
    data_error("ASR inputs have mismatched lengths");
  }
  if (y.empty()) data_error("ASR needs at least one attempt");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (pred_orig[i] == y[i] && pred_adv[i] != pred_orig[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

std::string_view to_string(AttackKind k) {
  switch (k) {
    case AttackKind::GradientSign: return "gradsign";
    case AttackKind::Query: return "query";
    case AttackKind::Morph: return "morph";
  }
  return "gradsign";
}

AttackKind parse_attack_kind(std::string_view text) {
  if (text == "gradsign") return AttackKind::GradientSign;
  if (text == "query") return AttackKind::Query;
  if (text == "morph") return AttackKind::Morph;
  throw Error(ErrorKind::Usage, kModule, "unknown attack '" + std::string(text) + "'");
}

DefenseOutcome evaluate_pipeline(const DefendedPipeline& pipeline, const Dataset& clean_test,
                                 const Matrix& x_orig, const Matrix& x_adv, const Labels& y) {
  if (!pipeline.model) throw Error(ErrorKind::Internal, kModule, "pipeline without a model");
  auto through = [&](const Matrix& m) { return pipeline.transform ? pipeline.transform(m) : m; };
  DefenseOutcome out;
  out.name = pipeline.name;
  out.metrics = compute_metrics(pipeline.model->predict(through(clean_test.x)).labels, clean_test.y);
  out.pred_orig = pipeline.model->predict(through(x_orig)).labels;
  out.pred_adv = pipeline.model->predict(through(x_adv)).labels;
  out.asr = asr(out.pred_orig, out.pred_adv, y);
  return out;
}

}  // namespace psguard
