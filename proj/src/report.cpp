#include "psguard/report.hpp"

#include <cstdio>

#include "json_text.hpp"
#include "psguard/error.hpp"

namespace psguard {
namespace {

using detail::ojson;
using nlohmann::json;

constexpr const char* kModule = "report";
constexpr const char* kFloat = "%.6f";

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void data_error(const std::string& msg) { throw Error(ErrorKind::Data, kModule, msg); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// ---- payload -> json -------------------------------------------------------

ojson thresholds_json(const ThresholdConfig& t) {
  return {{"min_r", t.min_r}, {"max_r", t.max_r}, {"tau", t.tau}, {"corr_threshold", t.corr_threshold}};
}

ojson metrics_json(const Metrics& m) {
  return {{"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"confusion",
           {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn}, {"fn", m.confusion.fn}}}};
}

ojson to_json(const ScoreReport& r) {
  ojson features = ojson::array();
  for (const auto& b : r.breakdowns) {
    const auto& meta = b.inputs.meta;
    ojson flags = {{"is_protocol_id", meta.is_protocol_id},
                   {"is_critical_identifier", meta.is_critical_identifier},
                   {"is_functional_integrity", meta.is_functional_integrity},
                   {"direction", std::string(to_string(meta.direction))},
                   {"is_flow_wide_aggregate", meta.is_flow_wide_aggregate}};
    if (meta.declared_cardinality) flags["declared_cardinality"] = *meta.declared_cardinality;
    features.push_back({{"name", b.feature},
                        {"ps1", b.ps1},
                        {"ps2", b.ps2},
                        {"ps3", b.ps3},
                        {"ps4", b.ps4},
                        {"ps5", b.ps5},
                        {"ps_total", b.ps_total},
                        {"class", std::string(to_string(b.class_label))},
                        {"inputs",
                         {{"pv", b.inputs.pv},
                          {"cf", b.inputs.cf},
                          {"forward_corr_count", b.inputs.forward_corr_count},
                          {"flags", flags}}}});
  }
  ojson bins = ojson::array();
  for (const auto& h : r.histogram) bins.push_back({{"lower", h.lower}, {"count", h.count}});
  const auto c = r.counts();
  return {{"features", features},
          {"thresholds", thresholds_json(r.thresholds)},
          {"histogram", {{"bin_width", r.bin_width}, {"bins", bins}}},
          {"counts", {{"low", c.low}, {"medium", c.medium}, {"high", c.high}, {"total", c.total()}}}};
}

ojson to_json(const CorrGraph& g) {
  ojson edges = ojson::array();
  for (const auto& e : g.edges) edges.push_back({{"a", g.nodes[e.a]}, {"b", g.nodes[e.b]}, {"abs_r", e.abs_r}});
  return {{"nodes", g.nodes}, {"edges", edges}};
}

ojson to_json(const SelectionPlan& p) {
  ojson dropped = ojson::array();
  for (const auto& [name, cls] : p.dropped) dropped.push_back({{"name", name}, {"class", std::string(to_string(cls))}});
  return {{"policy", std::string(to_string(p.policy))},
          {"keep", p.keep_names},
          {"keep_indices", p.keep_indices},
          {"dropped", dropped}};
}

ojson to_json(const MaskPlan& p) {
  return {{"scope", std::string(to_string(p.scope))},
          {"phase", std::string(to_string(p.phase))},
          {"strategy", to_string(p.strategy)},
          {"mask", p.mask},
          {"neutral", p.neutral}};
}

ojson to_json(const ExperimentReport& r) {
  ojson models = ojson::array();
  for (const auto& m : r.models) {
    ojson cells = ojson::array();
    for (const auto& c : m.cells) {
      ojson cell = {{"defense", c.defense}, {"description", c.description}, {"status", c.ok ? "ok" : "error"}};
      if (c.ok) {
        cell["metrics"] = metrics_json(c.metrics);
        cell["asr_pre"] = c.asr_pre;
        cell["asr_post"] = c.asr_post;
      } else {
        cell["error"] = c.error;
      }
      cells.push_back(std::move(cell));
    }
    models.push_back({{"model", m.model}, {"cells", cells}});
  }
  ojson seeds = ojson::object();
  for (const auto& [k, v] : r.seeds) seeds[k] = v;
  return {{"dataset", r.dataset},
          {"train_rows", r.train_rows},
          {"test_rows", r.test_rows},
          {"scaler", r.scaler},
          {"seeds", seeds},
          {"class_counts", {{"low", r.low}, {"medium", r.medium}, {"high", r.high}}},
          {"attack",
           {{"kind", r.attack.kind},
            {"seed", r.attack.seed},
            {"epsilon", r.attack.epsilon},
            {"budget", r.attack.budget},
            {"allowed", r.attack.allowed},
            {"rows_attacked", r.attack.rows_attacked}}},
          {"models", models}};
}

ojson to_json(const DropReport& d) {
  ojson failures = ojson::object();
  for (const auto& [k, v] : d.per_column_failures) failures[k] = v;
  ojson enc = ojson::object();
  for (const auto& [k, v] : d.label_encoding) enc[k] = v;
  return {{"rows_read", d.rows_read},
          {"rows_dropped", d.rows_dropped},
          {"per_column_failures", failures},
          {"label_encoding", enc}};
}

// ---- json -> payload -------------------------------------------------------

ThresholdConfig thresholds_from(const json& j) {
  ThresholdConfig t;
  t.min_r = j.at("min_r").get<std::int64_t>();
  t.max_r = j.at("max_r").get<std::int64_t>();
  t.tau = j.at("tau").get<double>();
  t.corr_threshold = j.at("corr_threshold").get<double>();
  return t;
}

Metrics metrics_from_json(const json& j) {
  Metrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  const auto& c = j.at("confusion");
  m.confusion = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("tn").get<std::size_t>(),
                 c.at("fn").get<std::size_t>()};
  return m;
}

ScoreReport score_report_from(const json& j) {
  ScoreReport r;
  r.thresholds = thresholds_from(j.at("thresholds"));
  r.bin_width = j.at("histogram").at("bin_width").get<double>();
  for (const auto& h : j.at("histogram").at("bins")) {
    r.histogram.push_back({h.at("lower").get<double>(), h.at("count").get<std::size_t>()});
  }
  for (const auto& f : j.at("features")) {
    PsBreakdown b;
    b.feature = f.at("name").get<std::string>();
    b.ps1 = f.at("ps1").get<double>();
    b.ps2 = f.at("ps2").get<double>();
    b.ps3 = f.at("ps3").get<double>();
    b.ps4 = f.at("ps4").get<double>();
    b.ps5 = f.at("ps5").get<double>();
    b.ps_total = f.at("ps_total").get<double>();
    b.class_label = parse_ps_class(f.at("class").get<std::string>());
    const auto& in = f.at("inputs");
    const auto& flags = in.at("flags");
    auto& meta = b.inputs.meta;
    meta.name = b.feature;
    meta.is_protocol_id = flags.at("is_protocol_id").get<bool>();
    meta.is_critical_identifier = flags.at("is_critical_identifier").get<bool>();
    meta.is_functional_integrity = flags.at("is_functional_integrity").get<bool>();
    meta.direction = parse_direction(flags.at("direction").get<std::string>());
    meta.is_flow_wide_aggregate = flags.at("is_flow_wide_aggregate").get<bool>();
    if (flags.contains("declared_cardinality")) {
      meta.declared_cardinality = flags.at("declared_cardinality").get<std::int64_t>();
    }
    b.inputs.pv = in.at("pv").get<std::int64_t>();
    b.inputs.cf = in.at("cf").get<int>();
    b.inputs.forward_corr_count = in.at("forward_corr_count").get<int>();
    r.breakdowns.push_back(std::move(b));
  }
  return r;
}

CorrGraph graph_from(const json& j) {
  CorrGraph g;
  g.nodes = j.at("nodes").get<std::vector<std::string>>();
  auto index = [&](const std::string& name) {
    auto it = std::find(g.nodes.begin(), g.nodes.end(), name);
    if (it == g.nodes.end()) data_error("edge references unknown node '" + name + "'");
    return static_cast<std::size_t>(it - g.nodes.begin());
  };
  for (const auto& e : j.at("edges")) {
    g.edges.push_back({index(e.at("a").get<std::string>()), index(e.at("b").get<std::string>()),
                       e.at("abs_r").get<double>()});
  }
  return g;
}

SelectionPlan selection_from(const json& j) {
  SelectionPlan p;
  p.policy = parse_selection_policy(j.at("policy").get<std::string>());
  p.keep_names = j.at("keep").get<std::vector<std::string>>();
  p.keep_indices = j.at("keep_indices").get<std::vector<std::size_t>>();
  for (const auto& d : j.at("dropped")) {
    p.dropped.emplace_back(d.at("name").get<std::string>(), parse_ps_class(d.at("class").get<std::string>()));
  }
  return p;
}

MaskPlan mask_from(const json& j) {
  MaskPlan p;
  p.scope = parse_mask_scope(j.at("scope").get<std::string>());
  p.phase = parse_mask_phase(j.at("phase").get<std::string>());
  p.strategy = parse_neutral(j.at("strategy").get<std::string>());
  p.mask = j.at("mask").get<std::vector<int>>();
  p.neutral = j.at("neutral").get<std::vector<double>>();
  return p;
}

ExperimentReport experiment_from(const json& j) {
  ExperimentReport r;
  r.dataset = j.at("dataset").get<std::string>();
  r.train_rows = j.at("train_rows").get<std::size_t>();
  r.test_rows = j.at("test_rows").get<std::size_t>();
  r.scaler = j.at("scaler").get<std::string>();
  r.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
  const auto& cc = j.at("class_counts");
  r.low = cc.at("low").get<std::size_t>();
  r.medium = cc.at("medium").get<std::size_t>();
  r.high = cc.at("high").get<std::size_t>();
  const auto& a = j.at("attack");
  r.attack.kind = a.at("kind").get<std::string>();
  r.attack.seed = a.at("seed").get<std::uint64_t>();
  r.attack.epsilon = a.at("epsilon").get<double>();
  r.attack.budget = a.at("budget").get<int>();
  r.attack.allowed = a.at("allowed").get<std::vector<std::string>>();
  r.attack.rows_attacked = a.at("rows_attacked").get<std::size_t>();
  for (const auto& m : j.at("models")) {
    ModelExperiment me;
    me.model = m.at("model").get<std::string>();
    for (const auto& c : m.at("cells")) {
      DefenseCell cell;
      cell.defense = c.at("defense").get<std::string>();
      cell.description = c.at("description").get<std::string>();
      cell.ok = c.at("status").get<std::string>() == "ok";
      if (cell.ok) {
        cell.metrics = metrics_from_json(c.at("metrics"));
        cell.asr_pre = c.at("asr_pre").get<double>();
        cell.asr_post = c.at("asr_post").get<double>();
      } else {
        cell.error = c.at("error").get<std::string>();
      }
      me.cells.push_back(std::move(cell));
    }
    r.models.push_back(std::move(me));
  }
  return r;
}

DropReport drop_from(const json& j) {
  DropReport d;
  d.rows_read = j.at("rows_read").get<std::size_t>();
  d.rows_dropped = j.at("rows_dropped").get<std::size_t>();
  d.per_column_failures = j.at("per_column_failures").get<std::map<std::string, std::size_t>>();
  for (const auto& [k, v] : j.at("label_encoding").items()) d.label_encoding.emplace_back(k, v.get<int>());
  std::sort(d.label_encoding.begin(), d.label_encoding.end());
  return d;
}

// ---- non-JSON formats ------------------------------------------------------

std::string score_csv(const ScoreReport& r) {
  std::string out = "name,ps1,ps2,ps3,ps4,ps5,ps_total,class,pv,cf,forward_corr_count\n";
  for (const auto& b : r.breakdowns) {
    out += csv_field(b.feature);
    for (double v : b.fields()) out += "," + fmt(kFloat, v);
    out += "," + fmt(kFloat, b.ps_total) + "," + std::string(to_string(b.class_label)) + "," +
           std::to_string(b.inputs.pv) + "," + std::to_string(b.inputs.cf) + "," +
           std::to_string(b.inputs.forward_corr_count) + "\n";
  }
  return out;
}

}  // namespace

std::string_view to_string(Format f) {
  switch (f) {
    case Format::Json: return "json";
    case Format::Csv: return "csv";
    case Format::Dot: return "dot";
  }
  return "json";
}

std::string_view payload_kind(const Payload& payload) {
  return std::visit(overloaded{[](const ScoreReport&) { return std::string_view("score_report"); },
                               [](const CorrGraph&) { return std::string_view("correlation_graph"); },
                               [](const SelectionPlan&) { return std::string_view("selection_plan"); },
                               [](const MaskPlan&) { return std::string_view("mask_plan"); },
                               [](const ExperimentReport&) { return std::string_view("experiment"); },
                               [](const DropReport&) { return std::string_view("drop_report"); }},
                    payload);
}

std::string render(const Payload& payload, Format format) {
  if (format == Format::Json) {
    ojson env;
    env["schema_version"] = std::string(kSchemaVersion);
    env["produced_by"] = std::string(kProducedBy);
    env["kind"] = std::string(payload_kind(payload));
    env["payload"] = std::visit([](const auto& p) { return to_json(p); }, payload);
    return detail::dump_json(env, kFloat);
  }
  if (format == Format::Csv) {
    if (const auto* r = std::get_if<ScoreReport>(&payload)) return score_csv(*r);
  }
  if (format == Format::Dot) {
    if (const auto* g = std::get_if<CorrGraph>(&payload)) return to_dot(*g);
  }
  throw Error(ErrorKind::Usage, kModule,
              "unsupported combination: " + std::string(payload_kind(payload)) + " -> " +
                  std::string(to_string(format)));
}

void emit(const Payload& payload, Format format, const std::filesystem::path& path) {
  detail::write_file_atomic(path, render(payload, format), kModule);
}

Payload parse_payload(std::string_view text) {
  try {
    auto doc = json::parse(text);
    const auto version = doc.at("schema_version").get<std::string>();
    if (version.substr(0, version.find('.')) != kSchemaVersion.substr(0, kSchemaVersion.find('.'))) {
      data_error("unsupported schema_version " + version);
    }
    const auto kind = doc.at("kind").get<std::string>();
    const auto& p = doc.at("payload");
    if (kind == "score_report") return score_report_from(p);
    if (kind == "correlation_graph") return graph_from(p);
    if (kind == "selection_plan") return selection_from(p);
    if (kind == "mask_plan") return mask_from(p);
    if (kind == "experiment") return experiment_from(p);
    if (kind == "drop_report") return drop_from(p);
    data_error("unknown payload kind '" + kind + "'");
  } catch (const json::exception& e) {
    data_error(std::string("malformed report: ") + e.what());
  }
}

Payload read_payload(const std::filesystem::path& path) {
  return parse_payload(detail::read_file(path, kModule));
}

std::string format_class_table(const ScoreReport& report, std::string_view dataset_name) {
  const auto c = report.counts();
  const double n = static_cast<double>(c.total());
  auto cell = [&](std::size_t k) {
    return std::to_string(k) + " (" + fmt("%.1f", n > 0 ? 100.0 * static_cast<double>(k) / n : 0.0) + "%)";
  };
  char line[256];
  std::string out;
  std::snprintf(line, sizeof line, "%-24s %-14s %-14s %-14s %s\n", "Dataset", "Low", "Medium", "High",
                "Total");
  out += line;
  std::snprintf(line, sizeof line, "%-24s %-14s %-14s %-14s %zu\n", std::string(dataset_name).c_str(),
                cell(c.low).c_str(), cell(c.medium).c_str(), cell(c.high).c_str(), c.total());
  out += line;
  return out;
}

std::string format_experiment_table(const ExperimentReport& report) {
  std::string out;
  char line[256];
  for (const auto& m : report.models) {
    std::snprintf(line, sizeof line, "model: %s   attack: %s   rows attacked: %zu\n", m.model.c_str(),
                  report.attack.kind.c_str(), report.attack.rows_attacked);
    out += line;
    std::snprintf(line, sizeof line, "  %-10s %-18s %8s %8s %8s %8s %9s %9s\n", "defense", "variant", "acc",
                  "prec", "recall", "f1", "ASR pre", "ASR post");
    out += line;
    for (const auto& c : m.cells) {
      if (!c.ok) {
        std::snprintf(line, sizeof line, "  %-10s %-18s error: %s\n", c.defense.c_str(), c.description.c_str(),
                      c.error.c_str());
      } else {
        std::snprintf(line, sizeof line, "  %-10s %-18s %8.4f %8.4f %8.4f %8.4f %8.2f%% %8.2f%%\n",
                      c.defense.c_str(), c.description.c_str(), c.metrics.accuracy, c.metrics.precision,
                      c.metrics.recall, c.metrics.f1, 100.0 * c.asr_pre, 100.0 * c.asr_post);
      }
      out += line;
    }
  }
  return out;
}

}  // namespace psguard
