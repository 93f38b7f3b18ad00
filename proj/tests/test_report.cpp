#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "psguard/error.hpp"
#include "psguard/report.hpp"

using namespace psguard;

namespace {

ScoreReport unsw_report() {
  auto cat = load_catalog(PSGUARD_DATA_DIR "/unsw_nb15_catalog.json");
  auto fx = load_fixture(PSGUARD_DATA_DIR "/unsw_nb15_fixture.json");
  return score_all(fixture_inputs(cat, fx), ThresholdConfig{});
}

CorrGraph small_graph() {
  auto x = Matrix::from_rows({{1, 2, 0}, {2, 4, 1}, {3, 6, 0}, {4, 8.5, 1}});
  return export_graph(pearson_matrix(x, {"a", "b", "c"}), 0.8);
}

MaskPlan small_mask() {
  MaskPlan p;
  p.scope = MaskScope::HighAndMedium;
  p.phase = MaskPhase::InferenceOnly;
  p.strategy = NeutralStrategy{NeutralStrategy::Kind::Constant, -0.5};
  p.mask = {1, 0, 0};
  p.neutral = {0.0, -0.5, -0.5};
  return p;
}

ExperimentReport small_experiment() {
  ExperimentReport r;
  r.dataset = "synthetic.csv";
  r.train_rows = 100;
  r.test_rows = 25;
  r.seeds = {{"split", 1}, {"train", 3}};
  r.scaler = "standardize";
  r.low = 3;
  r.medium = 2;
  r.high = 4;
  r.attack = {"gradsign", 4, 2.0, 200, {"fwd_pkts", "src_port"}, 8};
  ModelExperiment m;
  m.model = "logreg";
  DefenseCell base;
  base.defense = "baseline";
  base.description = "all features";
  base.metrics = metrics_from(Confusion{7, 1, 15, 2});
  base.asr_pre = 0.25;
  base.asr_post = 0.25;
  DefenseCell broken;
  broken.defense = "option_a";
  broken.description = "green-only";
  broken.ok = false;
  broken.error = "defense: nothing left";
  m.cells = {base, broken};
  r.models = {m};
  return r;
}

// Equality after a JSON round trip: text must be stable and discrete structure identical.
void check_round_trip(const Payload& p) {
  const auto text = render(p, Format::Json);
  const auto back = parse_payload(text);
  CHECK(back.index() == p.index());
  CHECK(render(back, Format::Json) == text);
}

}  // namespace

TEST_CASE("json rendering is deterministic and enveloped") {
  auto r = unsw_report();
  const auto a = render(r, Format::Json);
  CHECK(a == render(unsw_report(), Format::Json));
  CHECK(a.back() == '\n');
  CHECK(a.find("\"schema_version\": \"1.0.0\"") != std::string::npos);
  CHECK(a.find("\"produced_by\": \"psguard 0.1.0\"") != std::string::npos);
  CHECK(a.find("\"kind\": \"score_report\"") != std::string::npos);
  CHECK(a.find("0.870551") != std::string::npos);
}

TEST_CASE("every payload kind survives a json round trip") {
  auto score = unsw_report();
  check_round_trip(score);
  auto back = std::get<ScoreReport>(parse_payload(render(score, Format::Json)));
  REQUIRE(back.breakdowns.size() == score.breakdowns.size());
  CHECK(back.classes() == score.classes());
  CHECK(back.thresholds == score.thresholds);
  REQUIRE(back.histogram.size() == score.histogram.size());
  for (std::size_t i = 0; i < score.histogram.size(); ++i) {
    CHECK(back.histogram[i].count == score.histogram[i].count);
    CHECK(back.histogram[i].lower == doctest::Approx(score.histogram[i].lower).epsilon(1e-9));
  }
  for (std::size_t i = 0; i < score.breakdowns.size(); ++i) {
    CHECK(back.breakdowns[i].feature == score.breakdowns[i].feature);
    CHECK(back.breakdowns[i].inputs.meta == score.breakdowns[i].inputs.meta);
    CHECK(back.breakdowns[i].ps_total == doctest::Approx(score.breakdowns[i].ps_total).epsilon(1e-6));
  }

  auto graph = small_graph();
  check_round_trip(graph);
  auto g2 = std::get<CorrGraph>(parse_payload(render(graph, Format::Json)));
  CHECK(g2.nodes == graph.nodes);
  CHECK(g2.edges.size() == graph.edges.size());

  auto sel = selection_plan(score, SelectionPolicy::GreenOnly);
  check_round_trip(sel);
  CHECK(std::get<SelectionPlan>(parse_payload(render(sel, Format::Json))) == sel);

  auto mask = small_mask();
  check_round_trip(mask);
  CHECK(std::get<MaskPlan>(parse_payload(render(mask, Format::Json))) == mask);

  DropReport drop{10, 2, {{"dur", 2}}, {{"Benign", 0}, {"Malicious", 1}}};
  check_round_trip(drop);
  CHECK(std::get<DropReport>(parse_payload(render(drop, Format::Json))) == drop);

  auto exp = small_experiment();
  check_round_trip(exp);
  auto e2 = std::get<ExperimentReport>(parse_payload(render(exp, Format::Json)));
  CHECK(e2.models[0].cells[1].ok == false);
  CHECK(e2.models[0].cells[1].error == "defense: nothing left");
  CHECK(e2.models[0].cells[0].metrics.confusion == exp.models[0].cells[0].metrics.confusion);
  CHECK(e2.attack == exp.attack);
  CHECK(e2.seeds == exp.seeds);
}

TEST_CASE("dot output has one edge per passing pair") {
  auto graph = small_graph();
  auto dot = render(graph, Format::Dot);
  CHECK(dot.rfind("graph correlation {", 0) == 0);
  CHECK(dot.back() == '\n');
  std::size_t edges = 0;
  for (std::size_t pos = 0; (pos = dot.find(" -- ", pos)) != std::string::npos; ++pos) ++edges;
  CHECK(edges == graph.edges.size());
  CHECK(edges == 1);
  CHECK(dot.find("\"a\" -- \"b\"") != std::string::npos);
}

TEST_CASE("csv output for score reports") {
  auto csv = render(unsw_report(), Format::Csv);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "name,ps1,ps2,ps3,ps4,ps5,ps_total,class,pv,cf,forward_corr_count");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 47);
}

TEST_CASE("unsupported combinations and foreign documents are rejected") {
  try {
    render(small_mask(), Format::Csv);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Usage);
    CHECK(std::string(e.what()).find("mask_plan -> csv") != std::string::npos);
  }
  CHECK_THROWS_AS(render(small_experiment(), Format::Dot), Error);

  auto text = render(small_mask(), Format::Json);
  auto v2 = text;
  v2.replace(v2.find("1.0.0"), 5, "2.0.0");
  CHECK_THROWS_AS(parse_payload(v2), Error);
  auto minor = text;
  minor.replace(minor.find("1.0.0"), 5, "1.3.0");
  CHECK(std::holds_alternative<MaskPlan>(parse_payload(minor)));
  auto kind = text;
  kind.replace(kind.find("mask_plan"), 9, "mystery");
  CHECK_THROWS_AS(parse_payload(kind), Error);
  CHECK_THROWS_AS(parse_payload("{not json"), Error);
}

TEST_CASE("emit writes atomically and reads back") {
  auto dir = std::filesystem::temp_directory_path() / "psguard_report_test";
  std::filesystem::remove_all(dir);
  auto path = dir / "nested" / "mask.json";
  emit(small_mask(), Format::Json, path);
  CHECK(std::filesystem::exists(path));
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  CHECK(std::get<MaskPlan>(read_payload(path)) == small_mask());
  std::filesystem::remove_all(dir);
}

TEST_CASE("class table mirrors the count layout") {
  auto table = format_class_table(unsw_report(), "UNSW-NB15");
  CHECK(table.find("25 (53.2%)") != std::string::npos);
  CHECK(table.find("4 (8.5%)") != std::string::npos);
  CHECK(table.find("18 (38.3%)") != std::string::npos);
  auto exp = format_experiment_table(small_experiment());
  CHECK(exp.find("baseline") != std::string::npos);
  CHECK(exp.find("error") != std::string::npos);
}
