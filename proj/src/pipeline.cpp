#include "psguard/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "json_text.hpp"
#include "psguard/error.hpp"
#include "psguard/synth.hpp"

namespace psguard {
namespace {

constexpr const char* kModule = "cli";

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorKind::Usage, kModule, msg); }

struct DefenseChoice {
  std::optional<SelectionPolicy> option_a;
  std::optional<MaskScope> option_b;
};

DefenseChoice parse_defenses(const std::vector<std::string>& tokens) {
  DefenseChoice out;
  for (const auto& t : tokens) {
    if (t == "a-green") out.option_a = SelectionPolicy::GreenOnly;
    else if (t == "a-green-yellow") out.option_a = SelectionPolicy::GreenYellow;
    else if (t == "b-high") out.option_b = MaskScope::HighOnly;
    else if (t == "b-high-medium") out.option_b = MaskScope::HighAndMedium;
    else usage("unknown defense '" + t + "' (expected a-green, a-green-yellow, b-high or b-high-medium)");
  }
  return out;
}

std::string dataset_name(const RunConfig& config) {
  if (!config.dataset.empty()) return config.dataset.stem().string();
  auto name = config.catalog.stem().string();
  constexpr std::string_view suffix = "_catalog";
  if (name.size() > suffix.size() && name.ends_with(suffix)) name.resize(name.size() - suffix.size());
  return name;
}

std::vector<std::size_t> indices_of(const ScoreReport& score, std::initializer_list<PsClass> classes) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < score.breakdowns.size(); ++i) {
    if (std::find(classes.begin(), classes.end(), score.breakdowns[i].class_label) != classes.end()) {
      out.push_back(i);
    }
  }
  return out;
}

std::filesystem::path out_file(const RunConfig& config, const std::string& name) {
  return config.out_dir / name;
}

}  // namespace

std::string_view to_string(AllowedRule r) {
  switch (r) {
    case AllowedRule::High: return "high";
    case AllowedRule::HighAndMedium: return "high-medium";
    case AllowedRule::All: return "all";
    case AllowedRule::Morph: return "morph";
  }
  return "high";
}

AllowedRule parse_allowed_rule(std::string_view text) {
  if (text == "high") return AllowedRule::High;
  if (text == "high-medium") return AllowedRule::HighAndMedium;
  if (text == "all") return AllowedRule::All;
  if (text == "morph") return AllowedRule::Morph;
  usage("unknown allowed-set rule '" + std::string(text) + "'");
}

std::vector<FeatureInput> feature_inputs(const MetadataCatalog& catalog, const Dataset& train_raw,
                                         const CorrMatrix& corr, double corr_threshold) {
  const auto cf = high_corr_counts(corr, corr_threshold);
  const auto fwd = forward_corr_profile(corr, catalog, corr_threshold);
  std::vector<FeatureInput> inputs;
  for (std::size_t j = 0; j < train_raw.num_features(); ++j) {
    const auto& meta = catalog.at(train_raw.feature_names[j]);
    const auto column = train_raw.x.column(j);
    inputs.push_back({meta, effective_cardinality(column, meta.declared_cardinality), cf[j], fwd[j]});
  }
  return inputs;
}

PreparedData prepare(const RunConfig& config) {
  if (config.dataset.empty()) usage("--dataset is required");
  if (config.catalog.empty()) usage("--catalog is required");
  config.thresholds.validate();

  PreparedData d;
  d.catalog = load_catalog(config.catalog);
  auto loaded = load_csv(config.dataset, {config.label_column, config.benign_label, config.exclude});
  d.drop = loaded.report;

  std::string fatal;
  for (const auto& issue : validate_catalog(d.catalog, loaded.data.feature_names)) {
    if (issue.kind == ValidationIssue::Kind::NoColumn) {
      d.warnings.push_back(issue.message);
    } else {
      fatal += "\n  " + issue.message;
    }
  }
  if (!fatal.empty()) throw Error(ErrorKind::Data, "feature_metadata", "catalog does not fit the dataset:" + fatal);

  auto [train, test] = split(loaded.data, config.test_fraction, config.seed_split);
  if (config.undersample) train = undersample(train, config.seed_undersample);
  d.train_raw = std::move(train);
  d.test_raw = std::move(test);
  d.scaler = fit_scaler(d.train_raw, config.scaler);
  d.train = apply_scaler(d.scaler, d.train_raw);
  d.test = apply_scaler(d.scaler, d.test_raw);
  d.corr = pearson_matrix(d.train);

  const auto inputs = feature_inputs(d.catalog, d.train_raw, d.corr, config.thresholds.corr_threshold);
  for (const auto& in : inputs) {
    if (in.pv < config.thresholds.min_r) {
      d.warnings.push_back("feature '" + in.meta.name + "' has cardinality " + std::to_string(in.pv) +
                           " below min_r; PS2 = 0, consider dropping it");
    }
  }
  d.score = score_all(inputs, config.thresholds);
  return d;
}

CommandOutput cmd_score(const RunConfig& config) {
  CommandOutput out;
  ScoreReport score;
  if (!config.fixture.empty()) {
    if (config.catalog.empty()) usage("--catalog is required");
    const auto catalog = load_catalog(config.catalog);
    const auto fixture = load_fixture(config.fixture);
    score = score_all(fixture_inputs(catalog, fixture), config.thresholds);
  } else {
    auto d = prepare(config);
    score = d.score;
    out.warnings = d.warnings;
    const auto graph = export_graph(d.corr, config.thresholds.corr_threshold);
    out.files.push_back(out_file(config, "correlation_graph.dot"));
    emit(graph, Format::Dot, out.files.back());
    out.files.push_back(out_file(config, "correlation_graph.json"));
    emit(graph, Format::Json, out.files.back());
    out.files.push_back(out_file(config, "drop_report.json"));
    emit(d.drop, Format::Json, out.files.back());
  }
  out.files.push_back(out_file(config, "score_report.json"));
  emit(score, Format::Json, out.files.back());
  out.files.push_back(out_file(config, "score_report.csv"));
  emit(score, Format::Csv, out.files.back());
  out.text = format_class_table(score, dataset_name(config));
  return out;
}

CommandOutput cmd_defend(const RunConfig& config) {
  if (config.defenses.empty()) usage("--defense is required");
  const auto choice = parse_defenses(config.defenses);
  auto d = prepare(config);
  CommandOutput out;
  out.warnings = d.warnings;
  out.text = format_class_table(d.score, dataset_name(config));
  if (choice.option_a) {
    const auto plan = selection_plan(d.score, *choice.option_a);
    out.files.push_back(out_file(config, "selection_plan_" + std::string(to_string(plan.policy)) + ".json"));
    emit(plan, Format::Json, out.files.back());
    out.text += "option A (" + std::string(to_string(plan.policy)) + "): keep " +
                std::to_string(plan.keep_indices.size()) + ", drop " + std::to_string(plan.dropped.size()) + "\n";
  }
  if (choice.option_b) {
    const auto phase = config.phase.value_or(MaskPhase::TrainAndInference);
    const auto plan = make_mask_plan(d.score, d.train.x, *choice.option_b, phase, config.neutral);
    out.files.push_back(out_file(config, "mask_plan_" + std::string(to_string(plan.scope)) + ".json"));
    emit(plan, Format::Json, out.files.back());
    out.text += "option B (" + std::string(to_string(plan.scope)) + ", " + std::string(to_string(phase)) +
                ", " + to_string(plan.strategy) + "): mask " + std::to_string(plan.masked_indices().size()) +
                " of " + std::to_string(plan.mask.size()) + "\n";
  }
  return out;
}

Matrix run_attack(const RunConfig& config, const Model& model, const Matrix& x, const Labels& y,
                  const AttackConstraints& constraints, const std::vector<std::string>& columns,
                  const MorphMap* morph_map) {
  switch (config.attack) {
    case AttackKind::GradientSign: return gradient_sign_attack(model, x, y, constraints);
    case AttackKind::Query:
      return query_attack([&](const Matrix& m) { return model.scores(m); }, x, y, constraints, config.budget,
                          config.seed_attack);
    case AttackKind::Morph:
      if (!morph_map) usage("--morph-map is required for the morph attack");
      return morph_attack(x, *morph_map, columns, config.epsilon, config.seed_attack, constraints, config.morphs);
  }
  throw Error(ErrorKind::Internal, kModule, "unhandled attack kind");
}

ExperimentReport run_experiment(const RunConfig& config, const PreparedData& d) {
  auto choice = parse_defenses(config.defenses);
  if (config.defenses.empty()) {
    choice.option_a = SelectionPolicy::GreenOnly;
    choice.option_b = MaskScope::HighOnly;
  }
  std::vector<MaskPhase> phases;
  if (config.phase) phases.push_back(*config.phase);
  else phases = {MaskPhase::TrainAndInference, MaskPhase::InferenceOnly};

  const auto& names = d.train.feature_names;
  std::optional<MorphMap> morphs;
  const bool morph_rule = config.attack == AttackKind::Morph || config.allowed == AllowedRule::Morph;
  if (morph_rule) {
    if (config.morph_map.empty()) usage("--morph-map is required for morph-restricted attacks");
    morphs = load_morph_map(config.morph_map);
  }

  std::vector<std::size_t> allowed;
  if (morph_rule) {
    if (config.morphs.empty()) {
      allowed = morphs->feature_indices(names);
    } else {
      MorphMap subset;
      for (const auto& e : morphs->entries) {
        if (std::find(config.morphs.begin(), config.morphs.end(), e.morph) != config.morphs.end()) {
          subset.entries.push_back(e);
        }
      }
      allowed = subset.feature_indices(names);
    }
  } else if (config.allowed == AllowedRule::High) {
    allowed = indices_of(d.score, {PsClass::High});
  } else if (config.allowed == AllowedRule::HighAndMedium) {
    allowed = indices_of(d.score, {PsClass::High, PsClass::Medium});
  } else {
    allowed = indices_of(d.score, {PsClass::Low, PsClass::Medium, PsClass::High});
  }
  if (allowed.empty()) {
    throw Error(ErrorKind::Data, "attack_harness", "allowed-set rule selects no features");
  }
  const auto constraints = make_constraints(d.train.x, d.train_raw.x, d.scaler, allowed, config.epsilon);

  std::vector<std::size_t> attack_rows;
  for (std::size_t i = 0; i < d.test.size(); ++i) {
    if (d.test.y[i] == 1) attack_rows.push_back(i);
  }
  if (attack_rows.empty()) throw Error(ErrorKind::Data, "attack_harness", "test split has no malicious rows");
  const Dataset attacked = d.test.select_rows(attack_rows);

  ExperimentReport report;
  report.dataset = dataset_name(config);
  report.train_rows = d.train.size();
  report.test_rows = d.test.size();
  report.scaler = std::string(to_string(config.scaler));
  report.seeds = {{"split", config.seed_split},
                  {"undersample", config.seed_undersample},
                  {"train", config.seed_train},
                  {"attack", config.seed_attack}};
  const auto counts = d.score.counts();
  report.low = counts.low;
  report.medium = counts.medium;
  report.high = counts.high;
  report.attack.kind = std::string(to_string(config.attack));
  report.attack.seed = config.seed_attack;
  report.attack.epsilon = config.epsilon;
  report.attack.budget = config.attack == AttackKind::Query ? config.budget : 0;
  for (auto j : allowed) report.attack.allowed.push_back(names[j]);
  report.attack.rows_attacked = attack_rows.size();

  std::optional<SelectionPlan> plan_a;
  std::optional<Error> plan_a_error;
  if (choice.option_a) {
    try {
      plan_a = selection_plan(d.score, *choice.option_a);
    } catch (const Error& e) {
      plan_a_error = e;
    }
  }
  std::optional<MaskPlan> plan_b;
  std::optional<Error> plan_b_error;
  if (choice.option_b) {
    try {
      plan_b = make_mask_plan(d.score, d.train.x, *choice.option_b, MaskPhase::TrainAndInference, config.neutral);
      if (plan_b->masked_indices().empty()) {
        throw Error(ErrorKind::Data, "defense", "mask scope selects no features");
      }
    } catch (const Error& e) {
      plan_b.reset();
      plan_b_error = e;
    }
  }

  for (auto kind : config.models) {
    ModelExperiment me;
    me.model = std::string(to_string(kind));
    const Model baseline = train(kind, d.train, config.train, config.seed_train);
    const Matrix x_adv =
        run_attack(config, baseline, attacked.x, attacked.y, constraints, names, morphs ? &*morphs : nullptr);
    const Labels pred_orig = baseline.predict(attacked.x).labels;
    const Labels pred_adv = baseline.predict(x_adv).labels;
    const double asr_pre = asr(pred_orig, pred_adv, attacked.y);

    DefenseCell base{"baseline", "all features", true, "", evaluate(baseline, d.test), asr_pre, asr_pre};
    me.cells.push_back(base);

    auto run_cell = [&](std::string defense, std::string description, auto&& body) {
      DefenseCell cell;
      cell.defense = std::move(defense);
      cell.description = std::move(description);
      try {
        body(cell);
      } catch (const Error& e) {
        cell.ok = false;
        cell.error = e.what();
        cell.metrics = {};
        cell.asr_pre = cell.asr_post = 0.0;
      }
      me.cells.push_back(std::move(cell));
    };

    if (choice.option_a) {
      run_cell("option_a", std::string(to_string(*choice.option_a)), [&](DefenseCell& cell) {
        if (!plan_a) throw *plan_a_error;
        const Model model = train(kind, apply_selection(*plan_a, d.train), config.train, config.seed_train);
        DefendedPipeline p{"option_a", &model, [&](const Matrix& m) { return apply_selection(*plan_a, m); }};
        const auto outcome = evaluate_pipeline(p, d.test, attacked.x, x_adv, attacked.y);
        cell.metrics = outcome.metrics;
        cell.asr_pre = asr_pre;
        cell.asr_post = outcome.asr;
      });
    }
    if (choice.option_b) {
      const std::string desc = std::string(to_string(*choice.option_b)) + "/" + to_string(config.neutral);
      for (auto phase : phases) {
        const bool b1 = phase == MaskPhase::TrainAndInference;
        run_cell(b1 ? "option_b1" : "option_b2", desc, [&](DefenseCell& cell) {
          if (!plan_b) throw *plan_b_error;
          Model masked_model;
          if (b1) {
            Dataset masked_train = d.train;
            masked_train.x = apply_mask(*plan_b, d.train.x);
            masked_model = train(kind, masked_train, config.train, config.seed_train);
          }
          const Model& model = b1 ? masked_model : baseline;
          DefendedPipeline p{cell.defense, &model, [&](const Matrix& m) { return apply_mask(*plan_b, m); }};
          const auto outcome = evaluate_pipeline(p, d.test, attacked.x, x_adv, attacked.y);
          cell.metrics = outcome.metrics;
          cell.asr_pre = asr_pre;
          cell.asr_post = outcome.asr;
        });
      }
    }
    report.models.push_back(std::move(me));
  }
  return report;
}

CommandOutput cmd_experiment(const RunConfig& config) {
  if (config.models.empty()) usage("at least one model kind is required");
  auto d = prepare(config);
  CommandOutput out;
  out.warnings = d.warnings;
  const auto report = run_experiment(config, d);
  out.files.push_back(out_file(config, "score_report.json"));
  emit(d.score, Format::Json, out.files.back());
  out.files.push_back(out_file(config, "experiment.json"));
  emit(report, Format::Json, out.files.back());
  out.text = format_class_table(d.score, dataset_name(config)) + "\n" + format_experiment_table(report);
  return out;
}

CommandOutput cmd_synth(std::size_t n_rows, std::uint64_t seed, const std::filesystem::path& out_dir) {
  const auto s = synthesize(n_rows, seed);
  CommandOutput out;
  out.files = {out_dir / "synthetic.csv", out_dir / "synthetic_catalog.json", out_dir / "synthetic_morph_map.json"};
  detail::write_file_atomic(out.files[0], s.csv, "synth");
  detail::write_file_atomic(out.files[1], serialize_catalog(s.catalog), "synth");
  detail::write_file_atomic(out.files[2], serialize_morph_map(s.morph_map), "synth");
  out.text = "wrote " + std::to_string(n_rows) + " rows, " + std::to_string(s.catalog.size()) + " features\n";
  return out;
}

}  // namespace psguard
