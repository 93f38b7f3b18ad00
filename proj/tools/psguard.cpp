#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "psguard/error.hpp"
#include "psguard/pipeline.hpp"

namespace {

using namespace psguard;

struct Flags {
  std::string scaler = "standardize";
  std::string attack = "gradsign";
  std::string allowed = "high";
  std::string phase;
  std::string neutral = "mean";
  std::string model = "both";
  std::string fixture;
};

void add_data_options(CLI::App* cmd, RunConfig& cfg, Flags& f) {
  cmd->add_option("--dataset", cfg.dataset, "Flow CSV with a header row");
  cmd->add_option("--catalog", cfg.catalog, "Feature annotation catalog (JSON)");
  cmd->add_option("--label-column", cfg.label_column, "Name of the label column")->capture_default_str();
  cmd->add_option("--benign-label", cfg.benign_label, "Label value treated as benign; all others are malicious");
  cmd->add_option("--exclude", cfg.exclude, "Columns to ignore (repeatable)");
  cmd->add_option("--scaler", f.scaler, "standardize | minmax")
      ->check(CLI::IsMember({"standardize", "minmax"}))
      ->capture_default_str();
  cmd->add_option("--test-fraction", cfg.test_fraction, "Held-out fraction")->capture_default_str();
  cmd->add_option("--seed-split", cfg.seed_split)->capture_default_str();
  cmd->add_option("--seed-undersample", cfg.seed_undersample)->capture_default_str();
  cmd->add_option("--seed-train", cfg.seed_train)->capture_default_str();
  cmd->add_option("--seed-attack", cfg.seed_attack)->capture_default_str();
  cmd->add_flag("!--no-undersample", cfg.undersample, "Keep the training split imbalanced");
  cmd->add_option("--tau", cfg.thresholds.tau, "High-class threshold")->capture_default_str();
  cmd->add_option("--corr-threshold", cfg.thresholds.corr_threshold, "|r| cutoff for correlated features")
      ->capture_default_str();
  cmd->add_option("--min-r", cfg.thresholds.min_r, "Lower cardinality bound")->capture_default_str();
  cmd->add_option("--max-r", cfg.thresholds.max_r, "Upper cardinality bound")->capture_default_str();
  cmd->add_option("--out-dir", cfg.out_dir, "Directory for report files")->capture_default_str();
}

void add_defense_options(CLI::App* cmd, RunConfig& cfg, Flags& f) {
  cmd->add_option("--defense", cfg.defenses, "a-green | a-green-yellow | b-high | b-high-medium (repeatable)")
      ->check(CLI::IsMember({"a-green", "a-green-yellow", "b-high", "b-high-medium"}));
  cmd->add_option("--phase", f.phase, "train-inference | inference-only")
      ->check(CLI::IsMember({"train-inference", "inference-only"}));
  cmd->add_option("--neutral", f.neutral, "mean | median | const:<v>")->capture_default_str();
}

void finish_config(RunConfig& cfg, const Flags& f) {
  cfg.scaler = parse_scaler_method(f.scaler);
  cfg.attack = parse_attack_kind(f.attack);
  cfg.allowed = parse_allowed_rule(f.allowed);
  if (!f.phase.empty()) cfg.phase = parse_mask_phase(f.phase);
  cfg.neutral = parse_neutral(f.neutral);
  if (f.model == "both") cfg.models = {ModelKind::LogReg, ModelKind::Mlp};
  else cfg.models = {parse_model_kind(f.model)};
  cfg.fixture = f.fixture;
}

void print(const CommandOutput& out) {
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << out.text;
  for (const auto& p : out.files) std::cout << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perturb-ability scoring, PS-guided defenses and constrained evasion attacks for flow-based NIDS"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kProducedBy));

  RunConfig cfg;
  Flags flags;
  std::size_t synth_rows = 6000;
  std::uint64_t synth_seed = 7;

  auto* score = app.add_subcommand("score", "Score every feature and write the report, CSV and correlation graph");
  add_data_options(score, cfg, flags);
  score->add_option("--fixture", flags.fixture, "Pinned {pv, cf, forward_corr_count} per feature; replaces --dataset");

  auto* defend = app.add_subcommand("defend", "Emit Option A selection and/or Option B mask plans");
  add_data_options(defend, cfg, flags);
  add_defense_options(defend, cfg, flags);

  auto* experiment = app.add_subcommand("experiment", "Train baseline and defended models, attack, and compare");
  add_data_options(experiment, cfg, flags);
  add_defense_options(experiment, cfg, flags);
  experiment->add_option("--model", flags.model, "logreg | mlp | both")
      ->check(CLI::IsMember({"logreg", "mlp", "both"}))
      ->capture_default_str();
  experiment->add_option("--epochs", cfg.train.epochs)->capture_default_str();
  experiment->add_option("--learning-rate", cfg.train.learning_rate)->capture_default_str();
  experiment->add_option("--batch-size", cfg.train.batch_size)->capture_default_str();
  experiment->add_option("--hidden", cfg.train.hidden, "Mlp hidden width")->capture_default_str();
  experiment->add_option("--attack", flags.attack, "gradsign | query | morph")
      ->check(CLI::IsMember({"gradsign", "query", "morph"}))
      ->capture_default_str();
  experiment->add_option("--epsilon", cfg.epsilon, "L-inf radius (morph: shift magnitude), scaled units")
      ->capture_default_str();
  experiment->add_option("--budget", cfg.budget, "Oracle calls per row for the query attack")->capture_default_str();
  experiment->add_option("--allowed", flags.allowed, "high | high-medium | all | morph")
      ->check(CLI::IsMember({"high", "high-medium", "all", "morph"}))
      ->capture_default_str();
  experiment->add_option("--morph-map", cfg.morph_map, "Morph-to-feature map (JSON)");
  experiment->add_option("--morph", cfg.morphs, "Restrict to these morphs (repeatable)");

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset with its catalog and morph map");
  synth->add_option("--rows", synth_rows, "Number of flows")->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("--out-dir", cfg.out_dir)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    finish_config(cfg, flags);
    if (score->parsed()) print(cmd_score(cfg));
    else if (defend->parsed()) print(cmd_defend(cfg));
    else if (experiment->parsed()) print(cmd_experiment(cfg));
    else if (synth->parsed()) print(cmd_synth(synth_rows, synth_seed, cfg.out_dir));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
