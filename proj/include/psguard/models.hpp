#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psguard/dataset.hpp"

namespace psguard {

enum class ModelKind { LogReg, Mlp };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view text);

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 40;
  std::size_t batch_size = 64;
  std::size_t hidden = 32;  // Mlp only

  bool operator==(const TrainConfig&) const = default;
};

struct Prediction {
  Labels labels;
  std::vector<double> scores;
};

/// Binary classifier with a sigmoid output. LogReg is z = w.x + b; Mlp adds a
/// single ReLU hidden layer: z = w2.relu(W1 x + b1) + b2.
class Model {
 public:
  Model() = default;
  static Model logreg(std::vector<double> w, double b);
  /// w1 is row-major hidden x input_dim.
  static Model mlp(std::size_t input_dim, std::vector<double> w1, std::vector<double> b1,
                   std::vector<double> w2, double b2);

  ModelKind kind() const noexcept { return kind_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t hidden() const noexcept { return kind_ == ModelKind::Mlp ? b1_.size() : 0; }

  double logit(std::span<const double> x) const;
  /// Sigmoid of the logit, kept strictly inside (0, 1).
  double score(std::span<const double> x) const;
  std::vector<double> scores(const Matrix& x) const;
  Prediction predict(const Matrix& x) const;

  /// d loss / d x for the cross-entropy loss against `target`.
  std::vector<double> input_gradient(std::span<const double> x, int target) const;
  double loss(std::span<const double> x, int target) const;
  double mean_loss(const Matrix& x, const Labels& y) const;

  const std::vector<double>& w1() const noexcept { return w1_; }
  const std::vector<double>& b1() const noexcept { return b1_; }
  const std::vector<double>& w2() const noexcept { return w2_; }
  double b2() const noexcept { return b2_; }

  TrainConfig config;
  std::uint64_t seed = 0;

  bool operator==(const Model&) const = default;

 private:
  friend Model train(ModelKind, const Dataset&, const TrainConfig&, std::uint64_t,
                     std::vector<double>*);

  void check_input(std::size_t n) const;
  void hidden_pre(std::span<const double> x, std::vector<double>& pre) const;

  ModelKind kind_ = ModelKind::LogReg;
  std::size_t input_dim_ = 0;
  // LogReg keeps its weights in w2_/b2_; w1_/b1_ stay empty.
  std::vector<double> w1_, b1_, w2_;
  double b2_ = 0.0;
};

/// Mini-batch SGD on mean cross-entropy. `loss_history`, when given, receives
/// the full-training-set loss after each epoch.
Model train(ModelKind kind, const Dataset& train, const TrainConfig& config, std::uint64_t seed,
            std::vector<double>* loss_history = nullptr);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  bool operator==(const Confusion&) const = default;
};

struct Metrics {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  Confusion confusion;
  bool operator==(const Metrics&) const = default;
};

Metrics metrics_from(const Confusion& c);
Metrics compute_metrics(const Labels& predicted, const Labels& truth);
Metrics evaluate(const Model& model, const Dataset& test);

std::string model_to_json(const Model& model);
Model model_from_json(std::string_view text);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace psguard
