#include "psguard/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "json_text.hpp"
#include "psguard/error.hpp"

namespace psguard {
namespace {

constexpr const char* kModule = "models";

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double clamp_score(double s) {
  return std::clamp(s, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorKind::Data, kModule, std::string("non-finite ") + what);
  }
}

}  // namespace

std::string_view to_string(ModelKind k) { return k == ModelKind::LogReg ? "logreg" : "mlp"; }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "logreg") return ModelKind::LogReg;
  if (text == "mlp") return ModelKind::Mlp;
  throw Error(ErrorKind::Usage, kModule, "unknown model kind '" + std::string(text) + "'");
}

Model Model::logreg(std::vector<double> w, double b) {
  check_finite(w, "weights");
  check_finite(std::span<const double>(&b, 1), "bias");
  Model m;
  m.kind_ = ModelKind::LogReg;
  m.input_dim_ = w.size();
  m.w2_ = std::move(w);
  m.b2_ = b;
  return m;
}

Model Model::mlp(std::size_t input_dim, std::vector<double> w1, std::vector<double> b1,
                 std::vector<double> w2, double b2) {
  if (b1.empty() || w1.size() != b1.size() * input_dim || w2.size() != b1.size()) {
    throw Error(ErrorKind::Data, kModule, "inconsistent Mlp parameter shapes");
  }
  check_finite(w1, "weights");
  check_finite(b1, "biases");
  check_finite(w2, "weights");
  check_finite(std::span<const double>(&b2, 1), "bias");
  Model m;
  m.kind_ = ModelKind::Mlp;
  m.input_dim_ = input_dim;
  m.w1_ = std::move(w1);
  m.b1_ = std::move(b1);
  m.w2_ = std::move(w2);
  m.b2_ = b2;
  return m;
}

void Model::check_input(std::size_t n) const {
  if (n != input_dim_) {
    throw Error(ErrorKind::Data, kModule,
                "model expects " + std::to_string(input_dim_) + " features, got " + std::to_string(n));
  }
}

void Model::hidden_pre(std::span<const double> x, std::vector<double>& pre) const {
  const std::size_t h = b1_.size();
  pre.assign(b1_.begin(), b1_.end());
  for (std::size_t k = 0; k < h; ++k) {
    const double* row = w1_.data() + k * input_dim_;
    for (std::size_t j = 0; j < input_dim_; ++j) pre[k] += row[j] * x[j];
  }
}

double Model::logit(std::span<const double> x) const {
  check_input(x.size());
  if (kind_ == ModelKind::LogReg) {
    return std::inner_product(w2_.begin(), w2_.end(), x.begin(), b2_);
  }
  std::vector<double> pre;
  hidden_pre(x, pre);
  double z = b2_;
  for (std::size_t k = 0; k < pre.size(); ++k) z += w2_[k] * std::max(0.0, pre[k]);
  return z;
}

double Model::score(std::span<const double> x) const { return clamp_score(sigmoid(logit(x))); }

std::vector<double> Model::scores(const Matrix& x) const {
  check_input(x.cols());
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = score(x.row(r));
  return out;
}

Prediction Model::predict(const Matrix& x) const {
  Prediction p;
  p.scores = scores(x);
  p.labels.reserve(p.scores.size());
  for (double s : p.scores) p.labels.push_back(s >= 0.5 ? 1 : 0);
  return p;
}

double Model::loss(std::span<const double> x, int target) const {
  double z = logit(x);
  return softplus(z) - static_cast<double>(target) * z;
}

double Model::mean_loss(const Matrix& x, const Labels& y) const {
  if (x.rows() != y.size() || y.empty()) throw Error(ErrorKind::Data, kModule, "loss: shape mismatch");
  double total = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) total += loss(x.row(r), y[r]);
  return total / static_cast<double>(y.size());
}

std::vector<double> Model::input_gradient(std::span<const double> x, int target) const {
  check_input(x.size());
  const double dz = sigmoid(logit(x)) - static_cast<double>(target);
  std::vector<double> g(input_dim_, 0.0);
  if (kind_ == ModelKind::LogReg) {
    for (std::size_t j = 0; j < input_dim_; ++j) g[j] = dz * w2_[j];
    return g;
  }
  std::vector<double> pre;
  hidden_pre(x, pre);
  for (std::size_t k = 0; k < pre.size(); ++k) {
    if (pre[k] <= 0.0) continue;
    const double back = dz * w2_[k];
    const double* row = w1_.data() + k * input_dim_;
    for (std::size_t j = 0; j < input_dim_; ++j) g[j] += back * row[j];
  }
  return g;
}

Model train(ModelKind kind, const Dataset& data, const TrainConfig& config, std::uint64_t seed,
            std::vector<double>* loss_history) {
  if (data.size() == 0) throw Error(ErrorKind::Data, kModule, "empty training set");
  data.check();
  if (config.epochs < 1 || config.batch_size < 1 || !(config.learning_rate > 0.0) ||
      (kind == ModelKind::Mlp && config.hidden < 1)) {
    throw Error(ErrorKind::Usage, kModule, "invalid training configuration");
  }
  const std::size_t n = data.size();
  const std::size_t d = data.num_features();
  const std::size_t h = kind == ModelKind::Mlp ? config.hidden : 0;

  std::mt19937_64 rng(seed);
  auto uniform_init = [&](std::vector<double>& v, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& x : v) x = dist(rng);
  };

  Model m;
  m.kind_ = kind;
  m.input_dim_ = d;
  m.config = config;
  m.seed = seed;
  if (kind == ModelKind::LogReg) {
    m.w2_.resize(d);
    uniform_init(m.w2_, d);
  } else {
    m.w1_.resize(h * d);
    m.b1_.assign(h, 0.0);
    m.w2_.resize(h);
    uniform_init(m.w1_, d);
    uniform_init(m.w2_, h);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> gw1(m.w1_.size()), gb1(m.b1_.size()), gw2(m.w2_.size());
  std::vector<double> pre;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      std::fill(gw1.begin(), gw1.end(), 0.0);
      std::fill(gb1.begin(), gb1.end(), 0.0);
      std::fill(gw2.begin(), gw2.end(), 0.0);
      double gb2 = 0.0;
      for (std::size_t t = start; t < end; ++t) {
        auto x = data.x.row(order[t]);
        const double target = data.y[order[t]];
        if (kind == ModelKind::LogReg) {
          const double dz = sigmoid(std::inner_product(m.w2_.begin(), m.w2_.end(), x.begin(), m.b2_)) - target;
          for (std::size_t j = 0; j < d; ++j) gw2[j] += dz * x[j];
          gb2 += dz;
          continue;
        }
        m.hidden_pre(x, pre);
        double z = m.b2_;
        for (std::size_t k = 0; k < h; ++k) z += m.w2_[k] * std::max(0.0, pre[k]);
        const double dz = sigmoid(z) - target;
        gb2 += dz;
        for (std::size_t k = 0; k < h; ++k) {
          if (pre[k] <= 0.0) continue;
          gw2[k] += dz * pre[k];
          const double back = dz * m.w2_[k];
          gb1[k] += back;
          double* row = gw1.data() + k * d;
          for (std::size_t j = 0; j < d; ++j) row[j] += back * x[j];
        }
      }
      const double step = config.learning_rate / static_cast<double>(end - start);
      for (std::size_t i = 0; i < gw1.size(); ++i) m.w1_[i] -= step * gw1[i];
      for (std::size_t i = 0; i < gb1.size(); ++i) m.b1_[i] -= step * gb1[i];
      for (std::size_t i = 0; i < gw2.size(); ++i) m.w2_[i] -= step * gw2[i];
      m.b2_ -= step * gb2;
    }
    const double epoch_loss = m.mean_loss(data.x, data.y);
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorKind::Data, kModule, "training diverged (non-finite loss) at epoch " +
                                                std::to_string(epoch + 1));
    }
    if (loss_history) loss_history->push_back(epoch_loss);
  }
  return m;
}

Metrics metrics_from(const Confusion& c) {
  auto ratio = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };
  Metrics m;
  m.confusion = c;
  const double tp = static_cast<double>(c.tp);
  const double total = static_cast<double>(c.tp + c.fp + c.tn + c.fn);
  m.accuracy = ratio(tp + static_cast<double>(c.tn), total);
  m.precision = ratio(tp, tp + static_cast<double>(c.fp));
  m.recall = ratio(tp, tp + static_cast<double>(c.fn));
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

Metrics compute_metrics(const Labels& predicted, const Labels& truth) {
  if (predicted.size() != truth.size()) throw Error(ErrorKind::Data, kModule, "label length mismatch");
  if (truth.empty()) throw Error(ErrorKind::Data, kModule, "empty evaluation set");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == 1;
    const bool t = truth[i] == 1;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return metrics_from(c);
}

Metrics evaluate(const Model& model, const Dataset& test) {
  if (test.size() == 0) throw Error(ErrorKind::Data, kModule, "empty evaluation set");
  return compute_metrics(model.predict(test.x).labels, test.y);
}

std::string model_to_json(const Model& model) {
  detail::ojson doc;
  doc["kind"] = std::string(to_string(model.kind()));
  doc["dims"] = {{"input", model.input_dim()}, {"hidden", model.hidden()}};
  doc["w1"] = model.w1();
  doc["b1"] = model.b1();
  doc["w2"] = model.w2();
  doc["b2"] = model.b2();
  doc["training_config"] = {{"learning_rate", model.config.learning_rate},
                            {"epochs", model.config.epochs},
                            {"batch_size", model.config.batch_size},
                            {"hidden", model.config.hidden},
                            {"seed", model.seed}};
  return detail::dump_json(doc, "%.17g");
}

Model model_from_json(std::string_view text) {
  try {
    auto doc = nlohmann::json::parse(text);
    const auto kind = parse_model_kind(doc.at("kind").get<std::string>());
    const auto input = doc.at("dims").at("input").get<std::size_t>();
    const auto hidden = doc.at("dims").at("hidden").get<std::size_t>();
    auto w2 = doc.at("w2").get<std::vector<double>>();
    const double b2 = doc.at("b2").get<double>();
    Model m;
    if (kind == ModelKind::LogReg) {
      if (w2.size() != input || hidden != 0) {
        throw Error(ErrorKind::Data, kModule, "model file dimensions are inconsistent");
      }
      m = Model::logreg(std::move(w2), b2);
    } else {
      auto b1 = doc.at("b1").get<std::vector<double>>();
      if (b1.size() != hidden) throw Error(ErrorKind::Data, kModule, "model file dimensions are inconsistent");
      m = Model::mlp(input, doc.at("w1").get<std::vector<double>>(), std::move(b1), std::move(w2), b2);
    }
    const auto& tc = doc.at("training_config");
    m.config.learning_rate = tc.at("learning_rate").get<double>();
    m.config.epochs = tc.at("epochs").get<int>();
    m.config.batch_size = tc.at("batch_size").get<std::size_t>();
    m.config.hidden = tc.at("hidden").get<std::size_t>();
    m.seed = tc.at("seed").get<std::uint64_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Data, kModule, std::string("bad model file: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  detail::write_file_atomic(path, model_to_json(model), kModule);
}

Model load_model(const std::filesystem::path& path) {
  return model_from_json(detail::read_file(path, kModule));
}

}  // namespace psguard
