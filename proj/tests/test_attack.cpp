#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "psguard/attack.hpp"
#include "psguard/defense.hpp"
#include "psguard/error.hpp"

using namespace psguard;

namespace {

AttackConstraints box(std::size_t d, std::vector<std::size_t> allowed, double eps, double lo = -1e9, double hi = 1e9) {
  AttackConstraints c;
  c.allowed = std::move(allowed);
  c.lower.assign(d, lo);
  c.upper.assign(d, hi);
  c.integer_snap.assign(d, 0);
  c.grid_origin.assign(d, 0.0);
  c.grid_step.assign(d, 0.0);
  c.epsilon = eps;
  return c;
}

void check_containment(const Matrix& x, const Matrix& adv, const AttackConstraints& c) {
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const bool allowed = std::find(c.allowed.begin(), c.allowed.end(), j) != c.allowed.end();
      if (!allowed) {
        CHECK(adv(r, j) == x(r, j));
      } else {
        CHECK(std::abs(adv(r, j) - x(r, j)) <= c.epsilon + 1e-12);
      }
    }
  }
}

Matrix random_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix x(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) x(r, j) = g(rng);
  }
  return x;
}

}  // namespace

TEST_CASE("gradient sign attack examples") {
  auto m = Model::logreg({3}, 0);
  auto x = Matrix::from_rows({{0.1}});
  Labels y = {1};
  auto c = box(1, {0}, 0.3, -1, 1);
  auto adv = gradient_sign_attack(m, x, y, c);
  CHECK(adv(0, 0) == doctest::Approx(-0.2));
  CHECK(m.predict(adv).labels[0] == 0);

  c.epsilon = 0.0;
  CHECK(gradient_sign_attack(m, x, y, c) == x);
  c.allowed.clear();
  CHECK_THROWS_AS(gradient_sign_attack(m, x, y, c), Error);
}

TEST_CASE("attacks stay inside the allowed set, epsilon ball and box") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> w1(4 * 5), b1(4), w2(4);
  for (auto& v : w1) v = g(rng);
  for (auto& v : b1) v = g(rng);
  for (auto& v : w2) v = g(rng);
  auto model = Model::mlp(5, w1, b1, w2, 0.1);
  auto x = random_rows(40, 5, 2);
  Labels y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = static_cast<int>(i % 2);
  auto c = box(5, {1, 3}, 0.4, -1.5, 1.5);
  c.integer_snap[3] = 1;
  c.grid_origin[3] = 0.05;
  c.grid_step[3] = 0.25;

  auto adv = gradient_sign_attack(model, x, y, c);
  check_containment(x, adv, c);
  auto q = query_attack([&](const Matrix& m) { return model.scores(m); }, x, y, c, 30, 9);
  check_containment(x, q, c);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (auto* out : {&adv, &q}) {
      const double v = (*out)(r, 3);
      if (v != x(r, 3)) {
        const double k = (v - 0.05) / 0.25;
        CHECK(std::abs(k - std::round(k)) < 1e-9);
      }
      const double lo = std::min(-1.5, x(r, 1)), hi = std::max(1.5, x(r, 1));
      CHECK((*out)(r, 1) >= lo);
      CHECK((*out)(r, 1) <= hi);
    }
  }
}

TEST_CASE("snapping rounds half away from zero and falls back toward x") {
  auto c = box(1, {0}, 1.0, -10, 10);
  c.integer_snap[0] = 1;
  c.grid_origin[0] = 0.0;
  c.grid_step[0] = 1.0;
  CHECK(project_value(2.5, 2.0, 1.0, 0, c) == 3.0);
  CHECK(project_value(-2.5, -2.0, 1.0, 0, c) == -3.0);
  CHECK(project_value(1.0, 0.4, 0.6, 0, c) == 1.0);
  CHECK(project_value(-0.3, 0.4, 0.7, 0, c) == 0.0);
  // 0.55 snaps to 1 (outside), one step back is 0 (outside), so x is kept.
  CHECK(project_value(0.55, 0.3, 0.25, 0, c) == 0.3);
}

TEST_CASE("query attack agrees with the white-box attack on a separable set") {
  auto model = Model::logreg({2.0, 1.0}, 0.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix x(200, 2);
  Labels y(200);
  for (std::size_t r = 0; r < 200; ++r) {
    x(r, 0) = u(rng);
    x(r, 1) = u(rng);
    y[r] = 2 * x(r, 0) + x(r, 1) > 0 ? 1 : 0;
  }
  auto c = box(2, {0, 1}, 0.3, -2, 2);
  auto oracle = [&](const Matrix& m) { return model.scores(m); };
  const auto base = model.predict(x).labels;
  const double white = asr(base, model.predict(gradient_sign_attack(model, x, y, c)).labels, y);
  const double black = asr(base, model.predict(query_attack(oracle, x, y, c, 100, 1)).labels, y);
  CHECK(white > 0.05);
  CHECK(std::abs(white - black) <= 0.1);
  CHECK(query_attack(oracle, x, y, c, 100, 1) == query_attack(oracle, x, y, c, 100, 1));
}

TEST_CASE("query attack is a no-op on flat directions and tiny budgets") {
  auto model = Model::logreg({1.0, 0.0, 0.0}, 0.0);
  auto x = random_rows(20, 3, 5);
  Labels y(20, 1);
  auto oracle = [&](const Matrix& m) { return model.scores(m); };
  auto c = box(3, {1, 2}, 0.5);
  auto adv = query_attack(oracle, x, y, c, 50, 3);
  auto s0 = model.scores(x), s1 = model.scores(adv);
  for (std::size_t i = 0; i < s0.size(); ++i) CHECK(std::abs(s0[i] - s1[i]) <= 1e-9);
  CHECK(query_attack(oracle, x, y, box(3, {0}, 0.5), 1, 3) == x);
  CHECK_THROWS_AS(query_attack(oracle, x, y, box(3, {0}, 0.5), 0, 3), Error);

  int calls = 0;
  auto counting = [&](const Matrix& m) {
    ++calls;
    return model.scores(m);
  };
  query_attack(counting, x.select_rows(std::vector<std::size_t>{0}), Labels{1}, box(3, {0, 1, 2}, 0.5), 7, 3);
  CHECK(calls <= 7);
}

TEST_CASE("gradient sign ASR grows with epsilon when nothing clips") {
  auto model = Model::logreg({1.5, -0.5, 2.0}, 0.2);
  auto x = random_rows(300, 3, 6);
  Labels y = model.predict(x).labels;
  double prev = 0.0;
  for (double eps = 0.0; eps <= 2.0; eps += 0.1) {
    auto adv = gradient_sign_attack(model, x, y, box(3, {0, 1, 2}, eps));
    double a = asr(y, model.predict(adv).labels, y);
    CHECK(a >= prev);
    prev = a;
  }
  CHECK(prev > 0.5);
}

TEST_CASE("asr counts only originally correct flips over all attempts") {
  CHECK(asr({1, 1, 1, 1}, {0, 1, 1, 1}, {1, 1, 1, 1}) == 0.25);
  CHECK(asr({0, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}) == 0.0);
  CHECK(asr({0, 1, 1, 1}, {1, 0, 1, 1}, {1, 1, 1, 1}) == 0.25);
  CHECK(asr({1, 0}, {1, 0}, {1, 0}) == 0.0);
  CHECK_THROWS_AS(asr({}, {}, {}), Error);
  CHECK_THROWS_AS(asr({1}, {1, 0}, {1}), Error);

  std::mt19937 rng(3);
  for (int t = 0; t < 50; ++t) {
    Labels a(12), b(12), y(12);
    for (std::size_t i = 0; i < 12; ++i) {
      a[i] = static_cast<int>(rng() % 2);
      b[i] = static_cast<int>(rng() % 2);
      y[i] = static_cast<int>(rng() % 2);
    }
    const double base = asr(a, b, y);
    CHECK(base >= 0.0);
    CHECK(base <= 1.0);
    std::vector<std::size_t> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Labels pa, pb, py;
    for (auto i : perm) {
      pa.push_back(a[i]);
      pb.push_back(b[i]);
      py.push_back(y[i]);
    }
    CHECK(asr(pa, pb, py) == base);
  }
}

TEST_CASE("morph attack shifts mapped features together") {
  MorphMap map;
  map.entries = {{"payload_padding", {"total_fwd_len", "fwd_pkt_len_max"}, MorphDirection::Increase}};
  std::vector<std::string> cols = {"total_fwd_len", "fwd_pkt_len_max", "dst_port"};
  auto x = Matrix::from_rows({{1.0, 2.0, 3.0}, {0.0, 0.0, 0.0}});
  auto c = box(3, {0, 1}, 0.0);
  auto adv = morph_attack(x, map, cols, 0.5, 1, c);
  CHECK(adv == Matrix::from_rows({{1.5, 2.5, 3.0}, {0.5, 0.5, 0.0}}));
  CHECK(morph_attack(x, map, cols, 0.0, 1, c) == x);

  MorphMap bad;
  bad.entries = {{"m", {"nope"}, MorphDirection::Decrease}};
  CHECK_THROWS_AS(morph_attack(x, bad, cols, 0.5, 1, c), Error);
  CHECK_THROWS_AS(morph_attack(x, MorphMap{}, cols, 0.5, 1, c), Error);
  CHECK_THROWS_AS(morph_attack(x, map, cols, 0.5, 1, c, {"unknown_morph"}), Error);
}

TEST_CASE("morph attack clips to the box and draws seeded signs") {
  MorphMap map;
  map.entries = {{"shift", {"a", "b"}, MorphDirection::Either}, {"drop", {"c"}, MorphDirection::Decrease}};
  std::vector<std::string> cols = {"a", "b", "c"};
  auto x = random_rows(50, 3, 8);
  auto c = box(3, {0, 1, 2}, 0.0, -1.0, 1.0);
  auto adv = morph_attack(x, map, cols, 0.3, 5, c);
  CHECK(morph_attack(x, map, cols, 0.3, 5, c) == adv);
  int ups = 0;
  for (std::size_t r = 0; r < 50; ++r) {
    const double da = adv(r, 0) - x(r, 0);
    const double db = adv(r, 1) - x(r, 1);
    if (std::abs(x(r, 0)) < 0.6 && std::abs(x(r, 1)) < 0.6) {
      CHECK(std::abs(std::abs(da) - 0.3) < 1e-12);
      CHECK(da * db > 0);
      ups += da > 0;
    }
    CHECK(adv(r, 2) <= x(r, 2));
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(adv(r, j) >= std::min(-1.0, x(r, j)));
      CHECK(adv(r, j) <= std::max(1.0, x(r, j)));
    }
  }
  CHECK(ups > 0);
}

TEST_CASE("morphs on masked features vanish after masking") {
  MorphMap map;
  map.entries = {{"pad", {"h1", "h2"}, MorphDirection::Increase}};
  std::vector<std::string> cols = {"l0", "h1", "h2"};
  auto x = random_rows(10, 3, 9);
  auto adv = morph_attack(x, map, cols, 0.7, 2, box(3, {1, 2}, 0.0));
  std::vector<int> m = {1, 0, 0};
  std::vector<double> nu = {0, 0.1, 0.2};
  CHECK(apply_mask(m, nu, adv) == apply_mask(m, nu, x));
}

TEST_CASE("morph map files") {
  auto map = load_morph_map(PSGUARD_DATA_DIR "/unsw_nb15_morph_map.json");
  CHECK(map.entries.size() >= 5);
  CHECK(parse_morph_map(serialize_morph_map(map)) == map);
  CHECK_THROWS_AS(parse_morph_map(R"([{"morph": "x", "features": ["a"], "direction": "up"}])"), Error);
  CHECK_THROWS_AS(parse_morph_map(R"([{"morph": "x", "features": [], "direction": "either"}])"), Error);
  CHECK_THROWS_AS(parse_morph_map("[]"), Error);
}

TEST_CASE("pipeline evaluation reports post-defense ASR") {
  auto model = Model::logreg({1.0, 1.0}, 0.0);
  DefendedPipeline p{"b2", &model, [](const Matrix& m) {
                       std::vector<int> mask = {1, 0};
                       std::vector<double> nu = {0.0, 0.0};
                       return apply_mask(mask, nu, m);
                     }};
  Dataset clean;
  clean.feature_names = {"a", "b"};
  clean.x = Matrix::from_rows({{1, 1}, {-1, -1}});
  clean.y = {1, 0};
  auto x = Matrix::from_rows({{0.5, 0.5}, {0.5, 0.2}});
  auto adv = Matrix::from_rows({{0.5, -9.0}, {0.5, -9.0}});
  auto out = evaluate_pipeline(p, clean, x, adv, {1, 1});
  CHECK(out.asr == 0.0);
  CHECK(out.metrics.accuracy == 1.0);
}
