#include <doctest.h>

#include <random>

#include "psguard/defense.hpp"
#include "psguard/error.hpp"

using namespace psguard;

namespace {

ScoreReport report_of(std::vector<PsClass> classes) {
  ScoreReport r;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    PsBreakdown b;
    b.feature = "n" + std::to_string(i);
    b.class_label = classes[i];
    r.breakdowns.push_back(b);
  }
  return r;
}

const std::vector<PsClass> kLMH = {PsClass::Low, PsClass::Medium, PsClass::High};

}  // namespace

TEST_CASE("selection plans") {
  auto green = selection_plan(report_of(kLMH), SelectionPolicy::GreenOnly);
  CHECK(green.keep_indices == std::vector<std::size_t>{0});
  CHECK(green.keep_names == std::vector<std::string>{"n0"});
  REQUIRE(green.dropped.size() == 2);
  CHECK(green.dropped[1].second == PsClass::High);
  auto gy = selection_plan(report_of(kLMH), SelectionPolicy::GreenYellow);
  CHECK(gy.keep_indices == std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(selection_plan(report_of({PsClass::High, PsClass::High}), SelectionPolicy::GreenOnly), Error);
  CHECK_THROWS_AS(selection_plan(ScoreReport{}, SelectionPolicy::GreenOnly), Error);
}

TEST_CASE("green-only keep set is inside green-yellow") {
  std::mt19937 rng(2);
  for (int t = 0; t < 100; ++t) {
    std::vector<PsClass> cls(10);
    for (auto& c : cls) c = static_cast<PsClass>(rng() % 3);
    cls[0] = PsClass::Low;
    auto a = selection_plan(report_of(cls), SelectionPolicy::GreenOnly).keep_indices;
    auto b = selection_plan(report_of(cls), SelectionPolicy::GreenYellow).keep_indices;
    for (auto i : a) CHECK(std::find(b.begin(), b.end(), i) != b.end());
  }
}

TEST_CASE("mask vectors") {
  CHECK(mask_vector(report_of(kLMH), MaskScope::HighOnly) == std::vector<int>{1, 1, 0});
  CHECK(mask_vector(report_of(kLMH), MaskScope::HighAndMedium) == std::vector<int>{1, 0, 0});
  CHECK(mask_vector(report_of({PsClass::Low, PsClass::Low}), MaskScope::HighAndMedium) == std::vector<int>{1, 1});
}

TEST_CASE("neutral values") {
  auto col3 = Matrix::from_rows({{1}, {2}, {3}});
  auto col4 = Matrix::from_rows({{4}, {1}, {3}, {2}});
  CHECK(neutral_values(col3, parse_neutral("mean"))[0] == 2.0);
  CHECK(neutral_values(col4, parse_neutral("median"))[0] == 2.0);
  CHECK(neutral_values(col3, parse_neutral("median"))[0] == 2.0);
  auto c = neutral_values(Matrix::from_rows({{1, 2, 3}}), parse_neutral("const:0.5"));
  CHECK(c == std::vector<double>{0.5, 0.5, 0.5});
  CHECK_THROWS_AS(parse_neutral("const:"), Error);
  CHECK_THROWS_AS(parse_neutral("mode"), Error);
  CHECK_THROWS_AS(neutral_values(Matrix(0, 2), parse_neutral("mean")), Error);
}

TEST_CASE("apply_mask examples") {
  std::vector<int> m = {1, 0};
  std::vector<double> nu = {9, 7};
  auto x = Matrix::from_rows({{3, 5}});
  CHECK(apply_mask(m, nu, x) == Matrix::from_rows({{3, 7}}));
  CHECK(x == Matrix::from_rows({{3, 5}}));
  std::vector<int> ones = {1, 1};
  CHECK(apply_mask(ones, nu, x) == x);
  std::vector<int> zeros = {0, 0};
  auto z = apply_mask(zeros, nu, Matrix::from_rows({{1, 2}, {3, 4}}));
  CHECK(z == Matrix::from_rows({{9, 7}, {9, 7}}));
  std::vector<int> short_mask = {1};
  CHECK_THROWS_AS(apply_mask(short_mask, nu, x), Error);
}

TEST_CASE("apply_mask algebra on random inputs") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    const std::size_t d = 6;
    std::vector<int> m(d);
    std::vector<double> nu(d);
    for (std::size_t j = 0; j < d; ++j) {
      m[j] = static_cast<int>(rng() % 2);
      nu[j] = g(rng);
    }
    Matrix x(5, d), x2(5, d);
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        x(r, j) = g(rng);
        x2(r, j) = m[j] ? x(r, j) : g(rng);
      }
    }
    auto once = apply_mask(m, nu, x);
    CHECK(apply_mask(m, nu, once) == once);
    CHECK(apply_mask(m, nu, x2) == once);
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        if (m[j]) CHECK(once(r, j) == x(r, j));
      }
    }
  }
}

TEST_CASE("apply_selection") {
  Dataset d;
  d.feature_names = {"n0", "n1", "n2"};
  d.x = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  d.y = {0, 1};
  SelectionPlan p;
  p.keep_indices = {0, 2};
  auto s = apply_selection(p, d);
  CHECK(s.feature_names == std::vector<std::string>{"n0", "n2"});
  CHECK(s.x == Matrix::from_rows({{1, 3}, {4, 6}}));
  CHECK(s.y == d.y);
  p.keep_indices = {0, 1, 2};
  CHECK(apply_selection(p, d) == d);
  p.keep_indices = {5};
  CHECK_THROWS_AS(apply_selection(p, d), Error);
}

TEST_CASE("mask plan uses the training matrix for neutral values") {
  auto train = Matrix::from_rows({{0, 10, 1}, {2, 20, 1}, {4, 90, 1}});
  auto plan = make_mask_plan(report_of(kLMH), train, MaskScope::HighAndMedium, MaskPhase::InferenceOnly,
                             parse_neutral("median"));
  CHECK(plan.mask == std::vector<int>{1, 0, 0});
  CHECK(plan.neutral == std::vector<double>{2, 20, 1});
  CHECK(plan.masked_indices() == std::vector<std::size_t>{1, 2});
  CHECK_THROWS_AS(make_mask_plan(report_of(kLMH), Matrix(3, 2), MaskScope::HighOnly, MaskPhase::InferenceOnly,
                                 parse_neutral("mean")),
                  Error);
}
