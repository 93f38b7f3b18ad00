#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "psguard/correlation.hpp"
#include "psguard/error.hpp"

using namespace psguard;

namespace {

CorrMatrix from_abs(std::size_t d, std::vector<std::tuple<std::size_t, std::size_t, double>> pairs) {
  CorrMatrix m;
  for (std::size_t i = 0; i < d; ++i) m.feature_names.push_back("f" + std::to_string(i));
  m.r = Matrix(d, d, 0.0);
  for (std::size_t i = 0; i < d; ++i) m.r(i, i) = 1.0;
  for (auto [a, b, v] : pairs) m.r(a, b) = m.r(b, a) = v;
  return m;
}

MetadataCatalog catalog_for(const std::vector<Direction>& dirs) {
  std::vector<FeatureMetadata> entries;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    FeatureMetadata m;
    m.name = "f" + std::to_string(i);
    m.direction = dirs[i];
    entries.push_back(m);
  }
  return MetadataCatalog(entries);
}

Matrix random_matrix(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  Matrix x(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    double shared = g(rng);
    for (std::size_t j = 0; j < d; ++j) x(r, j) = (j % 2 ? shared : 0.0) + g(rng) * (1.0 + j);
  }
  return x;
}

std::vector<std::string> names(std::size_t d) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < d; ++i) out.push_back("f" + std::to_string(i));
  return out;
}

}  // namespace

TEST_CASE("pearson examples") {
  auto m = pearson_matrix(Matrix::from_rows({{1, 2, 3}, {2, 4, 2}, {3, 6, 1}}), {"u", "v", "w"});
  CHECK(m.r(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.r(0, 2) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(m.r(0, 0) == 1.0);
  CHECK(m.r(1, 1) == 1.0);
  CHECK_THROWS_AS(pearson_matrix(Matrix::from_rows({{1, 2}}), {"a", "b"}), Error);
}

TEST_CASE("constant columns correlate zero") {
  auto m = pearson_matrix(Matrix::from_rows({{1, 5}, {2, 5}, {3, 5}}), {"a", "k"});
  CHECK(m.r(0, 1) == 0.0);
  CHECK(m.r(1, 0) == 0.0);
  CHECK(m.r(1, 1) == 1.0);
}

TEST_CASE("pearson matches a two-pass oracle and stays in range") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = random_matrix(20, 6, rng);
    auto m = pearson_matrix(x, names(6));
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j) {
        const double expect = i == j ? 1.0 : oracle::pearson(x.column(i), x.column(j));
        CHECK(std::abs(m.r(i, j) - expect) < 1e-9);
        CHECK(std::abs(m.r(i, j)) <= 1.0 + 1e-12);
        CHECK(m.r(i, j) == m.r(j, i));
      }
    }
  }
}

TEST_CASE("high_corr_counts examples") {
  auto m = from_abs(3, {{0, 1, 0.9}, {0, 2, 0.1}, {1, 2, -0.85}});
  CHECK(high_corr_counts(m, 0.8) == std::vector<int>{1, 2, 1});
  CHECK(high_corr_counts(from_abs(4, {}), 0.8) == std::vector<int>{0, 0, 0, 0});
  CHECK(high_corr_counts(m, 0.95) == std::vector<int>{0, 0, 0});
  CHECK_THROWS_AS(high_corr_counts(m, 1.0), Error);
}

TEST_CASE("forward correlation counts") {
  // f0 backward, f1 and f2 forward, f3 backward.
  auto cat = catalog_for({Direction::Backward, Direction::Forward, Direction::Forward, Direction::Backward});
  auto one = from_abs(4, {{0, 1, 0.92}});
  CHECK(forward_corr_profile(one, cat, 0.8)[0] == 1);
  CHECK(forward_corr_profile(from_abs(4, {{0, 3, 0.99}}), cat, 0.8)[0] == 0);
  auto two = from_abs(4, {{0, 1, 0.85}, {0, 2, 0.81}, {0, 3, 0.9}});
  auto fwd = forward_corr_profile(two, cat, 0.8);
  CHECK(fwd[0] == 2);
  CHECK(high_corr_counts(two, 0.8)[0] == 3);

  auto wrong = catalog_for({Direction::Forward});
  CHECK_THROWS_AS(forward_corr_profile(two, wrong, 0.8), Error);
}

TEST_CASE("count properties on random matrices") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dir(0, 4);
  for (int trial = 0; trial < 30; ++trial) {
    auto x = random_matrix(30, 8, rng);
    auto m = pearson_matrix(x, names(8));
    std::vector<Direction> dirs;
    for (int i = 0; i < 8; ++i) dirs.push_back(static_cast<Direction>(dir(rng)));
    auto cat = catalog_for(dirs);
    std::vector<int> prev;
    for (double t = 0.05; t < 1.0; t += 0.05) {
      auto cf = high_corr_counts(m, t);
      auto fwd = forward_corr_profile(m, cat, t);
      auto g = export_graph(m, t);
      int sum = 0;
      for (std::size_t i = 0; i < cf.size(); ++i) {
        CHECK(fwd[i] <= cf[i]);
        if (!prev.empty()) CHECK(cf[i] <= prev[i]);
        sum += cf[i];
        int brute = 0;
        for (std::size_t j = 0; j < 8; ++j) brute += (j != i && std::abs(m.r(i, j)) >= t);
        CHECK(cf[i] == brute);
      }
      CHECK(g.edges.size() * 2 == static_cast<std::size_t>(sum));
      prev = cf;
    }
  }
}

TEST_CASE("export_graph examples") {
  CHECK(export_graph(from_abs(3, {}), 0.8).edges.empty());
  auto single = export_graph(from_abs(3, {{0, 2, -0.95}}), 0.8);
  REQUIRE(single.edges.size() == 1);
  CHECK(single.edges[0].a == 0);
  CHECK(single.edges[0].b == 2);
  CHECK(single.edges[0].abs_r == 0.95);
  auto full = from_abs(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {1, 2, 1}, {1, 3, 1}, {2, 3, 1}});
  CHECK(export_graph(full, 0.8).edges.size() == 6);
}

TEST_CASE("dot output lists one edge per passing pair") {
  auto g = export_graph(from_abs(3, {{0, 1, 0.95}, {1, 2, 0.5}}), 0.8);
  auto dot = to_dot(g);
  CHECK(dot.rfind("graph correlation {", 0) == 0);
  CHECK(dot.find("\"f0\" -- \"f1\" [weight=\"0.9500\"];") != std::string::npos);
  CHECK(dot.find("\"f1\" -- \"f2\"") == std::string::npos);
  CHECK(dot.back() == '\n');
}
