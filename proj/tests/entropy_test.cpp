#include <doctest.h>

#include <map>

#include "affdim/entropy.hpp"
#include "affdim/fixtures.hpp"
#include "helpers.hpp"

using namespace affdim;

namespace {

const ProjectivePointd e1(0.0), e2(std::numbers::pi / 2);

PlaneMeasure random_discrete(Rng& rng, int atoms, double spread = 1) {
  PlaneMeasure nu;
  for (int i = 0; i < atoms; ++i) nu.push_back(Vector2d(rng.uniform() * spread, rng.uniform() * spread), rng.uniform() + 0.01);
  nu.normalize();
  return nu;
}

// Entropy by an ordered map of cells, independent of the sort-based path.
double map_entropy(const PlaneMeasure& nu, int n) {
  std::map<std::pair<long, long>, double> cells;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    cells[{static_cast<long>(std::floor(nu.atoms[i](0) * std::ldexp(1.0, n))),
           static_cast<long>(std::floor(nu.atoms[i](1) * std::ldexp(1.0, n)))}] += nu.weights[i];
  }
  std::vector<double> masses;
  for (const auto& [k, v] : cells) masses.push_back(v);
  return testing::shannon_bits(masses);
}

}  // namespace

TEST_CASE("cell_index uses half-open dyadic cells") {
  const auto id = cell_index(Vector2d(0.3, 0.7), DyadicFrame::standard2d(1));
  CHECK(id[0] == 0);
  CHECK(id[1] == 1);
  const auto edge = cell_index(Vector2d(0.5, 0.5), DyadicFrame::standard2d(1));
  CHECK(edge[0] == 1);
  CHECK(edge[1] == 1);
  CHECK(cell_index(-0.25, DyadicFrame::standard1d(2))[0] == -1);
}

TEST_CASE("non-conformal frame indexes by the standard cell of (VD)^-1 x") {
  const AffineMap2d g = AffineMap2d::Linear(Vector2d(1, 1.0 / 16).asDiagonal());
  const auto frame = DyadicFrame::nonconformal(g, 0);
  const auto id = cell_index(Vector2d(0.3, 0.05), frame);
  CHECK(id[0] == 0);
  CHECK(id[1] == 0);
  CHECK(cell_index(Vector2d(0.3, 0.07), frame)[1] == 1);
  CHECK_THROWS_AS(DyadicFrame::nonconformal(AffineMap2d::Linear(0.5 * rotation(0.3)), 2), Error);
}

TEST_CASE("affine grid frame indexes all six coordinates") {
  const AffineMap2d f(Matrix2d{{0.26, 0.74}, {-0.1, 0.5}}, Vector2d(1.5, -0.3));
  const auto id = cell_index(f, DyadicFrame::affine_grid(2));
  const std::array<std::int64_t, 6> expected{1, 2, -1, 2, 6, -2};
  for (int i = 0; i < 6; ++i) CHECK(id[static_cast<std::size_t>(i)] == expected[static_cast<std::size_t>(i)]);
}

TEST_CASE("entropy basics") {
  PlaneMeasure point;
  point.push_back(Vector2d(0.2, 0.2), 1);
  CHECK(entropy(point, DyadicFrame::standard2d(20)).bits == 0);

  const PlaneMeasure four = PlaneMeasure::uniform({{0.1, 0.1}, {0.6, 0.1}, {0.1, 0.6}, {0.6, 0.6}});
  const auto h = entropy(four, DyadicFrame::standard2d(1));
  CHECK(h.bits == doctest::Approx(2));
  CHECK(h.cells == 4);
  CHECK(h.correction == doctest::Approx(3 / (2 * 4 * std::log(2.0))));
}

TEST_CASE("entropy agrees with an independent map-based count") {
  Rng rng(1, 0);
  for (int t = 0; t < 50; ++t) {
    const PlaneMeasure nu = random_discrete(rng, 300, 3);
    for (int n : {0, 2, 5}) CHECK(entropy(nu, DyadicFrame::standard2d(n)).bits == doctest::Approx(map_entropy(nu, n)).epsilon(1e-12));
  }
}

TEST_CASE("chain rule and component identity are exact") {
  Rng rng(2, 0);
  for (int t = 0; t < 30; ++t) {
    const PlaneMeasure nu = random_discrete(rng, 500);
    for (int n : {1, 3, 5}) {
      const auto fine = DyadicFrame::standard2d(n + 3), coarse = DyadicFrame::standard2d(n);
      const double cond = conditional_entropy(nu, fine, coarse).bits;
      CHECK(std::abs(entropy(nu, fine).bits - entropy(nu, coarse).bits - cond) < 1e-12);
      CHECK(std::abs(expected_component_entropy(nu, n, 3) - cond) < 1e-12);
    }
  }
}

TEST_CASE("concavity sandwich on random mixtures") {
  Rng rng(3, 0);
  for (int t = 0; t < 100; ++t) {
    const int k = 2 + t % 4;
    std::vector<PlaneMeasure> parts;
    std::vector<double> q;
    for (int i = 0; i < k; ++i) {
      parts.push_back(random_discrete(rng, 20 + t));
      q.push_back(rng.uniform() + 0.05);
    }
    double qt = 0;
    for (double x : q) qt += x;
    PlaneMeasure mix;
    double avg = 0;
    const auto frame = DyadicFrame::standard2d(4);
    for (int i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < parts[i].size(); ++j) mix.push_back(parts[i].atoms[j], q[i] / qt * parts[i].weights[j]);
      avg += q[i] / qt * entropy(parts[i], frame).bits;
    }
    const double h = entropy(mix, frame).bits;
    CHECK(h >= avg - 1e-12);
    CHECK(h <= avg + testing::shannon_bits(q) + 1e-12);
  }
}

TEST_CASE("translation, scaling and rotated-frame commensurability") {
  Rng rng(4, 0);
  for (int t = 0; t < 1000; ++t) {
    const PlaneMeasure nu = random_discrete(rng, 50);
    const int n = 1 + t % 6;
    const double h = entropy(nu, DyadicFrame::standard2d(n)).bits;
    const AffineMap2d shift = AffineMap2d::Translation(Vector2d(rng.uniform() * 5, rng.uniform() * 5));
    CHECK(std::abs(entropy(push_forward(shift, nu), DyadicFrame::standard2d(n)).bits - h) <= 2);
    const AffineMap2d scale = AffineMap2d::Linear(Matrix2d(0.25 * Matrix2d::Identity()));
    CHECK(std::abs(entropy(push_forward(scale, nu), DyadicFrame::standard2d(n + 2)).bits - h) <= 2);
    const ProjectivePointd w(rng.uniform() * 3);
    CHECK(std::abs(entropy(nu, DyadicFrame::rotated(w, n)).bits - h) <= std::log2(9.0));
  }
}

TEST_CASE("convolution does not decrease entropy by more than 2 bits") {
  Rng rng(5, 0);
  for (int t = 0; t < 200; ++t) {
    const PlaneMeasure a = random_discrete(rng, 10), b = random_discrete(rng, 30);
    PlaneMeasure sum;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) sum.push_back(a.atoms[i] + b.atoms[j], a.weights[i] * b.weights[j]);
    }
    const auto frame = DyadicFrame::standard2d(1 + t % 6);
    CHECK(entropy(sum, frame).bits >= entropy(b, frame).bits - 2);
  }
}

TEST_CASE("components") {
  PlaneMeasure one_cell = PlaneMeasure::uniform({{0.1, 0.1}, {0.2, 0.3}, {0.4, 0.05}});
  const auto c = components(one_cell, 1);
  REQUIRE(c.size() == 1);
  CHECK(c[0].mass == doctest::Approx(1));
  for (int s = 0; s < 10; ++s) CHECK(draw_component(one_cell, 1, s).cell == c[0].cell);
  CHECK(c[0].rescaled.atoms[1](0) == doctest::Approx(0.4));

  const PlaneMeasure nu = PlaneMeasure::uniform({{0.1, 0.1}, {0.2, 0.1}, {0.9, 0.9}, {0.6, 0.1}});
  int upper = 0;
  for (int s = 0; s < 4000; ++s) upper += draw_component(nu, 1, s).cell[1] == 1;
  CHECK(upper / 4000.0 == doctest::Approx(0.25).epsilon(0.1));
  PlaneMeasure empty;
  CHECK_THROWS_AS(draw_component(empty, 1, 0), Error);
}

TEST_CASE("entropy dimension of Lebesgue, segment and a self-similar set") {
  const PlaneMeasure square = testing::uniform_square(1'000'000, 1);
  CHECK(entropy_dimension(square, 4, 8).slope == doctest::Approx(2).epsilon(0.01));
  const PlaneMeasure segment = testing::horizontal_segment(1'000'000, 0.4, 1);
  CHECK(entropy_dimension(segment, 4, 8).slope == doctest::Approx(1).epsilon(0.02));

  IfsSystem cantor{"cantor",
                   {AffineMap2d(Matrix2d(Matrix2d::Identity() / 3), Vector2d(0, 0)),
                    AffineMap2d(Matrix2d(Matrix2d::Identity() / 3), Vector2d(2.0 / 3, 0))},
                   {0.5, 0.5}};
  const PlaneMeasure mu = sample_measure(cantor, 1'000'000, 24, 2);
  CHECK(std::abs(entropy_dimension(mu, 4, 14).slope - std::log(2.0) / std::log(3.0)) <= 0.03);

  CHECK_THROWS_AS(entropy_dimension(testing::uniform_square(1000, 2), 2, 8), Error);
}

TEST_CASE("multiscale check") {
  PlaneMeasure point;
  point.push_back(Vector2d(0.3, 0.3), 1);
  const auto p = multiscale_check(point, 0, 8, 2);
  CHECK(p.direct == 0);
  CHECK(p.averaged == 0);
  const auto sq = multiscale_check(testing::uniform_square(200000, 3), 0, 8, 2);
  CHECK(sq.deviation < 2);
  const auto seg = multiscale_check(testing::horizontal_segment(200000, 0.2, 3), 0, 8, 2);
  CHECK(seg.deviation < 2);
}

TEST_CASE("component resampling TV is O(m/n)") {
  PlaneMeasure cylinders;
  for (const auto& w : enumerate_level(fixture_dyadic_homothety(), 8)) cylinders.push_back(w.map.translation, w.prob);
  for (int n : {64, 128, 256}) {
    const double tv = component_resampling_tv(cylinders, n, 8);
    CHECK(tv >= 0);
    CHECK(tv * n / 8 <= 4);
  }
}

TEST_CASE("projection entropy") {
  const PlaneMeasure square = testing::uniform_square(1'000'000, 4);
  for (double a : {0.0, 0.4, 1.2}) CHECK(projection_entropy(square, ProjectivePointd(a), 10).bits / 10 > 0.9);
  const PlaneMeasure segment = testing::horizontal_segment(200000, 0.0, 4);
  CHECK(projection_entropy(segment, e2, 10).bits == 0);
  CHECK(projection_entropy(segment, e1, 10).bits == doctest::Approx(10).epsilon(0.01));
  const auto sweep = projection_entropy_sweep(segment, 8, 64);
  CHECK(sweep.angles.size() == 64);
  CHECK(rp1_distance(sweep.argmin, e2) < 0.05);
  CHECK_THROWS_AS(projection_entropy_sweep(segment, 8, 16), Error);

  const LineMeasure line = project(segment, e1);
  for (std::size_t i = 0; i < 100; ++i) CHECK(line.atoms[i] == segment.atoms[i](0));
}

TEST_CASE("thickened slices") {
  const PlaneMeasure square = testing::uniform_square(1'000'000, 5);
  const auto s = thickened_slice_entropy(square, e1, 3, 8);
  CHECK(s.strips == 8);
  CHECK(s.mean_bits == doctest::Approx(8).epsilon(0.02));

  PlaneMeasure vertical;
  Rng rng(5, 1);
  for (int i = 0; i < 100000; ++i) vertical.push_back(Vector2d(0.3, rng.uniform()), 1e-5);
  const auto v = thickened_slice_entropy(vertical, e1, 3, 8);
  CHECK(v.strips == 1);
  CHECK(v.mean_bits == doctest::Approx(8).epsilon(0.02));
}

TEST_CASE("concentration predicates") {
  const PlaneMeasure segment = testing::horizontal_segment(20000, 0.0, 6);
  const PlaneMeasure square = testing::uniform_square(20000, 6);
  CHECK(is_concentrated(segment, e1, 1e-6));
  CHECK_FALSE(is_concentrated(square, e2, 0.1));
  CHECK(max_strip_mass(square, e2, 0.1) == doctest::Approx(0.2).epsilon(0.1));

  PlaneMeasure two = testing::horizontal_segment(10000, 0.2, 7);
  for (const auto& p : testing::horizontal_segment(10000, 0.7, 8).atoms) two.push_back(p, 0);
  two.weights.assign(two.size(), 1.0 / two.size());
  CHECK(is_concentrated_multi(two, e1, 0.01, 2));
  CHECK_FALSE(is_concentrated(two, e1, 0.01));

  PlaneMeasure point;
  point.push_back(Vector2d(0.5, 0.5), 1);
  CHECK(is_point_concentrated(point, 0.01));
  CHECK_FALSE(is_point_concentrated(square, 0.1));

  // Monotone in delta.
  Rng rng(6, 0);
  for (int t = 0; t < 50; ++t) {
    const PlaneMeasure nu = random_discrete(rng, 200);
    const ProjectivePointd w(rng.uniform() * 3);
    bool prev = false;
    for (double d : {0.01, 0.05, 0.1, 0.2, 0.4, 0.8}) {
      const bool now = is_concentrated(nu, w, d);
      CHECK((!prev || now));
      prev = now;
    }
  }
}

TEST_CASE("saturation") {
  const PlaneMeasure square = testing::uniform_square(200000, 9);
  const PlaneMeasure segment = testing::horizontal_segment(200000, 0.0, 9);
  CHECK(is_saturated(square, e2, 0.2, 6));
  CHECK_FALSE(is_saturated(segment, e2, 0.2, 6));
  Rng rng(9, 1);
  for (int t = 0; t < 30; ++t) {
    const PlaneMeasure nu = random_discrete(rng, 400);
    const ProjectivePointd v(rng.uniform() * 3);
    bool prev = false;
    for (double eps : {0.0, 0.1, 0.3, 0.6, 1.0}) {
      const bool now = is_saturated(nu, v, eps, 4);
      CHECK((!prev || now));
      prev = now;
    }
  }
}

TEST_CASE("uniform entropy dimension") {
  CHECK(uniform_entropy_dimension_test(testing::uniform_square(1'000'000, 10), 2, 0.3, 5, 3) >= 0.95);
  PlaneMeasure point;
  point.push_back(Vector2d(0.1, 0.9), 1);
  CHECK(uniform_entropy_dimension_test(point, 0, 0.1, 5, 8) == 1);
}

TEST_CASE("entropy table reports every level") {
  const auto rows = entropy_table(testing::uniform_square(10000, 11), DyadicFrame::standard2d(0), 0, 5);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].bits == 0);
  CHECK(rows[3].bits == doctest::Approx(6).epsilon(0.01));
  CHECK(rows[5].corrected_bits > rows[5].bits);
}
