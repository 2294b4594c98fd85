#include <doctest.h>

#include "affdim/convolution.hpp"
#include "affdim/fixtures.hpp"
#include "helpers.hpp"

using namespace affdim;

namespace {

AffineAtomMeasure point_theta(const AffineMap2d& f) {
  AffineAtomMeasure t;
  t.push_back(f, 1);
  return t;
}

IfsSystem commuting_pair() {
  return {"commuting",
          {AffineMap2d(Matrix2d(Matrix2d::Identity() / 2), Vector2d(0.4, 0)),
           AffineMap2d(Matrix2d(Matrix2d::Identity() / 4), Vector2d(0.6, 0))},
          {0.5, 0.5}};
}

}  // namespace

TEST_CASE("act_convolve on point masses and a two-atom example") {
  const PlaneMeasure nu = testing::uniform_square(1000, 31);
  const auto id = act_convolve(point_theta(AffineMap2d::Identity()), nu, 0);
  CHECK(id.atoms == nu.atoms);
  CHECK(id.weights == nu.weights);

  const auto shifted = act_convolve(point_theta(AffineMap2d::Translation(Vector2d(0.5, -1))), nu, 0);
  for (std::size_t i = 0; i < nu.size(); ++i) CHECK((shifted.atoms[i] - nu.atoms[i] - Vector2d(0.5, -1)).norm() < 1e-15);

  AffineAtomMeasure theta;
  theta.push_back(AffineMap2d::Identity(), 0.25);
  theta.push_back(AffineMap2d::Linear(Matrix2d(2 * Matrix2d::Identity())), 0.75);
  PlaneMeasure two;
  two.push_back(Vector2d(1, 0), 0.5);
  two.push_back(Vector2d(0, 1), 0.5);
  const auto conv = act_convolve(theta, two, 0);
  REQUIRE(conv.size() == 4);
  CHECK(conv.atoms[0] == Vector2d(1, 0));
  CHECK(conv.atoms[3] == Vector2d(0, 2));
  CHECK(conv.weights[2] == doctest::Approx(0.375));
  CHECK(conv.total_weight() == doctest::Approx(1));
}

TEST_CASE("act_convolve thins large products deterministically") {
  const PlaneMeasure nu = testing::uniform_square(2000, 32);
  const auto theta = pstar(fixture("F1"), 5);
  const auto a = act_convolve(theta, nu, 7, 5000);
  const auto b = act_convolve(theta, nu, 7, 5000);
  CHECK(a.size() == 5000);
  CHECK(a.atoms == b.atoms);
  CHECK(a.total_weight() == doctest::Approx(1));
}

TEST_CASE("pstar and dedup") {
  const IfsSystem f1 = fixture("F1");
  const auto one = pstar(f1, 1);
  REQUIRE(one.size() == f1.maps.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one.atoms[i].linear == f1.maps[i].linear);
    CHECK(one.weights[i] == f1.probs[i]);
  }
  CHECK(pstar(f1, 3).total_weight() == doctest::Approx(1));

  const auto two = pstar(commuting_pair(), 2);
  const auto merged = dedup_atoms(two);
  REQUIRE(merged.size() == 3);
  CHECK(merged.weights[1] == doctest::Approx(0.5));
  CHECK(atom_tv(two, merged) == doctest::Approx(0).scale(1));
  CHECK(atom_entropy(two) == doctest::Approx(1.5));

  AffineAtomMeasure other = merged;
  other.weights = {0.5, 0.25, 0.25};
  CHECK(atom_tv(merged, other) == doctest::Approx(0.25));
}

TEST_CASE("cell level tracks the cylinder scale") {
  CHECK(default_cell_level(-2.0, 8) == 16);
  CHECK(default_cell_level(-0.5, 7) == 3);
}

TEST_CASE("fiber of a single-map system is that map") {
  const AffineMap2d f(Matrix2d{{0.5, 0.1}, {0.0, 0.25}}, Vector2d(0.1, 0.2));
  const IfsSystem single = testing::single_map(f);
  const auto fiber = fiber_decomposition(single, fixed_point(f), 3, 2, 1000, 1);
  REQUIRE(fiber.size() == 1);
  CHECK(fiber.weights[0] == doctest::Approx(1));
  CHECK(testing::error_code_of([&] { fiber_decomposition(single, Vector2d(50, 50), 3, 2, 1000, 1); }) ==
        ErrorCode::EmptyFiber);
}

TEST_CASE("linearization is exact for point masses and single affine maps") {
  const AffineMap2d psi(Matrix2d{{0.7, 0.2}, {-0.1, 0.4}}, Vector2d(0.3, 0.1));
  const Vector2d x0(0.25, 0.5);
  PlaneMeasure nu;
  Rng rng(33, 0);
  for (int i = 0; i < 5000; ++i) nu.push_back(x0 + 0.01 * Vector2d(rng.uniform() - 0.5, rng.uniform() - 0.5), 2e-4);
  CHECK(linearization_check(point_theta(psi), nu, psi, x0, 6, 0.01, 1) < 1e-9);
  PlaneMeasure point;
  point.push_back(x0, 1);
  CHECK(linearization_check(point_theta(psi), point, psi, x0, 6, 0.01, 1) == 0);

  const auto far = point_theta(AffineMap2d::Translation(Vector2d(1, 0)));
  CHECK(testing::error_code_of([&] { linearization_check(far, nu, psi, x0, 6, 0.01, 1); }) ==
        ErrorCode::PreconditionViolated);
  PlaneMeasure wide = nu;
  wide.atoms[0] = x0 + Vector2d(0.5, 0);
  CHECK(testing::error_code_of([&] { linearization_check(point_theta(psi), wide, psi, x0, 6, 0.01, 1); }) ==
        ErrorCode::PreconditionViolated);
}

TEST_CASE("growth experiments") {
  const PlaneMeasure mu = testing::uniform_square(100000, 34);
  const auto id = entropy_growth_experiment(mu, point_theta(AffineMap2d::Identity()), 6, 1);
  CHECK(id.gain == doctest::Approx(0).scale(1));
  CHECK(id.theta_entropy == 0);

  const auto conformal = AffineMap2d::Linear(Matrix2d(Matrix2d::Identity() / 4));
  CHECK(testing::error_code_of([&] {
          nonconformal_growth_experiment(mu, point_theta(AffineMap2d::Identity()), conformal, 6, 1, 1);
        }) == ErrorCode::InvalidEccentricity);
  const AffineMap2d g = AffineMap2d::Linear(Vector2d(0.5, 1.0 / 32).asDiagonal());
  const auto r = nonconformal_growth_experiment(mu, point_theta(AffineMap2d::Identity()), g, 4, 1, 1);
  CHECK(r.a1 == doctest::Approx(-0.25));
  CHECK(r.a2 == doctest::Approx(-1.25));
}
