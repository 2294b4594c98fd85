#include "affdim/fixtures.hpp"

#include "affdim/error.hpp"

namespace affdim {

AffineMap2d parabola_map(double s, double t) {
  Matrix2d a;
  a << s, 0, 2 * s * t, s * s;
  return AffineMap2d(a, Vector2d(t, t * t));
}

namespace {

IfsSystem uniform_system(std::string name, std::vector<AffineMap2d> maps) {
  IfsSystem sys;
  sys.name = std::move(name);
  sys.probs.assign(maps.size(), 1.0 / static_cast<double>(maps.size()));
  sys.maps = std::move(maps);
  return sys;
}

Matrix2d f1_linear(double angle) { return rotation(angle) * Vector2d(0.3, 0.2).asDiagonal(); }

}  // namespace

IfsSystem fixture_f1() {
  return uniform_system("F1", {AffineMap2d(f1_linear(0.7), Vector2d(0, 0)),
                               AffineMap2d(f1_linear(2.1), Vector2d(0.6, 0.1))});
}

IfsSystem fixture_f2() {
  return uniform_system("F2", {parabola_map(0.5, 0.0), parabola_map(0.5, 0.53), parabola_map(0.5, 1.0)});
}

IfsSystem fixture_f2_rational() {
  return uniform_system("F2r", {parabola_map(0.5, 0.0), parabola_map(0.5, 0.5), parabola_map(0.5, 1.0)});
}

IfsSystem fixture_f3() {
  const Matrix2d a = Vector2d(0.5, 0.25).asDiagonal();
  return uniform_system("F3", {AffineMap2d(a, Vector2d(0, 0)), AffineMap2d(a, Vector2d(0.5, 0)),
                               AffineMap2d(a, Vector2d(0, 0.75)), AffineMap2d(a, Vector2d(0.5, 0.75))});
}

IfsSystem fixture_f4() {
  return uniform_system("F4", {AffineMap2d(f1_linear(0.7), Vector2d(0, 0)),
                               AffineMap2d(f1_linear(2.1), Vector2d(0.35, 0.05))});
}

IfsSystem fixture_dyadic_homothety() {
  const Matrix2d a = Vector2d(0.5, 1.0 / 3.0).asDiagonal();
  return uniform_system("dyadic", {AffineMap2d(a, Vector2d(0, 0)), AffineMap2d(a, Vector2d(0.5, 0))});
}

IfsSystem fixture(const std::string& name) {
  if (name == "F1") return fixture_f1();
  if (name == "F2") return fixture_f2();
  if (name == "F2r") return fixture_f2_rational();
  if (name == "F3") return fixture_f3();
  if (name == "F4") return fixture_f4();
  if (name == "dyadic") return fixture_dyadic_homothety();
  throw Error(ErrorCode::ValidationError, "unknown fixture '" + name + "'");
}

std::vector<std::string> fixture_names() { return {"F1", "F2", "F2r", "F3", "F4", "dyadic"}; }

}  // namespace affdim
