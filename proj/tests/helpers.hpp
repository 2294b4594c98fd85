#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "affdim/ifs.hpp"
#include "affdim/random.hpp"

namespace testing {

inline affdim::Matrix2d random_matrix(affdim::Rng& rng, double scale = 1) {
  affdim::Matrix2d a;
  a << rng.uniform() * 2 - 1, rng.uniform() * 2 - 1, rng.uniform() * 2 - 1, rng.uniform() * 2 - 1;
  return a * scale;
}

inline affdim::Matrix2d random_invertible(affdim::Rng& rng, double min_det = 0.05) {
  affdim::Matrix2d a;
  do {
    a = random_matrix(rng);
  } while (std::abs(a.determinant()) < min_det);
  return a;
}

inline affdim::AffineMap2d random_map(affdim::Rng& rng) {
  return affdim::AffineMap2d(random_invertible(rng), affdim::Vector2d(rng.uniform() * 2 - 1, rng.uniform() * 2 - 1));
}

inline affdim::PlaneMeasure uniform_square(std::size_t n, std::uint64_t seed) {
  affdim::Rng rng(seed, 0);
  std::vector<affdim::Vector2d> pts(n);
  for (auto& p : pts) {
    const double x = rng.uniform();
    p = affdim::Vector2d(x, rng.uniform());
  }
  return affdim::PlaneMeasure::uniform(std::move(pts));
}

inline affdim::PlaneMeasure horizontal_segment(std::size_t n, double y, std::uint64_t seed) {
  affdim::Rng rng(seed, 1);
  std::vector<affdim::Vector2d> pts(n);
  for (auto& p : pts) p = affdim::Vector2d(rng.uniform(), y);
  return affdim::PlaneMeasure::uniform(std::move(pts));
}

inline affdim::IfsSystem single_map(const affdim::AffineMap2d& f) { return {"single", {f}, {1.0}}; }

// Direct Shannon entropy of a discrete distribution, base 2.
inline double shannon_bits(const std::vector<double>& masses) {
  double total = 0, h = 0;
  for (double m : masses) total += m;
  for (double m : masses) {
    if (m > 0) h -= m / total * std::log2(m / total);
  }
  return h;
}

// Code of the affdim::Error thrown by f, if any.
template <typename F>
std::optional<affdim::ErrorCode> error_code_of(F&& f) {
  try {
    f();
  } catch (const affdim::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testing
