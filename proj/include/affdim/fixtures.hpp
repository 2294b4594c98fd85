#pragma once

#include <string>
#include <vector>

#include "affdim/ifs.hpp"

namespace affdim {

/// phi_{s,t}(x, y) = (s x + t, 2 s t x + s^2 y + t^2); preserves y = x^2.
AffineMap2d parabola_map(double s, double t);

/// F1: non-conformal, totally irreducible, separated.
IfsSystem fixture_f1();
/// F2: three parabola-preserving maps, s = 1/2, t in {0, 0.53, 1}.
IfsSystem fixture_f2();
/// F2 with t in {0, 1/2, 1}: words (1,0) and (0,2) compose to the same map.
IfsSystem fixture_f2_rational();
/// F3: diagonal carpet, diag(1/2, 1/4) with four grid translations.
IfsSystem fixture_f3();
/// F4: F1's linear parts with overlapping first-level images.
IfsSystem fixture_f4();
/// x -> diag(1/2, 1/3) x + (0 or 1/2, 0): level-n translations differ by >= 2^-n.
IfsSystem fixture_dyadic_homothety();

/// Looks a fixture up by name ("F1", "F2", "F2r", "F3", "F4", "dyadic").
IfsSystem fixture(const std::string& name);
std::vector<std::string> fixture_names();

}  // namespace affdim
