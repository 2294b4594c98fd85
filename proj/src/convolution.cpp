#include "affdim/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "affdim/parallel.hpp"
#include "affdim/random.hpp"
#include "affdim/separation.hpp"
#include "affdim/spectral.hpp"

namespace affdim {

namespace {

std::vector<double> cdf_of(const std::vector<double>& weights) {
  std::vector<double> cdf(weights.size());
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double acc = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) cdf[i] = (acc += weights[i]) / total;
  if (!cdf.empty()) cdf.back() = 1.0;
  return cdf;
}

struct PairIndex {
  std::size_t atom;
  std::size_t point;
};

/// All (atom, point) pairs, or `target` weighted draws of them.
std::vector<PairIndex> product_pairs(const AffineAtomMeasure& theta, const PlaneMeasure& nu,
                                     std::uint64_t seed, std::size_t target, bool& thinned) {
  const std::size_t total = theta.size() * nu.size();
  thinned = total > target;
  std::vector<PairIndex> pairs;
  if (!thinned) {
    pairs.reserve(total);
    for (std::size_t a = 0; a < theta.size(); ++a) {
      for (std::size_t i = 0; i < nu.size(); ++i) pairs.push_back({a, i});
    }
    return pairs;
  }
  const auto theta_cdf = cdf_of(theta.weights);
  const auto nu_cdf = cdf_of(nu.weights);
  pairs.resize(target);
  parallel_for(target, [&](std::size_t j) {
    Rng rng(seed, j);
    const std::size_t a = rng.pick(theta_cdf);
    // Point index by binary search: nu can be large.
    const double u = rng.uniform();
    const auto it = std::upper_bound(nu_cdf.begin(), nu_cdf.end(), u);
    pairs[j] = {a, std::min<std::size_t>(static_cast<std::size_t>(it - nu_cdf.begin()), nu.size() - 1)};
  });
  return pairs;
}

}  // namespace

PlaneMeasure act_convolve(const AffineAtomMeasure& theta, const PlaneMeasure& nu, std::uint64_t seed,
                          std::size_t target) {
  bool thinned = false;
  const auto pairs = product_pairs(theta, nu, seed, target, thinned);
  PlaneMeasure out;
  out.atoms.resize(pairs.size());
  out.weights.resize(pairs.size());
  const double uniform = pairs.empty() ? 0.0 : 1.0 / static_cast<double>(pairs.size());
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const auto& [a, i] = pairs[j];
    out.atoms[j] = theta.atoms[a](nu.atoms[i]);
    out.weights[j] = thinned ? uniform : theta.weights[a] * nu.weights[i];
  }
  return out;
}

AffineAtomMeasure pstar(const IfsSystem& system, int n, std::size_t cap) {
  AffineAtomMeasure out;
  for (auto& w : enumerate_level(system, n, cap)) out.push_back(w.map, w.prob);
  return out;
}

namespace {

/// Class representative (smallest index) of each atom under the tolerance relation.
std::vector<std::size_t> atom_classes(const std::vector<Vector6d>& coords, double tolerance) {
  const std::size_t k = coords.size();
  std::vector<std::size_t> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return coords[a](4) < coords[b](4) || (coords[a](4) == coords[b](4) && a < b);
  });
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k && coords[order[b]](4) - coords[order[a]](4) < tolerance; ++b) {
      if ((coords[order[a]] - coords[order[b]]).norm() < tolerance) {
        const std::size_t ra = find(order[a]);
        const std::size_t rb = find(order[b]);
        parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }
  std::vector<std::size_t> rep(k);
  for (std::size_t i = 0; i < k; ++i) rep[i] = find(i);
  return rep;
}

}  // namespace

AffineAtomMeasure dedup_atoms(const AffineAtomMeasure& theta, double tolerance) {
  std::vector<Vector6d> coords(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) coords[i] = theta.atoms[i].coordinates();
  const auto rep = atom_classes(coords, tolerance);
  AffineAtomMeasure out;
  std::vector<std::size_t> slot(theta.size(), 0);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (rep[i] == i) {
      slot[i] = out.size();
      out.push_back(theta.atoms[i], 0.0);
    }
    out.weights[slot[rep[i]]] += theta.weights[i];
  }
  return out;
}

double atom_tv(const AffineAtomMeasure& a, const AffineAtomMeasure& b, double tolerance) {
  AffineAtomMeasure joint;
  const double ta = a.total_weight();
  const double tb = b.total_weight();
  for (std::size_t i = 0; i < a.size(); ++i) joint.push_back(a.atoms[i], a.weights[i] / ta);
  for (std::size_t i = 0; i < b.size(); ++i) joint.push_back(b.atoms[i], -b.weights[i] / tb);
  const auto merged = dedup_atoms(joint, tolerance);
  double tv = 0;
  for (double w : merged.weights) tv += std::abs(w);
  return tv / 2;
}

int default_cell_level(double chi1, int n) {
  return static_cast<int>(std::floor(std::abs(chi1) * n));
}

namespace {

AffineAtomMeasure fiber_with(const std::vector<WordMap>& words,
                             const PlaneMeasure& inner, const Vector2d& lo, const Vector2d& hi,
                             const Vector2d& x, int cell_level) {
  const double side = std::ldexp(1.0, -cell_level);
  const Vector2d cell_lo(std::floor(std::ldexp(x(0), cell_level)) * side,
                         std::floor(std::ldexp(x(1), cell_level)) * side);
  const Vector2d cell_hi = cell_lo + Vector2d::Constant(side);
  AffineAtomMeasure fiber;
  for (const auto& w : words) {
    Vector2d blo = Vector2d::Constant(std::numeric_limits<double>::infinity());
    Vector2d bhi = -blo;
    for (int c = 0; c < 4; ++c) {
      const Vector2d corner((c & 1) ? hi(0) : lo(0), (c & 2) ? hi(1) : lo(1));
      const Vector2d y = w.map(corner);
      blo = blo.cwiseMin(y);
      bhi = bhi.cwiseMax(y);
    }
    if ((blo.array() >= cell_hi.array()).any() || (bhi.array() < cell_lo.array()).any()) continue;
    std::size_t hits = 0;
    for (const auto& p : inner.atoms) {
      const Vector2d y = w.map(p);
      if ((y.array() >= cell_lo.array()).all() && (y.array() < cell_hi.array()).all()) ++hits;
    }
    if (hits) fiber.push_back(w.map, w.prob * static_cast<double>(hits) / static_cast<double>(inner.size()));
  }
  if (fiber.empty()) throw Error(ErrorCode::EmptyFiber, "no level-n cylinder reaches the cell of x");
  fiber.normalize();
  return fiber;
}

void bounds(const PlaneMeasure& m, Vector2d& lo, Vector2d& hi) {
  lo = Vector2d::Constant(std::numeric_limits<double>::infinity());
  hi = -lo;
  for (const auto& p : m.atoms) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
}

}  // namespace

AffineAtomMeasure fiber_decomposition(const IfsSystem& system, const Vector2d& x, int n,
                                      int cell_level, std::size_t inner, std::uint64_t seed) {
  const auto words = enumerate_level(system, n);
  const PlaneMeasure mu = sample_measure(system, inner, default_depth(cell_level), seed);
  Vector2d lo, hi;
  bounds(mu, lo, hi);
  return fiber_with(words, mu, lo, hi, x, cell_level);
}

double atom_entropy(const AffineAtomMeasure& theta) {
  const auto distinct = dedup_atoms(theta);
  const double total = distinct.total_weight();
  double h = 0;
  for (double w : distinct.weights) {
    const double p = w / total;
    if (p > 0) h -= p * std::log2(p);
  }
  return std::max(0.0, h);
}

GrowthRecord entropy_growth_experiment(const PlaneMeasure& mu, const AffineAtomMeasure& theta, int n,
                                       std::uint64_t seed) {
  GrowthRecord r;
  r.n = n;
  r.frame = "standard2d";
  r.theta_entropy = entropy(theta, DyadicFrame::affine_grid(n)).bits / n;
  r.H_mu = entropy(mu, DyadicFrame::standard2d(n)).bits;
  r.H_conv = entropy(act_convolve(theta, mu, seed), DyadicFrame::standard2d(n)).bits;
  r.gain = (r.H_conv - r.H_mu) / n;
  return r;
}

GrowthRecord entropy_growth_experiment(const IfsSystem& system, const AffineAtomMeasure& theta, int n,
                                       std::size_t samples, std::uint64_t seed) {
  const PlaneMeasure mu = sample_measure(system, samples, default_depth(n), derive_seed(seed, 21));
  return entropy_growth_experiment(mu, theta, n, derive_seed(seed, 22));
}

NonconformalGrowth nonconformal_growth_experiment(const PlaneMeasure& mu, const AffineAtomMeasure& theta,
                                                  const AffineMap2d& g, int n, int M, std::uint64_t seed) {
  const Vector2d sv = singular_values(g.linear);
  NonconformalGrowth r;
  r.n = n;
  r.M = M;
  r.a1 = std::log2(sv(0)) / n;
  r.a2 = std::log2(sv(1)) / n;
  if (!(r.a1 > r.a2)) throw Error(ErrorCode::InvalidEccentricity, "need alpha1(A_g) > alpha2(A_g)");
  const PlaneMeasure conv = act_convolve(theta, mu, seed);
  const int mn = M * n;
  const int coarse = static_cast<int>(std::lround(-r.a2 * n));
  r.standard_frame = entropy(conv, DyadicFrame::standard2d(n)).bits / n;
  r.mu_frame = entropy(mu, DyadicFrame::standard2d(mn)).bits / mn;
  r.g_frame = entropy(conv, DyadicFrame::nonconformal(g, mn)).bits / mn;
  r.conditional =
      conditional_entropy(conv, DyadicFrame::standard2d(coarse + mn), DyadicFrame::standard2d(coarse)).bits / mn;
  r.gain_g = r.g_frame - r.mu_frame;
  r.gain_conditional = r.conditional - r.mu_frame;
  r.identity_gap = std::abs(r.g_frame - r.conditional);
  return r;
}

double linearization_check(const AffineAtomMeasure& theta, const PlaneMeasure& nu,
                           const AffineMap2d& psi0, const Vector2d& x0, int k, double delta,
                           std::uint64_t seed) {
  const double slack = delta * (1 + 1e-9);
  for (const auto& phi : theta.atoms) {
    if (invariant_distance(phi, psi0) > slack) {
      throw Error(ErrorCode::PreconditionViolated, "theta leaves the delta-ball at psi0");
    }
  }
  for (const auto& y : nu.atoms) {
    if ((y - x0).norm() > slack) throw Error(ErrorCode::PreconditionViolated, "nu leaves the delta-ball at x0");
  }
  bool thinned = false;
  const auto pairs = product_pairs(theta, nu, seed, kThinTarget, thinned);
  PlaneMeasure exact, linear;
  exact.reserve(pairs.size());
  linear.reserve(pairs.size());
  const double uniform = pairs.empty() ? 0.0 : 1.0 / static_cast<double>(pairs.size());
  for (const auto& [a, i] : pairs) {
    const double w = thinned ? uniform : theta.weights[a] * nu.weights[i];
    const AffineMap2d& phi = theta.atoms[a];
    const Vector2d& y = nu.atoms[i];
    exact.push_back(phi(y), w);
    linear.push_back(phi(x0) + psi0.linear * (y - x0), w);
  }
  const int level = k + static_cast<int>(std::ceil(-std::log2(delta)));
  const DyadicFrame frame = DyadicFrame::standard2d(level);
  return std::abs(entropy(exact, frame).bits - entropy(linear, frame).bits) / k;
}

SurplusReport surplus_experiment(const IfsSystem& system, int n, int M, std::uint64_t seed,
                                 const SurplusOptions& options) {
  const LyapunovEstimate lyap = lyapunov_exponents(system, 8, 20000, derive_seed(seed, 31));
  SurplusReport r;
  r.n = n;
  r.M = M;
  r.eps = options.eps;
  r.cell_level = options.cell_level >= 0 ? options.cell_level : default_cell_level(lyap.chi1, n);
  r.fiber_threshold = options.high_fraction_of_n * n;
  r.low_threshold = options.low_fraction_of_n * n;

  const auto words = enumerate_level(system, n);
  const PlaneMeasure inner =
      sample_measure(system, options.inner, default_depth(r.cell_level), derive_seed(seed, 32));
  Vector2d lo, hi;
  bounds(inner, lo, hi);
  const PlaneMeasure centres =
      sample_measure(system, options.fibers, default_depth(r.cell_level), derive_seed(seed, 33));

  struct FiberResult {
    bool empty = false;
    double entropy = 0;
    double component_mass = 0;
    double deviation = 0;
  };
  std::vector<FiberResult> results(options.fibers);
  const int mn = M * n;
  parallel_for(options.fibers, [&](std::size_t f) {
    FiberResult& out = results[f];
    AffineAtomMeasure fiber;
    try {
      fiber = fiber_with(words, inner, lo, hi, centres.atoms[f], r.cell_level);
    } catch (const Error&) {
      out.empty = true;
      return;
    }
    out.entropy = atom_entropy(fiber);
    for (const auto& g : fiber.atoms) {
      const Vector2d sv = singular_values(g.linear);
      out.deviation = std::max({out.deviation, std::abs(lyap.chi1 - std::log2(sv(0)) / n),
                                std::abs(lyap.chi2 - std::log2(sv(1)) / n)});
    }
    // Normalize by the heaviest atom, then split into level-0 grid cells.
    const auto heaviest = static_cast<std::size_t>(
        std::max_element(fiber.weights.begin(), fiber.weights.end()) - fiber.weights.begin());
    const AffineMap2d base = invert(fiber.atoms[heaviest]);
    AffineAtomMeasure normalized;
    for (std::size_t i = 0; i < fiber.size(); ++i) normalized.push_back(compose(base, fiber.atoms[i]), fiber.weights[i]);
    const DyadicFrame coarse = DyadicFrame::affine_grid(0);
    std::vector<std::pair<CellId, std::size_t>> cells(normalized.size());
    for (std::size_t i = 0; i < normalized.size(); ++i) cells[i] = {cell_index(normalized.atoms[i], coarse), i};
    std::sort(cells.begin(), cells.end());
    for (std::size_t i = 0; i < cells.size();) {
      std::size_t j = i;
      AffineAtomMeasure component;
      for (; j < cells.size() && cells[j].first == cells[i].first; ++j) {
        component.push_back(normalized.atoms[cells[j].second], normalized.weights[cells[j].second]);
      }
      const double mass = component.total_weight();
      if (entropy(component, DyadicFrame::affine_grid(mn)).bits / mn > options.eps) out.component_mass += mass;
      i = j;
    }
  });

  std::size_t high = 0, low = 0;
  double component_mass = 0;
  for (const auto& res : results) {
    if (res.empty) {
      ++r.empty;
      continue;
    }
    r.fiber_entropies.push_back(res.entropy);
    if (res.entropy >= r.fiber_threshold) ++high;
    if (res.entropy < r.low_threshold) ++low;
    component_mass += res.component_mass;
    r.exponent_deviation = std::max(r.exponent_deviation, res.deviation);
  }
  r.fibers = options.fibers;
  const double drawn = static_cast<double>(r.fiber_entropies.size());
  if (drawn > 0) {
    r.high_entropy_fraction = static_cast<double>(high) / drawn;
    r.low_entropy_fraction = static_cast<double>(low) / drawn;
    r.component_fraction = component_mass / drawn;
  }
  return r;
}

}  // namespace affdim
