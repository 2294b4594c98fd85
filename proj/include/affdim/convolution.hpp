#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "affdim/entropy.hpp"
#include "affdim/ifs.hpp"

namespace affdim {

inline constexpr std::size_t kThinTarget = 1'000'000;

/// theta . nu: the cloud {phi(x)} with product weights, theta-major. When the
/// product exceeds `target` atoms, `target` pairs are drawn by weight instead
/// (pair j from substream j of `seed`) and weighted uniformly.
PlaneMeasure act_convolve(const AffineAtomMeasure& theta, const PlaneMeasure& nu, std::uint64_t seed,
                          std::size_t target = kThinTarget);

/// p^{*n}: the maps phi_w, w in Lambda^n, weighted by p_w.
AffineAtomMeasure pstar(const IfsSystem& system, int n, std::size_t cap = kDefaultWordCap);

/// Merges atoms closer than `tolerance` in the norm metric, summing weights.
AffineAtomMeasure dedup_atoms(const AffineAtomMeasure& theta, double tolerance = 1e-13);

/// Total variation between two atomic measures on the group, atoms matched
/// within `tolerance`.
double atom_tv(const AffineAtomMeasure& a, const AffineAtomMeasure& b, double tolerance = 1e-13);

/// Level at which fibers are conditioned: the finest dyadic level whose
/// cells are no shorter than a typical level-n cylinder, floor(|chi1| n).
int default_cell_level(double chi1, int n);

/// Words w in Lambda^n weighted by p_w times the mass of phi_w mu_hat in the
/// level-`cell_level` cell of x; mu_hat has `inner` samples. Throws EmptyFiber.
AffineAtomMeasure fiber_decomposition(const IfsSystem& system, const Vector2d& x, int n,
                                      int cell_level, std::size_t inner, std::uint64_t seed);

/// Shannon entropy of the distinct atoms of theta.
double atom_entropy(const AffineAtomMeasure& theta);

struct GrowthRecord {
  int n = 0;
  std::string frame;
  double theta_entropy = 0;  // (1/n) H(theta, affine grid level n)
  double H_mu = 0;           // bits
  double H_conv = 0;         // bits
  double gain = 0;           // (H_conv - H_mu) / n
};

GrowthRecord entropy_growth_experiment(const PlaneMeasure& mu, const AffineAtomMeasure& theta, int n,
                                       std::uint64_t seed);
GrowthRecord entropy_growth_experiment(const IfsSystem& system, const AffineAtomMeasure& theta, int n,
                                       std::size_t samples, std::uint64_t seed);

struct NonconformalGrowth {
  int n = 0;
  int M = 1;
  double a1 = 0;  // (1/n) log2 alpha1(A_g)
  double a2 = 0;
  double standard_frame = 0;  // (1/n) H(theta.mu, D_n)
  double mu_frame = 0;        // (1/(Mn)) H(mu, D_{Mn})
  double g_frame = 0;         // (1/(Mn)) H(theta.mu, D^g_{Mn})
  double conditional = 0;     // (1/(Mn)) H(theta.mu, D_{(M+|a2|)n} | D_{|a2|n})
  double gain_g = 0;          // g_frame - mu_frame
  double gain_conditional = 0;
  double identity_gap = 0;    // |g_frame - conditional|
};

/// Throws InvalidEccentricity unless a1 > a2.
NonconformalGrowth nonconformal_growth_experiment(const PlaneMeasure& mu, const AffineAtomMeasure& theta,
                                                  const AffineMap2d& g, int n, int M, std::uint64_t seed);

/// |(1/k) H(theta.nu, D_L) - (1/k) H(linearized, D_L)| with L = k + log2(1/delta),
/// where the linearized cloud is phi(x0) + A_{psi0}(y - x0).
double linearization_check(const AffineAtomMeasure& theta, const PlaneMeasure& nu,
                           const AffineMap2d& psi0, const Vector2d& x0, int k, double delta,
                           std::uint64_t seed);

struct SurplusReport {
  int n = 0;
  int M = 1;
  int cell_level = 0;
  std::size_t fibers = 0;       // fibers drawn
  std::size_t empty = 0;        // draws whose cell caught no cylinder mass
  double eps = 0;
  double high_entropy_fraction = 0;  // fibers with atom entropy >= fiber_threshold bits
  double fiber_threshold = 0;
  double low_entropy_fraction = 0;   // fibers with atom entropy < low_threshold bits
  double low_threshold = 0;
  double component_fraction = 0;     // mass of level-0 grid components with (1/Mn)H > eps
  double exponent_deviation = 0;     // max |chi_i - (1/n) log2 alpha_i(A_g)| over fiber atoms
  std::vector<double> fiber_entropies;
};

struct SurplusOptions {
  std::size_t fibers = 2000;
  std::size_t inner = 20000;
  int cell_level = -1;  // negative: default_cell_level
  double eps = 0.05;
  double high_fraction_of_n = 0.1;
  double low_fraction_of_n = 0.05;
};

SurplusReport surplus_experiment(const IfsSystem& system, int n, int M, std::uint64_t seed,
                                 const SurplusOptions& options = {});

}  // namespace affdim
