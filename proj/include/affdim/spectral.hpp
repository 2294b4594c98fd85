#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "affdim/ifs.hpp"

namespace affdim {

/// Base-2 Lyapunov exponents of the p-random product of the linear parts.
struct LyapunovEstimate {
  double chi1 = 0;
  double chi2 = 0;
  double stderr1 = 0;
  double sum_exact = 0;  // sum_i p_i log2 |det A_i|
  int trials = 0;
  int length = 0;
};

enum class ProductOrder { Forward, Reversed };

double lyapunov_sum_exact(const IfsSystem& system);

/// chi1 from renormalized products (one substream per trial); chi2 from the
/// determinant identity chi1 + chi2 = sum_exact.
LyapunovEstimate lyapunov_exponents(const IfsSystem& system, int trials, int length,
                                    std::uint64_t seed,
                                    ProductOrder order = ProductOrder::Forward);

inline constexpr int kDefaultBurnin = 200;
inline constexpr int kStartLines = 16;

/// Empirical stationary measure of the projective walk driven by the A_i
/// (or A_i^T when `transpose`).
ProjectiveMeasure furstenberg_measure(const IfsSystem& system, bool transpose, std::size_t samples,
                                      int burnin, std::uint64_t seed);

/// sum_i p_i B_i m with B_i = A_i or A_i^T per m.transpose.
ProjectiveMeasure push_projective(const IfsSystem& system, const ProjectiveMeasure& m);

/// Exact 1-Wasserstein distance on the circle R / pi Z (radians).
double circle_wasserstein(const EmpiricalMeasure<ProjectivePointd>& a,
                          const EmpiricalMeasure<ProjectivePointd>& b);

double stationarity_residual(const IfsSystem& system, const ProjectiveMeasure& m);

/// L(A_word); the product is renormalized so long words do not underflow.
ProjectivePointd direction_function(const IfsSystem& system, const CylinderWord& word);

struct LDescendsReport {
  int cluster_level = 0;
  std::size_t samples = 0;
  std::size_t cells = 0;
  double tolerance = 0;
  double low_dispersion_mass = 0;  // mass of cells whose L-dispersion < tolerance
  double mean_dispersion = 0;      // mass-weighted
  std::size_t unconverged = 0;     // samples whose L(sigma) hit the tail cap
};

inline constexpr double kLDispersionTolerance = 0.05;
/// L(sigma) is taken once alpha2/alpha1 of the extended product drops below
/// kLConvergence, or after kLTailCap extra symbols.
inline constexpr double kLConvergence = 1e-4;
inline constexpr int kLTailCap = 4096;

LDescendsReport l_descends_test(const IfsSystem& system, std::size_t samples, int cluster_level,
                                std::uint64_t seed, double tolerance = kLDispersionTolerance);

struct ConformalityVerdict {
  bool conformal = false;
  std::optional<Matrix2d> witness;  // Q with A_i^T Q A_i proportional to Q, trace 2
  int nullity = 0;
  double smallest_singular_value = 0;
};

ConformalityVerdict check_nonconformality(const IfsSystem& system);

enum class Irreducibility { TotallyIrreducible, Reducible, Inconclusive };

std::string to_string(Irreducibility status);

struct IrreducibilityVerdict {
  Irreducibility status = Irreducibility::Inconclusive;
  std::vector<ProjectivePointd> witness;
  double best_residual = 0;  // smallest invariance residual over candidate sets
  std::string method;
  bool heuristic = false;    // set on TotallyIrreducible: that branch is not a proof
};

inline constexpr double kInvariantTolerance = 1e-9;
inline constexpr double kBorderlineTolerance = 1e-6;

IrreducibilityVerdict check_total_irreducibility(const IfsSystem& system, std::uint64_t seed = 0);

/// One-dimensional affine system x -> a_i x + t_i.
struct LineSystem {
  std::vector<double> scales;
  std::vector<double> offsets;
  std::vector<double> probs;
};

struct TriangularReport {
  ProjectivePointd common_direction;
  Matrix2d conjugation;  // rotation R with R * common_direction = e2
  std::vector<Matrix2d> conjugated;  // R A_i R^T, lower triangular
  double invariant_rate = 0;  // sum p_i log2 |c_i|
  double chi1 = 0;
  double chi2 = 0;
  bool rate_matches_chi2 = false;
  bool exponents_distinct = false;
  bool diagonal_dominance = false;  // |c_i| < |a_i| for every i
  bool jointly_diagonalizable = false;
  LineSystem induced;
};

inline constexpr double kRateTolerance = 0.05;

/// Throws NotTriangular when the linear parts share no real eigendirection.
TriangularReport triangular_diagnostics(const IfsSystem& system,
                                        const std::optional<LyapunovEstimate>& estimate = {});

/// Real eigendirections of a 2x2 matrix (none for scalar matrices).
std::vector<ProjectivePointd> eigendirections(const Matrix2d& a);

}  // namespace affdim
