#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "affdim/affine.hpp"
#include "affdim/measure.hpp"

namespace affdim {

enum class FrameKind { Standard1D, Standard2D, Rotated, NonConformal, AffineGrid };

/// A level-n dyadic partition. Cells are half-open: [k/2^n, (k+1)/2^n) in
/// each frame coordinate.
struct DyadicFrame {
  FrameKind kind = FrameKind::Standard2D;
  int level = 0;
  ProjectivePointd direction;       // Rotated: the line W
  Matrix2d to_standard = Matrix2d::Identity();  // NonConformal: (V D)^-1

  static DyadicFrame standard1d(int n);
  static DyadicFrame standard2d(int n);
  /// Cells of pi_W^-1 D_n joined with pi_{W perp}^-1 D_n.
  static DyadicFrame rotated(const ProjectivePointd& w, int n);
  /// Cells V D (D_n) where A_g = V D U; throws EqualSingularValues for conformal g.
  static DyadicFrame nonconformal(const AffineMap2d& g, int n);
  /// Six embedding coordinates (four linear, two translation) at side 2^-n.
  static DyadicFrame affine_grid(int n);

  DyadicFrame at_level(int n) const;
  std::string name() const;
};

using CellId = std::array<std::int64_t, 6>;

CellId cell_index(double x, const DyadicFrame& frame);
CellId cell_index(const Vector2d& x, const DyadicFrame& frame);
CellId cell_index(const AffineMap2d& f, const DyadicFrame& frame);

struct EntropyValue {
  double bits = 0;        // plug-in Shannon entropy, base 2
  std::size_t atoms_used = 0;
  std::size_t cells = 0;  // occupied cells
  double correction = 0;  // Miller-Madow term (cells - 1) / (2 N ln 2)

  double corrected() const { return bits + correction; }
};

/// Entropy of the distribution on keys given by (key, weight) pairs; sorts in place.
template <typename Key>
EntropyValue entropy_of_keys(std::vector<std::pair<Key, double>>& keyed);

EntropyValue entropy(const LineMeasure& nu, const DyadicFrame& frame);
EntropyValue entropy(const PlaneMeasure& nu, const DyadicFrame& frame);
EntropyValue entropy(const AffineAtomMeasure& nu, const DyadicFrame& frame);

/// Entropy of the join of two partitions.
template <typename Atom>
EntropyValue joint_entropy(const EmpiricalMeasure<Atom>& nu, const DyadicFrame& a,
                           const DyadicFrame& b) {
  std::vector<std::pair<std::pair<CellId, CellId>, double>> keyed(nu.size());
  for (std::size_t i = 0; i < nu.size(); ++i) {
    keyed[i] = {{cell_index(nu.atoms[i], a), cell_index(nu.atoms[i], b)}, nu.weights[i]};
  }
  return entropy_of_keys(keyed);
}

/// H(nu, fine | coarse) = H(nu, fine v coarse) - H(nu, coarse).
template <typename Atom>
EntropyValue conditional_entropy(const EmpiricalMeasure<Atom>& nu, const DyadicFrame& fine,
                                 const DyadicFrame& coarse) {
  const EntropyValue joint = joint_entropy(nu, fine, coarse);
  const EntropyValue base = entropy(nu, coarse);
  EntropyValue out;
  out.bits = joint.bits - base.bits;
  out.atoms_used = joint.atoms_used;
  out.cells = joint.cells;
  out.correction = joint.correction - base.correction;
  return out;
}

extern template EntropyValue entropy_of_keys(std::vector<std::pair<CellId, double>>&);
extern template EntropyValue entropy_of_keys(
    std::vector<std::pair<std::pair<CellId, CellId>, double>>&);

// Components -----------------------------------------------------------------

struct ComponentDraw {
  CellId cell{};
  double mass = 0;
  PlaneMeasure conditional;  // nu restricted to the cell, renormalized
  PlaneMeasure rescaled;     // pushed onto [0,1)^2 by the cell's homothety
};

/// Every level-n component with its mass, ordered by cell.
std::vector<ComponentDraw> components(const PlaneMeasure& nu, int n);

/// A component drawn with probability nu(cell).
ComponentDraw draw_component(const PlaneMeasure& nu, int n, std::uint64_t seed);

/// E(H(nu_{x,n}, D_{n+m})) by full enumeration over level-n cells.
double expected_component_entropy(const PlaneMeasure& nu, int n, int m);

/// Total variation between the distribution of components nu^{x,i}, i
/// uniform in [0,n], and components of those components at a further level
/// uniform in [0,m]. Components are identified by (level, set of atoms).
double component_resampling_tv(const PlaneMeasure& nu, int n, int m);

// Scale statistics -------------------------------------------------------------

struct EntropyDimensionFit {
  std::vector<int> levels;
  std::vector<double> bits;
  std::vector<double> corrected_bits;
  std::vector<double> residuals;  // of the plug-in fit
  double slope = 0;
  double intercept = 0;
  double corrected_slope = 0;
  double corrected_intercept = 0;
};

/// Occupied cells at the finest level may be at most N / kBiasFactor.
inline constexpr double kBiasFactor = 10;

/// Least-squares slope of H(nu, D_n) over n in [n0, n1]. Throws WindowTooWide
/// when the finest level is undersampled.
EntropyDimensionFit entropy_dimension(const PlaneMeasure& nu, int n0, int n1);

struct MultiscaleCheck {
  double direct = 0;    // (1/n) H(nu, D_{k+n})
  double averaged = 0;  // E_{k<=i<=k+n} (1/m) H(nu_{x,i}, D_{i+m})
  double deviation = 0;
};

MultiscaleCheck multiscale_check(const PlaneMeasure& nu, int k, int n, int m);

LineMeasure project(const PlaneMeasure& nu, const ProjectivePointd& w);

EntropyValue projection_entropy(const PlaneMeasure& nu, const ProjectivePointd& w, int n);

struct ProjectionSweep {
  std::vector<double> angles;
  std::vector<double> bits;
  double inf_bits = 0;
  ProjectivePointd argmin;
};

ProjectionSweep projection_entropy_sweep(const PlaneMeasure& nu, int n, int grid_size);

struct SliceSummary {
  std::size_t strips = 0;       // strips above the mass threshold
  double mean_bits = 0;         // mass-weighted H(pi_{W perp} slice, D_fine)
  double mean_relative = 0;     // mass-weighted H(pi_{W perp} slice, D_fine | D_strip)
  double q10 = 0, q50 = 0, q90 = 0;  // mass-weighted quantiles of mean_bits' summand
  std::vector<double> strip_bits;
  std::vector<double> strip_mass;
};

SliceSummary thickened_slice_entropy(const PlaneMeasure& nu, const ProjectivePointd& w,
                                     int strip_level, int fine_level, double min_mass = 1e-3);

/// Largest mass within distance delta of a translate of W.
double max_strip_mass(const PlaneMeasure& nu, const ProjectivePointd& w, double delta);

bool is_concentrated(const PlaneMeasure& nu, const ProjectivePointd& w, double delta);
bool is_concentrated_multi(const PlaneMeasure& nu, const ProjectivePointd& w, double delta, int m);
bool is_point_concentrated(const PlaneMeasure& nu, double delta);

/// H_m(nu) >= 1 + H_m(pi_{V perp} nu) - eps in the V + V perp frame.
bool is_saturated(const PlaneMeasure& nu, const ProjectivePointd& v, double eps, int m);

/// P_{0<=i<=n}(|H_m(nu^{x,i}) - alpha| < eps), enumerated exactly over components.
double uniform_entropy_dimension_test(const PlaneMeasure& nu, double alpha, double eps, int m,
                                      int n);

struct EntropyRow {
  int n = 0;
  std::string frame;
  double bits = 0;
  double corrected_bits = 0;
  std::size_t atoms_used = 0;
};

std::vector<EntropyRow> entropy_table(const PlaneMeasure& nu, const DyadicFrame& frame, int n0,
                                      int n1);

}  // namespace affdim
