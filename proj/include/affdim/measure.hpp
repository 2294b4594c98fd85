#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "affdim/affine.hpp"
#include "affdim/error.hpp"

namespace affdim {

enum class Carrier { Plane, ProjectiveLine, AffineGroup, Line };

/// A finitely supported probability measure: atoms with positive weights.
template <typename Atom>
struct EmpiricalMeasure {
  std::vector<Atom> atoms;
  std::vector<double> weights;

  std::size_t size() const { return atoms.size(); }
  bool empty() const { return atoms.empty(); }

  void reserve(std::size_t n) {
    atoms.reserve(n);
    weights.reserve(n);
  }

  void push_back(const Atom& atom, double weight) {
    atoms.push_back(atom);
    weights.push_back(weight);
  }

  double total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

  void normalize() {
    const double total = total_weight();
    if (!(total > 0)) throw Error(ErrorCode::EmptyMeasure, "cannot normalize a measure of zero mass");
    for (double& w : weights) w /= total;
  }

  static EmpiricalMeasure uniform(std::vector<Atom> atoms) {
    EmpiricalMeasure m;
    const double w = atoms.empty() ? 0.0 : 1.0 / static_cast<double>(atoms.size());
    m.weights.assign(atoms.size(), w);
    m.atoms = std::move(atoms);
    return m;
  }
};

template <typename Atom>
constexpr Carrier carrier_of();
template <>
constexpr Carrier carrier_of<Vector2d>() { return Carrier::Plane; }
template <>
constexpr Carrier carrier_of<ProjectivePointd>() { return Carrier::ProjectiveLine; }
template <>
constexpr Carrier carrier_of<AffineMap2d>() { return Carrier::AffineGroup; }
template <>
constexpr Carrier carrier_of<double>() { return Carrier::Line; }

using PlaneMeasure = EmpiricalMeasure<Vector2d>;
using LineMeasure = EmpiricalMeasure<double>;
using AffineAtomMeasure = EmpiricalMeasure<AffineMap2d>;

/// Measure on RP^1; `transpose` marks the walk driven by the transposed
/// linear parts (eta* rather than eta).
struct ProjectiveMeasure : EmpiricalMeasure<ProjectivePointd> {
  bool transpose = false;
};

/// Pushforward of a planar measure by an affine map.
inline PlaneMeasure push_forward(const AffineMap2d& f, const PlaneMeasure& nu) {
  PlaneMeasure out;
  out.weights = nu.weights;
  out.atoms.reserve(nu.size());
  for (const auto& x : nu.atoms) out.atoms.push_back(f(x));
  return out;
}

}  // namespace affdim
