#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "affdim/affine.hpp"
#include "affdim/measure.hpp"

namespace affdim {

using Symbol = std::uint16_t;

/// A finite word over the alphabet {0, ..., k-1}; maps compose left to right.
struct CylinderWord {
  std::vector<Symbol> symbols;

  std::size_t size() const { return symbols.size(); }
  bool empty() const { return symbols.empty(); }
  Symbol operator[](std::size_t i) const { return symbols[i]; }

  bool is_prefix_of(const CylinderWord& other) const;
  std::string str() const;

  friend auto operator<=>(const CylinderWord&, const CylinderWord&) = default;
  friend bool operator==(const CylinderWord&, const CylinderWord&) = default;
};

/// The pair (maps, probability vector) defining a self-affine measure.
struct IfsSystem {
  std::string name;
  std::vector<AffineMap2d> maps;
  std::vector<double> probs;

  std::size_t size() const { return maps.size(); }
  std::vector<double> cumulative() const;
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const;
  const ValidationCheck* find(const std::string& name) const;
};

/// Checks every standing assumption and reports each with a witness.
ValidationReport validate(const IfsSystem& system);

/// Solves (I - A) x = b.
Vector2d fixed_point(const AffineMap2d& f);

/// A word together with its composed map and weight p_w.
struct WordMap {
  CylinderWord word;
  AffineMap2d map;
  double prob = 1.0;
};

WordMap compose_word(const IfsSystem& system, const CylinderWord& word);

inline constexpr std::size_t kDefaultWordCap = std::size_t{1} << 22;

/// Stopping-time partition on alpha1: alpha1(A_w) <= 2^-n < alpha1(A_parent).
std::vector<WordMap> enumerate_psi(const IfsSystem& system, int n,
                                   std::size_t cap = kDefaultWordCap);
/// Same rule on alpha2.
std::vector<WordMap> enumerate_upsilon(const IfsSystem& system, int n,
                                       std::size_t cap = kDefaultWordCap);
/// All of Lambda^n in lexicographic order.
std::vector<WordMap> enumerate_level(const IfsSystem& system, int n,
                                     std::size_t cap = kDefaultWordCap);

enum class WordKind {
  Uniform,  // U(n): p-random word of length n
  Psi,      // I(n): p-random element of the alpha1 stopping partition
  Upsilon,  // K(n): p-random element of the alpha2 stopping partition
};

CylinderWord sample_word(const IfsSystem& system, WordKind kind, int n, std::uint64_t seed,
                         std::uint64_t stream = 0);

struct CodedSample {
  Vector2d point;
  CylinderWord word;
  AffineMap2d map;  // phi_word, kept so callers can read L(A_word) without recomposing
};

/// Default truncation depth: finest analysis level plus ten.
inline constexpr int default_depth(int finest_level) { return finest_level + 10; }

/// N coded samples of mu. Sample j uses substream j of `seed`.
std::vector<CodedSample> sample_attractor(const IfsSystem& system, std::size_t count,
                                          int depth_target, std::uint64_t seed);

/// The points of sample_attractor (identical for the same arguments) with
/// uniform weights, without materializing words.
PlaneMeasure sample_measure(const IfsSystem& system, std::size_t count, int depth_target,
                            std::uint64_t seed);

PlaneMeasure to_measure(std::span<const CodedSample> samples);

}  // namespace affdim
