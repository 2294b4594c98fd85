#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "affdim/ifs.hpp"

namespace affdim {

struct ClosestPair {
  bool found = false;
  double distance = std::numeric_limits<double>::infinity();
  std::size_t first = 0;  // first < second
  std::size_t second = 0;
};

/// Exact closest pair under the Euclidean norm on R^6 by grid hashing: cells
/// of side equal to the current best distance, 3^6 neighbouring cells per
/// query, rebuilt whenever the best distance shrinks. Ties go to the
/// lexicographically smallest index pair.
ClosestPair closest_pair(const std::vector<Vector6d>& points, std::uint64_t seed = 0);

/// O(k^2) reference.
ClosestPair closest_pair_brute(const std::vector<Vector6d>& points);

inline constexpr double kCoincidenceThreshold = 1e-13;

/// Representatives of the classes of maps closer than `tolerance`, in the
/// order of their first occurrence.
std::vector<WordMap> dedup_maps(const std::vector<WordMap>& maps,
                                double tolerance = kCoincidenceThreshold);

/// Conjugates by a homothety so the attractor's bounding box has unit diameter.
IfsSystem normalize_system(const IfsSystem& system, double* scale = nullptr);

struct PairRecord {
  int n = 0;
  std::size_t word_count = 0;
  std::size_t distinct_count = 0;
  bool found = false;
  double min_distance = std::numeric_limits<double>::infinity();
  CylinderWord first;
  CylinderWord second;
};

/// Minimum norm_distance over unordered pairs of distinct words of length n.
/// A single-word level yields a record with found = false.
PairRecord min_pair_distance(const IfsSystem& system, int n, std::size_t cap = kDefaultWordCap);

enum class SeparationMode { AllPairs, DistinctMaps };

std::string to_string(SeparationMode mode);

struct SeparationReport {
  std::vector<PairRecord> records;
  SeparationMode mode = SeparationMode::AllPairs;
  bool coincidence = false;
  double slope = std::numeric_limits<double>::quiet_NaN();  // of log2 min_distance vs n, n >= 3
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double normalization_scale = 1;  // attractor bounding-box diameter before normalizing
  std::size_t cap = kDefaultWordCap;
  std::string metric = "frobenius norm of 3x3 embedding difference";
};

SeparationReport separation_report(const IfsSystem& system, int n_max,
                                   std::size_t cap = kDefaultWordCap);

}  // namespace affdim
