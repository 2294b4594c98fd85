#include "affdim/separation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "affdim/random.hpp"

namespace affdim {

namespace {

using GridKey = std::array<std::int64_t, 6>;

struct GridKeyHash {
  std::size_t operator()(const GridKey& k) const {
    std::uint64_t h = 0;
    for (auto v : k) h = mix64(h ^ static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
  }
};

bool better(double d, std::size_t i, std::size_t j, const ClosestPair& best) {
  if (i > j) std::swap(i, j);
  if (!best.found || d < best.distance) return true;
  return d == best.distance && std::pair(i, j) < std::pair(best.first, best.second);
}

void take(double d, std::size_t i, std::size_t j, ClosestPair& best) {
  if (!better(d, i, j, best)) return;
  best.found = true;
  best.distance = d;
  best.first = std::min(i, j);
  best.second = std::max(i, j);
}

bool lex_less(const Vector6d& a, const Vector6d& b) {
  return std::lexicographical_compare(a.data(), a.data() + 6, b.data(), b.data() + 6);
}

/// Smallest index pair among exactly equal points, if any.
ClosestPair exact_duplicates(const std::vector<Vector6d>& points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lex_less(points[a], points[b]); });
  ClosestPair best;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && points[order[j]] == points[order[i]]) ++j;
    if (j - i >= 2) take(0.0, order[i], order[i + 1], best);  // stable sort keeps indices ascending
    i = j;
  }
  return best;
}

}  // namespace

ClosestPair closest_pair_brute(const std::vector<Vector6d>& points) {
  ClosestPair best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) take((points[i] - points[j]).norm(), i, j, best);
  }
  return best;
}

ClosestPair closest_pair(const std::vector<Vector6d>& points, std::uint64_t seed) {
  const std::size_t k = points.size();
  if (k < 2) return {};
  if (auto dup = exact_duplicates(points); dup.found) return dup;

  Rng rng(seed, 0);
  ClosestPair best;
  for (int s = 0; s < 1024; ++s) {
    const auto i = static_cast<std::size_t>(rng() % k);
    const auto j = static_cast<std::size_t>(rng() % k);
    if (i != j) take((points[i] - points[j]).norm(), i, j, best);
  }
  if (!best.found) take((points[0] - points[1]).norm(), 0, 1, best);

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = k - 1; i > 0; --i) std::swap(order[i], order[static_cast<std::size_t>(rng() % (i + 1))]);

  double side = best.distance;
  std::unordered_map<GridKey, std::vector<std::size_t>, GridKeyHash> grid;
  auto key_of = [&](const Vector6d& p) {
    GridKey key;
    for (int c = 0; c < 6; ++c) key[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(std::floor(p(c) / side));
    return key;
  };

  for (std::size_t step = 0; step < k; ++step) {
    const std::size_t i = order[step];
    const GridKey centre = key_of(points[i]);
    bool shrank = false;
    GridKey probe;
    for (int code = 0; code < 729; ++code) {
      int rest = code;
      for (std::size_t c = 0; c < 6; ++c) {
        probe[c] = centre[c] + rest % 3 - 1;
        rest /= 3;
      }
      const auto it = grid.find(probe);
      if (it == grid.end()) continue;
      for (std::size_t j : it->second) {
        const double d = (points[i] - points[j]).norm();
        if (d <= side) {
          take(d, i, j, best);
          if (d < side) shrank = true;
        }
      }
    }
    grid[centre].push_back(i);
    if (shrank) {
      side = best.distance;
      grid.clear();
      for (std::size_t s = 0; s <= step; ++s) grid[key_of(points[order[s]])].push_back(order[s]);
    }
  }
  return best;
}

std::vector<WordMap> dedup_maps(const std::vector<WordMap>& maps, double tolerance) {
  const std::size_t k = maps.size();
  std::vector<Vector6d> coords(k);
  for (std::size_t i = 0; i < k; ++i) coords[i] = maps[i].map.coordinates();
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
  std::vector<WordMap> out;
  for (std::size_t i = 0; i < k; ++i) {
    if (find(i) == i) out.push_back(maps[i]);
  }
  return out;
}

IfsSystem normalize_system(const IfsSystem& system, double* scale) {
  // Fixed points of short words lie in the attractor and spread over it.
  int length = 1;
  while (length < 12 && std::pow(static_cast<double>(system.size()), length + 1) <= 4096) ++length;
  Vector2d lo = Vector2d::Constant(std::numeric_limits<double>::infinity());
  Vector2d hi = -lo;
  for (int n = 1; n <= length; ++n) {
    for (const auto& w : enumerate_level(system, n)) {
      const Vector2d x = fixed_point(w.map);
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
  }
  double diameter = (hi - lo).norm();
  if (!(diameter > 1e-12)) diameter = 1;
  if (scale) *scale = diameter;
  IfsSystem out = system;
  for (auto& m : out.maps) m.translation = (m.linear * lo + m.translation - lo) / diameter;
  return out;
}

namespace {

PairRecord closest_record(const std::vector<WordMap>& words, int n) {
  PairRecord rec;
  rec.n = n;
  rec.word_count = words.size();
  rec.distinct_count = words.size();
  std::vector<Vector6d> coords(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) coords[i] = words[i].map.coordinates();
  const ClosestPair cp = closest_pair(coords, static_cast<std::uint64_t>(n));
  rec.found = cp.found;
  if (cp.found) {
    rec.min_distance = cp.distance;
    rec.first = words[cp.first].word;
    rec.second = words[cp.second].word;
  }
  return rec;
}

}  // namespace

PairRecord min_pair_distance(const IfsSystem& system, int n, std::size_t cap) {
  return closest_record(enumerate_level(system, n, cap), n);
}

std::string to_string(SeparationMode mode) {
  return mode == SeparationMode::AllPairs ? "AllPairs" : "DistinctMaps";
}

SeparationReport separation_report(const IfsSystem& system, int n_max, std::size_t cap) {
  if (n_max < 3) throw Error(ErrorCode::PreconditionViolated, "separation_report needs n_max >= 3");
  SeparationReport report;
  report.cap = cap;
  const IfsSystem normalized = normalize_system(system, &report.normalization_scale);

  std::vector<std::vector<WordMap>> levels;
  for (int n = 1; n <= n_max; ++n) {
    levels.push_back(enumerate_level(normalized, n, cap));
    report.records.push_back(closest_record(levels.back(), n));
    const auto& rec = report.records.back();
    if (rec.found && rec.min_distance < kCoincidenceThreshold) report.coincidence = true;
  }

  if (report.coincidence) {
    report.mode = SeparationMode::DistinctMaps;
    for (int n = 1; n <= n_max; ++n) {
      const auto distinct = dedup_maps(levels[static_cast<std::size_t>(n - 1)]);
      PairRecord rec = closest_record(distinct, n);
      rec.word_count = levels[static_cast<std::size_t>(n - 1)].size();
      report.records[static_cast<std::size_t>(n - 1)] = rec;
    }
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (const auto& rec : report.records) {
    if (rec.n < 3 || !rec.found || !(rec.min_distance > 0)) continue;
    const double y = std::log2(rec.min_distance);
    sx += rec.n;
    sy += y;
    sxx += rec.n * rec.n;
    sxy += rec.n * y;
    ++count;
  }
  if (count >= 2) {
    report.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    report.intercept = (sy - report.slope * sx) / count;
  }
  return report;
}

}  // namespace affdim
