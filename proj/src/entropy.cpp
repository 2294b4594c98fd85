#include "affdim/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "affdim/parallel.hpp"
#include "affdim/random.hpp"

namespace affdim {

namespace {

std::int64_t bin(double x, int n) { return static_cast<std::int64_t>(std::floor(std::ldexp(x, n))); }

using Key2 = std::pair<std::int64_t, std::int64_t>;

Key2 standard_key(const Vector2d& x, int n) { return {bin(x(0), n), bin(x(1), n)}; }

// Neumaier summation; entropies over 10^5+ cells drift past 1e-12 otherwise.
class Sum {
 public:
  Sum& operator+=(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
    return *this;
  }
  Sum& operator-=(double x) { return *this += -x; }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

}  // namespace

DyadicFrame DyadicFrame::standard1d(int n) {
  DyadicFrame f;
  f.kind = FrameKind::Standard1D;
  f.level = n;
  return f;
}

DyadicFrame DyadicFrame::standard2d(int n) {
  DyadicFrame f;
  f.kind = FrameKind::Standard2D;
  f.level = n;
  return f;
}

DyadicFrame DyadicFrame::rotated(const ProjectivePointd& w, int n) {
  DyadicFrame f;
  f.kind = FrameKind::Rotated;
  f.level = n;
  f.direction = w;
  return f;
}

DyadicFrame DyadicFrame::nonconformal(const AffineMap2d& g, int n) {
  const auto s = svd2(g.linear);
  if (s.alpha1() - s.alpha2() <= 1e-12 * s.alpha1()) {
    throw Error(ErrorCode::EqualSingularValues, "non-conformal frame needs alpha1(A_g) > alpha2(A_g)");
  }
  DyadicFrame f;
  f.kind = FrameKind::NonConformal;
  f.level = n;
  f.to_standard = inverse2(Matrix2d(s.V * s.D()));
  return f;
}

DyadicFrame DyadicFrame::affine_grid(int n) {
  DyadicFrame f;
  f.kind = FrameKind::AffineGrid;
  f.level = n;
  return f;
}

DyadicFrame DyadicFrame::at_level(int n) const {
  DyadicFrame f = *this;
  f.level = n;
  return f;
}

std::string DyadicFrame::name() const {
  switch (kind) {
    case FrameKind::Standard1D: return "standard1d";
    case FrameKind::Standard2D: return "standard2d";
    case FrameKind::Rotated: return "rotated";
    case FrameKind::NonConformal: return "nonconformal";
    case FrameKind::AffineGrid: return "affine_grid";
  }
  return "standard2d";
}

CellId cell_index(double x, const DyadicFrame& frame) {
  return {bin(x, frame.level), 0, 0, 0, 0, 0};
}

CellId cell_index(const Vector2d& x, const DyadicFrame& frame) {
  const int n = frame.level;
  switch (frame.kind) {
    case FrameKind::Standard1D: return {bin(x(0), n), 0, 0, 0, 0, 0};
    case FrameKind::Standard2D:
    case FrameKind::AffineGrid: return {bin(x(0), n), bin(x(1), n), 0, 0, 0, 0};
    case FrameKind::Rotated:
      return {bin(x.dot(frame.direction.unit()), n), bin(x.dot(frame.direction.normal()), n), 0, 0, 0, 0};
    case FrameKind::NonConformal: {
      const Vector2d y = frame.to_standard * x;
      return {bin(y(0), n), bin(y(1), n), 0, 0, 0, 0};
    }
  }
  return {};
}

CellId cell_index(const AffineMap2d& f, const DyadicFrame& frame) {
  if (frame.kind != FrameKind::AffineGrid) return cell_index(f.translation, frame);
  const int n = frame.level;
  return {bin(f.linear(0, 0), n), bin(f.linear(0, 1), n), bin(f.linear(1, 0), n),
          bin(f.linear(1, 1), n), bin(f.translation(0), n), bin(f.translation(1), n)};
}

template <typename Key>
EntropyValue entropy_of_keys(std::vector<std::pair<Key, double>>& keyed) {
  EntropyValue out;
  out.atoms_used = keyed.size();
  if (keyed.empty()) return out;
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Sum sum_total;
  for (const auto& k : keyed) sum_total += k.second;
  const double total = sum_total.value();
  Sum h;
  for (std::size_t i = 0; i < keyed.size();) {
    Sum mass;
    std::size_t j = i;
    while (j < keyed.size() && keyed[j].first == keyed[i].first) mass += keyed[j++].second;
    const double p = mass.value() / total;
    if (p > 0) h -= p * std::log2(p);
    ++out.cells;
    i = j;
  }
  out.bits = std::max(0.0, h.value());
  out.correction = static_cast<double>(out.cells - 1) / (2.0 * static_cast<double>(out.atoms_used) * std::log(2.0));
  return out;
}

template EntropyValue entropy_of_keys(std::vector<std::pair<CellId, double>>&);
template EntropyValue entropy_of_keys(std::vector<std::pair<std::pair<CellId, CellId>, double>>&);
template EntropyValue entropy_of_keys(std::vector<std::pair<std::int64_t, double>>&);
template EntropyValue entropy_of_keys(std::vector<std::pair<Key2, double>>&);

EntropyValue entropy(const LineMeasure& nu, const DyadicFrame& frame) {
  std::vector<std::pair<std::int64_t, double>> keyed(nu.size());
  for (std::size_t i = 0; i < nu.size(); ++i) keyed[i] = {bin(nu.atoms[i], frame.level), nu.weights[i]};
  return entropy_of_keys(keyed);
}

EntropyValue entropy(const PlaneMeasure& nu, const DyadicFrame& frame) {
  std::vector<std::pair<Key2, double>> keyed(nu.size());
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const CellId c = cell_index(nu.atoms[i], frame);
    keyed[i] = {{c[0], c[1]}, nu.weights[i]};
  }
  return entropy_of_keys(keyed);
}

EntropyValue entropy(const AffineAtomMeasure& nu, const DyadicFrame& frame) {
  std::vector<std::pair<CellId, double>> keyed(nu.size());
  for (std::size_t i = 0; i < nu.size(); ++i) keyed[i] = {cell_index(nu.atoms[i], frame), nu.weights[i]};
  return entropy_of_keys(keyed);
}

namespace {

struct Keyed {
  Key2 coarse;
  Key2 fine;
  double weight;
  std::size_t index;
};

/// Atoms sorted by (level-n cell, level-(n+m) cell).
std::vector<Keyed> nested_keys(const PlaneMeasure& nu, int n, int m) {
  std::vector<Keyed> keys(nu.size());
  for (std::size_t i = 0; i < nu.size(); ++i) {
    keys[i] = {standard_key(nu.atoms[i], n), standard_key(nu.atoms[i], n + m), nu.weights[i], i};
  }
  std::sort(keys.begin(), keys.end(), [](const Keyed& a, const Keyed& b) {
    return a.coarse < b.coarse || (a.coarse == b.coarse && (a.fine < b.fine || (a.fine == b.fine && a.index < b.index)));
  });
  return keys;
}

struct ComponentEntropy {
  double mass;
  double bits;
};

/// (nu(cell), H(nu_cell, D_{n+m})) for every occupied level-n cell.
std::vector<ComponentEntropy> component_entropies(const PlaneMeasure& nu, int n, int m) {
  const auto keys = nested_keys(nu, n, m);
  Sum sum_total;
  for (const auto& k : keys) sum_total += k.weight;
  const double total = sum_total.value();
  std::vector<ComponentEntropy> out;
  std::vector<double> masses;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    Sum sum_cell;
    masses.clear();
    while (j < keys.size() && keys[j].coarse == keys[i].coarse) {
      std::size_t l = j;
      Sum fine_mass;
      while (l < keys.size() && keys[l].coarse == keys[i].coarse && keys[l].fine == keys[j].fine) {
        fine_mass += keys[l++].weight;
      }
      masses.push_back(fine_mass.value());
      sum_cell += fine_mass.value();
      j = l;
    }
    const double cell_mass = sum_cell.value();
    Sum h;
    for (double w : masses) {
      const double p = w / cell_mass;
      if (p > 0) h -= p * std::log2(p);
    }
    out.push_back({cell_mass / total, std::max(0.0, h.value())});
    i = j;
  }
  return out;
}

double cell_side(int n) { return std::ldexp(1.0, -n); }

}  // namespace

std::vector<ComponentDraw> components(const PlaneMeasure& nu, int n) {
  if (nu.empty()) throw Error(ErrorCode::EmptyMeasure, "components of an empty measure");
  const auto keys = nested_keys(nu, n, 0);
  const double total = nu.total_weight();
  const double scale = std::ldexp(1.0, n);
  std::vector<ComponentDraw> out;
  for (std::size_t i = 0; i < keys.size();) {
    ComponentDraw c;
    c.cell = {keys[i].coarse.first, keys[i].coarse.second, 0, 0, 0, 0};
    const Vector2d corner(static_cast<double>(keys[i].coarse.first) * cell_side(n),
                          static_cast<double>(keys[i].coarse.second) * cell_side(n));
    std::size_t j = i;
    for (; j < keys.size() && keys[j].coarse == keys[i].coarse; ++j) {
      const Vector2d& x = nu.atoms[keys[j].index];
      c.conditional.push_back(x, keys[j].weight);
      c.rescaled.push_back(((x - corner) * scale).cwiseMax(0.0), keys[j].weight);
    }
    c.mass = c.conditional.total_weight() / total;
    c.conditional.normalize();
    c.rescaled.normalize();
    out.push_back(std::move(c));
    i = j;
  }
  return out;
}

ComponentDraw draw_component(const PlaneMeasure& nu, int n, std::uint64_t seed) {
  auto all = components(nu, n);
  std::vector<double> cdf(all.size());
  double acc = 0;
  for (std::size_t i = 0; i < all.size(); ++i) cdf[i] = acc += all[i].mass;
  cdf.back() = 1.0;
  Rng rng(seed, 0);
  return std::move(all[rng.pick(cdf)]);
}

double expected_component_entropy(const PlaneMeasure& nu, int n, int m) {
  Sum sum;
  for (const auto& c : component_entropies(nu, n, m)) sum += c.mass * c.bits;
  return sum.value();
}

double component_resampling_tv(const PlaneMeasure& nu, int n, int m) {
  if (nu.empty()) throw Error(ErrorCode::EmptyMeasure, "components of an empty measure");
  // Cell membership stops refining once atoms are separated; beyond this
  // level the grouping is reused so deep levels never overflow the bins.
  constexpr int kFinestGrouping = 50;
  const double total = nu.total_weight();
  const double pn = 1.0 / (n + 1);
  const double qn = 1.0 / ((n + 1.0) * (m + 1.0));

  std::vector<std::pair<std::size_t, double>> groups;  // (first atom, mass) at current level
  auto group_at = [&](int level) {
    std::vector<std::pair<Key2, std::size_t>> keys(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) keys[i] = {standard_key(nu.atoms[i], level), i};
    std::sort(keys.begin(), keys.end());
    groups.clear();
    for (std::size_t i = 0; i < keys.size();) {
      std::size_t j = i;
      double mass = 0;
      while (j < keys.size() && keys[j].first == keys[i].first) mass += nu.weights[keys[j++].second];
      groups.emplace_back(keys[i].second, mass / total);
      i = j;
    }
  };

  double tv = 0;
  for (int level = 0; level <= n + m; ++level) {
    if (level <= kFinestGrouping) group_at(level);
    const double p = level <= n ? pn : 0.0;
    // Number of (i, j) with i in [0,n], j in [0,m], i + j = level.
    const int lo = std::max(0, level - m);
    const int hi = std::min(level, n);
    const double q = hi >= lo ? (hi - lo + 1) * qn : 0.0;
    for (const auto& g : groups) tv += g.second * std::abs(p - q);
  }
  return tv / 2;
}

EntropyDimensionFit entropy_dimension(const PlaneMeasure& nu, int n0, int n1) {
  if (n1 <= n0) throw Error(ErrorCode::PreconditionViolated, "entropy_dimension needs n1 > n0");
  EntropyDimensionFit fit;
  for (int n = n0; n <= n1; ++n) {
    const EntropyValue h = entropy(nu, DyadicFrame::standard2d(n));
    if (n == n1 && static_cast<double>(h.cells) * kBiasFactor > static_cast<double>(nu.size())) {
      throw Error(ErrorCode::WindowTooWide,
                  "level " + std::to_string(n1) + " has " + std::to_string(h.cells) +
                      " occupied cells for " + std::to_string(nu.size()) + " samples");
    }
    fit.levels.push_back(n);
    fit.bits.push_back(h.bits);
    fit.corrected_bits.push_back(h.corrected());
  }
  auto line_fit = [&](const std::vector<double>& y, double& slope, double& intercept) {
    const double k = static_cast<double>(y.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double x = fit.levels[i];
      sx += x;
      sy += y[i];
      sxx += x * x;
      sxy += x * y[i];
    }
    slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    intercept = (sy - slope * sx) / k;
  };
  line_fit(fit.bits, fit.slope, fit.intercept);
  line_fit(fit.corrected_bits, fit.corrected_slope, fit.corrected_intercept);
  for (std::size_t i = 0; i < fit.bits.size(); ++i) {
    fit.residuals.push_back(fit.bits[i] - (fit.intercept + fit.slope * fit.levels[i]));
  }
  return fit;
}

MultiscaleCheck multiscale_check(const PlaneMeasure& nu, int k, int n, int m) {
  if (n < 1 || m < 1) throw Error(ErrorCode::PreconditionViolated, "multiscale_check needs n, m >= 1");
  MultiscaleCheck out;
  out.direct = entropy(nu, DyadicFrame::standard2d(k + n)).bits / n;
  double sum = 0;
  for (int i = k; i <= k + n; ++i) sum += expected_component_entropy(nu, i, m) / m;
  out.averaged = sum / (n + 1);
  out.deviation = std::abs(out.direct - out.averaged);
  return out;
}

LineMeasure project(const PlaneMeasure& nu, const ProjectivePointd& w) {
  LineMeasure out;
  out.weights = nu.weights;
  out.atoms.resize(nu.size());
  const Vector2d u = w.unit();
  for (std::size_t i = 0; i < nu.size(); ++i) out.atoms[i] = nu.atoms[i].dot(u);
  return out;
}

EntropyValue projection_entropy(const PlaneMeasure& nu, const ProjectivePointd& w, int n) {
  return entropy(project(nu, w), DyadicFrame::standard1d(n));
}

ProjectionSweep projection_entropy_sweep(const PlaneMeasure& nu, int n, int grid_size) {
  if (grid_size < 64) throw Error(ErrorCode::PreconditionViolated, "projection sweep needs >= 64 angles");
  ProjectionSweep sweep;
  sweep.angles.resize(static_cast<std::size_t>(grid_size));
  sweep.bits.resize(sweep.angles.size());
  parallel_for(sweep.angles.size(), [&](std::size_t j) {
    sweep.angles[j] = std::numbers::pi * static_cast<double>(j) / grid_size;
    sweep.bits[j] = projection_entropy(nu, ProjectivePointd(sweep.angles[j]), n).bits;
  });
  const auto it = std::min_element(sweep.bits.begin(), sweep.bits.end());
  sweep.inf_bits = *it;
  sweep.argmin = ProjectivePointd(sweep.angles[static_cast<std::size_t>(it - sweep.bits.begin())]);
  return sweep;
}

SliceSummary thickened_slice_entropy(const PlaneMeasure& nu, const ProjectivePointd& w,
                                     int strip_level, int fine_level, double min_mass) {
  struct Item {
    std::int64_t strip;
    double t;  // pi_{W perp} coordinate
    double weight;
  };
  const Vector2d u = w.unit();
  const Vector2d v = w.normal();
  std::vector<Item> items(nu.size());
  for (std::size_t i = 0; i < nu.size(); ++i) {
    items[i] = {bin(nu.atoms[i].dot(u), strip_level), nu.atoms[i].dot(v), nu.weights[i]};
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return a.strip < b.strip || (a.strip == b.strip && a.t < b.t);
  });
  const double total = nu.total_weight();

  SliceSummary out;
  std::vector<double> relative;
  LineMeasure slice;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    slice.atoms.clear();
    slice.weights.clear();
    for (; j < items.size() && items[j].strip == items[i].strip; ++j) slice.push_back(items[j].t, items[j].weight);
    const double mass = slice.total_weight() / total;
    if (mass > min_mass) {
      const double fine = entropy(slice, DyadicFrame::standard1d(fine_level)).bits;
      const double coarse = entropy(slice, DyadicFrame::standard1d(strip_level)).bits;
      out.strip_bits.push_back(fine);
      out.strip_mass.push_back(mass);
      relative.push_back(fine - coarse);
    }
    i = j;
  }
  out.strips = out.strip_bits.size();
  if (out.strips == 0) return out;
  const double kept = std::accumulate(out.strip_mass.begin(), out.strip_mass.end(), 0.0);
  for (std::size_t s = 0; s < out.strips; ++s) {
    out.mean_bits += out.strip_mass[s] * out.strip_bits[s] / kept;
    out.mean_relative += out.strip_mass[s] * relative[s] / kept;
  }
  std::vector<std::size_t> order(out.strips);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return out.strip_bits[a] < out.strip_bits[b]; });
  auto quantile = [&](double q) {
    double acc = 0;
    for (std::size_t s : order) {
      acc += out.strip_mass[s] / kept;
      if (acc >= q) return out.strip_bits[s];
    }
    return out.strip_bits[order.back()];
  };
  out.q10 = quantile(0.1);
  out.q50 = quantile(0.5);
  out.q90 = quantile(0.9);
  return out;
}

namespace {

struct Window {
  double mass = 0;
  std::size_t begin = 0, end = 0;  // half-open range in sorted order
};

/// Heaviest closed window of width 2 delta over sorted (t, weight) pairs.
Window best_window(const std::vector<std::pair<double, double>>& sorted, double delta) {
  Window best;
  double mass = 0;
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < sorted.size(); ++hi) {
    mass += sorted[hi].second;
    while (sorted[hi].first - sorted[lo].first > 2 * delta) mass -= sorted[lo++].second;
    if (mass > best.mass) best = {mass, lo, hi + 1};
  }
  return best;
}

std::vector<std::pair<double, double>> sorted_offsets(const PlaneMeasure& nu, const ProjectivePointd& w) {
  const Vector2d v = w.normal();
  const double total = nu.total_weight();
  std::vector<std::pair<double, double>> t(nu.size());
  for (std::size_t i = 0; i < nu.size(); ++i) t[i] = {nu.atoms[i].dot(v), nu.weights[i] / total};
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace

double max_strip_mass(const PlaneMeasure& nu, const ProjectivePointd& w, double delta) {
  return best_window(sorted_offsets(nu, w), delta).mass;
}

bool is_concentrated(const PlaneMeasure& nu, const ProjectivePointd& w, double delta) {
  return max_strip_mass(nu, w, delta) >= 1 - delta;
}

bool is_concentrated_multi(const PlaneMeasure& nu, const ProjectivePointd& w, double delta, int m) {
  auto t = sorted_offsets(nu, w);
  double covered = 0;
  for (int k = 0; k < m && !t.empty(); ++k) {
    const Window win = best_window(t, delta);
    if (win.mass <= 0) break;
    covered += win.mass;
    t.erase(t.begin() + static_cast<std::ptrdiff_t>(win.begin), t.begin() + static_cast<std::ptrdiff_t>(win.end));
  }
  return covered >= 1 - delta;
}

bool is_point_concentrated(const PlaneMeasure& nu, double delta) {
  if (nu.empty()) return false;
  const double total = nu.total_weight();
  std::vector<std::size_t> order(nu.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return nu.atoms[a](0) < nu.atoms[b](0);
  });
  std::vector<double> xs(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) xs[i] = nu.atoms[order[i]](0);

  auto disc_mass = [&](const Vector2d& c) {
    const auto lo = std::lower_bound(xs.begin(), xs.end(), c(0) - delta) - xs.begin();
    const auto hi = std::upper_bound(xs.begin(), xs.end(), c(0) + delta) - xs.begin();
    double mass = 0;
    for (auto i = lo; i < hi; ++i) {
      const auto a = order[static_cast<std::size_t>(i)];
      if ((nu.atoms[a] - c).norm() <= delta) mass += nu.weights[a];
    }
    return mass / total;
  };

  // Candidate centres: the weighted mean and median and a stride of atoms.
  std::vector<Vector2d> centres;
  Vector2d mean = Vector2d::Zero();
  for (std::size_t i = 0; i < nu.size(); ++i) mean += nu.weights[i] * nu.atoms[i];
  centres.push_back(mean / total);
  auto median = [&](int axis) {
    std::vector<std::pair<double, double>> v(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) v[i] = {nu.atoms[i](axis), nu.weights[i]};
    std::sort(v.begin(), v.end());
    double acc = 0;
    for (const auto& p : v) {
      acc += p.second;
      if (acc >= total / 2) return p.first;
    }
    return v.back().first;
  };
  centres.emplace_back(median(0), median(1));
  const std::size_t stride = std::max<std::size_t>(1, nu.size() / 2048);
  for (std::size_t i = 0; i < nu.size(); i += stride) centres.push_back(nu.atoms[i]);
  for (const auto& c : centres) {
    if (disc_mass(c) >= 1 - delta) return true;
  }
  return false;
}

bool is_saturated(const PlaneMeasure& nu, const ProjectivePointd& v, double eps, int m) {
  const double h = entropy(nu, DyadicFrame::rotated(v, m)).bits / m;
  const double hp = projection_entropy(nu, v.perp(), m).bits / m;
  return h >= 1 + hp - eps;
}

double uniform_entropy_dimension_test(const PlaneMeasure& nu, double alpha, double eps, int m,
                                      int n) {
  double sum = 0;
  for (int i = 0; i <= n; ++i) {
    for (const auto& c : component_entropies(nu, i, m)) {
      if (std::abs(c.bits / m - alpha) < eps) sum += c.mass;
    }
  }
  return sum / (n + 1);
}

std::vector<EntropyRow> entropy_table(const PlaneMeasure& nu, const DyadicFrame& frame, int n0,
                                      int n1) {
  std::vector<EntropyRow> rows;
  for (int n = n0; n <= n1; ++n) {
    const EntropyValue h = entropy(nu, frame.at_level(n));
    rows.push_back({n, frame.name(), h.bits, h.corrected(), h.atoms_used});
  }
  return rows;
}

}  // namespace affdim
