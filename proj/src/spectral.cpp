#include "affdim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "affdim/parallel.hpp"
#include "affdim/random.hpp"

namespace affdim {

double lyapunov_sum_exact(const IfsSystem& system) {
  double sum = 0;
  for (std::size_t i = 0; i < system.size(); ++i) {
    const double det = std::abs(system.maps[i].linear.determinant());
    if (!(det > 0)) throw Error(ErrorCode::DegenerateSystem, "map " + std::to_string(i) + " has det 0");
    sum += system.probs[i] * std::log2(det);
  }
  return sum;
}

LyapunovEstimate lyapunov_exponents(const IfsSystem& system, int trials, int length,
                                    std::uint64_t seed, ProductOrder order) {
  if (length < 100) throw Error(ErrorCode::PreconditionViolated, "lyapunov_exponents needs length >= 100");
  if (trials < 1) throw Error(ErrorCode::PreconditionViolated, "lyapunov_exponents needs trials >= 1");
  LyapunovEstimate est;
  est.sum_exact = lyapunov_sum_exact(system);
  est.trials = trials;
  est.length = length;

  const auto cdf = system.cumulative();
  std::vector<double> rates(static_cast<std::size_t>(trials));
  parallel_for(rates.size(), [&](std::size_t t) {
    Rng rng(seed, t);
    Matrix2d p = Matrix2d::Identity();
    double log_growth = 0;
    for (int k = 0; k < length; ++k) {
      const Matrix2d& a = system.maps[rng.pick(cdf)].linear;
      p = order == ProductOrder::Forward ? Matrix2d(p * a) : Matrix2d(a * p);
      const double c = operator_norm(p);
      log_growth += std::log2(c);
      p /= c;
    }
    rates[t] = log_growth / length;
  });

  double mean = 0;
  for (double r : rates) mean += r;
  mean /= trials;
  double var = 0;
  for (double r : rates) var += (r - mean) * (r - mean);
  est.chi1 = mean;
  est.chi2 = est.sum_exact - mean;
  est.stderr1 = trials > 1 ? std::sqrt(var / (trials - 1) / trials) : 0.0;
  return est;
}

namespace {

const Matrix2d& drive(const IfsSystem& system, std::size_t i, bool transpose, Matrix2d& scratch) {
  if (!transpose) return system.maps[i].linear;
  scratch = system.maps[i].linear.transpose();
  return scratch;
}

}  // namespace

ProjectiveMeasure furstenberg_measure(const IfsSystem& system, bool transpose, std::size_t samples,
                                      int burnin, std::uint64_t seed) {
  ProjectiveMeasure m;
  m.transpose = transpose;
  m.atoms.resize(samples);
  m.weights.assign(samples, samples ? 1.0 / static_cast<double>(samples) : 0.0);
  const auto cdf = system.cumulative();
  parallel_for(samples, [&](std::size_t j) {
    Rng rng(seed, j);
    const double start = std::numbers::pi * static_cast<double>(j % kStartLines) / kStartLines;
    Vector2d v(std::cos(start), std::sin(start));
    Matrix2d scratch;
    for (int k = 0; k < burnin; ++k) {
      v = drive(system, rng.pick(cdf), transpose, scratch) * v;
      v /= v.norm();
    }
    m.atoms[j] = ProjectivePointd::from_vector(v);
  });
  return m;
}

ProjectiveMeasure push_projective(const IfsSystem& system, const ProjectiveMeasure& m) {
  ProjectiveMeasure out;
  out.transpose = m.transpose;
  out.reserve(m.size() * system.size());
  Matrix2d scratch;
  for (std::size_t i = 0; i < system.size(); ++i) {
    const Matrix2d& b = drive(system, i, m.transpose, scratch);
    for (std::size_t j = 0; j < m.size(); ++j) {
      out.push_back(ProjectivePointd::from_vector(b * m.atoms[j].unit()), system.probs[i] * m.weights[j]);
    }
  }
  return out;
}

double circle_wasserstein(const EmpiricalMeasure<ProjectivePointd>& a,
                          const EmpiricalMeasure<ProjectivePointd>& b) {
  struct Event {
    double angle;
    double mass;
  };
  std::vector<Event> events;
  events.reserve(a.size() + b.size());
  const double ta = a.total_weight();
  const double tb = b.total_weight();
  for (std::size_t i = 0; i < a.size(); ++i) events.push_back({a.atoms[i].angle(), a.weights[i] / ta});
  for (std::size_t i = 0; i < b.size(); ++i) events.push_back({b.atoms[i].angle(), -b.weights[i] / tb});
  if (events.empty()) return 0;
  std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) {
    return x.angle < y.angle || (x.angle == y.angle && x.mass < y.mass);
  });

  // F_a - F_b is constant on each gap between consecutive event angles; the
  // circular W1 is the L1 norm of that difference after removing its
  // length-weighted median.
  std::vector<std::pair<double, double>> pieces;  // (difference, gap length)
  pieces.reserve(events.size());
  double diff = 0;
  for (std::size_t k = 0; k < events.size(); ++k) {
    diff += events[k].mass;
    const double next = k + 1 < events.size() ? events[k + 1].angle : events[0].angle + std::numbers::pi;
    const double gap = next - events[k].angle;
    if (gap > 0) pieces.emplace_back(diff, gap);
  }
  if (pieces.empty()) return 0;
  std::vector<std::pair<double, double>> sorted = pieces;
  std::sort(sorted.begin(), sorted.end());
  double half = 0;
  for (const auto& p : sorted) half += p.second;
  half /= 2;
  double acc = 0;
  double median = sorted.back().first;
  for (const auto& p : sorted) {
    acc += p.second;
    if (acc >= half) {
      median = p.first;
      break;
    }
  }
  double w1 = 0;
  for (const auto& p : pieces) w1 += std::abs(p.first - median) * p.second;
  return w1;
}

double stationarity_residual(const IfsSystem& system, const ProjectiveMeasure& m) {
  return circle_wasserstein(m, push_projective(system, m));
}

ProjectivePointd direction_function(const IfsSystem& system, const CylinderWord& word) {
  Matrix2d p = Matrix2d::Identity();
  for (Symbol s : word.symbols) {
    if (s >= system.size()) throw Error(ErrorCode::IndexOutOfRange, "symbol out of range");
    p = p * system.maps[s].linear;
    p /= operator_norm(p);
  }
  return major_direction(p);
}

LDescendsReport l_descends_test(const IfsSystem& system, std::size_t samples, int cluster_level,
                                std::uint64_t seed, double tolerance) {
  const auto coded = sample_attractor(system, samples, default_depth(cluster_level), seed);
  struct Item {
    std::int64_t cx, cy;
    double c2, s2;  // doubled-angle unit vector of L
  };
  std::vector<Item> items(coded.size());
  std::vector<char> converged(coded.size());
  const double scale = std::ldexp(1.0, cluster_level);
  const auto cdf = system.cumulative();
  // The sampled prefix fixes x to cell precision but not L(sigma), which
  // settles at rate 2^(chi2-chi1) per symbol: extend with a p-random tail.
  parallel_for(coded.size(), [&](std::size_t i) {
    const auto& s = coded[i];
    Matrix2d p = s.map.linear / operator_norm(s.map.linear);
    Rng rng(derive_seed(seed, 0x4c44), i);
    int steps = 0;
    for (; steps < kLTailCap; steps += 8) {
      const Vector2d sv = singular_values(p);
      if (sv(1) < kLConvergence * sv(0)) break;
      for (int k = 0; k < 8; ++k) p = p * system.maps[rng.pick(cdf)].linear;
      p /= operator_norm(p);
    }
    converged[i] = steps < kLTailCap;
    const double angle = major_direction(p).angle();
    items[i] = {static_cast<std::int64_t>(std::floor(s.point(0) * scale)),
                static_cast<std::int64_t>(std::floor(s.point(1) * scale)), std::cos(2 * angle),
                std::sin(2 * angle)};
  });
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return a.cx < b.cx || (a.cx == b.cx && a.cy < b.cy);
  });

  LDescendsReport report;
  report.cluster_level = cluster_level;
  report.samples = samples;
  report.tolerance = tolerance;
  report.unconverged = static_cast<std::size_t>(std::count(converged.begin(), converged.end(), 0));
  const double w = samples ? 1.0 / static_cast<double>(samples) : 0.0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    double c = 0, s = 0;
    while (j < items.size() && items[j].cx == items[i].cx && items[j].cy == items[i].cy) {
      c += items[j].c2;
      s += items[j].s2;
      ++j;
    }
    const double count = static_cast<double>(j - i);
    const double dispersion = 1 - std::hypot(c, s) / count;
    const double mass = count * w;
    report.mean_dispersion += mass * dispersion;
    if (dispersion < tolerance) report.low_dispersion_mass += mass;
    ++report.cells;
    i = j;
  }
  return report;
}

ConformalityVerdict check_nonconformality(const IfsSystem& system) {
  // A is a similarity for the inner product Q iff B^T Q B = Q with
  // B = A / sqrt|det A|; stack these linear conditions on (q11, q12, q22).
  const auto k = static_cast<Eigen::Index>(system.size());
  Eigen::MatrixXd m(3 * k, 3);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Matrix2d& a = system.maps[static_cast<std::size_t>(i)].linear;
    const Matrix2d b = a / std::sqrt(std::abs(a.determinant()));
    const double b11 = b(0, 0), b12 = b(0, 1), b21 = b(1, 0), b22 = b(1, 1);
    m.row(3 * i) << b11 * b11 - 1, 2 * b11 * b21, b21 * b21;
    m.row(3 * i + 1) << b11 * b12, b11 * b22 + b12 * b21 - 1, b21 * b22;
    m.row(3 * i + 2) << b12 * b12, 2 * b12 * b22, b22 * b22 - 1;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double threshold = 1e-9 * std::max(1.0, sv(0));

  ConformalityVerdict verdict;
  verdict.smallest_singular_value = sv(sv.size() - 1);
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= threshold) ++verdict.nullity;
  }
  verdict.nullity += static_cast<int>(3 - sv.size());

  auto to_form = [](const Eigen::Vector3d& q) {
    Matrix2d f;
    f << q(0), q(1), q(1), q(2);
    return f;
  };
  auto accept = [&](Matrix2d q) {
    if (q.trace() < 0) q = -q;
    if (q.determinant() > 1e-12 * q.squaredNorm()) {
      verdict.conformal = true;
      verdict.witness = q * (2.0 / q.trace());
      return true;
    }
    return false;
  };

  const Eigen::Matrix3d v = svd.matrixV();
  if (verdict.nullity >= 3) {
    accept(Matrix2d::Identity());
  } else if (verdict.nullity == 1) {
    accept(to_form(v.col(2)));
  } else if (verdict.nullity == 2) {
    // Search the null plane for a definite form.
    for (int s = 0; s < 3600 && !verdict.conformal; ++s) {
      const double t = std::numbers::pi * s / 3600.0;
      accept(to_form(std::cos(t) * v.col(1) + std::sin(t) * v.col(2)));
    }
  }
  return verdict;
}

std::string to_string(Irreducibility status) {
  switch (status) {
    case Irreducibility::TotallyIrreducible: return "TotallyIrreducible";
    case Irreducibility::Reducible: return "Reducible";
    case Irreducibility::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::vector<ProjectivePointd> eigendirections(const Matrix2d& a) {
  const double tr = a.trace();
  const double det = a.determinant();
  const double disc = tr * tr / 4 - det;
  const double scale = std::max(1e-300, a.squaredNorm());
  if (disc < -1e-14 * scale) return {};
  const double root = std::sqrt(std::max(0.0, disc));
  std::vector<ProjectivePointd> out;
  for (double lambda : {tr / 2 + root, tr / 2 - root}) {
    const Vector2d r1(a(0, 1), lambda - a(0, 0));
    const Vector2d r2(lambda - a(1, 1), a(1, 0));
    const Vector2d& v = r1.squaredNorm() >= r2.squaredNorm() ? r1 : r2;
    if (v.squaredNorm() <= 1e-28 * scale) continue;  // scalar matrix: every line is fixed
    const auto p = ProjectivePointd::from_vector(v);
    if (out.empty() || rp1_distance(out.front(), p) > 1e-12) out.push_back(p);
  }
  return out;
}

namespace {

double set_residual(const std::vector<ProjectivePointd>& set, const IfsSystem& system) {
  double worst = 0;
  for (const auto& m : system.maps) {
    for (const auto& line : set) {
      const auto image = ProjectivePointd::from_vector(m.linear * line.unit());
      double best = 2;
      for (const auto& target : set) best = std::min(best, rp1_distance(image, target));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

std::vector<ProjectivePointd> candidate_lines(const IfsSystem& system) {
  std::vector<ProjectivePointd> out;
  auto add = [&out](const Matrix2d& a) {
    for (const auto& p : eigendirections(a)) {
      const bool seen = std::any_of(out.begin(), out.end(),
                                    [&](const auto& q) { return rp1_distance(p, q) <= 1e-9; });
      if (!seen) out.push_back(p);
    }
  };
  for (const auto& m : system.maps) add(m.linear);
  for (const auto& mi : system.maps) {
    for (const auto& mj : system.maps) add(mi.linear * mj.linear);
  }
  return out;
}

std::vector<ProjectivePointd> invariant_singles(const IfsSystem& system,
                                                const std::vector<ProjectivePointd>& candidates,
                                                double* best_borderline) {
  std::vector<ProjectivePointd> out;
  for (const auto& c : candidates) {
    const double r = set_residual({c}, system);
    if (r <= kInvariantTolerance) {
      out.push_back(c);
    } else if (best_borderline) {
      *best_borderline = std::min(*best_borderline, r);
    }
  }
  return out;
}

}  // namespace

IrreducibilityVerdict check_total_irreducibility(const IfsSystem& system, std::uint64_t seed) {
  IrreducibilityVerdict verdict;
  const auto candidates = candidate_lines(system);
  double best = 2;

  auto singles = invariant_singles(system, candidates, &best);
  if (!singles.empty()) {
    verdict.status = Irreducibility::Reducible;
    verdict.witness = std::move(singles);
    verdict.best_residual = set_residual(verdict.witness, system);
    verdict.method = "invariant eigendirection";
    return verdict;
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = i + 1; j < candidates.size(); ++j) {
      const std::vector<ProjectivePointd> pair{candidates[i], candidates[j]};
      const double r = set_residual(pair, system);
      if (r <= kInvariantTolerance) {
        verdict.status = Irreducibility::Reducible;
        verdict.witness = pair;
        verdict.best_residual = r;
        verdict.method = "invariant pair of eigendirections";
        return verdict;
      }
      best = std::min(best, r);
    }
  }

  // Projective walk from equally spaced starts: if every walk settles on at
  // most two lines, that set is invariant for the walk.
  const auto cdf = system.cumulative();
  bool all_collapsed = true;
  std::vector<ProjectivePointd> first_support;
  for (int start = 0; start < kStartLines && all_collapsed; ++start) {
    Rng rng(derive_seed(seed, 0x1bd), static_cast<std::uint64_t>(start));
    const double angle = std::numbers::pi * start / kStartLines;
    Vector2d v(std::cos(angle), std::sin(angle));
    std::vector<ProjectivePointd> support;
    for (int k = 0; k < 400; ++k) {
      v = system.maps[rng.pick(cdf)].linear * v;
      v /= v.norm();
      if (k < 200) continue;
      const auto p = ProjectivePointd::from_vector(v);
      const bool seen = std::any_of(support.begin(), support.end(),
                                    [&](const auto& q) { return rp1_distance(p, q) <= 1e-6; });
      if (!seen) support.push_back(p);
      if (support.size() > 2) break;
    }
    if (support.size() > 2) all_collapsed = false;
    if (start == 0) first_support = support;
  }
  if (all_collapsed) {
    verdict.status = Irreducibility::Reducible;
    verdict.witness = first_support;
    verdict.best_residual = set_residual(first_support, system);
    verdict.method = "projective walk collapse";
    return verdict;
  }

  verdict.best_residual = best;
  if (best <= kBorderlineTolerance) {
    verdict.status = Irreducibility::Inconclusive;
    verdict.method = "borderline candidate set";
  } else {
    verdict.status = Irreducibility::TotallyIrreducible;
    verdict.method = "candidate sets of size <= 2 exhausted; walk did not collapse";
    verdict.heuristic = true;
  }
  return verdict;
}

TriangularReport triangular_diagnostics(const IfsSystem& system,
                                        const std::optional<LyapunovEstimate>& estimate) {
  const auto singles = invariant_singles(system, candidate_lines(system), nullptr);
  if (singles.empty()) {
    throw Error(ErrorCode::NotTriangular, "linear parts share no real eigendirection");
  }
  TriangularReport report;
  report.common_direction = singles.front();
  report.jointly_diagonalizable = singles.size() >= 2;
  report.conjugation = rotation(std::numbers::pi / 2 - report.common_direction.angle());

  const Matrix2d& r = report.conjugation;
  report.diagonal_dominance = true;
  for (std::size_t i = 0; i < system.size(); ++i) {
    const Matrix2d c = r * system.maps[i].linear * r.transpose();
    report.conjugated.push_back(c);
    report.invariant_rate += system.probs[i] * std::log2(std::abs(c(1, 1)));
    report.diagonal_dominance = report.diagonal_dominance && std::abs(c(1, 1)) < std::abs(c(0, 0));
    report.induced.scales.push_back(c(0, 0));
    report.induced.offsets.push_back((r * system.maps[i].translation)(0));
    report.induced.probs.push_back(system.probs[i]);
  }

  const LyapunovEstimate est = estimate ? *estimate : lyapunov_exponents(system, 8, 20000, 0x7);
  report.chi1 = est.chi1;
  report.chi2 = est.chi2;
  report.exponents_distinct = est.chi1 - est.chi2 > kRateTolerance;
  report.rate_matches_chi2 = std::abs(report.invariant_rate - est.chi2) <= kRateTolerance;
  return report;
}

}  // namespace affdim
