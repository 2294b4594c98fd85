#include "affdim/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "affdim/parallel.hpp"
#include "affdim/random.hpp"

namespace affdim {

double shannon(std::span<const double> p) {
  double sum = 0;
  double h = 0;
  for (double x : p) {
    if (!(x > 0) || !std::isfinite(x)) {
      throw Error(ErrorCode::InvalidProbabilityVector, "probabilities must be positive");
    }
    sum += x;
    h -= x * std::log2(x);
  }
  if (p.empty() || std::abs(sum - 1) > 1e-9) {
    throw Error(ErrorCode::InvalidProbabilityVector, "probabilities must sum to 1");
  }
  return h;
}

double lyapunov_dimension(double h, double chi1, double chi2) {
  if (!(chi2 < chi1) || !(chi1 < 0)) {
    throw Error(ErrorCode::InvalidExponents, "need chi2 < chi1 < 0");
  }
  if (h < 0) throw Error(ErrorCode::PreconditionViolated, "entropy must be non-negative");
  const double a1 = -chi1;
  const double a2 = -chi2;
  if (h <= a1) return h / a1;
  if (h <= a1 + a2) return 1 + (h - a1) / a2;
  return 2 * h / (a1 + a2);
}

DimensionBudget ly_budget(double h, double chi1, double chi2, double alpha_hat, double beta_hat) {
  DimensionBudget b;
  b.H_p = h;
  b.chi1 = chi1;
  b.chi2 = chi2;
  b.dim_L = lyapunov_dimension(h, chi1, chi2);
  b.alpha_hat = alpha_hat;
  b.beta_hat = beta_hat;
  b.beta_target = std::min(1.0, h / -chi1);
  b.gamma_target = std::min(2.0, b.dim_L) - b.beta_target;
  b.H1 = beta_hat * -chi1;
  b.H2 = (alpha_hat - beta_hat) * -chi2;
  b.H3 = h - b.H1 - b.H2;
  b.inconsistent = b.H3 < -kH3Slack;
  return b;
}

H3Estimate estimate_H3(const IfsSystem& system, std::size_t samples, int n_cluster,
                       std::uint64_t seed) {
  const auto coded = sample_attractor(system, samples, default_depth(n_cluster), seed);
  H3Estimate out;
  for (int n = 0; n <= n_cluster; ++n) {
    const DyadicFrame frame = DyadicFrame::standard2d(n);
    std::vector<std::pair<CellId, double>> cells(coded.size());
    std::vector<std::pair<CellId, double>> joint(coded.size());
    for (std::size_t i = 0; i < coded.size(); ++i) {
      CellId c = cell_index(coded[i].point, frame);
      cells[i] = {c, 1.0};
      c[5] = coded[i].word.empty() ? 0 : coded[i].word[0];
      joint[i] = {c, 1.0};
    }
    const EntropyValue hc = entropy_of_keys(cells);
    const EntropyValue hj = entropy_of_keys(joint);
    if (n == n_cluster && static_cast<double>(hc.cells) * kBiasFactor > static_cast<double>(samples)) {
      throw Error(ErrorCode::BiasRuleViolated,
                  "level " + std::to_string(n) + " has " + std::to_string(hc.cells) +
                      " occupied cells for " + std::to_string(samples) + " samples");
    }
    out.levels.push_back(n);
    out.values.push_back(std::max(0.0, hj.bits - hc.bits));
  }
  out.h3 = out.values.back();
  return out;
}

ConicFit quadratic_curve_test(std::span<const Vector2d> points, double threshold) {
  const std::size_t n = points.size();
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < n && distinct < 3; ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i && !seen; ++j) seen = points[j] == points[i];
    if (!seen) ++distinct;
  }
  if (n < 6 || distinct <= 2) {
    throw Error(ErrorCode::DegenerateCloud, "need at least 6 points with 3 distinct");
  }

  Vector2d mean = Vector2d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(n);
  Matrix2d cov = Matrix2d::Zero();
  for (const auto& p : points) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix2d> eig(cov);
  const Vector2d lambda = eig.eigenvalues();  // ascending
  const double top = lambda(1);
  Matrix2d scale = Matrix2d::Identity();
  for (int k = 0; k < 2; ++k) {
    if (lambda(k) > 1e-12 * top) scale(k, k) = 1 / std::sqrt(lambda(k));
  }
  const Matrix2d whiten = scale * eig.eigenvectors().transpose();

  ConicFit fit;
  fit.is_line = !(lambda(0) > 1e-12 * top);
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), 6);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector2d z = whiten * (points[i] - mean);
    design.row(static_cast<Eigen::Index>(i)) << z(0) * z(0), z(0) * z(1), z(1) * z(1), z(0), z(1), 1.0;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::Matrix<double, 6, 6> r =
      qr.matrixQR().topRows(6).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(r, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  fit.ratio = sv(0) > 0 ? sv(5) / sv(0) : 0.0;
  fit.on_conic = fit.ratio < threshold;

  // Carry the whitened conic back to the original coordinates.
  const Eigen::Matrix<double, 6, 1> v = svd.matrixV().col(5);
  Matrix2d m;
  m << v(0), v(1) / 2, v(1) / 2, v(2);
  const Vector2d l(v(3), v(4));
  const Matrix2d mx = whiten.transpose() * m * whiten;
  const Vector2d lx = whiten.transpose() * l;
  const Vector2d linear = lx - 2 * mx * mean;
  const double constant = mean.dot(mx * mean) - lx.dot(mean) + v(5);
  fit.coefficients << mx(0, 0), 2 * mx(0, 1), mx(1, 1), linear(0), linear(1), constant;
  fit.coefficients.normalize();
  for (int k = 0; k < 6; ++k) {
    if (std::abs(fit.coefficients(k)) > 1e-9) {
      if (fit.coefficients(k) < 0) fit.coefficients = -fit.coefficients;
      break;
    }
  }
  return fit;
}

AffinityFit fit_affine_field(std::span<const Vector2d> points, std::span<const ProjectivePointd> field) {
  if (points.size() != field.size() || points.size() < 6) {
    throw Error(ErrorCode::PreconditionViolated, "need at least 6 points with one direction each");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd rows(n, 6);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector2d& x = points[static_cast<std::size_t>(i)];
    const Vector2d nv = field[static_cast<std::size_t>(i)].normal();
    rows.row(i) << nv(0) * x(0), nv(0) * x(1), nv(1) * x(0), nv(1) * x(1), nv(0), nv(1);
  }
  auto to_map = [](const Eigen::Matrix<double, 6, 1>& t) {
    Matrix2d a;
    a << t(0), t(1), t(2), t(3);
    return AffineMap2d(a, Vector2d(t(4), t(5)));
  };

  Eigen::VectorXd weights = Eigen::VectorXd::Ones(n);
  Eigen::Matrix<double, 6, 1> theta;
  for (int iter = 0; iter < 6; ++iter) {
    const Eigen::MatrixXd weighted = weights.cwiseSqrt().asDiagonal() * rows;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(weighted, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    // Near-null space; inside it prefer the vector with the largest linear part.
    int dim = 1;
    while (dim < 6 && sv(5 - dim) <= sv(5) * (1 + 1e-6) + 1e-12 * sv(0)) ++dim;
    const Eigen::MatrixXd basis = svd.matrixV().rightCols(dim);
    if (dim == 1) {
      theta = basis.col(0);
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> block(basis.topRows(4), Eigen::ComputeFullV);
      theta = basis * block.matrixV().col(0);
    }
    theta.normalize();
    const AffineMap2d psi = to_map(theta);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double len2 = psi(points[static_cast<std::size_t>(i)]).squaredNorm();
      weights(i) = 1 / std::max(len2, 1e-6);
    }
  }

  AffinityFit fit;
  fit.psi = to_map(theta);
  fit.degenerate = theta.head<4>().norm() < 1e-9;
  double sum = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector2d y = fit.psi(points[static_cast<std::size_t>(i)]);
    const double len = y.norm();
    if (len > 0) {
      const double s = y.dot(field[static_cast<std::size_t>(i)].normal()) / len;
      sum += s * s;
    } else {
      sum += 1;
    }
  }
  fit.residual = sum / static_cast<double>(n);
  fit.affine = fit.residual <= kAffinityThreshold;
  return fit;
}

AffinityFit l_affinity_test(const IfsSystem& system, std::size_t samples, std::uint64_t seed) {
  const auto coded = sample_attractor(system, samples, default_depth(12), seed);
  std::vector<Vector2d> points;
  std::vector<ProjectivePointd> field;
  points.reserve(coded.size());
  field.reserve(coded.size());
  for (const auto& c : coded) {
    points.push_back(c.point);
    field.push_back(major_direction(c.map.linear));
  }
  return fit_affine_field(points, field);
}

BourgainCheck bourgain_check(const PlaneMeasure& mu, int n, double alpha_hat) {
  const ProjectionSweep sweep = projection_entropy_sweep(mu, n, kSweepAngles);
  BourgainCheck out;
  out.inf_projection = sweep.inf_bits / n;
  out.alpha_hat = alpha_hat;
  out.margin = out.inf_projection - alpha_hat / 2;
  out.holds = out.margin > 0;
  out.argmin = sweep.argmin;
  return out;
}

BourgainCheck bourgain_check(const IfsSystem& system, std::size_t samples, int n, std::uint64_t seed) {
  const PlaneMeasure mu = sample_measure(system, samples, default_depth(n), seed);
  const int n0 = std::max(1, n / 2);
  return bourgain_check(mu, n, entropy_dimension(mu, n0, n).slope);
}

std::string to_string(HypothesisState state) {
  switch (state) {
    case HypothesisState::Holds: return "holds";
    case HypothesisState::Fails: return "fails";
    case HypothesisState::Inconclusive: return "inconclusive";
    case HypothesisState::NotApplicable: return "not_applicable";
  }
  return "not_applicable";
}

std::string to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::Pass: return "pass";
    case VerdictStatus::Fail: return "fail";
    case VerdictStatus::HypothesisFailure: return "hypothesis_failure";
    case VerdictStatus::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

int exit_code(const Verdict& verdict) {
  return verdict.status == VerdictStatus::HypothesisFailure ? 2 : 0;
}

namespace {

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

double slope_stderr(const EntropyDimensionFit& fit) {
  const std::size_t k = fit.levels.size();
  if (k < 3) return 0;
  double mean = 0;
  for (int n : fit.levels) mean += n;
  mean /= static_cast<double>(k);
  double sxx = 0, rss = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (fit.levels[i] - mean) * (fit.levels[i] - mean);
    rss += fit.residuals[i] * fit.residuals[i];
  }
  return std::sqrt(rss / static_cast<double>(k - 2) / sxx);
}

/// Entropy-dimension slope of the induced self-similar measure on the line.
double line_dimension(const LineSystem& line, std::size_t samples, int n0, int n1, std::uint64_t seed) {
  std::vector<double> cdf(line.probs.size());
  double acc = 0;
  for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = acc += line.probs[i];
  cdf.back() = 1.0;
  double max_scale = 0;
  for (double a : line.scales) max_scale = std::max(max_scale, std::abs(a));
  const int depth = static_cast<int>(std::ceil((n1 + 10) / -std::log2(max_scale)));
  LineMeasure m;
  m.atoms.resize(samples);
  m.weights.assign(samples, 1.0 / static_cast<double>(samples));
  parallel_for(samples, [&](std::size_t j) {
    Rng rng(seed, j);
    std::vector<std::size_t> word(static_cast<std::size_t>(depth));
    for (auto& s : word) s = rng.pick(cdf);
    double x = 0;
    for (auto it = word.rbegin(); it != word.rend(); ++it) x = line.scales[*it] * x + line.offsets[*it];
    m.atoms[j] = x;
  });
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int k = n1 - n0 + 1;
  for (int n = n0; n <= n1; ++n) {
    const double h = entropy(m, DyadicFrame::standard1d(n)).bits;
    sx += n;
    sy += h;
    sxx += n * n;
    sxy += n * h;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

void add(Verdict& v, const std::string& name, HypothesisState state, const std::string& detail) {
  v.hypotheses.push_back({name, state, detail});
  if (v.failed_hypothesis.empty() && state == HypothesisState::Fails) v.failed_hypothesis = name;
}

}  // namespace

Verdict verify_main(const IfsSystem& system, std::uint64_t seed, const VerifyOptions& options) {
  Verdict v;
  v.system = system.name;
  v.route = "main";
  v.tolerance = options.tolerance;

  const ValidationReport report = validate(system);
  if (!report.ok()) {
    for (const auto& c : report.checks) {
      if (!c.passed) add(v, "standing_assumptions", HypothesisState::Fails, c.name + ": " + c.detail);
    }
    v.status = VerdictStatus::HypothesisFailure;
    return v;
  }
  add(v, "standing_assumptions", HypothesisState::Holds, "validate passed");

  const double h = shannon(system.probs);
  v.lyapunov = lyapunov_exponents(system, options.lyapunov_trials, options.lyapunov_length,
                                  derive_seed(seed, 1));
  const bool exponents_ok = v.lyapunov.chi2 < v.lyapunov.chi1 && v.lyapunov.chi1 < 0;
  if (exponents_ok) {
    v.dim_L = lyapunov_dimension(h, v.lyapunov.chi1, v.lyapunov.chi2);
    v.target = std::min(2.0, v.dim_L);
  }

  const PlaneMeasure mu =
      sample_measure(system, options.samples, default_depth(options.n1), derive_seed(seed, 2));
  auto estimate_alpha = [&] {
    // Shrink the window until the finest level meets the bias rule.
    for (int n1 = options.n1;; --n1) {
      try {
        v.fit = entropy_dimension(mu, options.n0, n1);
        if (n1 < options.n1) v.notes.push_back("entropy window shrunk to " + std::to_string(options.n0) + ".." +
                                               std::to_string(n1) + " by the bias rule");
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::WindowTooWide || n1 <= options.n0 + 2) throw;
      }
    }
    v.alpha_hat = v.fit->slope;
    v.alpha_err = slope_stderr(*v.fit);
  };

  const ConformalityVerdict conformal = check_nonconformality(system);
  if (conformal.conformal) {
    add(v, "non_conformality", HypothesisState::Fails, "an inner product makes every map a similarity");
  } else {
    add(v, "non_conformality", HypothesisState::Holds,
        "smallest singular value " + fmt(conformal.smallest_singular_value));
  }

  const IrreducibilityVerdict irreducible = check_total_irreducibility(system, derive_seed(seed, 3));
  bool triangular = false;
  std::optional<TriangularReport> tri;
  if (irreducible.status == Irreducibility::Reducible) {
    try {
      tri = triangular_diagnostics(system, v.lyapunov);
      triangular = !tri->jointly_diagonalizable;
    } catch (const Error&) {
    }
  }

  if (triangular && !conformal.conformal) {
    v.route = "triangular";
    add(v, "total_irreducibility", HypothesisState::NotApplicable,
        "single invariant line at angle " + fmt(tri->common_direction.angle()) + "; triangular checklist applies");
    add(v, "lower_triangular_conjugation", HypothesisState::Holds, "rotation onto e2");
    add(v, "distinct_exponents", tri->exponents_distinct ? HypothesisState::Holds : HypothesisState::Fails,
        "chi1 - chi2 = " + fmt(tri->chi1 - tri->chi2));
    add(v, "e2_rate_is_chi2", tri->rate_matches_chi2 ? HypothesisState::Holds : HypothesisState::Fails,
        "rate " + fmt(tri->invariant_rate) + " vs chi2 " + fmt(tri->chi2));
    std::vector<Vector2d> cloud(mu.atoms.begin(),
                                mu.atoms.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(mu.size(), 100000)));
    v.conic = quadratic_curve_test(cloud);
    add(v, "not_on_quadratic_curve", v.conic->on_conic ? HypothesisState::Fails : HypothesisState::Holds,
        "conic residual " + fmt(v.conic->ratio));

    estimate_alpha();
    const double line_dim = line_dimension(tri->induced, options.samples, options.n0, options.n1,
                                           derive_seed(seed, 4));
    const double expected = std::min(1.0, v.alpha_hat);
    add(v, "projection_dimension",
        std::abs(line_dim - expected) <= options.tolerance ? HypothesisState::Holds : HypothesisState::Fails,
        "dim of induced line measure " + fmt(line_dim) + " vs min{1, alpha_hat} " + fmt(expected));
  } else {
    if (irreducible.status == Irreducibility::Reducible) {
      add(v, "total_irreducibility", HypothesisState::Fails,
          irreducible.method + " (" + std::to_string(irreducible.witness.size()) + " lines)");
    } else if (irreducible.status == Irreducibility::Inconclusive) {
      add(v, "total_irreducibility", HypothesisState::Inconclusive, irreducible.method);
    } else {
      add(v, "total_irreducibility", HypothesisState::Holds, irreducible.method);
    }

    int n_max = 3;
    while (std::pow(static_cast<double>(system.size()), n_max + 1) <= static_cast<double>(options.separation_words)) ++n_max;
    v.separation = separation_report(system, n_max);
    if (v.separation->coincidence) {
      add(v, "exponential_separation", HypothesisState::Fails, "exact coincidence of cylinder maps");
    } else {
      add(v, "exponential_separation", HypothesisState::Holds, "log2 slope " + fmt(v.separation->slope));
    }

    const auto eta = furstenberg_measure(system, false, options.furstenberg_samples, kDefaultBurnin,
                                         derive_seed(seed, 5));
    const auto eta_star = furstenberg_measure(system, true, options.furstenberg_samples, kDefaultBurnin,
                                              derive_seed(seed, 6));
    v.eta_residual = stationarity_residual(system, eta);
    v.eta_star_residual = stationarity_residual(system, eta_star);

    estimate_alpha();
    if (exponents_ok && v.failed_hypothesis.empty()) {
      const BourgainCheck b = bourgain_check(mu, options.projection_level, v.alpha_hat);
      v.budget = ly_budget(h, v.lyapunov.chi1, v.lyapunov.chi2, v.alpha_hat, b.inf_projection);
      v.notes.push_back("projection entropy inf " + fmt(b.inf_projection) + ", alpha_hat/2 margin " + fmt(b.margin));
      if (v.budget->inconsistent) v.notes.push_back("H3 estimate below -" + fmt(kH3Slack) + ": estimates inconsistent");
    }
  }

  if (!exponents_ok) {
    add(v, "distinct_negative_exponents", HypothesisState::Fails,
        "chi1 " + fmt(v.lyapunov.chi1) + ", chi2 " + fmt(v.lyapunov.chi2));
  }

  v.notes.push_back("alpha tolerance " + fmt(options.tolerance) + " is a desk-scale calibration");
  const bool inconclusive = std::any_of(v.hypotheses.begin(), v.hypotheses.end(), [](const auto& c) {
    return c.state == HypothesisState::Inconclusive;
  });
  if (!v.failed_hypothesis.empty()) {
    v.status = VerdictStatus::HypothesisFailure;
    v.notes.push_back("no formula claim: hypothesis " + v.failed_hypothesis + " fails");
  } else if (inconclusive) {
    v.status = VerdictStatus::Inconclusive;
  } else {
    v.status = std::abs(v.alpha_hat - v.target) <= options.tolerance ? VerdictStatus::Pass : VerdictStatus::Fail;
  }
  return v;
}

}  // namespace affdim
