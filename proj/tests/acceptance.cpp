// Desk-scale acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "affdim/convolution.hpp"
#include "affdim/dimension.hpp"
#include "affdim/entropy.hpp"
#include "affdim/fixtures.hpp"
#include "affdim/parallel.hpp"
#include "affdim/random.hpp"
#include "affdim/report.hpp"
#include "affdim/separation.hpp"
#include "affdim/spectral.hpp"

using namespace affdim;

namespace {

constexpr std::uint64_t kSeed = 7;

// Every number a criterion computes is appended here; criterion 9 compares
// the logs of runs under different thread counts.
struct Log {
  std::ostringstream text;
  void operator()(const std::string& key, double value) { text << key << '=' << format_number(value) << '\n'; }
};

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

Matrix2d random_matrix(Rng& rng) {
  Matrix2d a;
  a << rng.uniform() * 2 - 1, rng.uniform() * 2 - 1, rng.uniform() * 2 - 1, rng.uniform() * 2 - 1;
  return a;
}

AffineMap2d random_map(Rng& rng) {
  Matrix2d a;
  do {
    a = random_matrix(rng);
  } while (std::abs(a.determinant()) < 0.1);
  return AffineMap2d(a, Vector2d(rng.uniform() * 2 - 1, rng.uniform() * 2 - 1));
}

PlaneMeasure uniform_square(std::size_t n, std::uint64_t seed) {
  Rng rng(seed, 0);
  std::vector<Vector2d> pts(n);
  for (auto& p : pts) {
    const double x = rng.uniform();
    p = Vector2d(x, rng.uniform());
  }
  return PlaneMeasure::uniform(std::move(pts));
}

PlaneMeasure horizontal_segment(std::size_t n, double y, std::uint64_t seed) {
  Rng rng(seed, 1);
  std::vector<Vector2d> pts(n);
  for (auto& p : pts) p = Vector2d(rng.uniform(), y);
  return PlaneMeasure::uniform(std::move(pts));
}

// 1. Exact algebra.
Outcome exact_algebra(Log& log) {
  Outcome out;
  Rng rng(kSeed, 100);
  double svd_err = 0, det_err = 0;
  for (int i = 0; i < 10000; ++i) {
    const Matrix2d a = random_matrix(rng);
    const auto s = svd2(a);
    svd_err = std::max(svd_err, (s.reconstruct() - a).norm() / a.norm());
    det_err = std::max(det_err, std::abs(s.alpha1() * s.alpha2() - std::abs(a.determinant())) /
                                    std::max(s.alpha1() * s.alpha1(), 1e-300));
  }
  out.check(svd_err < 1e-10, "svd reconstruction " + fmt(svd_err));
  out.check(det_err < 1e-10, "alpha1 alpha2 vs |det| " + fmt(det_err));

  const PlaneMeasure nu = uniform_square(20000, kSeed);
  double chain_err = 0;
  for (int n = 1; n <= 8; ++n) {
    const auto fine = DyadicFrame::standard2d(n + 2), coarse = DyadicFrame::standard2d(n);
    const double conditional = conditional_entropy(nu, fine, coarse).bits;
    const double split = entropy(nu, coarse).bits + conditional;
    chain_err = std::max(chain_err, std::abs(entropy(nu, fine).bits - split));
    chain_err = std::max(chain_err, std::abs(expected_component_entropy(nu, n, 2) - conditional));
  }
  out.check(chain_err <= 1e-12, "chain rule " + fmt(chain_err));

  double cont_err = 0;
  for (double c1 : {0.5, 1.0, 1.7}) {
    for (double c2 : {2.0, 3.1}) {
      const double h1 = c1, h2 = c1 + c2;
      for (double h : {h1, h2}) {
        const double below = lyapunov_dimension(std::nextafter(h, 0.0), -c1, -c2);
        const double above = lyapunov_dimension(std::nextafter(h, 10.0), -c1, -c2);
        cont_err = std::max(cont_err, std::abs(below - above));
      }
    }
  }
  out.check(cont_err <= 1e-12, "dim_L breakpoints " + fmt(cont_err));

  double inv_err = 0;
  for (int i = 0; i < 10000; ++i) {
    const AffineMap2d f = random_map(rng), g = random_map(rng), h = random_map(rng);
    inv_err = std::max(inv_err, std::abs(invariant_distance(compose(h, f), compose(h, g)) - invariant_distance(f, g)));
  }
  out.check(inv_err < 1e-9, "left invariance " + fmt(inv_err));
  log("svd_err", svd_err);
  log("chain_err", chain_err);
  log("inv_err", inv_err);
  if (out.pass) out.detail = "svd " + fmt(svd_err) + ", chain " + fmt(chain_err) + ", invariance " + fmt(inv_err);
  return out;
}

// 2. Spectral suite.
Outcome spectral(Log& log) {
  Outcome out;
  IfsSystem single{"single", {AffineMap2d::Linear(Vector2d(0.5, 1.0 / 3.0).asDiagonal())}, {1.0}};
  const auto s = lyapunov_exponents(single, 4, 1000, kSeed);
  out.check(std::abs(s.chi1 + 1) < 1e-12 && std::abs(s.chi2 - std::log2(1.0 / 3.0)) < 1e-12,
            "single map exponents " + fmt(s.chi1) + ", " + fmt(s.chi2));

  const IfsSystem f2 = fixture_f2();
  const auto e2 = lyapunov_exponents(f2, 8, 100000, derive_seed(kSeed, 1));
  out.check(std::abs(e2.chi1 + 1) <= 0.02 && std::abs(e2.chi2 + 2) <= 0.02,
            "F2 exponents " + fmt(e2.chi1) + ", " + fmt(e2.chi2));
  const double sum_gap = std::abs(e2.chi1 + e2.chi2 - lyapunov_sum_exact(f2));
  out.check(sum_gap < 1e-12, "exponent sum " + fmt(sum_gap));

  const IfsSystem f1 = fixture_f1();
  const auto eta = furstenberg_measure(f1, false, 100000, kDefaultBurnin, derive_seed(kSeed, 2));
  const double residual = stationarity_residual(f1, eta);
  out.check(residual < 0.02, "F1 stationarity residual " + fmt(residual));

  const auto eta_star = furstenberg_measure(f2, true, 20000, kDefaultBurnin, derive_seed(kSeed, 3));
  double spread = 0;
  for (const auto& v : eta_star.atoms) spread = std::max(spread, rp1_distance(v, ProjectivePointd(0.0)));
  out.check(spread <= 1e-6, "F2 eta* spread " + fmt(spread));

  log("f2_chi1", e2.chi1);
  log("f2_chi2", e2.chi2);
  log("f1_residual", residual);
  log("f2_star_spread", spread);
  if (out.pass) {
    out.detail = "F2 chi " + fmt(e2.chi1) + "/" + fmt(e2.chi2) + ", F1 residual " + fmt(residual) +
                 ", eta* spread " + fmt(spread);
  }
  return out;
}

// 3. Separation suite.
Outcome separation(Log& log) {
  Outcome out;
  std::size_t instances = 0, mismatches = 0;
  for (const auto& name : fixture_names()) {
    const IfsSystem sys = normalize_system(fixture(name));
    for (int n = 1; std::pow(static_cast<double>(sys.size()), n) <= 4096; ++n) {
      std::vector<Vector6d> pts;
      for (const auto& w : enumerate_level(sys, n)) pts.push_back(w.map.coordinates());
      const auto fast = closest_pair(pts, kSeed);
      const auto slow = closest_pair_brute(pts);
      ++instances;
      if (fast.distance != slow.distance) ++mismatches;
    }
  }
  Rng rng(kSeed, 300);
  for (int t = 0; t < 20; ++t) {
    std::vector<Vector6d> pts(static_cast<std::size_t>(2 + t * 200));
    for (auto& p : pts) {
      for (int i = 0; i < 6; ++i) p(i) = rng.uniform();
    }
    ++instances;
    if (closest_pair(pts, kSeed).distance != closest_pair_brute(pts).distance) ++mismatches;
  }
  out.check(mismatches == 0, std::to_string(mismatches) + " closest-pair mismatches");

  const auto dyadic = separation_report(fixture_dyadic_homothety(), 12);
  out.check(std::abs(dyadic.slope + 1) <= 0.3, "dyadic slope " + fmt(dyadic.slope));
  const auto rational = separation_report(fixture_f2_rational(), 6);
  out.check(rational.coincidence && rational.mode == SeparationMode::DistinctMaps,
            "F2 rational coincidence not detected");
  log("instances", static_cast<double>(instances));
  log("dyadic_slope", dyadic.slope);
  for (const auto& r : rational.records) log("rational_min", r.min_distance);
  if (out.pass) {
    out.detail = std::to_string(instances) + " instances agree, dyadic slope " + fmt(dyadic.slope) +
                 ", F2r mode " + to_string(rational.mode);
  }
  return out;
}

// 4. Entropy suite.
Outcome entropy_suite(Log& log) {
  Outcome out;
  const PlaneMeasure square = uniform_square(1'000'000, kSeed);
  const PlaneMeasure segment = horizontal_segment(1'000'000, 0.3, kSeed);
  const double sq = entropy_dimension(square, 4, 8).slope;
  const double seg = entropy_dimension(segment, 4, 8).slope;
  out.check(std::abs(sq - 2) <= 0.02, "square slope " + fmt(sq));
  out.check(std::abs(seg - 1) <= 0.02, "segment slope " + fmt(seg));

  const PlaneMeasure f1 = sample_measure(fixture_f1(), 100000, default_depth(12), kSeed);
  double worst = 0;
  for (const PlaneMeasure* nu : {&square, &segment, &f1}) {
    const PlaneMeasure small =
        PlaneMeasure::uniform(std::vector<Vector2d>(nu->atoms.begin(), nu->atoms.begin() + 100000));
    for (int m : {1, 2, 4}) {
      const auto mc = multiscale_check(small, 0, 8, m);
      worst = std::max(worst, mc.deviation / (static_cast<double>(m) / 8));
      log("multiscale", mc.deviation);
    }
  }
  out.check(worst <= 8, "multiscale constant " + fmt(worst));

  // Enumerable fixture: the exact level-10 cylinder points of the dyadic system.
  PlaneMeasure cylinders;
  for (const auto& w : enumerate_level(fixture_dyadic_homothety(), 10)) {
    cylinders.push_back(w.map.translation, w.prob);
  }
  const double tv = component_resampling_tv(cylinders, 512, 16);
  const double c = tv * 512 / 16;
  out.check(c <= 4, "component TV constant " + fmt(c));

  const PlaneMeasure small_square = uniform_square(100000, kSeed + 1);
  const PlaneMeasure small_segment = horizontal_segment(100000, 0.0, kSeed + 1);
  PlaneMeasure two_lines = horizontal_segment(50000, 0.2, kSeed + 2);
  for (const auto& p : horizontal_segment(50000, 0.7, kSeed + 3).atoms) two_lines.push_back(p, 0);
  two_lines.weights.assign(two_lines.size(), 1.0 / static_cast<double>(two_lines.size()));
  const ProjectivePointd e1(0.0), e2(std::numbers::pi / 2);
  const bool verdicts[] = {
      is_concentrated(small_segment, e1, 1e-3),
      !is_concentrated(small_square, e2, 0.1),
      is_concentrated_multi(two_lines, e1, 0.01, 2),
      !is_concentrated(two_lines, e1, 0.01),
      is_saturated(small_square, e2, 0.2, 6),
      !is_saturated(small_segment, e2, 0.2, 6),
  };
  int agree = 0;
  for (bool v : verdicts) agree += v;
  out.check(agree == 6, std::to_string(agree) + "/6 predicate verdicts");

  log("square_slope", sq);
  log("segment_slope", seg);
  log("tv", tv);
  if (out.pass) {
    out.detail = "square " + fmt(sq) + ", segment " + fmt(seg) + ", multiscale C " + fmt(worst) + ", TV C " +
                 fmt(c) + ", predicates 6/6";
  }
  return out;
}

// 5. Projection check on F1.
Outcome projection(Log& log) {
  Outcome out;
  const IfsSystem f1 = fixture_f1();
  const auto e = lyapunov_exponents(f1, 16, 20000, derive_seed(kSeed, 1));
  const PlaneMeasure mu = sample_measure(f1, 1'000'000, default_depth(11), derive_seed(kSeed, 2));
  const double alpha = entropy_dimension(mu, 6, 11).slope;
  const auto sweep = projection_entropy_sweep(mu, 10, kSweepAngles);
  const double inf = sweep.inf_bits / 10;
  const double target = std::min(1.0, shannon(f1.probs) / std::abs(e.chi1));
  out.check(inf >= target - 0.15, "inf " + fmt(inf) + " below " + fmt(target) + " - 0.15");
  out.check(inf >= alpha / 2, "inf " + fmt(inf) + " below alpha/2 " + fmt(alpha / 2));
  log("inf", inf);
  log("alpha", alpha);
  if (out.pass) out.detail = "inf " + fmt(inf) + ", target " + fmt(target) + ", alpha_hat/2 " + fmt(alpha / 2);
  return out;
}

// 6. Main verification on F1, and the two hypothesis-failure routes.
Outcome main_theorem(Log& log) {
  Outcome out;
  const Verdict f1 = verify_main(fixture_f1(), kSeed);
  out.check(f1.status == VerdictStatus::Pass && std::abs(f1.alpha_hat - f1.target) <= 0.1,
            "F1 " + to_string(f1.status) + " alpha_hat " + fmt(f1.alpha_hat) + " target " + fmt(f1.target));
  const Verdict f3 = verify_main(fixture_f3(), kSeed);
  out.check(exit_code(f3) == 2 && f3.failed_hypothesis == "total_irreducibility",
            "F3 failure '" + f3.failed_hypothesis + "'");
  const Verdict f2 = verify_main(fixture_f2(), kSeed);
  out.check(exit_code(f2) == 2 && f2.failed_hypothesis == "not_on_quadratic_curve" && f2.conic &&
                f2.conic->ratio < 1e-8,
            "F2 failure '" + f2.failed_hypothesis + "'");
  log("f1_alpha", f1.alpha_hat);
  log("f1_dim_L", f1.dim_L);
  log("f2_conic", f2.conic ? f2.conic->ratio : NAN);
  log("f3_alpha", f3.alpha_hat);
  if (out.pass) {
    out.detail = "F1 alpha_hat " + fmt(f1.alpha_hat) + " vs " + fmt(f1.target) + "; F3 " + f3.failed_hypothesis +
                 "; F2 " + f2.failed_hypothesis + " (conic " + fmt(f2.conic->ratio) + ")";
  }
  return out;
}

// 7. Convolution suite.
Outcome convolution(Log& log) {
  Outcome out;
  constexpr int n = 10;
  const IfsSystem f1 = fixture_f1();
  const PlaneMeasure mu = sample_measure(f1, 1'000'000, default_depth(n), derive_seed(kSeed, 1));
  const double alpha = entropy_dimension(mu, 6, 11).slope;

  AffineAtomMeasure identity;
  identity.push_back(AffineMap2d::Identity(), 1);
  AffineAtomMeasure translations;
  Rng rng(kSeed, 700);
  for (int i = 0; i < 16; ++i) {
    const double x = rng.uniform() * 0.5 - 0.25;
    translations.push_back(AffineMap2d::Translation(Vector2d(x, rng.uniform() * 0.5 - 0.25)), 1.0 / 16);
  }
  const double theta_bits = entropy(translations, DyadicFrame::affine_grid(n)).bits / n;

  std::vector<double> gains;
  const auto id = entropy_growth_experiment(mu, identity, n, derive_seed(kSeed, 2));
  const auto tr = entropy_growth_experiment(mu, translations, n, derive_seed(kSeed, 3));
  gains.push_back(id.gain);
  gains.push_back(tr.gain);
  out.check(theta_bits > 0.3, "theta entropy " + fmt(theta_bits));
  out.check(tr.gain > 0.02, "translation gain " + fmt(tr.gain));

  // The identity hides H(theta.mu, D_0^g) = O_R(1), so theta stays within a
  // small neighbourhood of g: g composed with translations of size <= 2^-5.
  const AffineMap2d g(Vector2d(0.5, 1.0 / 32).asDiagonal(), Vector2d(0.1, 0.1));
  AffineAtomMeasure near_g;
  for (std::size_t i = 0; i < translations.size(); ++i) {
    const AffineMap2d t = AffineMap2d::Translation(translations.atoms[i].translation / 8);
    near_g.push_back(compose(g, t), translations.weights[i]);
  }
  out.check(entropy(near_g, DyadicFrame::affine_grid(n)).bits / n > 0.3, "theta near g has low entropy");
  const auto interp = nonconformal_growth_experiment(mu, near_g, g, n, 1, derive_seed(kSeed, 4));
  gains.push_back(interp.gain_g);
  out.check(interp.identity_gap <= 0.15, "interpolation gap " + fmt(interp.identity_gap));

  const AffineMap2d flat = AffineMap2d::Linear(Vector2d(1.0, std::ldexp(1.0, -n)).asDiagonal());
  AffineAtomMeasure point_flat;
  point_flat.push_back(flat, 1);
  const auto wrong = nonconformal_growth_experiment(mu, point_flat, flat, n, 1, derive_seed(kSeed, 5));
  out.check(wrong.standard_frame * n <= n + 1, "standard frame " + fmt(wrong.standard_frame * n) + " bits");
  out.check(wrong.g_frame * n >= alpha * n - 1,
            "g frame " + fmt(wrong.g_frame * n) + " bits vs alpha n - 1 = " + fmt(alpha * n - 1));
  gains.push_back(wrong.gain_g);

  const double worst = *std::min_element(gains.begin(), gains.end());
  out.check(worst >= -2.0 / n, "gain " + fmt(worst) + " below -2/n");
  for (double x : gains) log("gain", x);
  log("gap", interp.identity_gap);
  log("wrong_standard", wrong.standard_frame);
  log("wrong_g", wrong.g_frame);
  if (out.pass) {
    out.detail = "gain " + fmt(tr.gain) + ", min gain " + fmt(worst) + ", identity gap " +
                 fmt(interp.identity_gap) + ", wrong frame " + fmt(wrong.standard_frame * n) + "/" +
                 fmt(wrong.g_frame * n) + " bits";
  }
  return out;
}

// 8. Surplus suite.
Outcome surplus(Log& log) {
  Outcome out;
  const auto f4 = surplus_experiment(fixture_f4(), 8, 1, derive_seed(kSeed, 1));
  const auto f1 = surplus_experiment(fixture_f1(), 8, 1, derive_seed(kSeed, 2));
  out.check(f4.high_entropy_fraction >= 0.05, "F4 high-entropy fraction " + fmt(f4.high_entropy_fraction));
  out.check(f1.low_entropy_fraction >= 0.95, "F1 low-entropy fraction " + fmt(f1.low_entropy_fraction));
  for (double h : f4.fiber_entropies) log("f4_fiber", h);
  for (double h : f1.fiber_entropies) log("f1_fiber", h);
  if (out.pass) {
    out.detail = "F4 high " + fmt(f4.high_entropy_fraction) + ", F1 low " + fmt(f1.low_entropy_fraction);
  }
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome(Log&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const bool skip_determinism = argc > 1 && std::string(argv[1]) == "--no-determinism";
  const std::vector<Criterion> criteria = {
      {1, "exact algebra", 1, exact_algebra},   {2, "spectral", 30, spectral},
      {3, "separation", 60, separation},        {4, "entropy", 120, entropy_suite},
      {5, "projection", 300, projection},       {6, "main theorem", 600, main_theorem},
      {7, "convolution", 600, convolution},     {8, "surplus", 300, surplus},
  };
  set_thread_count(1);
  bool all = true;
  std::vector<std::string> logs;
  for (const auto& c : criteria) {
    Log log;
    const auto start = std::chrono::steady_clock::now();
    Outcome o = c.run(log);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.check(secs < c.budget_seconds, "took " + fmt(secs) + " s over " + fmt(c.budget_seconds) + " s");
    all = all && o.pass;
    logs.push_back(log.text.str());
    std::printf("%s  [%d] %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }

  if (skip_determinism) return all ? 0 : 1;

  // 9. Rerun criteria 2-8 under other thread counts and compare every logged number.
  Outcome det;
  const auto start = std::chrono::steady_clock::now();
  for (int threads : {4, 16}) {
    set_thread_count(threads);
    for (std::size_t i = 1; i < criteria.size(); ++i) {
      Log log;
      criteria[i].run(log);
      det.check(log.text.str() == logs[i],
                "criterion " + std::to_string(criteria[i].id) + " differs at " + std::to_string(threads) + " threads");
    }
  }
  set_thread_count(1);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (det.pass) det.detail = "criteria 2-8 identical at 1, 4 and 16 threads";
  all = all && det.pass;
  std::printf("%s  [9] determinism (%.1fs): %s\n", det.pass ? "PASS" : "FAIL", secs, det.detail.c_str());
  return all ? 0 : 1;
}
