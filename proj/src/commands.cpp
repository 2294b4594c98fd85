#include "affdim/commands.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>

#include "affdim/convolution.hpp"
#include "affdim/dimension.hpp"
#include "affdim/entropy.hpp"
#include "affdim/fixtures.hpp"
#include "affdim/parallel.hpp"
#include "affdim/random.hpp"
#include "affdim/report.hpp"
#include "affdim/separation.hpp"
#include "affdim/spectral.hpp"

namespace affdim {

using ojson = nlohmann::ordered_json;

namespace {

struct Context {
  const RunConfig& config;
  std::ostream& out;

  std::string path(const std::string& file) const {
    return (std::filesystem::path(config.out_dir) / file).string();
  }
  std::uint64_t seed() const { return config.seed.value_or(0); }

  void json(const ojson& metrics) const {
    write_file(path(config.command + ".json"), make_report(config, metrics).dump(2) + "\n");
  }
  void csv(const std::string& name, const CsvTable& table) const {
    write_file(path(name), table.str());
  }
};

std::string num(double x) { return format_number(x); }

ojson validation_json(const ValidationReport& report) {
  ojson checks = ojson::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  return {{"ok", report.ok()}, {"checks", checks}};
}

ojson lyapunov_json(const LyapunovEstimate& e) {
  return {{"chi1", e.chi1},       {"chi2", e.chi2},     {"stderr_chi1", e.stderr1},
          {"sum_exact", e.sum_exact}, {"trials", e.trials}, {"length", e.length}};
}

constexpr int kLyapunovTrials = 16;
constexpr int kLyapunovLength = 20000;

int cmd_validate(const Context& ctx) {
  const auto report = validate(ctx.config.system);
  ctx.json(validation_json(report));
  for (const auto& c : report.checks) {
    ctx.out << (c.passed ? "ok    " : "FAIL  ") << c.name << "  " << c.detail << "\n";
  }
  return report.ok() ? 0 : 2;
}

int cmd_sample(const Context& ctx) {
  const auto samples = sample_attractor(ctx.config.system, ctx.config.samples,
                                        default_depth(ctx.config.nmax), ctx.seed());
  CsvTable table({"x", "y", "word"});
  Vector2d lo = Vector2d::Constant(INFINITY), hi = -lo;
  for (const auto& s : samples) {
    table.row({num(s.point(0)), num(s.point(1)), s.word.str()});
    lo = lo.cwiseMin(s.point);
    hi = hi.cwiseMax(s.point);
  }
  ctx.csv("samples.csv", table);
  ctx.json({{"count", samples.size()},
            {"depth_level", default_depth(ctx.config.nmax)},
            {"bbox", {{"min", {lo(0), lo(1)}}, {"max", {hi(0), hi(1)}}}}});
  ctx.out << "sampled " << samples.size() << " points\n";
  return 0;
}

int cmd_lyapunov(const Context& ctx) {
  const auto e = lyapunov_exponents(ctx.config.system, kLyapunovTrials, kLyapunovLength, ctx.seed());
  ctx.json(lyapunov_json(e));
  ctx.out << "chi1 " << num(e.chi1) << " (+- " << num(e.stderr1) << ")  chi2 " << num(e.chi2) << "\n";
  return 0;
}

int cmd_furstenberg(const Context& ctx) {
  ojson metrics = ojson::object();
  for (bool transpose : {false, true}) {
    const auto eta = furstenberg_measure(ctx.config.system, transpose, ctx.config.samples, kDefaultBurnin,
                                         derive_seed(ctx.seed(), transpose ? 2 : 1));
    const double residual = stationarity_residual(ctx.config.system, eta);
    std::vector<double> angles;
    for (const auto& a : eta.atoms) angles.push_back(a.angle());
    std::sort(angles.begin(), angles.end());
    CsvTable table({"angle"});
    for (double a : angles) table.row({num(a)});
    const std::string name = transpose ? "eta_star" : "eta";
    ctx.csv(name + ".csv", table);
    metrics[name] = {{"samples", eta.size()}, {"stationarity_residual", residual}};
    ctx.out << name << ": stationarity residual " << num(residual) << "\n";
  }
  ctx.json(metrics);
  return 0;
}

int cmd_separation(const Context& ctx) {
  const auto report = separation_report(ctx.config.system, std::max(3, ctx.config.nmax), ctx.config.cap);
  CsvTable table({"n", "count", "distinct", "min_distance", "slope_so_far"});
  ojson records = ojson::array();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (const auto& r : report.records) {
    double slope = NAN;
    if (r.n >= 3 && r.found && r.min_distance > 0) {
      const double y = std::log2(r.min_distance);
      sx += r.n, sy += y, sxx += r.n * r.n, sxy += r.n * y, ++k;
      if (k >= 2) slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    }
    table.row({std::to_string(r.n), std::to_string(r.word_count), std::to_string(r.distinct_count),
               num(r.min_distance), num(slope)});
    records.push_back({{"n", r.n},
                       {"word_count", r.word_count},
                       {"distinct_count", r.distinct_count},
                       {"min_distance", json_number(r.min_distance)},
                       {"pair", {r.first.str(), r.second.str()}}});
  }
  ctx.csv("separation.csv", table);
  ctx.json({{"mode", to_string(report.mode)},
            {"coincidence", report.coincidence},
            {"slope", json_number(report.slope)},
            {"intercept", json_number(report.intercept)},
            {"normalization_scale", report.normalization_scale},
            {"metric", report.metric},
            {"records", records}});
  ctx.out << "mode " << to_string(report.mode) << ", slope " << num(report.slope)
          << (report.coincidence ? ", coincidence detected" : "") << "\n";
  return 0;
}

int cmd_entropy(const Context& ctx) {
  const int n1 = ctx.config.nmax;
  const auto mu = sample_measure(ctx.config.system, ctx.config.samples, default_depth(n1), ctx.seed());
  CsvTable table({"n", "frame", "bits", "corrected_bits", "atoms_used"});
  for (const auto& row : entropy_table(mu, DyadicFrame::standard2d(0), 0, n1)) {
    table.row({std::to_string(row.n), row.frame, num(row.bits), num(row.corrected_bits),
               std::to_string(row.atoms_used)});
  }
  ctx.csv("entropy.csv", table);
  ojson metrics = {{"samples", mu.size()}};
  try {
    const auto fit = entropy_dimension(mu, std::max(1, n1 / 2), n1);
    metrics["entropy_dimension"] = {{"window", {fit.levels.front(), fit.levels.back()}},
                                    {"slope", fit.slope},
                                    {"corrected_slope", fit.corrected_slope},
                                    {"residuals", fit.residuals}};
    ctx.out << "entropy dimension " << num(fit.slope) << "\n";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::WindowTooWide) throw;
    metrics["entropy_dimension"] = {{"error", e.what()}};
    ctx.out << e.what() << "\n";
  }
  ctx.json(metrics);
  return 0;
}

int cmd_dimension(const Context& ctx) {
  const auto& system = ctx.config.system;
  const int n1 = ctx.config.nmax;
  const double h = shannon(system.probs);
  const auto e = lyapunov_exponents(system, kLyapunovTrials, kLyapunovLength, derive_seed(ctx.seed(), 1));
  const auto mu = sample_measure(system, ctx.config.samples, default_depth(n1), derive_seed(ctx.seed(), 2));
  const auto fit = entropy_dimension(mu, std::max(1, n1 / 2), n1);
  const double beta = projection_entropy_sweep(mu, n1, kSweepAngles).inf_bits / n1;
  const auto budget = ly_budget(h, e.chi1, e.chi2, fit.slope, beta);
  ctx.json({{"lyapunov", lyapunov_json(e)},
            {"H_p", h},
            {"dim_L", budget.dim_L},
            {"alpha_hat", fit.slope},
            {"beta_hat", beta},
            {"budget",
             {{"H1", budget.H1}, {"H2", budget.H2}, {"H3", budget.H3},
              {"beta_target", budget.beta_target}, {"gamma_target", budget.gamma_target},
              {"inconsistent", budget.inconsistent}}}});
  ctx.out << "dim_L " << num(budget.dim_L) << "  alpha_hat " << num(fit.slope) << "  beta_hat " << num(beta)
          << "\n";
  return 0;
}

ojson verdict_json(const Verdict& v) {
  ojson hyp = ojson::object();
  for (const auto& c : v.hypotheses) hyp[c.name] = {{"state", to_string(c.state)}, {"detail", c.detail}};
  ojson estimates = {{"chi1", v.lyapunov.chi1},
                     {"chi2", v.lyapunov.chi2},
                     {"dim_L", v.dim_L},
                     {"target", v.target},
                     {"alpha_hat", v.alpha_hat},
                     {"alpha_err", v.alpha_err},
                     {"eta_residual", v.eta_residual},
                     {"eta_star_residual", v.eta_star_residual}};
  if (v.budget) {
    estimates["H_p"] = v.budget->H_p;
    estimates["beta_hat"] = v.budget->beta_hat;
    estimates["H3"] = v.budget->H3;
  }
  if (v.conic) estimates["conic_residual"] = v.conic->ratio;
  if (v.separation) estimates["separation_slope"] = json_number(v.separation->slope);
  return {{"system", v.system},
          {"route", v.route},
          {"verdict", to_string(v.status)},
          {"failed_hypothesis", v.failed_hypothesis},
          {"tolerance", v.tolerance},
          {"hypotheses", hyp},
          {"estimates", estimates},
          {"notes", v.notes}};
}

int cmd_verify(const Context& ctx) {
  VerifyOptions options;
  options.samples = ctx.config.samples;
  options.tolerance = tolerance(ctx.config, "alpha", options.tolerance);
  const Verdict v = verify_main(ctx.config.system, ctx.seed(), options);
  if (v.fit) {
    CsvTable table({"n", "frame", "bits", "corrected_bits", "atoms_used"});
    for (std::size_t i = 0; i < v.fit->levels.size(); ++i) {
      table.row({std::to_string(v.fit->levels[i]), "standard2d", num(v.fit->bits[i]),
                 num(v.fit->corrected_bits[i]), std::to_string(options.samples)});
    }
    ctx.csv("verify_entropy.csv", table);
  }
  ctx.json(verdict_json(v));
  ctx.out << v.system << ": " << to_string(v.status);
  if (!v.failed_hypothesis.empty()) ctx.out << " (" << v.failed_hypothesis << ")";
  ctx.out << "  alpha_hat " << num(v.alpha_hat) << "  dim_L " << num(v.dim_L) << "\n";
  return exit_code(v);
}

int cmd_convolve(const Context& ctx) {
  const auto& system = ctx.config.system;
  const int n1 = ctx.config.nmax;
  const auto mu = sample_measure(system, ctx.config.samples, default_depth(n1), derive_seed(ctx.seed(), 1));
  // p^{*2} pulled back to the identity by its heaviest atom.
  const auto p2 = pstar(system, 2);
  const AffineMap2d base = invert(p2.atoms.front());
  AffineAtomMeasure theta;
  for (std::size_t i = 0; i < p2.size(); ++i) theta.push_back(compose(base, p2.atoms[i]), p2.weights[i]);
  CsvTable table({"n", "H_mu", "H_conv", "gain", "frame"});
  ojson rows = ojson::array();
  for (int n = 1; n <= n1; ++n) {
    const auto r = entropy_growth_experiment(mu, theta, n, derive_seed(ctx.seed(), 2));
    table.row({std::to_string(n), num(r.H_mu), num(r.H_conv), num(r.gain), r.frame});
    rows.push_back({{"n", n}, {"H_mu", r.H_mu}, {"H_conv", r.H_conv}, {"gain", r.gain}});
  }
  ctx.csv("growth.csv", table);
  ctx.json({{"theta", "p*2 normalized by its first atom"}, {"records", rows}});
  ctx.out << "growth table for n = 1.." << n1 << " written\n";
  return 0;
}

int cmd_fixtures(const Context& ctx) {
  ojson list = ojson::array();
  for (const auto& name : fixture_names()) {
    list.push_back(system_to_json(fixture(name)));
    ctx.out << name << "\n";
  }
  ctx.json({{"fixtures", list}});
  return 0;
}

}  // namespace

std::vector<std::string> command_names() {
  return {"validate", "sample", "lyapunov", "furstenberg", "separation",
          "entropy",  "dimension", "verify", "convolve", "fixtures"};
}

std::size_t default_samples(const std::string& command) {
  if (command == "verify") return VerifyOptions{}.samples;
  return RunConfig{}.samples;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  static const std::map<std::string, std::function<int(const Context&)>> table = {
      {"validate", cmd_validate},     {"sample", cmd_sample},       {"lyapunov", cmd_lyapunov},
      {"furstenberg", cmd_furstenberg}, {"separation", cmd_separation}, {"entropy", cmd_entropy},
      {"dimension", cmd_dimension},   {"verify", cmd_verify},       {"convolve", cmd_convolve},
      {"fixtures", cmd_fixtures}};
  try {
    validate_config(config);
    if (config.threads > 0) set_thread_count(config.threads);
    return table.at(config.command)(Context{config, out});
  } catch (const Error& e) {
    err << ojson{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << "\n";
  } catch (const std::exception& e) {
    err << ojson{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
  }
  return 1;
}

}  // namespace affdim
