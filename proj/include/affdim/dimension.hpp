#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affdim/entropy.hpp"
#include "affdim/ifs.hpp"
#include "affdim/separation.hpp"
#include "affdim/spectral.hpp"

namespace affdim {

/// Base-2 Shannon entropy of a positive probability vector.
double shannon(std::span<const double> p);

/// Piecewise formula; throws InvalidExponents unless chi2 < chi1 < 0.
double lyapunov_dimension(double h, double chi1, double chi2);

struct DimensionBudget {
  double H_p = 0;
  double chi1 = 0;
  double chi2 = 0;
  double dim_L = 0;
  double alpha_hat = 0;
  double beta_hat = 0;
  double beta_target = 0;   // min{1, H_p / |chi1|}
  double gamma_target = 0;  // min{2, dim_L} - beta_target
  double H1 = 0;
  double H2 = 0;
  double H3 = 0;
  bool inconsistent = false;  // H3 < -kH3Slack
};

inline constexpr double kH3Slack = 0.05;
inline constexpr double kH3Threshold = 0.05;

DimensionBudget ly_budget(double h, double chi1, double chi2, double alpha_hat, double beta_hat);

struct H3Estimate {
  std::vector<int> levels;
  std::vector<double> values;  // H(first symbol | D_n(point)), bits
  double h3 = 0;               // value at the deepest level
};

/// Throws BiasRuleViolated when the deepest level is undersampled.
H3Estimate estimate_H3(const IfsSystem& system, std::size_t samples, int n_cluster,
                       std::uint64_t seed);

struct ConicFit {
  double ratio = 0;  // sigma_min / sigma_max of the whitened design matrix
  bool on_conic = false;
  bool is_line = false;
  Eigen::Matrix<double, 6, 1> coefficients;  // (x^2, xy, y^2, x, y, 1), unit norm
};

inline constexpr double kConicThreshold = 1e-6;

ConicFit quadratic_curve_test(std::span<const Vector2d> points, double threshold = kConicThreshold);

struct AffinityFit {
  double residual = 0;  // mean sin^2 of the angle between psi(x) and L(x)
  bool affine = false;  // residual <= kAffinityThreshold
  bool degenerate = false;
  AffineMap2d psi;
};

inline constexpr double kAffinityThreshold = 0.01;

/// Fit of a direction field by an affine vector field, via reweighted
/// homogeneous least squares.
AffinityFit fit_affine_field(std::span<const Vector2d> points, std::span<const ProjectivePointd> field);

AffinityFit l_affinity_test(const IfsSystem& system, std::size_t samples, std::uint64_t seed);

struct BourgainCheck {
  double inf_projection = 0;  // inf_W (1/n) H(pi_W mu, D_n)
  double alpha_hat = 0;
  double margin = 0;          // inf_projection - alpha_hat / 2
  bool holds = false;
  ProjectivePointd argmin;
};

inline constexpr int kSweepAngles = 256;

BourgainCheck bourgain_check(const PlaneMeasure& mu, int n, double alpha_hat);
BourgainCheck bourgain_check(const IfsSystem& system, std::size_t samples, int n, std::uint64_t seed);

enum class HypothesisState { Holds, Fails, Inconclusive, NotApplicable };

std::string to_string(HypothesisState state);

struct HypothesisCheck {
  std::string name;
  HypothesisState state = HypothesisState::NotApplicable;
  std::string detail;
};

enum class VerdictStatus { Pass, Fail, HypothesisFailure, Inconclusive };

std::string to_string(VerdictStatus status);

struct VerifyOptions {
  std::size_t samples = 1'000'000;
  int n0 = 6;
  int n1 = 11;
  int projection_level = 10;
  double tolerance = 0.1;
  int lyapunov_trials = 16;
  int lyapunov_length = 20000;
  std::size_t furstenberg_samples = 20000;
  std::size_t separation_words = std::size_t{1} << 12;
  int h3_level = 8;
};

struct Verdict {
  std::string system;
  std::string route;  // "main" or "triangular"
  VerdictStatus status = VerdictStatus::Inconclusive;
  std::string failed_hypothesis;
  std::vector<HypothesisCheck> hypotheses;
  double alpha_hat = 0;
  double alpha_err = 0;
  double dim_L = 0;
  double target = 0;  // min{2, dim_L}
  double tolerance = 0;
  LyapunovEstimate lyapunov;
  std::optional<DimensionBudget> budget;
  std::optional<SeparationReport> separation;
  std::optional<ConicFit> conic;
  std::optional<EntropyDimensionFit> fit;
  double eta_residual = 0;
  double eta_star_residual = 0;
  std::vector<std::string> notes;
};

Verdict verify_main(const IfsSystem& system, std::uint64_t seed, const VerifyOptions& options = {});

/// 2 on hypothesis failure, 0 for every other completed verdict.
int exit_code(const Verdict& verdict);

}  // namespace affdim
