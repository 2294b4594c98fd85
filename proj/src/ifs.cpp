#include "affdim/ifs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "affdim/parallel.hpp"
#include "affdim/random.hpp"

namespace affdim {

bool CylinderWord::is_prefix_of(const CylinderWord& other) const {
  return symbols.size() <= other.symbols.size() &&
         std::equal(symbols.begin(), symbols.end(), other.symbols.begin());
}

std::string CylinderWord::str() const {
  std::string out;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(symbols[i]);
  }
  return out;
}

std::vector<double> IfsSystem::cumulative() const {
  std::vector<double> cdf(probs.size());
  double acc = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) cdf[i] = (acc += probs[i]);
  if (!cdf.empty()) cdf.back() = 1.0;
  return cdf;
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

Vector2d fixed_point(const AffineMap2d& f) {
  return inverse2<double>(Matrix2d::Identity() - f.linear) * f.translation;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Smallest k <= 6 at which every product of k linear parts has norm < 1, or 0.
int eventual_contraction_length(const IfsSystem& system) {
  std::vector<Matrix2d> level{Matrix2d::Identity()};
  for (int k = 1; k <= 6; ++k) {
    std::vector<Matrix2d> next;
    next.reserve(level.size() * system.size());
    double worst = 0;
    for (const auto& a : level) {
      for (const auto& m : system.maps) {
        next.push_back(a * m.linear);
        worst = std::max(worst, operator_norm(next.back()));
      }
    }
    if (worst < 1) return k;
    if (next.size() > 4096) break;
    level = std::move(next);
  }
  return 0;
}

}  // namespace

ValidationReport validate(const IfsSystem& system) {
  ValidationReport report;
  const std::size_t k = system.size();

  report.checks.push_back({"map_count", k >= 2, "k = " + std::to_string(k)});
  report.checks.push_back({"probability_count", system.probs.size() == k,
                           std::to_string(system.probs.size()) + " probabilities for " +
                               std::to_string(k) + " maps"});

  {
    ValidationCheck c{"probabilities_positive", true, "all p_i > 0"};
    for (std::size_t i = 0; i < system.probs.size(); ++i) {
      if (!(system.probs[i] > 0)) {
        c.passed = false;
        c.detail = "p_" + std::to_string(i) + " = " + fmt(system.probs[i]);
        break;
      }
    }
    report.checks.push_back(c);
  }
  {
    double sum = 0;
    for (double p : system.probs) sum += p;
    report.checks.push_back({"probabilities_sum", std::abs(sum - 1) <= 1e-12, "sum = " + fmt(sum)});
  }

  bool invertible = true;
  {
    ValidationCheck c{"invertible", true, "all linear parts invertible"};
    for (std::size_t i = 0; i < k; ++i) {
      const auto& a = system.maps[i].linear;
      if (!(std::abs(a.determinant()) > 1e-14 * a.squaredNorm())) {
        c.passed = invertible = false;
        c.detail = "map " + std::to_string(i) + " has det = " + fmt(a.determinant());
        break;
      }
    }
    report.checks.push_back(c);
  }

  bool contracting = true;
  {
    ValidationCheck c{"contraction", true, ""};
    double worst = 0;
    std::size_t worst_index = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double a1 = operator_norm(system.maps[i].linear);
      if (a1 > worst) {
        worst = a1;
        worst_index = i;
      }
    }
    if (worst < 1) {
      c.detail = "max alpha1 = " + fmt(worst);
    } else if (const int len = k > 0 ? eventual_contraction_length(system) : 0; len > 0) {
      c.detail = "map " + std::to_string(worst_index) + " has alpha1 = " + fmt(worst) +
                 "; every product of length " + std::to_string(len) +
                 " contracts (contraction in an adapted norm)";
    } else {
      c.passed = contracting = false;
      c.detail = "map " + std::to_string(worst_index) + " has alpha1 = " + fmt(worst) +
                 " and no product length <= 6 contracts";
    }
    report.checks.push_back(c);
  }

  {
    ValidationCheck c{"no_common_fixed_point", false, ""};
    if (k >= 1 && invertible && contracting) {
      const Vector2d x0 = fixed_point(system.maps[0]);
      double moved = 0;
      std::size_t mover = 0;
      for (std::size_t i = 1; i < k; ++i) {
        const double d = (system.maps[i](x0) - x0).norm();
        if (d > moved) {
          moved = d;
          mover = i;
        }
      }
      c.passed = moved > 1e-10;
      c.detail = "fixed point of map 0 = (" + fmt(x0(0)) + ", " + fmt(x0(1)) + ")";
      c.detail += c.passed ? "; map " + std::to_string(mover) + " moves it by " + fmt(moved)
                           : "; fixed by every map";
    } else {
      c.detail = "not evaluated (needs invertible contracting maps)";
    }
    report.checks.push_back(c);
  }
  return report;
}

WordMap compose_word(const IfsSystem& system, const CylinderWord& word) {
  WordMap out{word, AffineMap2d::Identity(), 1.0};
  for (Symbol s : word.symbols) {
    if (s >= system.size()) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "symbol " + std::to_string(s) + " with " + std::to_string(system.size()) + " maps");
    }
    out.map = compose(out.map, system.maps[s]);
    out.prob *= s < system.probs.size() ? system.probs[s] : 0.0;
  }
  return out;
}

namespace {

constexpr std::size_t kMaxDepth = 4096;

template <typename Stop>
std::vector<WordMap> enumerate_stopping(const IfsSystem& system, std::size_t cap, Stop stop) {
  std::vector<WordMap> out;
  if (system.size() == 0) return out;
  // Depth-first in lexicographic order; the empty word never stops for n >= 1.
  struct Frame {
    WordMap node;
    Symbol next;
  };
  std::vector<Frame> stack;
  stack.push_back({WordMap{}, 0});
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next >= system.size()) {
      stack.pop_back();
      continue;
    }
    const Symbol s = top.next++;
    WordMap child = top.node;
    child.word.symbols.push_back(s);
    child.map = compose(child.map, system.maps[s]);
    child.prob *= system.probs[s];
    if (stop(child.map.linear)) {
      if (out.size() >= cap) {
        throw Error(ErrorCode::BudgetExceeded,
                    "partition exceeds the word cap of " + std::to_string(cap));
      }
      out.push_back(std::move(child));
    } else {
      if (child.word.size() >= kMaxDepth) {
        throw Error(ErrorCode::DegenerateSystem, "stopping rule never fires (non-contracting system)");
      }
      stack.push_back({std::move(child), 0});
    }
  }
  return out;
}

}  // namespace

std::vector<WordMap> enumerate_psi(const IfsSystem& system, int n, std::size_t cap) {
  if (n < 1) throw Error(ErrorCode::PreconditionViolated, "enumerate_psi needs n >= 1");
  const double scale = std::ldexp(1.0, -n);
  return enumerate_stopping(system, cap,
                            [scale](const Matrix2d& a) { return singular_values(a)(0) <= scale; });
}

std::vector<WordMap> enumerate_upsilon(const IfsSystem& system, int n, std::size_t cap) {
  if (n < 1) throw Error(ErrorCode::PreconditionViolated, "enumerate_upsilon needs n >= 1");
  const double scale = std::ldexp(1.0, -n);
  return enumerate_stopping(system, cap,
                            [scale](const Matrix2d& a) { return singular_values(a)(1) <= scale; });
}

std::vector<WordMap> enumerate_level(const IfsSystem& system, int n, std::size_t cap) {
  if (n < 0) throw Error(ErrorCode::PreconditionViolated, "enumerate_level needs n >= 0");
  if (n == 0) return {WordMap{}};
  const double count = std::pow(static_cast<double>(system.size()), n);
  if (count > static_cast<double>(cap)) {
    throw Error(ErrorCode::BudgetExceeded, std::to_string(system.size()) + "^" + std::to_string(n) +
                                               " words exceed the cap of " + std::to_string(cap));
  }
  std::vector<WordMap> level{WordMap{}};
  for (int depth = 0; depth < n; ++depth) {
    std::vector<WordMap> next;
    next.reserve(level.size() * system.size());
    for (const auto& w : level) {
      for (Symbol s = 0; s < system.size(); ++s) {
        WordMap child = w;
        child.word.symbols.push_back(s);
        child.map = compose(w.map, system.maps[s]);
        child.prob = w.prob * system.probs[s];
        next.push_back(std::move(child));
      }
    }
    level = std::move(next);
  }
  return level;
}

CylinderWord sample_word(const IfsSystem& system, WordKind kind, int n, std::uint64_t seed,
                         std::uint64_t stream) {
  if (n < 1) throw Error(ErrorCode::PreconditionViolated, "sample_word needs n >= 1");
  const auto cdf = system.cumulative();
  Rng rng(seed, stream);
  CylinderWord word;
  if (kind == WordKind::Uniform) {
    for (int i = 0; i < n; ++i) word.symbols.push_back(static_cast<Symbol>(rng.pick(cdf)));
    return word;
  }
  const double scale = std::ldexp(1.0, -n);
  const int index = kind == WordKind::Psi ? 0 : 1;
  Matrix2d a = Matrix2d::Identity();
  while (singular_values(a)(index) > scale) {
    if (word.size() >= kMaxDepth) {
      throw Error(ErrorCode::DegenerateSystem, "stopping rule never fires (non-contracting system)");
    }
    const auto s = static_cast<Symbol>(rng.pick(cdf));
    word.symbols.push_back(s);
    a = a * system.maps[s].linear;
  }
  return word;
}

namespace {

// Runs the coding-map walk for one sample; `record` sees every symbol.
template <typename Record>
AffineMap2d coded_walk(const IfsSystem& system, std::span<const double> cdf, double scale,
                       Rng& rng, Record&& record) {
  AffineMap2d acc;
  std::size_t steps = 0;
  while (operator_norm(acc.linear) >= scale) {
    if (++steps > kMaxDepth) {
      throw Error(ErrorCode::DegenerateSystem, "coding walk does not contract");
    }
    const auto s = static_cast<Symbol>(rng.pick(cdf));
    record(s);
    acc = compose(acc, system.maps[s]);
  }
  return acc;
}

}  // namespace

std::vector<CodedSample> sample_attractor(const IfsSystem& system, std::size_t count,
                                          int depth_target, std::uint64_t seed) {
  const auto cdf = system.cumulative();
  const Vector2d x0 = fixed_point(system.maps.at(0));
  const double scale = std::ldexp(1.0, -depth_target);
  std::vector<CodedSample> out(count);
  parallel_for(count, [&](std::size_t j) {
    Rng rng(seed, j);
    CodedSample& sample = out[j];
    sample.map = coded_walk(system, cdf, scale, rng,
                            [&](Symbol s) { sample.word.symbols.push_back(s); });
    sample.point = sample.map(x0);
  });
  return out;
}

PlaneMeasure sample_measure(const IfsSystem& system, std::size_t count, int depth_target,
                            std::uint64_t seed) {
  const auto cdf = system.cumulative();
  const Vector2d x0 = fixed_point(system.maps.at(0));
  const double scale = std::ldexp(1.0, -depth_target);
  PlaneMeasure out;
  out.atoms.resize(count);
  out.weights.assign(count, count ? 1.0 / static_cast<double>(count) : 0.0);
  parallel_for(count, [&](std::size_t j) {
    Rng rng(seed, j);
    out.atoms[j] = coded_walk(system, cdf, scale, rng, [](Symbol) {})(x0);
  });
  return out;
}

PlaneMeasure to_measure(std::span<const CodedSample> samples) {
  std::vector<Vector2d> pts;
  pts.reserve(samples.size());
  for (const auto& s : samples) pts.push_back(s.point);
  return PlaneMeasure::uniform(std::move(pts));
}

}  // namespace affdim
