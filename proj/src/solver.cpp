#include "insideout/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "insideout/errors.hpp"

namespace insideout {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kDegenerateTarget = 1e-14;
constexpr double kMaxDamping = 1e16;
constexpr double kMinDamping = 1e-20;
// After reaching the tolerance, keep stepping while the residual still
// drops, up to this many steps or until it is kPolishFactor times smaller.
// The system is badly conditioned, so a residual at the tolerance can
// still leave the unknowns several digits short.
constexpr std::size_t kPolishSteps = 10;
constexpr double kPolishFactor = 1e-4;

double max_norm(const VectorXd& r) {
  return r.size() == 0 ? 0.0 : r.lpNorm<Eigen::Infinity>();
}

struct LmOptions {
  std::size_t max_iterations = 0;
  double residual_tolerance = 0.0;
  double step_tolerance = 0.0;
  double damping_init = 0.0;
  const VectorXd* lower = nullptr;
  const VectorXd* upper = nullptr;
};

struct LmOutcome {
  VectorXd z;
  double residual_norm = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
};

void clip(VectorXd& z, const LmOptions& opt) {
  if (opt.lower) z = z.cwiseMax(*opt.lower);
  if (opt.upper) z = z.cwiseMin(*opt.upper);
}

// Levenberg-Marquardt with Marquardt's diagonal scaling. The damped step
// solves min |J d + r|^2 + lambda |D d|^2 through a QR factorisation of the
// stacked matrix [J; sqrt(lambda) D], which avoids squaring the condition
// number of J. Damping is divided by 10 on accepted steps and multiplied by
// 10 on rejected ones.
//
// `eval(z, r, J)` fills the residuals and, when J is non-null, the Jacobian.
template <typename Eval>
LmOutcome levenberg_marquardt(Eval&& eval, VectorXd z, const LmOptions& opt) {
  LmOutcome out;
  clip(z, opt);
  VectorXd r;
  MatrixXd jac;
  eval(z, r, &jac);
  if (!r.allFinite()) {
    out.z = std::move(z);
    return out;
  }
  double cost = r.squaredNorm();
  double lambda = opt.damping_init;
  const Index p = z.size();
  const Index m = r.size();
  VectorXd scale = VectorXd::Zero(p);
  MatrixXd stacked(m + p, p);
  VectorXd rhs = VectorXd::Zero(m + p);
  VectorXd trial_r;

  std::size_t it = 0;
  std::optional<std::size_t> polish_left;
  while (it < opt.max_iterations) {
    if (max_norm(r) <= opt.residual_tolerance) {
      if (!polish_left) polish_left = kPolishSteps;
      if (*polish_left == 0 ||
          max_norm(r) <= opt.residual_tolerance * kPolishFactor) {
        break;
      }
      --*polish_left;
    }
    ++it;
    scale = scale.cwiseMax(jac.colwise().norm().transpose());
    const double floor = std::max(scale.maxCoeff() * 1e-12, 1e-300);
    const VectorXd d = scale.cwiseMax(floor);

    stacked.topRows(m) = jac;
    stacked.bottomRows(p) = (std::sqrt(lambda) * d).asDiagonal();
    rhs.head(m) = -r;
    const VectorXd step = stacked.colPivHouseholderQr().solve(rhs);

    VectorXd trial = z + step;
    clip(trial, opt);
    eval(trial, trial_r, nullptr);
    const double trial_cost = trial_r.allFinite()
                                  ? trial_r.squaredNorm()
                                  : std::numeric_limits<double>::infinity();
    if (trial_cost < cost) {
      const double moved = (trial - z).norm();
      z = std::move(trial);
      r = trial_r;
      cost = trial_cost;
      lambda = std::max(lambda / 10.0, kMinDamping);
      eval(z, r, &jac);
      if (moved <= opt.step_tolerance * (z.norm() + opt.step_tolerance)) break;
    } else {
      if (polish_left) break;
      lambda *= 10.0;
      if (lambda > kMaxDamping) break;
    }
  }
  out.residual_norm = max_norm(r);
  out.converged = out.residual_norm <= opt.residual_tolerance;
  out.iterations = it;
  out.z = std::move(z);
  return out;
}

// Full system over z = (x, y).
struct FullSystem {
  const ReconstructionProblem& problem;

  void operator()(const VectorXd& z, VectorXd& r, MatrixXd* jac) const {
    r = residuals(z, problem);
    if (jac) *jac = jacobian(z, problem);
  }
};

// Residuals are affine in the labels: r(x, y) = r(x, 0) + A(x) y with
// A = dr/dy. For fixed x the best labels solve a linear least-squares
// problem, leaving a reduced system in x alone (variable projection). The
// reduced Jacobian uses Kaufman's approximation P J_x, where P projects
// onto the orthogonal complement of range(A).
struct ProjectedSystem {
  const ReconstructionProblem& problem;
  Index n;

  VectorXd full_point(const VectorXd& x) const {
    VectorXd z(2 * n);
    z.head(n) = x;
    z.tail(n).setZero();
    if (!x.allFinite()) {
      z.tail(n).setConstant(std::numeric_limits<double>::quiet_NaN());
      return z;
    }
    const VectorXd r0 = residuals(z, problem);
    const MatrixXd a = jacobian(z, problem).rightCols(n);
    z.tail(n) = a.colPivHouseholderQr().solve(-r0);
    return z;
  }

  void operator()(const VectorXd& x, VectorXd& r, MatrixXd* jac) const {
    const VectorXd z = full_point(x);
    if (!z.allFinite()) {
      r = VectorXd::Constant(static_cast<Index>(problem.residual_count()),
                             std::numeric_limits<double>::quiet_NaN());
      return;
    }
    r = residuals(z, problem);
    if (!jac) return;
    const MatrixXd full = jacobian(z, problem);
    const MatrixXd a = full.rightCols(n);
    Eigen::ColPivHouseholderQR<MatrixXd> qr(a);
    const Index rank = qr.rank();
    MatrixXd q = MatrixXd(qr.householderQ()).leftCols(rank);
    const MatrixXd jx = full.leftCols(n);
    *jac = jx - q * (q.transpose() * jx);
  }
};

struct StartOutcome {
  VectorXd z;
  double residual_norm = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
};

StartOutcome run_start(const ReconstructionProblem& problem, const VectorXd& start,
                       const LmOptions& opt) {
  const auto n = static_cast<Index>(problem.n());
  StartOutcome best;

  const LmOutcome direct = levenberg_marquardt(FullSystem{problem}, start, opt);
  best.z = direct.z;
  best.residual_norm = direct.residual_norm;
  best.iterations = direct.iterations;
  best.converged = direct.converged;
  if (best.converged) return best;

  LmOptions reduced_opt = opt;
  VectorXd lower_x;
  VectorXd upper_x;
  if (opt.lower) reduced_opt.lower = &(lower_x = opt.lower->head(n));
  if (opt.upper) reduced_opt.upper = &(upper_x = opt.upper->head(n));
  const ProjectedSystem projected{problem, n};
  const LmOutcome reduced =
      levenberg_marquardt(projected, start.head(n), reduced_opt);
  std::size_t iterations = best.iterations + reduced.iterations;

  const VectorXd seed = projected.full_point(reduced.z);
  if (seed.allFinite()) {
    const LmOutcome polished = levenberg_marquardt(FullSystem{problem}, seed, opt);
    iterations += polished.iterations;
    if (polished.residual_norm < best.residual_norm) {
      best.z = polished.z;
      best.residual_norm = polished.residual_norm;
      best.converged = polished.converged;
    }
  }
  best.iterations = iterations;
  return best;
}

}  // namespace

void SolverConfig::validate(std::size_t unknowns) const {
  if (max_iterations < 1) throw ArgumentError("max_iterations must be >= 1");
  if (!(residual_tolerance > 0.0) || !(step_tolerance > 0.0)) {
    throw ArgumentError("tolerances must be > 0");
  }
  if (!(damping_init > 0.0) || !std::isfinite(damping_init)) {
    throw ArgumentError("damping_init must be finite and > 0");
  }
  if (multistart_count < 1) throw ArgumentError("multistart_count must be >= 1");
  if (box_bounds) {
    if (box_bounds->lower.size() != unknowns || box_bounds->upper.size() != unknowns) {
      throw ArgumentError("box bounds must have 2n entries each");
    }
    for (std::size_t i = 0; i < unknowns; ++i) {
      if (!(box_bounds->lower[i] <= box_bounds->upper[i])) {
        throw ArgumentError("box bound lower > upper at index " + std::to_string(i));
      }
    }
  }
  if (initial_guess) {
    if (initial_guess->size() != unknowns) {
      throw ArgumentError("initial guess must have 2n = " + std::to_string(unknowns) +
                          " entries");
    }
    for (double v : *initial_guess) {
      if (!std::isfinite(v)) throw ArgumentError("initial guess must be finite");
    }
  }
}

std::vector<VectorXd> multistart_points(std::size_t n, const SolverConfig& cfg) {
  const auto size = static_cast<Index>(2 * n);
  std::vector<VectorXd> starts;
  starts.reserve(cfg.multistart_count);

  VectorXd first = VectorXd::Zero(size);
  if (cfg.initial_guess) {
    first = Eigen::Map<const VectorXd>(cfg.initial_guess->data(), size);
  } else {
    first[0] = 0.5;
  }
  starts.push_back(first);

  std::uniform_real_distribution<double> input(0.0, 1.0);
  std::uniform_real_distribution<double> label(-0.9, 0.9);
  for (std::size_t k = 1; k < cfg.multistart_count; ++k) {
    // One stream per start so that a start's point does not depend on the
    // others.
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                      static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    VectorXd z(size);
    for (Index i = 0; i < static_cast<Index>(n); ++i) z[i] = input(rng);
    for (Index i = 0; i < static_cast<Index>(n); ++i) {
      z[static_cast<Index>(n) + i] = label(rng);
    }
    starts.push_back(std::move(z));
  }

  if (cfg.box_bounds) {
    const Eigen::Map<const VectorXd> lo(cfg.box_bounds->lower.data(), size);
    const Eigen::Map<const VectorXd> hi(cfg.box_bounds->upper.data(), size);
    for (auto& s : starts) s = s.cwiseMax(lo).cwiseMin(hi);
  }
  return starts;
}

ReconstructionResult solve_n1(const ReconstructionProblem& problem) {
  if (problem.n() != 1) {
    throw ArgumentError("closed-form recovery needs n == 1, trace has n = " +
                        std::to_string(problem.n()));
  }
  const double target_w = problem.target_w(0);
  const double target_b = problem.target_b(0);
  if (std::abs(target_b) < kDegenerateTarget) {
    throw DegenerateDivision(
        "bias did not move in the first transition; x is undetermined");
  }
  const double x = target_w / target_b;
  const Params p0 = problem.trace().params.front();
  const double t = std::tanh(p0.w * x + p0.b);
  const double s = 1.0 - t * t;
  if (s < kDegenerateTarget) {
    throw DegenerateDivision("tanh saturated at the recovered input");
  }
  const double y = t - target_b / s;
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw DegenerateDivision("closed-form recovery produced non-finite values");
  }

  Eigen::VectorXd z(2);
  z << x, y;
  ReconstructionResult result{Dataset({x}, {y})};
  result.residual_norm = max_norm(residuals(z, problem));
  result.converged = result.residual_norm <= SolverConfig{}.residual_tolerance;
  result.iterations = 0;
  result.starts_tried = 1;
  return result;
}

ReconstructionResult solve(const ReconstructionProblem& problem,
                           const SolverConfig& cfg) {
  cfg.validate(problem.unknown_count());
  if (!problem.determined() && !cfg.allow_underdetermined) {
    throw InsufficientTrace(
        "need at least n + 1 = " + std::to_string(problem.n() + 1) +
        " epochs for " + std::to_string(problem.n()) + " pairs, trace has " +
        std::to_string(problem.trace().epochs()));
  }

  LmOptions opt;
  opt.max_iterations = cfg.max_iterations;
  opt.residual_tolerance = cfg.residual_tolerance;
  opt.step_tolerance = cfg.step_tolerance;
  opt.damping_init = cfg.damping_init;
  VectorXd lower;
  VectorXd upper;
  if (cfg.box_bounds) {
    const auto size = static_cast<Index>(problem.unknown_count());
    lower = Eigen::Map<const VectorXd>(cfg.box_bounds->lower.data(), size);
    upper = Eigen::Map<const VectorXd>(cfg.box_bounds->upper.data(), size);
    opt.lower = &lower;
    opt.upper = &upper;
  }

  const auto starts = multistart_points(problem.n(), cfg);
  StartOutcome best;
  std::size_t tried = 0;
  for (const auto& start : starts) {
    ++tried;
    StartOutcome outcome = run_start(problem, start, opt);
    if (outcome.residual_norm < best.residual_norm || best.z.size() == 0) {
      best = std::move(outcome);
    }
    if (best.converged) break;
  }

  ReconstructionResult result{unpack_unknowns(best.z)};
  result.residual_norm = best.residual_norm;
  result.iterations = best.iterations;
  result.converged = best.converged;
  result.starts_tried = tried;
  return result;
}

MatchReport match_solutions(const Dataset& recovered, const Dataset& truth) {
  if (recovered.size() != truth.size()) {
    throw ArgumentError("cannot match datasets of sizes " +
                        std::to_string(recovered.size()) + " and " +
                        std::to_string(truth.size()));
  }
  const std::size_t n = recovered.size();
  const auto cost = [&](std::size_t i, std::size_t j) {
    return std::abs(recovered.xs()[i] - truth.xs()[j]) +
           std::abs(recovered.ys()[i] - truth.ys()[j]);
  };

  // Hungarian algorithm with potentials, 1-based rows/columns; column 0 is
  // a sentinel.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match_col(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match_col[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t row0 = match_col[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double cur = cost(row0 - 1, col - 1) - u[row0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match_col[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match_col[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match_col[col0] = match_col[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  MatchReport report;
  report.pairing.assign(n, 0);
  for (std::size_t col = 1; col <= n; ++col) {
    report.pairing[match_col[col] - 1] = col - 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = report.pairing[i];
    report.max_abs_error =
        std::max({report.max_abs_error, std::abs(recovered.xs()[i] - truth.xs()[j]),
                  std::abs(recovered.ys()[i] - truth.ys()[j])});
  }
  return report;
}

}  // namespace insideout
