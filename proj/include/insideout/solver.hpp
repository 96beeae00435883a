#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "insideout/model.hpp"
#include "insideout/system.hpp"

namespace insideout {

/// Per-unknown bounds in the (x..., y...) layout. Trial steps are clipped
/// into the box.
struct BoxBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct SolverConfig {
  std::size_t max_iterations = 1000;  // per Levenberg-Marquardt phase
  double residual_tolerance = 1e-10;  // on the residual max-norm
  double step_tolerance = 1e-12;
  double damping_init = 1e-3;
  std::size_t multistart_count = 16;
  std::uint64_t seed = 0;
  std::optional<BoxBounds> box_bounds;
  /// Allow E < n + 1 (fewer equations than unknowns); the solver then
  /// returns some least-squares root, if any.
  bool allow_underdetermined = false;
  /// Replaces the default first start (x_0 = 0.5, everything else 0).
  std::optional<std::vector<double>> initial_guess;

  void validate(std::size_t unknowns) const;
};

struct ReconstructionResult {
  Dataset recovered;
  double residual_norm = 0.0;  // max-norm of the residual vector
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t starts_tried = 0;
};

/// Closed-form recovery for a single pair: the two equations of the first
/// transition divide to x = target_w / target_b, then
/// y = T(x) - target_b / (1 - T(x)^2). Later transitions only enter the
/// reported residual norm.
///
/// Throws ArgumentError if n != 1 and DegenerateDivision if the bias did
/// not move (|target_b| < 1e-14) or tanh saturates.
ReconstructionResult solve_n1(const ReconstructionProblem& problem);

/// Multi-start Levenberg-Marquardt on the residual system. Each start runs
/// LM on all 2n unknowns; if that stalls, it retries from the same inputs
/// with the labels eliminated (they enter the residuals linearly) and
/// polishes the result on the full system. Starts run in order and stop at
/// the first converged one; otherwise the lowest residual wins, ties going
/// to the earlier start.
///
/// Non-convergence is reported through `converged`, not thrown. Throws
/// InsufficientTrace if E < n + 1 and underdetermined mode is off.
ReconstructionResult solve(const ReconstructionProblem& problem,
                           const SolverConfig& cfg = {});

/// The start vectors `solve` would try, in order.
std::vector<Eigen::VectorXd> multistart_points(std::size_t n,
                                               const SolverConfig& cfg);

struct MatchReport {
  /// pairing[i] is the index of the truth pair matched to recovered pair i.
  std::vector<std::size_t> pairing;
  /// Largest |dx| or |dy| over matched pairs.
  double max_abs_error = 0.0;
};

/// Optimal assignment (Hungarian algorithm) of recovered pairs to true pairs
/// under cost |dx| + |dy|. The residual system cannot tell pair orderings
/// apart, so comparisons against ground truth must go through this.
MatchReport match_solutions(const Dataset& recovered, const Dataset& truth);

}  // namespace insideout
