#pragma once

// Residual system whose roots are the datasets consistent with an observed
// parameter trace. Unknowns are laid out as z = (x_0..x_{n-1}, y_0..y_{n-1}).
// Each epoch transition j contributes, in this order,
//
//   r_w(j) = sum_i x_i Z_j(x_i, y_i) - n / (2 eta) (w_j - w_{j+1})
//   r_b(j) = sum_i     Z_j(x_i, y_i) - n / (2 eta) (b_j - b_{j+1})
//
// with T_j(x) = tanh(w_j x + b_j) and Z_j(x, y) = (T_j(x) - y)(1 - T_j(x)^2).

#include <cstddef>
#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "insideout/model.hpp"
#include "insideout/trace.hpp"

namespace insideout {

class ReconstructionProblem {
 public:
  /// Validates the trace; throws InsufficientTrace when it has fewer than
  /// two epochs.
  explicit ReconstructionProblem(ParamTrace trace);

  const ParamTrace& trace() const noexcept { return trace_; }
  std::size_t n() const noexcept { return trace_.n; }
  std::size_t unknown_count() const noexcept { return 2 * trace_.n; }
  std::size_t transitions() const noexcept { return trace_.epochs() - 1; }
  std::size_t residual_count() const noexcept { return 2 * transitions(); }

  /// At least as many equations as unknowns (E >= n + 1).
  bool determined() const noexcept { return residual_count() >= unknown_count(); }

  /// Right-hand sides n / (2 eta) * (param_j - param_{j+1}).
  double target_w(std::size_t transition) const;
  double target_b(std::size_t transition) const;

 private:
  ParamTrace trace_;
};

/// Residual vector of length residual_count().
Eigen::VectorXd residuals(const Eigen::VectorXd& z,
                          const ReconstructionProblem& problem);

/// residual_count() x unknown_count() matrix of exact partial derivatives.
Eigen::MatrixXd jacobian(const Eigen::VectorXd& z,
                         const ReconstructionProblem& problem);

/// Packs a dataset into the unknown layout and back.
Eigen::VectorXd pack_unknowns(const Dataset& data);
Dataset unpack_unknowns(const Eigen::VectorXd& z);

struct NetworkShape {
  std::int64_t width = 1;      // nodes per layer
  std::int64_t layers = 2;     // including input and output layers
  std::int64_t instances = 1;  // dataset rows
  std::int64_t epochs = 1;

  void validate() const;
};

/// Equation/unknown counts for an l-wide, L-deep fully connected network.
/// This is a counting heuristic: equations >= unknowns is necessary for a
/// unique solution, not sufficient.
struct FeasibilityReport {
  std::int64_t unknowns = 0;   // l * L * I
  std::int64_t equations = 0;  // l (l + 1) (L - 1) * E
  bool feasible = false;
  std::int64_t min_epochs = 0;      // ceil(l L I / (l (l + 1) (L - 1)))
  double rough_epoch_bound = 0.0;   // I / l
  static constexpr std::string_view basis = "counting heuristic";
};

FeasibilityReport feasibility(const NetworkShape& shape);

}  // namespace insideout
