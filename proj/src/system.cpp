#include "insideout/system.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "insideout/errors.hpp"
#include "insideout/model.hpp"

namespace insideout {

namespace {

void check_unknowns(const Eigen::VectorXd& z, const ReconstructionProblem& p) {
  if (static_cast<std::size_t>(z.size()) != p.unknown_count()) {
    throw ArgumentError("unknown vector has length " + std::to_string(z.size()) +
                        ", expected 2n = " + std::to_string(p.unknown_count()));
  }
  if (!z.allFinite()) throw ArgumentError("unknown vector must be finite");
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw ArgumentError("network shape too large to count");
  }
  return out;
}

}  // namespace

ReconstructionProblem::ReconstructionProblem(ParamTrace trace)
    : trace_(std::move(trace)) {
  trace_.validate();
  if (trace_.epochs() < 2) {
    throw InsufficientTrace("need at least 2 epochs, trace has " +
                            std::to_string(trace_.epochs()));
  }
}

double ReconstructionProblem::target_w(std::size_t j) const {
  const double scale = static_cast<double>(trace_.n) / (2.0 * trace_.eta);
  return scale * (trace_.params.at(j).w - trace_.params.at(j + 1).w);
}

double ReconstructionProblem::target_b(std::size_t j) const {
  const double scale = static_cast<double>(trace_.n) / (2.0 * trace_.eta);
  return scale * (trace_.params.at(j).b - trace_.params.at(j + 1).b);
}

Eigen::VectorXd residuals(const Eigen::VectorXd& z,
                          const ReconstructionProblem& problem) {
  check_unknowns(z, problem);
  const auto n = static_cast<Eigen::Index>(problem.n());
  const auto& params = problem.trace().params;
  Eigen::VectorXd r(problem.residual_count());
  for (std::size_t j = 0; j < problem.transitions(); ++j) {
    double sum_xz = 0.0;
    double sum_z = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = z[i];
      const double t = std::tanh(params[j].w * x + params[j].b);
      const double zk = (t - z[n + i]) * (1.0 - t * t);
      sum_xz += x * zk;
      sum_z += zk;
    }
    r[2 * j] = sum_xz - problem.target_w(j);
    r[2 * j + 1] = sum_z - problem.target_b(j);
  }
  return r;
}

Eigen::MatrixXd jacobian(const Eigen::VectorXd& z,
                         const ReconstructionProblem& problem) {
  check_unknowns(z, problem);
  const auto n = static_cast<Eigen::Index>(problem.n());
  const auto& params = problem.trace().params;
  Eigen::MatrixXd jac(problem.residual_count(), problem.unknown_count());
  for (std::size_t j = 0; j < problem.transitions(); ++j) {
    const auto rw = static_cast<Eigen::Index>(2 * j);
    const auto rb = rw + 1;
    const double w = params[j].w;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = z[i];
      const double y = z[n + i];
      const double t = std::tanh(w * x + params[j].b);
      const double s = 1.0 - t * t;
      const double zk = (t - y) * s;
      // dZ/dx = w s (s - 2 t (t - y)),  dZ/dy = -s
      const double dz_dx = w * s * (s - 2.0 * t * (t - y));
      const double dz_dy = -s;
      jac(rw, i) = zk + x * dz_dx;
      jac(rw, n + i) = x * dz_dy;
      jac(rb, i) = dz_dx;
      jac(rb, n + i) = dz_dy;
    }
  }
  return jac;
}

Eigen::VectorXd pack_unknowns(const Dataset& data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::VectorXd z(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    z[i] = data.xs()[static_cast<std::size_t>(i)];
    z[n + i] = data.ys()[static_cast<std::size_t>(i)];
  }
  return z;
}

Dataset unpack_unknowns(const Eigen::VectorXd& z) {
  if (z.size() == 0 || z.size() % 2 != 0) {
    throw ArgumentError("unknown vector must have even, non-zero length");
  }
  const auto n = z.size() / 2;
  return Dataset(std::vector<double>(z.data(), z.data() + n),
                 std::vector<double>(z.data() + n, z.data() + 2 * n));
}

void NetworkShape::validate() const {
  if (width < 1) throw ArgumentError("width must be >= 1");
  if (layers < 2) throw ArgumentError("layers must be >= 2 (input and output)");
  if (instances < 1) throw ArgumentError("instances must be >= 1");
  if (epochs < 1) throw ArgumentError("epochs must be >= 1");
}

FeasibilityReport feasibility(const NetworkShape& shape) {
  shape.validate();
  FeasibilityReport rep;
  rep.unknowns = checked_mul(checked_mul(shape.width, shape.layers), shape.instances);
  // Each non-input node yields one equation per incoming weight plus one
  // for its bias, every epoch.
  const std::int64_t per_epoch =
      checked_mul(checked_mul(shape.width, shape.width + 1), shape.layers - 1);
  rep.equations = checked_mul(per_epoch, shape.epochs);
  rep.feasible = rep.equations >= rep.unknowns;
  rep.min_epochs = (rep.unknowns + per_epoch - 1) / per_epoch;
  rep.rough_epoch_bound =
      static_cast<double>(shape.instances) / static_cast<double>(shape.width);
  return rep;
}

}  // namespace insideout
