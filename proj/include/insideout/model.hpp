#pragma once

// Single tanh neuron y_hat = tanh(w * x + b) trained with full-batch
// gradient descent on the mean squared error.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "insideout/trace.hpp"

namespace insideout {

/// Paired inputs and labels. Both vectors have the same length n >= 1 and
/// hold finite values; the constructor enforces this.
class Dataset {
 public:
  Dataset(std::vector<double> xs, std::vector<double> ys);

  std::size_t size() const noexcept { return xs_.size(); }
  const std::vector<double>& xs() const noexcept { return xs_; }
  const std::vector<double>& ys() const noexcept { return ys_; }

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

struct TrainConfig {
  double eta = 0.1;
  std::size_t epochs = 5;
  Params init{0.5, 0.5};

  // eta == 0 is accepted (the trace then repeats init); negative or
  // non-finite rates are not.
  void validate() const;
};

struct Gradient {
  double dw = 0.0;
  double db = 0.0;
};

/// Parameters beyond this magnitude are treated as divergence.
inline constexpr double kDivergenceLimit = 1e6;

std::vector<double> forward(Params params, std::span<const double> xs);

double mse(std::span<const double> yhat, std::span<const double> ys);

/// Analytic partial derivatives of the MSE with respect to w and b.
Gradient gradients(Params params, const Dataset& data);

/// Runs cfg.epochs epochs. Entry j of the result holds the parameters used
/// in epoch j's forward pass, i.e. recorded before that epoch's update.
/// With `record_debug` the trace also carries per-epoch y_hat and loss.
///
/// Throws TrainingDiverged if |w| or |b| leaves [-1e6, 1e6] or becomes
/// non-finite.
ParamTrace train(const Dataset& data, const TrainConfig& cfg,
                 bool record_debug = false);

/// Initial parameters drawn uniformly from [0, 1] with a seeded generator.
Params sample_init(std::uint64_t seed);

}  // namespace insideout
