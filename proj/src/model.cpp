#include "insideout/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "insideout/errors.hpp"

namespace insideout {

namespace {

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool params_ok(Params p) {
  return std::isfinite(p.w) && std::isfinite(p.b) &&
         std::abs(p.w) <= kDivergenceLimit && std::abs(p.b) <= kDivergenceLimit;
}

}  // namespace

Dataset::Dataset(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.empty()) throw ArgumentError("dataset must hold at least one pair");
  if (xs_.size() != ys_.size()) {
    throw ArgumentError("dataset has " + std::to_string(xs_.size()) +
                        " inputs but " + std::to_string(ys_.size()) + " labels");
  }
  if (!all_finite(xs_) || !all_finite(ys_)) {
    throw ArgumentError("dataset values must be finite");
  }
}

void TrainConfig::validate() const {
  if (!std::isfinite(eta) || eta < 0.0) {
    throw ArgumentError("learning rate must be finite and non-negative");
  }
  if (epochs < 1) throw ArgumentError("need at least one epoch");
  if (!std::isfinite(init.w) || !std::isfinite(init.b)) {
    throw ArgumentError("initial parameters must be finite");
  }
}

std::vector<double> forward(Params params, std::span<const double> xs) {
  if (xs.empty()) throw ArgumentError("forward: empty input vector");
  if (!std::isfinite(params.w) || !std::isfinite(params.b) || !all_finite(xs)) {
    throw ArgumentError("forward: inputs must be finite");
  }
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i] = std::tanh(params.w * xs[i] + params.b);
  }
  return out;
}

double mse(std::span<const double> yhat, std::span<const double> ys) {
  if (yhat.size() != ys.size()) {
    throw ArgumentError("mse: length mismatch (" + std::to_string(yhat.size()) +
                        " vs " + std::to_string(ys.size()) + ")");
  }
  if (yhat.empty()) throw ArgumentError("mse: empty vectors");
  double sum = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double d = yhat[i] - ys[i];
    sum += d * d;
  }
  return sum / static_cast<double>(ys.size());
}

Gradient gradients(Params params, const Dataset& data) {
  const auto yhat = forward(params, data.xs());
  const auto& xs = data.xs();
  const auto& ys = data.ys();
  // d/dz tanh(z) = 1 - tanh(z)^2
  Gradient g;
  for (std::size_t i = 0; i < yhat.size(); ++i) {
    const double base = 2.0 * (yhat[i] - ys[i]) * (1.0 - yhat[i] * yhat[i]);
    g.dw += xs[i] * base;
    g.db += base;
  }
  const auto n = static_cast<double>(data.size());
  g.dw /= n;
  g.db /= n;
  return g;
}

ParamTrace train(const Dataset& data, const TrainConfig& cfg, bool record_debug) {
  cfg.validate();

  ParamTrace trace;
  trace.eta = cfg.eta;
  trace.n = data.size();
  trace.params.reserve(cfg.epochs);
  if (record_debug) trace.debug.emplace();

  Params p = cfg.init;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (!params_ok(p)) {
      throw TrainingDiverged(epoch, "training diverged at epoch " +
                                        std::to_string(epoch) +
                                        " (|w| or |b| above 1e6 or non-finite)");
    }
    trace.params.push_back(p);
    if (record_debug) {
      auto yhat = forward(p, data.xs());
      const double loss = mse(yhat, data.ys());
      trace.debug->push_back(DebugRecord{std::move(yhat), loss});
    }
    const Gradient g = gradients(p, data);
    p.w -= cfg.eta * g.dw;
    p.b -= cfg.eta * g.db;
  }
  return trace;
}

Params sample_init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Params p;
  p.w = unit(rng);
  p.b = unit(rng);
  return p;
}

}  // namespace insideout
