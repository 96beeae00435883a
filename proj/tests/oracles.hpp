#pragma once

// Test-only reference computations. Nothing here calls into the library's
// training or residual code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

struct Trace {
  std::vector<double> w;
  std::vector<double> b;
  std::vector<std::vector<double>> yhat;
  std::vector<double> loss;
};

// Straight transcription of the appendix training loop: record, then update.
inline Trace reference_train(const std::vector<double>& x, const std::vector<double>& y,
                             double lr, int epochs, double w, double b) {
  Trace t;
  const auto n = static_cast<double>(x.size());
  for (int e = 0; e < epochs; ++e) {
    std::vector<double> y_hat(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y_hat[i] = std::tanh(w * x[i] + b);
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) loss += (y_hat[i] - y[i]) * (y_hat[i] - y[i]);
    t.w.push_back(w);
    t.b.push_back(b);
    t.yhat.push_back(y_hat);
    t.loss.push_back(loss / n);
    double dw = 0.0, db = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double base = 2.0 * (y_hat[i] - y[i]) * (1.0 - y_hat[i] * y_hat[i]);
      db += base;
      dw += x[i] * base;
    }
    w -= lr * dw / n;
    b -= lr * db / n;
  }
  return t;
}

inline double mse_of(double w, double b, const std::vector<double>& x,
                     const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::tanh(w * x[i] + b) - y[i];
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

// Central differences of a vector-valued function; returns rows x cols.
inline std::vector<std::vector<double>> central_difference(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    std::vector<double> z, double h = 1e-6) {
  const auto f0 = f(z);
  std::vector<std::vector<double>> jac(f0.size(), std::vector<double>(z.size()));
  for (std::size_t c = 0; c < z.size(); ++c) {
    const double keep = z[c];
    z[c] = keep + h;
    const auto fp = f(z);
    z[c] = keep - h;
    const auto fm = f(z);
    z[c] = keep;
    for (std::size_t r = 0; r < f0.size(); ++r) jac[r][c] = (fp[r] - fm[r]) / (2 * h);
  }
  return jac;
}

// Relative error with an absolute floor so that entries near zero compare
// on the scale of the function.
inline double rel_error(double analytic, double numeric, double scale = 1.0) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), scale});
}

// Exhaustive search over pair permutations minimising sum |dx| + |dy|.
inline double best_total_cost(const std::vector<double>& rx, const std::vector<double>& ry,
                              const std::vector<double>& tx, const std::vector<double>& ty) {
  std::vector<std::size_t> perm(rx.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      c += std::abs(rx[i] - tx[perm[i]]) + std::abs(ry[i] - ty[perm[i]]);
    }
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace oracle
