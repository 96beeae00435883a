#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "insideout/cli.hpp"
#include "insideout/errors.hpp"
#include "insideout/solver.hpp"
#include "oracles.hpp"

using namespace insideout;

namespace {

ParamTrace trace_of(const Dataset& d, std::size_t epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  return train(d, cfg);
}

ParamTrace seven_digit_table2() {
  ParamTrace t;
  t.eta = 0.1;
  t.n = 2;
  t.params = {{0.5000000, 0.5000000}, {0.4925472, 0.4810773}, {0.4855530, 0.4634884}};
  return t;
}

}  // namespace

TEST_CASE("solve_n1") {
  SUBCASE("full-precision table 1") {
    const ReconstructionProblem p(trace_of(Dataset({0.6}, {0.5}), 5));
    const auto r = solve_n1(p);
    CHECK(std::abs(r.recovered.xs()[0] - 0.6) < 1e-6);
    CHECK(std::abs(r.recovered.ys()[0] - 0.5) < 1e-6);
    CHECK(r.converged);
    CHECK(r.residual_norm < 1e-10);
  }
  SUBCASE("rounded table values") {
    ParamTrace t;
    t.eta = 0.1;
    t.n = 1;
    t.params = {{0.500, 0.500}, {0.489, 0.482}};
    const ReconstructionProblem p(t);
    CHECK(p.target_w(0) == doctest::Approx(0.055));
    CHECK(p.target_b(0) == doctest::Approx(0.090));
    const auto r = solve_n1(p);
    CHECK(r.recovered.xs()[0] == doctest::Approx(0.055 / 0.090));
    CHECK(std::abs(r.recovered.xs()[0] - 0.6) < 0.02);
  }
  SUBCASE("stationary dataset is degenerate") {
    const double x = 0.4;
    const double y = std::tanh(0.5 * x + 0.5);
    const ReconstructionProblem p(trace_of(Dataset({x}, {y}), 3));
    CHECK_THROWS_AS(solve_n1(p), DegenerateDivision);
  }
  SUBCASE("needs n == 1") {
    CHECK_THROWS_AS(solve_n1(ReconstructionProblem(seven_digit_table2())), ArgumentError);
  }
  SUBCASE("later transitions feed the residual norm") {
    ParamTrace t = trace_of(Dataset({0.6}, {0.5}), 4);
    t.params[3].w += 1e-3;
    const auto r = solve_n1(ReconstructionProblem(t));
    CHECK_FALSE(r.converged);
    CHECK(r.residual_norm > 1e-3);
  }
}

TEST_CASE("solve") {
  SUBCASE("seven-digit table 2 from the default first start") {
    const ReconstructionProblem p(seven_digit_table2());
    SolverConfig cfg;
    cfg.multistart_count = 1;
    const auto r = solve(p, cfg);
    REQUIRE(r.converged);
    CHECK(r.starts_tried == 1);
    CHECK(std::abs(r.recovered.xs()[0] - 0.599961) < 5e-4);
    CHECK(std::abs(r.recovered.xs()[1] - 0.200118) < 5e-4);
    CHECK(std::abs(r.recovered.ys()[0] - 0.500027) < 5e-4);
    CHECK(std::abs(r.recovered.ys()[1] - 0.400007) < 5e-4);
  }
  SUBCASE("starting at the ground truth converges immediately") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (std::size_t n = 1; n <= 5; ++n) {
      std::vector<double> xs(n), ys(n);
      for (auto& v : xs) v = u(rng);
      for (auto& v : ys) v = u(rng);
      const Dataset truth(xs, ys);
      const ReconstructionProblem p(trace_of(truth, n + 1));
      SolverConfig cfg;
      const auto z = pack_unknowns(truth);
      cfg.initial_guess = std::vector<double>(z.data(), z.data() + z.size());
      const auto r = solve(p, cfg);
      CHECK(r.converged);
      CHECK(r.iterations <= 2);
      CHECK(r.residual_norm < 1e-10);
    }
  }
  SUBCASE("table 4 up to pair permutation") {
    const Dataset truth({0.6, 0.2, 0.1, 0.9}, {0.5, 0.4, 0.3, 0.6});
    const auto observed = trace_of(truth, 5);
    const auto r = solve(ReconstructionProblem(observed), SolverConfig{});
    REQUIRE(r.converged);
    CHECK(match_solutions(r.recovered, truth).max_abs_error < 1e-6);
    // Retraining on the recovered data reproduces the observed trace.
    CHECK(cli::verify_dataset(observed, r.recovered).pass);
  }
  SUBCASE("overdetermined traces") {
    const Dataset truth({0.3, 0.8}, {0.1, 0.7});
    const auto r = solve(ReconstructionProblem(trace_of(truth, 8)), SolverConfig{});
    REQUIRE(r.converged);
    CHECK(match_solutions(r.recovered, truth).max_abs_error < 1e-6);
  }
  SUBCASE("inconsistent trace is reported, not thrown") {
    auto t = trace_of(Dataset({0.3, 0.8}, {0.1, 0.7}), 8);
    t.params[6].b += 1e-4;
    SolverConfig cfg;
    cfg.multistart_count = 3;
    cfg.max_iterations = 50;
    const auto r = solve(ReconstructionProblem(t), cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.starts_tried == 3);
    CHECK(r.residual_norm > cfg.residual_tolerance);
  }
  SUBCASE("too few epochs") {
    const Dataset truth({0.3, 0.8, 0.5}, {0.1, 0.7, 0.2});
    const ReconstructionProblem p(trace_of(truth, 3));
    CHECK_THROWS_AS(solve(p, SolverConfig{}), InsufficientTrace);
    SolverConfig cfg;
    cfg.allow_underdetermined = true;
    cfg.multistart_count = 4;
    const auto r = solve(p, cfg);
    if (r.converged) CHECK(r.residual_norm <= cfg.residual_tolerance);
  }
  SUBCASE("deterministic for a fixed seed") {
    const Dataset truth({0.25, 0.65, 0.45}, {0.8, 0.15, 0.5});
    const ReconstructionProblem p(trace_of(truth, 4));
    SolverConfig cfg;
    cfg.seed = 99;
    const auto a = solve(p, cfg);
    const auto b = solve(p, cfg);
    CHECK(a.recovered == b.recovered);
    CHECK(a.residual_norm == b.residual_norm);
    CHECK(a.iterations == b.iterations);
    CHECK(a.starts_tried == b.starts_tried);
  }
  SUBCASE("box bounds keep the iterate inside the box") {
    const Dataset truth({0.3, 0.8}, {0.1, 0.7});
    const ReconstructionProblem p(trace_of(truth, 3));
    SolverConfig cfg;
    cfg.box_bounds = BoxBounds{{0, 0, -1, -1}, {1, 1, 1, 1}};
    const auto r = solve(p, cfg);
    for (double v : r.recovered.xs()) CHECK((v >= 0.0 && v <= 1.0));
    for (double v : r.recovered.ys()) CHECK((v >= -1.0 && v <= 1.0));
    CHECK(r.converged);
  }
  SUBCASE("configuration errors") {
    const ReconstructionProblem p(seven_digit_table2());
    SolverConfig cfg;
    cfg.multistart_count = 0;
    CHECK_THROWS_AS(solve(p, cfg), ArgumentError);
    cfg = {};
    cfg.residual_tolerance = 0;
    CHECK_THROWS_AS(solve(p, cfg), ArgumentError);
    cfg = {};
    cfg.initial_guess = std::vector<double>{0.1, 0.2};
    CHECK_THROWS_AS(solve(p, cfg), ArgumentError);
    cfg = {};
    cfg.box_bounds = BoxBounds{{0, 0, 0, 0}, {1, 1, -1, 1}};
    CHECK_THROWS_AS(solve(p, cfg), ArgumentError);
  }
}

TEST_CASE("solve and solve_n1 agree on single pairs") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int k = 0; k < 25; ++k) {
    const Dataset truth({u(rng)}, {u(rng)});
    const ReconstructionProblem p(trace_of(truth, 2 + k % 3));
    const auto closed = solve_n1(p);
    const auto numeric = solve(p, SolverConfig{});
    REQUIRE(numeric.converged);
    CHECK(std::abs(closed.recovered.xs()[0] - numeric.recovered.xs()[0]) < 1e-8);
    CHECK(std::abs(closed.recovered.ys()[0] - numeric.recovered.ys()[0]) < 1e-8);
  }
}

TEST_CASE("multistart points") {
  SolverConfig cfg;
  cfg.seed = 4;
  const auto starts = multistart_points(3, cfg);
  REQUIRE(starts.size() == 16);
  Eigen::VectorXd first = Eigen::VectorXd::Zero(6);
  first[0] = 0.5;
  CHECK(starts[0] == first);
  for (std::size_t k = 1; k < starts.size(); ++k) {
    for (int i = 0; i < 3; ++i) CHECK((starts[k][i] >= 0.0 && starts[k][i] <= 1.0));
    for (int i = 3; i < 6; ++i) CHECK((starts[k][i] >= -0.9 && starts[k][i] <= 0.9));
  }
  CHECK(starts == multistart_points(3, cfg));
  cfg.seed = 5;
  CHECK_FALSE(starts[1] == multistart_points(3, cfg)[1]);
  // Start k does not depend on how many starts are requested.
  cfg.seed = 4;
  cfg.multistart_count = 3;
  CHECK(multistart_points(3, cfg)[2] == starts[2]);
}

TEST_CASE("match_solutions") {
  const Dataset truth({0.6, 0.2, 0.1}, {0.5, 0.4, 0.3});
  SUBCASE("identity") {
    const auto m = match_solutions(truth, truth);
    CHECK(m.pairing == std::vector<std::size_t>{0, 1, 2});
    CHECK(m.max_abs_error == 0.0);
  }
  SUBCASE("swapped pairs") {
    const auto m = match_solutions(Dataset({0.2, 0.6, 0.1}, {0.4, 0.5, 0.3}), truth);
    CHECK(m.pairing == std::vector<std::size_t>{1, 0, 2});
    CHECK(m.max_abs_error == 0.0);
  }
  SUBCASE("worked example values") {
    const auto m = match_solutions(Dataset({0.599961, 0.200118}, {0.500027, 0.400007}),
                                   Dataset({0.6, 0.2}, {0.5, 0.4}));
    CHECK(m.max_abs_error < 2e-4);
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(match_solutions(Dataset({0.1}, {0.2}), truth), ArgumentError);
  }
  SUBCASE("optimal against exhaustive search") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      const std::size_t n = 1 + k % 7;
      std::vector<double> rx(n), ry(n), tx(n), ty(n);
      for (auto* v : {&rx, &ry, &tx, &ty}) {
        for (auto& e : *v) e = u(rng);
      }
      const auto m = match_solutions(Dataset(rx, ry), Dataset(tx, ty));
      double cost = 0.0;
      std::vector<std::size_t> sorted = m.pairing;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(sorted[i] == i);
        cost += std::abs(rx[i] - tx[m.pairing[i]]) + std::abs(ry[i] - ty[m.pairing[i]]);
      }
      CHECK(cost == doctest::Approx(oracle::best_total_cost(rx, ry, tx, ty)).epsilon(1e-12));
    }
  }
}
