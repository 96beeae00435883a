#include "insideout/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "insideout/datafile.hpp"
#include "insideout/errors.hpp"
#include "insideout/solver.hpp"
#include "insideout/system.hpp"
#include "insideout/textio.hpp"

namespace insideout::cli {

namespace {

// Bad flags or unreadable input files.
class UsageFailure : public Error {
 public:
  using Error::Error;
};

constexpr double kVerifyThreshold = 1e-8;

template <typename Fn>
auto load_input(Fn&& fn) {
  try {
    return fn();
  } catch (const UsageFailure&) {
    throw;
  } catch (const Error& e) {
    throw UsageFailure(e.what());
  }
}

template <typename Write>
void write_output(const std::string& path, std::ostream& out, Write&& write) {
  if (path.empty() || path == "-") {
    write(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  write(file);
  file.flush();
  if (!file) throw IoError("failed writing '" + path + "'");
}

std::string join_cells(const std::vector<double>& values) {
  std::string s = "(";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ", ";
    s += three_decimals(values[i]);
  }
  return s + ")";
}

std::string list_text(const std::vector<double>& values) {
  std::string s = "(";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ", ";
    s += textio::format_double(values[i]);
  }
  return s + ")";
}

struct TrainArgs {
  std::vector<double> xs;
  std::vector<double> ys;
  std::string data_file;
  double eta = 0.1;
  std::size_t epochs = 5;
  double w0 = 0.5;
  double b0 = 0.5;
  std::optional<std::uint64_t> init_seed;
  int precision = 0;
  bool debug = false;
  std::string out;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  Dataset data = load_input([&] {
    if (!a.data_file.empty()) {
      if (!a.xs.empty() || !a.ys.empty()) {
        throw UsageFailure("--data cannot be combined with --x/--y");
      }
      return load_dataset_file(a.data_file);
    }
    if (a.xs.empty()) throw UsageFailure("give --data FILE or --x/--y values");
    return Dataset(a.xs, a.ys);
  });
  if (a.precision < 0 || a.precision > 17) {
    throw UsageFailure("--precision must be in 0..17 (0 = full precision)");
  }
  TrainConfig cfg;
  cfg.eta = a.eta;
  cfg.epochs = a.epochs;
  cfg.init = a.init_seed ? sample_init(*a.init_seed) : Params{a.w0, a.b0};
  const auto trace = train(data, cfg, a.debug);
  SaveOptions options;
  if (a.precision > 0) options.significant_digits = a.precision;
  write_output(a.out, out, [&](std::ostream& os) { save_trace(trace, os, options); });
  return kSuccess;
}

int cmd_tables(std::ostream& out) {
  const auto tables = reference_tables();
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (i) out << '\n';
    out << render_table(tables[i]);
  }
  return kSuccess;
}

struct ReconstructArgs {
  std::string trace_file;
  std::string out;
  std::string truth_file;
  SolverConfig solver;
  std::vector<double> start;
  bool closed_form = false;
};

int cmd_reconstruct(ReconstructArgs a, std::ostream& out) {
  const ParamTrace trace = load_input([&] { return load_trace_file(a.trace_file); });
  const ReconstructionProblem problem =
      load_input([&] { return ReconstructionProblem(trace); });
  std::optional<Dataset> truth;
  if (!a.truth_file.empty()) {
    truth = load_input([&] { return load_dataset_file(a.truth_file); });
  }
  if (!a.start.empty()) a.solver.initial_guess = a.start;

  ReconstructionResult result = load_input([&]() -> ReconstructionResult {
    if (a.closed_form) {
      try {
        return solve_n1(problem);
      } catch (const DegenerateDivision& e) {
        // Not an input problem; surface it as a runtime failure.
        throw std::runtime_error(e.what());
      }
    }
    return solve(problem, a.solver);
  });

  out << "n              " << problem.n() << '\n';
  out << "epochs         " << trace.epochs() << '\n';
  out << "converged      " << (result.converged ? "yes" : "no") << '\n';
  out << "residual_norm  " << textio::format_double(result.residual_norm) << '\n';
  out << "iterations     " << result.iterations << '\n';
  out << "starts_tried   " << result.starts_tried << '\n';
  out << "x              " << list_text(result.recovered.xs()) << '\n';
  out << "y              " << list_text(result.recovered.ys()) << '\n';
  if (truth) {
    if (truth->size() != result.recovered.size()) {
      throw UsageFailure("truth dataset size does not match the trace's n");
    }
    const auto match = match_solutions(result.recovered, *truth);
    out << "truth_max_abs_error " << textio::format_double(match.max_abs_error)
        << '\n';
  }
  if (!a.out.empty()) {
    write_output(a.out, out, [&](std::ostream& os) { save_report(result, os); });
  }
  return result.converged ? kSuccess : kNotConverged;
}

int cmd_verify(const std::string& trace_file, const std::string& data_file,
               double threshold, std::ostream& out) {
  const ParamTrace trace = load_input([&] { return load_trace_file(trace_file); });
  const Dataset data = load_input([&] { return load_dataset_file(data_file); });
  if (data.size() != trace.n) {
    throw UsageFailure("dataset has " + std::to_string(data.size()) +
                       " pairs but the trace declares n = " + std::to_string(trace.n));
  }
  const auto report = verify_dataset(trace, data, threshold);
  out << "epoch  |dw|  |db|\n";
  for (std::size_t j = 0; j < report.dw.size(); ++j) {
    out << j << "  " << textio::format_double(report.dw[j], 3) << "  "
        << textio::format_double(report.db[j], 3) << '\n';
  }
  out << "max_dw " << textio::format_double(report.max_dw, 6) << '\n';
  out << "max_db " << textio::format_double(report.max_db, 6) << '\n';
  out << "threshold " << textio::format_double(report.threshold) << '\n';
  out << (report.pass ? "PASS" : "FAIL") << '\n';
  return report.pass ? kSuccess : kRuntimeFailure;
}

int cmd_feasibility(const NetworkShape& shape, std::ostream& out) {
  const auto rep = load_input([&] { return feasibility(shape); });
  out << "unknowns     " << rep.unknowns << '\n';
  out << "equations    " << rep.equations << '\n';
  out << "feasible     " << (rep.feasible ? "yes" : "no") << '\n';
  out << "min_epochs   " << rep.min_epochs << '\n';
  out << "rough_bound  " << textio::format_double(rep.rough_epoch_bound)
      << "  (I / width)\n";
  out << "basis        " << FeasibilityReport::basis << '\n';
  return kSuccess;
}

}  // namespace

std::string three_decimals(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  return buf;
}

std::vector<TraceTable> reference_tables() {
  const std::vector<double> all_x{0.6, 0.2, 0.1, 0.9};
  const std::vector<double> all_y{0.5, 0.4, 0.3, 0.6};
  std::vector<TraceTable> tables;
  for (std::size_t n = 1; n <= all_x.size(); ++n) {
    const std::vector<double> xs(all_x.begin(), all_x.begin() + static_cast<long>(n));
    const std::vector<double> ys(all_y.begin(), all_y.begin() + static_cast<long>(n));
    TrainConfig cfg;  // eta 0.1, five epochs, w = b = 0.5
    const auto trace = train(Dataset(xs, ys), cfg, /*record_debug=*/true);

    TraceTable t;
    std::ostringstream caption;
    caption << "Table " << n << ": x = " << list_text(xs) << ", y = " << list_text(ys);
    t.caption = caption.str();
    std::vector<std::string> w, b, yhat, loss;
    for (std::size_t j = 0; j < trace.epochs(); ++j) {
      t.epochs.push_back(std::to_string(j));
      w.push_back(three_decimals(trace.params[j].w));
      b.push_back(three_decimals(trace.params[j].b));
      const auto& rec = (*trace.debug)[j];
      yhat.push_back(n == 1 ? three_decimals(rec.yhat[0]) : join_cells(rec.yhat));
      loss.push_back(three_decimals(rec.loss));
    }
    t.rows = {{"w", w}, {"b", b}, {"y_hat", yhat}, {"loss", loss}};
    tables.push_back(std::move(t));
  }
  return tables;
}

std::string render_table(const TraceTable& table) {
  std::ostringstream os;
  os << table.caption << '\n';
  const auto line = [&](const std::string& label, const std::vector<std::string>& cells) {
    os << "| " << label;
    for (const auto& c : cells) os << " | " << c;
    os << " |\n";
  };
  line("epoch", table.epochs);
  for (const auto& [label, cells] : table.rows) line(label, cells);
  return os.str();
}

VerifyReport verify_dataset(const ParamTrace& observed, const Dataset& candidate,
                            double threshold) {
  observed.validate();
  if (candidate.size() != observed.n) {
    throw ArgumentError("candidate dataset size does not match trace n");
  }
  VerifyReport report;
  report.threshold = threshold;
  TrainConfig cfg;
  cfg.eta = observed.eta;
  cfg.epochs = observed.epochs();
  cfg.init = observed.params.front();
  ParamTrace retrained;
  try {
    retrained = train(candidate, cfg);
  } catch (const TrainingDiverged&) {
    report.max_dw = report.max_db = std::numeric_limits<double>::infinity();
    return report;
  }
  for (std::size_t j = 0; j < observed.epochs(); ++j) {
    report.dw.push_back(std::abs(retrained.params[j].w - observed.params[j].w));
    report.db.push_back(std::abs(retrained.params[j].b - observed.params[j].b));
    report.max_dw = std::max(report.max_dw, report.dw.back());
    report.max_db = std::max(report.max_db, report.db.back());
  }
  report.pass = report.max_dw < threshold && report.max_db < threshold;
  return report;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Train a single tanh neuron and reconstruct its training data "
               "from the parameter trace"};
  app.require_subcommand(1, 1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train and write the parameter trace");
  train_cmd->add_option("--x", train_args.xs, "Inputs, comma separated")->delimiter(',');
  train_cmd->add_option("--y", train_args.ys, "Labels, comma separated")->delimiter(',');
  train_cmd->add_option("--data", train_args.data_file, "Dataset file");
  train_cmd->add_option("--eta", train_args.eta, "Learning rate")->capture_default_str();
  train_cmd->add_option("--epochs", train_args.epochs, "Recorded epochs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  auto* w0 = train_cmd->add_option("--w0", train_args.w0, "Initial weight")
                 ->capture_default_str();
  auto* b0 = train_cmd->add_option("--b0", train_args.b0, "Initial bias")
                 ->capture_default_str();
  train_cmd
      ->add_option("--init-seed", train_args.init_seed,
                   "Draw w0, b0 uniformly from [0, 1] with this seed")
      ->excludes(w0)
      ->excludes(b0);
  train_cmd->add_option("--precision", train_args.precision,
                        "Significant digits in the trace file (0 = full)")
      ->capture_default_str();
  train_cmd->add_flag("--debug", train_args.debug, "Also record y_hat and loss");
  train_cmd->add_option("-o,--out", train_args.out, "Output file (default stdout)");

  auto* tables_cmd = app.add_subcommand("tables", "Print the four reference trace tables");

  ReconstructArgs rec;
  auto* rec_cmd =
      app.add_subcommand("reconstruct", "Recover the dataset from a trace file");
  rec_cmd->add_option("trace", rec.trace_file, "Trace file")->required();
  rec_cmd->add_option("-o,--out", rec.out, "Write the machine-readable report here");
  rec_cmd->add_option("--max-iterations", rec.solver.max_iterations)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  rec_cmd->add_option("--tolerance", rec.solver.residual_tolerance,
                      "Residual max-norm tolerance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  rec_cmd->add_option("--starts", rec.solver.multistart_count)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  rec_cmd->add_option("--seed", rec.solver.seed)->capture_default_str();
  rec_cmd->add_option("--start", rec.start, "First start x_0..x_{n-1},y_0..y_{n-1}")
      ->delimiter(',');
  rec_cmd->add_flag("--underdetermined", rec.solver.allow_underdetermined,
                    "Allow fewer than n + 1 epochs");
  rec_cmd->add_flag("--closed-form", rec.closed_form,
                    "Use the closed-form single-pair recovery (n = 1)");
  rec_cmd->add_option("--truth", rec.truth_file,
                      "Ground-truth dataset to compare against (pair order ignored)");

  std::string verify_trace;
  std::string verify_data;
  double threshold = kVerifyThreshold;
  auto* verify_cmd = app.add_subcommand(
      "verify", "Retrain on a recovered dataset and compare with the trace");
  verify_cmd->add_option("trace", verify_trace, "Trace file")->required();
  verify_cmd->add_option("data", verify_data, "Dataset or report file")->required();
  verify_cmd->add_option("--threshold", threshold)->capture_default_str();

  NetworkShape shape;
  auto* feas_cmd = app.add_subcommand(
      "feasibility", "Count equations and unknowns for a fully connected network");
  feas_cmd->add_option("--width", shape.width, "Nodes per layer")->required();
  feas_cmd->add_option("--layers", shape.layers, "Layers incl. input and output")
      ->required();
  feas_cmd->add_option("--instances", shape.instances, "Dataset rows")->required();
  feas_cmd->add_option("--epochs", shape.epochs, "Observed epochs")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (!app.get_subcommands().empty()) {
      err << app.get_subcommands().front()->help();
    } else {
      err << app.help();
    }
    return kUsageError;
  }

  try {
    if (*train_cmd) return cmd_train(train_args, out);
    if (*tables_cmd) return cmd_tables(out);
    if (*rec_cmd) return cmd_reconstruct(rec, out);
    if (*verify_cmd) return cmd_verify(verify_trace, verify_data, threshold, out);
    if (*feas_cmd) return cmd_feasibility(shape, out);
  } catch (const UsageFailure& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const TrainingDiverged& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}

}  // namespace insideout::cli
