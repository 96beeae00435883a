#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "insideout/model.hpp"
#include "insideout/trace.hpp"

namespace insideout::cli {

enum ExitCode : int {
  kSuccess = 0,
  kRuntimeFailure = 1,
  kUsageError = 2,
  kNotConverged = 3,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

/// One five-epoch trace table: header cells, then (label, cells) rows for
/// w, b, y_hat and loss. Every number is rendered with three decimals.
struct TraceTable {
  std::string caption;
  std::vector<std::string> epochs;
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
};

/// The four reference tables (eta = 0.1, w = b = 0.5, five epochs, first
/// 1..4 pairs of x = (0.6, 0.2, 0.1, 0.9), y = (0.5, 0.4, 0.3, 0.6)).
std::vector<TraceTable> reference_tables();
std::string render_table(const TraceTable& table);

/// Rounds to three decimals the way printf does (exact binary value, ties
/// to even).
std::string three_decimals(double value);

struct VerifyReport {
  std::vector<double> dw;  // per-epoch |w_retrained - w_observed|
  std::vector<double> db;
  double max_dw = 0.0;
  double max_db = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Retrains on `candidate` from the trace's epoch-0 parameters and compares
/// every epoch against the observed trace.
VerifyReport verify_dataset(const ParamTrace& observed, const Dataset& candidate,
                            double threshold = 1e-8);

}  // namespace insideout::cli
