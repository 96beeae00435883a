#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace insideout {

struct Params {
  double w = 0.0;
  double b = 0.0;

  bool operator==(const Params&) const = default;
};

struct DebugRecord {
  std::vector<double> yhat;
  double loss = 0.0;

  bool operator==(const DebugRecord&) const = default;
};

/// What an observer of the training run sees: the learning rate, the dataset
/// size and the parameters at every epoch. The optional debug block is for
/// tests and reports only; reconstruction never reads it.
struct ParamTrace {
  double eta = 0.0;
  std::size_t n = 0;
  std::vector<Params> params;  // params[j] = (w, b) at epoch j
  std::optional<std::vector<DebugRecord>> debug;

  std::size_t epochs() const noexcept { return params.size(); }

  /// First k epochs (debug block cut to match).
  ParamTrace truncated(std::size_t k) const;

  /// Throws ValidationError naming the first broken rule.
  void validate() const;

  bool operator==(const ParamTrace&) const = default;
};

struct SaveOptions {
  /// Empty: shortest round-trip rendering. Otherwise the number of
  /// significant digits (1..17) for every float.
  std::optional<int> significant_digits;
};

/// Text format:
///
///   insideout-trace 1
///   eta 0.1
///   n 2
///   epochs 5
///   params
///   0 0.5 0.5
///   1 0.49254723526805894 0.48107729716356423
///   ...
///   debug            (optional; one "epoch loss yhat_0 .. yhat_{n-1}" row
///   0 0.0231 ...      per epoch)
///   end
///
/// Blank lines and lines starting with '#' are ignored.
void save_trace(const ParamTrace& trace, std::ostream& out,
                const SaveOptions& options = {});

/// Throws ParseError (with line) on malformed input and ValidationError on
/// invariant violations.
ParamTrace load_trace(std::istream& in);

void save_trace_file(const ParamTrace& trace, const std::string& path,
                     const SaveOptions& options = {});
ParamTrace load_trace_file(const std::string& path);

}  // namespace insideout
