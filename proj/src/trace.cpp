#include "insideout/trace.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "insideout/errors.hpp"
#include "insideout/textio.hpp"

namespace insideout {

namespace {

constexpr int kTraceVersion = 1;

std::size_t parse_count(const textio::Row& row, const char* key) {
  if (row.fields.size() != 1) {
    throw ParseError(row.line, std::string("'") + key + "' takes one value");
  }
  const long long v = textio::parse_integer(row.fields[0], row.line);
  if (v < 0) {
    throw ValidationError(key, std::string(key) + " must be non-negative");
  }
  return static_cast<std::size_t>(v);
}

const textio::Row& require_header(const textio::Document& doc, const char* key) {
  const auto* row = doc.find_header(key);
  if (!row) {
    throw ValidationError(std::string("required:") + key,
                          std::string("missing required field '") + key + "'");
  }
  return *row;
}

void check_epoch_index(const textio::Row& row, std::size_t expected) {
  const long long idx = textio::parse_integer(row.fields[0], row.line);
  if (idx < 0 || static_cast<std::size_t>(idx) != expected) {
    throw ValidationError(
        "contiguous-epochs",
        "line " + std::to_string(row.line) + ": expected epoch " +
            std::to_string(expected) + ", found " + row.fields[0]);
  }
}

}  // namespace

ParamTrace ParamTrace::truncated(std::size_t k) const {
  if (k > params.size()) {
    throw ArgumentError("cannot truncate a trace of " +
                        std::to_string(params.size()) + " epochs to " +
                        std::to_string(k));
  }
  ParamTrace out;
  out.eta = eta;
  out.n = n;
  out.params.assign(params.begin(), params.begin() + static_cast<long>(k));
  if (debug) {
    out.debug.emplace(debug->begin(), debug->begin() + static_cast<long>(k));
  }
  return out;
}

void ParamTrace::validate() const {
  if (!std::isfinite(eta) || eta <= 0.0) {
    throw ValidationError("eta-positive", "eta must be finite and > 0");
  }
  if (n < 1) throw ValidationError("n-positive", "n must be at least 1");
  if (params.empty()) {
    throw ValidationError("epochs-positive", "trace must hold at least one epoch");
  }
  for (std::size_t j = 0; j < params.size(); ++j) {
    if (!std::isfinite(params[j].w) || !std::isfinite(params[j].b)) {
      throw ValidationError("finite-params", "non-finite parameter at epoch " +
                                                 std::to_string(j));
    }
  }
  if (debug) {
    if (debug->size() != params.size()) {
      throw ValidationError("debug-epochs",
                            "debug block must have one record per epoch");
    }
    for (std::size_t j = 0; j < debug->size(); ++j) {
      const auto& rec = (*debug)[j];
      if (rec.yhat.size() != n) {
        throw ValidationError("debug-length", "debug y_hat at epoch " +
                                                  std::to_string(j) +
                                                  " must have n values");
      }
      bool finite = std::isfinite(rec.loss);
      for (double v : rec.yhat) finite = finite && std::isfinite(v);
      if (!finite) {
        throw ValidationError("finite-debug", "non-finite debug value at epoch " +
                                                  std::to_string(j));
      }
    }
  }
}

void save_trace(const ParamTrace& trace, std::ostream& out,
                const SaveOptions& options) {
  trace.validate();
  const auto fmt = [&](double v) {
    return textio::format_double(v, options.significant_digits);
  };
  textio::write_magic(out, "trace", kTraceVersion);
  out << "eta " << fmt(trace.eta) << '\n';
  out << "n " << trace.n << '\n';
  out << "epochs " << trace.epochs() << '\n';
  out << "params\n";
  for (std::size_t j = 0; j < trace.params.size(); ++j) {
    out << j << ' ' << fmt(trace.params[j].w) << ' ' << fmt(trace.params[j].b)
        << '\n';
  }
  if (trace.debug) {
    out << "debug\n";
    for (std::size_t j = 0; j < trace.debug->size(); ++j) {
      const auto& rec = (*trace.debug)[j];
      out << j << ' ' << fmt(rec.loss);
      for (double v : rec.yhat) out << ' ' << fmt(v);
      out << '\n';
    }
  }
  out << "end\n";
  if (!out) throw IoError("failed to write trace");
}

ParamTrace load_trace(std::istream& in) {
  const auto doc = textio::read_document(in, {"trace"}, {"params", "debug"});
  if (doc.version != kTraceVersion) {
    throw ValidationError("version", "unsupported trace version " +
                                         std::to_string(doc.version));
  }
  for (const auto& [key, row] : doc.header) {
    if (key != "eta" && key != "n" && key != "epochs") {
      throw ParseError(row.line, "unknown header key '" + key + "'");
    }
  }

  ParamTrace trace;
  const auto& eta_row = require_header(doc, "eta");
  if (eta_row.fields.size() != 1) throw ParseError(eta_row.line, "'eta' takes one value");
  trace.eta = textio::parse_double(eta_row.fields[0], eta_row.line);
  trace.n = parse_count(require_header(doc, "n"), "n");
  const std::size_t epochs = parse_count(require_header(doc, "epochs"), "epochs");

  const auto* params = doc.find_section("params");
  if (!params) {
    throw ValidationError("required:params", "missing 'params' section");
  }
  for (const auto& row : params->rows) {
    if (row.fields.size() != 3) {
      throw ParseError(row.line, "params row must be 'epoch w b'");
    }
    check_epoch_index(row, trace.params.size());
    trace.params.push_back(Params{textio::parse_double(row.fields[1], row.line),
                                  textio::parse_double(row.fields[2], row.line)});
  }
  if (trace.params.size() != epochs) {
    throw ValidationError("epoch-count",
                          "header declares " + std::to_string(epochs) +
                              " epochs but params section has " +
                              std::to_string(trace.params.size()));
  }

  if (const auto* debug = doc.find_section("debug")) {
    trace.debug.emplace();
    for (const auto& row : debug->rows) {
      if (row.fields.size() < 2) {
        throw ParseError(row.line, "debug row must be 'epoch loss yhat...'");
      }
      check_epoch_index(row, trace.debug->size());
      DebugRecord rec;
      rec.loss = textio::parse_double(row.fields[1], row.line);
      for (std::size_t k = 2; k < row.fields.size(); ++k) {
        rec.yhat.push_back(textio::parse_double(row.fields[k], row.line));
      }
      trace.debug->push_back(std::move(rec));
    }
  }

  trace.validate();
  return trace;
}

void save_trace_file(const ParamTrace& trace, const std::string& path,
                     const SaveOptions& options) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save_trace(trace, out, options);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

ParamTrace load_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return load_trace(in);
}

}  // namespace insideout
