#include "insideout/datafile.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "insideout/errors.hpp"
#include "insideout/textio.hpp"

namespace insideout {

namespace {

constexpr int kVersion = 1;

void write_rows(const Dataset& data, std::ostream& out) {
  out << "data\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << i << ' ' << textio::format_double(data.xs()[i]) << ' '
        << textio::format_double(data.ys()[i]) << '\n';
  }
  out << "end\n";
}

const textio::Row& single_value(const textio::Document& doc, const char* key) {
  const auto* row = doc.find_header(key);
  if (!row) {
    throw ValidationError(std::string("required:") + key,
                          std::string("missing required field '") + key + "'");
  }
  if (row->fields.size() != 1) {
    throw ParseError(row->line, std::string("'") + key + "' takes one value");
  }
  return *row;
}

Dataset read_rows(const textio::Document& doc) {
  const auto& n_row = single_value(doc, "n");
  const long long n = textio::parse_integer(n_row.fields[0], n_row.line);
  if (n < 1) throw ValidationError("n-positive", "n must be at least 1");
  const auto* data = doc.find_section("data");
  if (!data) throw ValidationError("required:data", "missing 'data' section");

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& row : data->rows) {
    if (row.fields.size() != 3) throw ParseError(row.line, "data row must be 'i x y'");
    const long long idx = textio::parse_integer(row.fields[0], row.line);
    if (idx != static_cast<long long>(xs.size())) {
      throw ValidationError("contiguous-rows",
                            "line " + std::to_string(row.line) + ": expected row " +
                                std::to_string(xs.size()));
    }
    xs.push_back(textio::parse_double(row.fields[1], row.line));
    ys.push_back(textio::parse_double(row.fields[2], row.line));
  }
  if (static_cast<long long>(xs.size()) != n) {
    throw ValidationError("row-count", "header declares n = " + std::to_string(n) +
                                           " but data has " +
                                           std::to_string(xs.size()) + " rows");
  }
  try {
    return Dataset(std::move(xs), std::move(ys));
  } catch (const ArgumentError& e) {
    throw ValidationError("finite-data", e.what());
  }
}

void check_version(const textio::Document& doc) {
  if (doc.version != kVersion) {
    throw ValidationError("version",
                          "unsupported version " + std::to_string(doc.version));
  }
}

}  // namespace

void save_dataset(const Dataset& data, std::ostream& out) {
  textio::write_magic(out, "dataset", kVersion);
  out << "n " << data.size() << '\n';
  write_rows(data, out);
  if (!out) throw IoError("failed to write dataset");
}

Dataset load_dataset(std::istream& in) {
  const auto doc = textio::read_document(in, {"dataset", "report"}, {"data"});
  check_version(doc);
  return read_rows(doc);
}

Dataset load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return load_dataset(in);
}

void save_report(const ReconstructionResult& result, std::ostream& out) {
  textio::write_magic(out, "report", kVersion);
  out << "n " << result.recovered.size() << '\n';
  out << "converged " << (result.converged ? 1 : 0) << '\n';
  out << "residual_norm " << textio::format_double(result.residual_norm) << '\n';
  out << "iterations " << result.iterations << '\n';
  out << "starts_tried " << result.starts_tried << '\n';
  write_rows(result.recovered, out);
  if (!out) throw IoError("failed to write report");
}

ReconstructionResult load_report(std::istream& in) {
  const auto doc = textio::read_document(in, {"report"}, {"data"});
  check_version(doc);
  ReconstructionResult result{read_rows(doc)};
  const auto& conv = single_value(doc, "converged");
  result.converged = textio::parse_integer(conv.fields[0], conv.line) != 0;
  const auto& res = single_value(doc, "residual_norm");
  result.residual_norm = textio::parse_double(res.fields[0], res.line);
  const auto& its = single_value(doc, "iterations");
  result.iterations =
      static_cast<std::size_t>(textio::parse_integer(its.fields[0], its.line));
  const auto& starts = single_value(doc, "starts_tried");
  result.starts_tried =
      static_cast<std::size_t>(textio::parse_integer(starts.fields[0], starts.line));
  return result;
}

}  // namespace insideout
