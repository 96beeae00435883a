#include "insideout/textio.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "insideout/errors.hpp"

namespace insideout::textio {

namespace {

constexpr std::string_view kMagicPrefix = "insideout-";

std::vector<std::string> split_fields(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> fields;
  std::string field;
  while (ss >> field) fields.push_back(field);
  return fields;
}

}  // namespace

std::string format_double(double value, std::optional<int> significant_digits) {
  std::array<char, 64> buf{};
  std::to_chars_result res;
  if (significant_digits) {
    if (*significant_digits < 1 || *significant_digits > 17) {
      throw ArgumentError("significant digits must be in [1, 17]");
    }
    res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                        std::chars_format::general, *significant_digits);
  } else {
    res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  }
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view token, std::size_t line) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  // from_chars rejects a leading '+', which hand-written files may contain.
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc::result_out_of_range) {
    throw ParseError(line, "number out of range: '" + std::string(token) + "'");
  }
  if (ec != std::errc() || ptr != last || first == last) {
    throw ParseError(line, "expected a number, got '" + std::string(token) + "'");
  }
  return value;
}

long long parse_integer(std::string_view token, std::size_t line) {
  long long value = 0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    throw ParseError(line,
                     "expected an integer, got '" + std::string(token) + "'");
  }
  return value;
}

const Row* Document::find_header(std::string_view key) const {
  for (const auto& [k, row] : header) {
    if (k == key) return &row;
  }
  return nullptr;
}

const Section* Document::find_section(std::string_view name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

Document read_document(std::istream& in, const std::vector<std::string>& kinds,
                       const std::vector<std::string>& section_names) {
  Document doc;
  std::string raw;
  std::size_t line_no = 0;
  bool have_magic = false;
  bool ended = false;

  while (std::getline(in, raw)) {
    ++line_no;
    auto fields = split_fields(raw);
    if (fields.empty() || fields.front().starts_with('#')) continue;
    if (ended) throw ParseError(line_no, "content after 'end'");

    if (!have_magic) {
      if (fields.size() != 2 || !fields[0].starts_with(kMagicPrefix)) {
        throw ParseError(line_no,
                         "expected magic line 'insideout-<kind> <version>'");
      }
      doc.kind = fields[0].substr(kMagicPrefix.size());
      if (std::find(kinds.begin(), kinds.end(), doc.kind) == kinds.end()) {
        throw ValidationError("kind", "line " + std::to_string(line_no) +
                                          ": unexpected file kind '" +
                                          fields[0] + "'");
      }
      doc.version = static_cast<int>(parse_integer(fields[1], line_no));
      have_magic = true;
      continue;
    }

    const std::string& head = fields.front();
    if (head == "end") {
      if (fields.size() != 1) throw ParseError(line_no, "'end' takes no fields");
      ended = true;
      continue;
    }
    if (std::find(section_names.begin(), section_names.end(), head) !=
        section_names.end()) {
      if (fields.size() != 1) {
        throw ParseError(line_no, "section marker '" + head + "' takes no fields");
      }
      if (doc.find_section(head)) {
        throw ParseError(line_no, "duplicate section '" + head + "'");
      }
      doc.sections.push_back(Section{head, line_no, {}});
      continue;
    }
    if (!doc.sections.empty()) {
      doc.sections.back().rows.push_back(Row{line_no, std::move(fields)});
      continue;
    }
    if (fields.size() < 2) {
      throw ParseError(line_no, "header key '" + head + "' has no value");
    }
    if (doc.find_header(head)) {
      throw ParseError(line_no, "duplicate header key '" + head + "'");
    }
    Row row{line_no, {fields.begin() + 1, fields.end()}};
    doc.header.emplace_back(head, std::move(row));
  }
  if (in.bad()) throw IoError("read failure");
  if (!have_magic) throw ParseError(line_no, "empty document");
  if (!ended) throw ParseError(line_no, "missing 'end' (truncated file?)");
  return doc;
}

void write_magic(std::ostream& out, std::string_view kind, int version) {
  out << kMagicPrefix << kind << ' ' << version << '\n';
}

}  // namespace insideout::textio
