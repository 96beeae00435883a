#pragma once

// Shared reader/writer for the line-oriented "insideout-<kind> <version>"
// file family (traces, datasets, reconstruction reports).

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace insideout::textio {

/// Shortest decimal string that parses back to the same double, or a
/// %.{digits}g rendering when `significant_digits` is set.
std::string format_double(double value,
                          std::optional<int> significant_digits = {});

/// Parses the whole token as a double. Throws ParseError on junk; accepts
/// inf/nan so that callers can report them as validation errors.
double parse_double(std::string_view token, std::size_t line);
long long parse_integer(std::string_view token, std::size_t line);

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct Section {
  std::string name;
  std::size_t line = 0;
  std::vector<Row> rows;
};

/// Magic line, then "key value" header lines, then named sections whose
/// rows are whitespace-separated fields, then "end".
struct Document {
  std::string kind;
  int version = 0;
  std::vector<std::pair<std::string, Row>> header;
  std::vector<Section> sections;

  /// Header value for `key`, or nullptr.
  const Row* find_header(std::string_view key) const;
  const Section* find_section(std::string_view name) const;
};

/// `section_names` lists the words that open a section; any other word
/// before the first section is a header key. A magic line whose kind is not
/// in `kinds` raises ValidationError("kind").
Document read_document(std::istream& in, const std::vector<std::string>& kinds,
                       const std::vector<std::string>& section_names);

void write_magic(std::ostream& out, std::string_view kind, int version);

}  // namespace insideout::textio
