#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace offtarget {

/// RFC 4180 rows: CRLF terminated, fields quoted when they contain a comma,
/// quote or line break.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void row(const std::vector<std::string>& fields);

  static std::string escape(const std::string& field);
  /// Shortest text that reads back as exactly the same double.
  static std::string number(double v);

 private:
  std::ostream& out_;
};

/// Parses RFC 4180 text (CRLF or LF line ends) into rows of fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace offtarget
