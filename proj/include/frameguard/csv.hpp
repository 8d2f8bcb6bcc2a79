#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace frameguard::csv {

struct Document {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based physical line on which each row starts.
  std::vector<std::size_t> lines;

  // -1 when the column is absent.
  int column(std::string_view name) const noexcept;
};

// RFC 4180: comma separated, double-quote quoting with "" escapes, quoted
// fields may span lines, CRLF or LF line endings. Throws ParseError on an
// unterminated quote or a row whose width differs from the header.
Document parse(std::string_view text);

std::string escape(std::string_view field);
void write_row(std::ostream& os, const std::vector<std::string>& fields);

}  // namespace frameguard::csv
