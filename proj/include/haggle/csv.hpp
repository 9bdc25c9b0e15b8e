#pragma once

// Minimal RFC 4180 reading and writing. Fields containing a comma, quote,
// CR or LF are quoted; quotes are doubled. Records end with "\n".

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace haggle::csv {

using Record = std::vector<std::string>;

std::string escape_field(std::string_view field);
std::string render_record(const Record& record);

// Reads one record; returns false at end of input. Throws DataError on an
// unterminated quoted field.
bool read_record(std::istream& in, Record& out);

std::vector<Record> parse(std::string_view text);

}  // namespace haggle::csv
