#include "haggle/csv.hpp"

#include <sstream>

#include "haggle/errors.hpp"

namespace haggle::csv {

std::string escape_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string render_record(const Record& record) {
  std::string line;
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (i) line += ',';
    line += escape_field(record[i]);
  }
  line += '\n';
  return line;
}

bool read_record(std::istream& in, Record& out) {
  out.clear();
  int c = in.get();
  if (c == std::char_traits<char>::eof()) return false;

  std::string field;
  bool quoted = false;
  bool field_started = false;
  while (true) {
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw DataError("csv: unterminated quoted field");
      out.push_back(std::move(field));
      return true;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && in.peek() == '\n') in.get();
      out.push_back(std::move(field));
      return true;
    } else {
      field += ch;
      field_started = true;
    }
    c = in.get();
  }
}

std::vector<Record> parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<Record> records;
  Record record;
  while (read_record(in, record)) records.push_back(record);
  return records;
}

}  // namespace haggle::csv
