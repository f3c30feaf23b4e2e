#pragma once

// Minimal RFC 4180 reader and writer: comma delimiter, double-quote quoting,
// "" as an escaped quote, CRLF or LF record ends, newlines allowed inside
// quoted fields. A leading UTF-8 BOM is skipped.

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "namerace/error.hpp"

namespace namerace::csv {

struct Row {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

struct Table {
  std::string source;  // path or "<memory>", used in error messages
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Index of `name` in the header, or nullopt.
  std::optional<std::size_t> find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }

  std::size_t require_column(std::string_view name) const {
    if (auto idx = find_column(name)) return *idx;
    throw DataError(source + ":1: missing column '" + std::string(name) + "'");
  }
};

inline std::vector<Row> parse_records(std::string_view text, const std::string& source) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<Row> records;
  Row current;
  std::string field;
  std::size_t line = 1;
  current.line = 1;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_has_content = false;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(current));
    current = Row{};
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw DataError(source + ":" + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_was_quoted = true;
        record_has_content = true;
        break;
      case ',':
        end_field();
        record_has_content = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        if (record_has_content || !field.empty()) {
          end_record();
        } else {
          current = Row{};  // blank line
        }
        ++line;
        current.line = line;
        break;
      default:
        if (field_was_quoted) {
          throw DataError(source + ":" + std::to_string(line) + ": text after closing quote");
        }
        field.push_back(c);
        record_has_content = true;
    }
  }
  if (in_quotes) throw DataError(source + ":" + std::to_string(current.line) + ": unterminated quoted field");
  if (record_has_content || !field.empty()) end_record();
  return records;
}

/// Parses `text`; the first record is the header.
inline Table parse(std::string_view text, std::string source = "<memory>") {
  Table table;
  table.source = std::move(source);
  auto records = parse_records(text, table.source);
  if (records.empty()) throw DataError(table.source + ": empty file, header row required");
  table.header = std::move(records.front().fields);
  records.erase(records.begin());
  for (auto& r : records) {
    if (r.fields.size() != table.header.size()) {
      throw DataError(table.source + ":" + std::to_string(r.line) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " + std::to_string(r.fields.size()));
    }
  }
  table.rows = std::move(records);
  return table;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Table read(const std::string& path) { return parse(read_file(path), path); }

inline std::string quote(std::string_view field) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                     (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << '\n';
}

}  // namespace namerace::csv
