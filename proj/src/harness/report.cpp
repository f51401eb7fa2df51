// Copyright 2026 The dualgate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dualgate/harness/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dualgate/error.hpp"

namespace dualgate::harness {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string markdown_field(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

}  // namespace

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "markdown" || text == "md") return ReportFormat::Markdown;
  throw InputError("unknown report format '" + std::string(text) + "'");
}

std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double v) const {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f", v);
      return buf;
    }
    std::string operator()(long long v) const { return std::to_string(v); }
  };
  return std::visit(Visitor{}, cell);
}

std::string to_csv(const Table& table) {
  std::ostringstream os;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << csv_field(table.columns[i]);
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << csv_field(format_cell(row[i]));
    }
    os << '\n';
  }
  return os.str();
}

std::string to_markdown(const Table& table) {
  std::ostringstream os;
  os << '|';
  for (const auto& c : table.columns) os << ' ' << markdown_field(c) << " |";
  os << "\n|";
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << " --- |";
  os << '\n';
  for (const auto& row : table.rows) {
    os << '|';
    for (const auto& cell : row) {
      const bool empty = std::holds_alternative<std::monostate>(cell);
      os << ' ' << (empty ? std::string("--") : markdown_field(format_cell(cell))) << " |";
    }
    os << '\n';
  }
  return os.str();
}

void emit_report(const Table& table, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open report for writing");
  out << (format == ReportFormat::Csv ? to_csv(table) : to_markdown(table));
  if (!out) throw IoError(path, "write failed");
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"': in_quotes = true; break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        break;
      case '\r': break;
      case '\n':
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        any = false;
        break;
      default: field += c;
    }
  }
  if (in_quotes) throw InputError("csv: unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace dualgate::harness
