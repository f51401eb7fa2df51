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

#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dualgate::harness {

// Empty cells print as nothing in CSV and as "--" in markdown. Doubles print
// with 4 decimals; strings verbatim.
using Cell = std::variant<std::monostate, std::string, double, long long>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

enum class ReportFormat { Csv, Markdown };

ReportFormat parse_report_format(std::string_view text);

std::string format_cell(const Cell& cell);

// RFC-4180 quoting, CRLF-free ("\n" line ends).
std::string to_csv(const Table& table);
std::string to_markdown(const Table& table);

// Writes `table` to `path`; IoError names the path on failure.
void emit_report(const Table& table, ReportFormat format, const std::string& path);

// Parses RFC-4180 text into rows of fields. InputError on an unterminated
// quoted field.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

std::string read_text_file(const std::string& path);

}  // namespace dualgate::harness
