// Copyright 2026 The pathlab Authors
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

#include "pathlab/csv.hpp"

#include <charconv>
#include <sstream>

#include "pathlab/error.hpp"

namespace pathlab::csv
{
namespace
{

std::vector<std::string_view> split(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::size_t Table::column(std::string_view name) const
{
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return i;
    }
  }
  throw FormatError("missing column '" + std::string(name) + "'");
}

Table read_table(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  Table table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto fields = split(line);
    if (!have_header) {
      for (auto f : fields) {
        table.header.emplace_back(f);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) + " has " +
        std::to_string(fields.size()) + " fields, expected " + std::to_string(table.header.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw FormatError(path.string() + ": line " + std::to_string(line_no) +
          " has non-numeric value '" + std::string(f) + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) {
    throw FormatError(path.string() + ": missing header");
  }
  return table;
}

std::string format_number(double value)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

Writer::Writer(const std::filesystem::path & path, std::vector<std::string> header)
: out_(path), columns_(header.size()), path_(path)
{
  if (!out_) {
    throw FormatError("cannot write " + path.string());
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    out_ << (i ? "," : "") << header[i];
  }
  out_ << '\n';
}

void Writer::row(std::span<const double> values)
{
  if (values.size() != columns_) {
    throw FormatError(path_.string() + ": row has " + std::to_string(values.size()) +
      " values, header has " + std::to_string(columns_));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) {
      out_ << ',';
    }
    out_ << format_number(values[i]);
  }
  out_ << '\n';
}

}  // namespace pathlab::csv
