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

#ifndef PATHLAB__CSV_HPP_
#define PATHLAB__CSV_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pathlab::csv
{

/// Numeric table with a named header. Lines starting with '#' are comments.
struct Table
{
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column; throws FormatError when absent.
  std::size_t column(std::string_view name) const;
};

Table read_table(const std::filesystem::path & path);

/// Streams numeric rows under a fixed header. Values print with %.12g.
class Writer
{
public:
  Writer(const std::filesystem::path & path, std::vector<std::string> header);

  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }
  void flush() { out_.flush(); }

private:
  std::ofstream out_;
  std::size_t columns_;
  std::filesystem::path path_;
};

std::string format_number(double value);

}  // namespace pathlab::csv

#endif  // PATHLAB__CSV_HPP_
