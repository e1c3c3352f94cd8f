// Copyright 2026 The NH-Rep Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small helpers shared by the text formats (mesh, graph dump, config).

#pragma once

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nhrep/error.hpp"

namespace nhrep {

std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

/// Appends the shortest decimal form that parses back to the same double.
inline void AppendDouble(std::string& out, double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

inline std::string FormatDouble(double value) {
  std::string s;
  AppendDouble(s, value);
  return s;
}

/// Whitespace-tokenizing line reader. Blank lines and lines starting with '#'
/// are skipped. Every failure is a ParseError that names the line number.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  /// Next significant line split into tokens; requires min..max tokens.
  std::vector<std::string_view> Tokens(size_t min_tokens, size_t max_tokens);
  bool AtEof();

  void ExpectHeader(std::string_view magic, std::string_view version);
  size_t ExpectCount(std::string_view keyword);
  void ExpectEof();

  double Double(std::string_view token);
  int Int(std::string_view token);
  size_t Size(std::string_view token);

  [[noreturn]] void Fail(const std::string& message) const;

 private:
  bool NextLine(std::string_view& line);

  std::string_view text_;
  size_t pos_ = 0;
  size_t line_no_ = 0;
};

std::vector<std::string_view> SplitWhitespace(std::string_view line);

}  // namespace nhrep
