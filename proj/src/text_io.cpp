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

#include "nhrep/text_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nhrep {

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

std::vector<std::string_view> SplitWhitespace(std::string_view line) {
  std::vector<std::string_view> tokens;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

bool LineReader::NextLine(std::string_view& line) {
  while (pos_ < text_.size()) {
    size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    line = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

bool LineReader::AtEof() {
  size_t saved_pos = pos_, saved_line = line_no_;
  std::string_view line;
  bool more = NextLine(line);
  pos_ = saved_pos;
  line_no_ = saved_line;
  return !more;
}

std::vector<std::string_view> LineReader::Tokens(size_t min_tokens,
                                                 size_t max_tokens) {
  std::string_view line;
  if (!NextLine(line)) {
    ++line_no_;
    Fail("unexpected end of input");
  }
  auto tokens = SplitWhitespace(line);
  if (tokens.size() < min_tokens || tokens.size() > max_tokens) {
    Fail("expected " + std::to_string(min_tokens) +
         (min_tokens == max_tokens ? "" : ".." + std::to_string(max_tokens)) +
         " fields, got " + std::to_string(tokens.size()));
  }
  return tokens;
}

void LineReader::ExpectHeader(std::string_view magic, std::string_view version) {
  auto tok = Tokens(2, 2);
  if (tok[0] != magic) Fail("expected header '" + std::string(magic) + "'");
  if (tok[1] != version) {
    Fail("unsupported version '" + std::string(tok[1]) + "'");
  }
}

size_t LineReader::ExpectCount(std::string_view keyword) {
  auto tok = Tokens(2, 2);
  if (tok[0] != keyword) Fail("expected section '" + std::string(keyword) + "'");
  return Size(tok[1]);
}

void LineReader::ExpectEof() {
  if (!AtEof()) {
    std::string_view line;
    NextLine(line);
    Fail("trailing content after end");
  }
}

double LineReader::Double(std::string_view token) {
  double value = 0;
  const char* first = token.data();
  if (!token.empty() && token[0] == '+') ++first;
  auto res = std::from_chars(first, token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size() ||
      !std::isfinite(value)) {
    Fail("invalid number '" + std::string(token) + "'");
  }
  return value;
}

int LineReader::Int(std::string_view token) {
  int value = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    Fail("invalid integer '" + std::string(token) + "'");
  }
  return value;
}

size_t LineReader::Size(std::string_view token) {
  size_t value = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    Fail("invalid count '" + std::string(token) + "'");
  }
  return value;
}

void LineReader::Fail(const std::string& message) const {
  throw Error(ErrorKind::kParse, "line " + std::to_string(line_no_) + ": " + message);
}

}  // namespace nhrep
