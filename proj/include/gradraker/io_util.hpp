// Copyright 2026 The gradraker Authors.
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

#include <charconv>
#include <istream>
#include <stdexcept>
#include <string>

namespace gradraker {

/// Shortest decimal form that parses back to the identical double.
inline std::string format_exact(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

inline double parse_exact(const std::string& tok) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw std::runtime_error("bad number '" + tok + "'");
  }
  return x;
}

inline std::string read_token(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw std::runtime_error("unexpected end of record");
  return tok;
}

inline void expect_token(std::istream& in, const std::string& want) {
  const std::string got = read_token(in);
  if (got != want) {
    throw std::runtime_error("expected '" + want + "', found '" + got + "'");
  }
}

}  // namespace gradraker
