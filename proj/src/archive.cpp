// Copyright 2026 The vizpriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vizpriv/archive.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>

#include "vizpriv/error.hpp"

namespace vizpriv {

namespace {

constexpr std::size_t kBlock = 512;

void put_octal(char* dst, std::size_t width, unsigned long long value) {
  std::snprintf(dst, width, "%0*llo", static_cast<int>(width - 1), value);
}

unsigned checksum(const char* header) {
  unsigned sum = 0;
  for (std::size_t i = 0; i < kBlock; ++i) {
    sum += (i >= 148 && i < 156) ? static_cast<unsigned>(' ') : static_cast<unsigned char>(header[i]);
  }
  return sum;
}

unsigned long long get_octal(const char* src, std::size_t width) {
  unsigned long long v = 0;
  for (std::size_t i = 0; i < width && src[i] >= '0' && src[i] <= '7'; ++i) v = v * 8 + (src[i] - '0');
  return v;
}

}  // namespace

std::string write_tar(const std::vector<ArchiveEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    if (e.name.empty() || e.name.size() >= 100) throw std::invalid_argument("archive name length out of range");
    char h[kBlock] = {};
    std::memcpy(h, e.name.data(), e.name.size());
    put_octal(h + 100, 8, 0644);
    put_octal(h + 108, 8, 0);
    put_octal(h + 116, 8, 0);
    put_octal(h + 124, 12, e.content.size());
    put_octal(h + 136, 12, 0);
    h[156] = '0';
    std::memcpy(h + 257, "ustar", 6);
    std::memcpy(h + 263, "00", 2);
    std::snprintf(h + 148, 8, "%06o", checksum(h));
    h[155] = ' ';
    out.append(h, kBlock);
    out += e.content;
    out.append((kBlock - e.content.size() % kBlock) % kBlock, '\0');
  }
  out.append(2 * kBlock, '\0');
  return out;
}

std::vector<ArchiveEntry> read_tar(std::string_view archive) {
  std::vector<ArchiveEntry> out;
  std::size_t pos = 0;
  while (pos + kBlock <= archive.size()) {
    const char* h = archive.data() + pos;
    if (std::all_of(h, h + kBlock, [](char c) { return c == '\0'; })) return out;
    if (get_octal(h + 148, 8) != checksum(h)) throw ParseError("tar header checksum mismatch");
    ArchiveEntry e;
    e.name.assign(h, strnlen(h, 100));
    const auto size = static_cast<std::size_t>(get_octal(h + 124, 12));
    pos += kBlock;
    if (pos + size > archive.size()) throw ParseError("truncated tar entry '" + e.name + "'");
    e.content.assign(archive.data() + pos, size);
    pos += (size + kBlock - 1) / kBlock * kBlock;
    out.push_back(std::move(e));
  }
  throw ParseError("tar archive lacks end-of-archive marker");
}

}  // namespace vizpriv
