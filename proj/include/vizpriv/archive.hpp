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

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vizpriv {

struct ArchiveEntry {
  std::string name;
  std::string content;
};

// POSIX ustar archive of regular files. Names are limited to 100 bytes.
std::string write_tar(const std::vector<ArchiveEntry>& entries);
// Reads archives produced by write_tar; throws ParseError on corruption.
std::vector<ArchiveEntry> read_tar(std::string_view archive);

}  // namespace vizpriv
