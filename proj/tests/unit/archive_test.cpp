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

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "vizpriv/archive.hpp"
#include "vizpriv/error.hpp"

namespace vizpriv {
namespace {

std::string run(const std::string& cmd) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  pclose(p);
  return out;
}

const std::vector<ArchiveEntry> kEntries{
    {"synthetic.csv", "a,b\n1,2\n"},
    {"charts/C0.json", std::string(1500, 'x')},
    {"empty.txt", ""},
    {"exact.bin", std::string(512, '\0') + "tail"},
};

TEST(Archive, RoundTrip) {
  const std::string tar = write_tar(kEntries);
  EXPECT_EQ(tar.size() % 512, 0u);
  const auto back = read_tar(tar);
  ASSERT_EQ(back.size(), kEntries.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].name, kEntries[i].name);
    EXPECT_EQ(back[i].content, kEntries[i].content);
  }
}

TEST(Archive, ReadableBySystemTar) {
  const auto dir = std::filesystem::temp_directory_path() / "vizpriv_archive_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.tar";
  std::ofstream(path, std::ios::binary) << write_tar(kEntries);
  EXPECT_EQ(run("tar -tf " + path.string()), "synthetic.csv\ncharts/C0.json\nempty.txt\nexact.bin\n");
  EXPECT_EQ(run("tar -xOf " + path.string() + " synthetic.csv"), "a,b\n1,2\n");
  EXPECT_EQ(run("tar -xOf " + path.string() + " charts/C0.json"), std::string(1500, 'x'));
  std::filesystem::remove_all(dir);
}

TEST(Archive, ReadsSystemUstar) {
  const auto dir = std::filesystem::temp_directory_path() / "vizpriv_archive_sys";
  std::filesystem::create_directories(dir / "src");
  std::ofstream(dir / "src" / "hello.txt") << "hello\n";
  run("tar --format=ustar -C " + (dir / "src").string() + " -cf " + (dir / "a.tar").string() + " hello.txt");
  const auto back = read_tar(testing::read_text(dir / "a.tar"));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].name, "hello.txt");
  EXPECT_EQ(back[0].content, "hello\n");
  std::filesystem::remove_all(dir);
}

TEST(Archive, CorruptionAndLimits) {
  std::string tar = write_tar(kEntries);
  tar[20] ^= 0x5a;
  EXPECT_THROW(read_tar(tar), ParseError);
  EXPECT_THROW(read_tar(write_tar(kEntries).substr(0, 700)), ParseError);
  EXPECT_THROW(write_tar({{std::string(120, 'n'), "x"}}), std::invalid_argument);
}

}  // namespace
}  // namespace vizpriv
