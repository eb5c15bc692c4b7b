// tests/g2p_test.cc

// Copyright 2026  Vectorscope Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "testutil.hpp"
#include "vectorscope/g2p.hpp"

using namespace vectorscope;

TEST_CASE("the consonant inventory has 24 distinct entries with stable indices") {
  const auto& inv = ConsonantInventory();
  CHECK(inv.size() == 24);
  std::set<std::string> seen(inv.begin(), inv.end());
  CHECK(seen.size() == 24);
  for (int i = 0; i < kNumConsonants; ++i) CHECK(ConsonantIndex(inv[i]) == i);
  CHECK(ConsonantIndex("AA") == -1);
  CHECK(ConsonantIndex("IH") == -1);
  CHECK(ConsonantIndex("") == -1);
  CHECK(ConsonantIndex("QQ") == -1);
}

TEST_CASE("lexicon files parse with comments and stress stripping") {
  testing::TempDir dir;
  const std::string path = dir.Path("lex.tsv");
  {
    std::ofstream out(path);
    out << "# comment line\n";
    out << "hello\tHH AH0 L OW1\n";
    out << "WORLD\tW ER1 L D\n";
    out << "\n";
  }
  const PronLexicon lex = PronLexicon::LoadFile(path);
  CHECK(lex.NumWords() == 2);
  CHECK(lex.Contains("hello"));
  CHECK(lex.Contains("HELLO"));  // case-insensitive
  CHECK(lex.Contains("world"));
  const std::vector<std::string> hello = lex.Pronounce("hello");
  REQUIRE(hello.size() == 4);
  CHECK(hello[1] == "AH");  // stress digit removed
  CHECK(hello[3] == "OW");
}

TEST_CASE("missing lexicon file names the path") {
  try {
    PronLexicon::LoadFile("/nonexistent/lex.tsv");
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent/lex.tsv") != std::string::npos);
  }
}

TEST_CASE("out-of-vocabulary words fall back to letter rules") {
  PronLexicon lex;
  lex.AddEntry("known", {"N", "OW", "N"});
  CHECK_FALSE(lex.Contains("zyzzyva"));
  const std::vector<std::string> phones = lex.Pronounce("zyzzyva");
  CHECK_FALSE(phones.empty());
  // One phone per letter, so seven letters give seven phones.
  CHECK(phones.size() == 7);
  // Apostrophes contribute nothing.
  CHECK(lex.Pronounce("it's").size() == lex.Pronounce("its").size());
}

TEST_CASE("pronounce-all concatenates token pronunciations in order") {
  PronLexicon lex;
  lex.AddEntry("ab", {"AA", "B"});
  lex.AddEntry("cd", {"K", "D"});
  const std::vector<std::string> phones = lex.PronounceAll({"ab", "cd", "ab"});
  REQUIRE(phones.size() == 6);
  CHECK(phones[0] == "AA");
  CHECK(phones[2] == "K");
  CHECK(phones[5] == "B");
}

TEST_CASE("consonant counts ignore vowels and tally repeats") {
  const std::array<int, kNumConsonants> counts =
      ConsonantCounts({"S", "IH", "S", "T", "AH", "M", "S"});
  CHECK(counts[ConsonantIndex("S")] == 3);
  CHECK(counts[ConsonantIndex("T")] == 1);
  CHECK(counts[ConsonantIndex("M")] == 1);
  int total = 0;
  for (int c : counts) total += c;
  CHECK(total == 5);
}

TEST_CASE("the bundled lexicon covers its own advertised entries") {
  const PronLexicon lex = PronLexicon::LoadFile(VECTORSCOPE_TEST_DATA_DIR "/pron_lexicon.tsv");
  CHECK(lex.NumWords() > 200);
  CHECK(lex.Contains("google"));
  CHECK(lex.Contains("password"));
  const std::vector<std::string> ok = lex.Pronounce("ok");
  CHECK_FALSE(ok.empty());
}
