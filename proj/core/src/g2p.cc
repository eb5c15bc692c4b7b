// core/src/g2p.cc

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

#include "vectorscope/g2p.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "vectorscope/common.hpp"

namespace vectorscope {

namespace {

std::string LowerAscii(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string StripStress(const std::string& phone) {
  std::string out;
  for (char c : phone)
    if (!std::isdigit(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

// One phone per letter; crude, but only used for words missing from the
// lexicon.  Apostrophes and any other character map to nothing.
const std::vector<std::string>& LetterPhones(char c) {
  static const std::vector<std::string> table[26] = {
      {"AH"},     {"B"}, {"K"}, {"D"}, {"EH"}, {"F"}, {"G"},      {"HH"}, {"IH"},
      {"JH"},     {"K"}, {"L"}, {"M"}, {"N"},  {"OW"}, {"P"},     {"K"},  {"R"},
      {"S"},      {"T"}, {"AH"}, {"V"}, {"W"}, {"K", "S"}, {"Y"}, {"Z"}};
  static const std::vector<std::string> empty;
  if (c >= 'a' && c <= 'z') return table[c - 'a'];
  return empty;
}

}  // namespace

const std::array<std::string, kNumConsonants>& ConsonantInventory() {
  static const std::array<std::string, kNumConsonants> inv = {
      "P", "B", "T", "D",  "K",  "G",  "CH", "JH", "F", "V", "TH", "DH",
      "S", "Z", "SH", "ZH", "HH", "M",  "N",  "NG", "L", "R", "W",  "Y"};
  return inv;
}

int ConsonantIndex(const std::string& phone) {
  const auto& inv = ConsonantInventory();
  for (int i = 0; i < kNumConsonants; ++i)
    if (inv[i] == phone) return i;
  return -1;
}

PronLexicon PronLexicon::LoadFile(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), "cannot open lexicon '", path, "'");
  PronLexicon lex;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    Require(tab != std::string::npos, "'", path, "' line ", line_no, ": missing TAB");
    const std::string word = line.substr(0, tab);
    Require(!word.empty(), "'", path, "' line ", line_no, ": empty word");
    std::istringstream phones_in(line.substr(tab + 1));
    std::vector<std::string> phones;
    std::string phone;
    while (phones_in >> phone) phones.push_back(StripStress(phone));
    Require(!phones.empty(), "'", path, "' line ", line_no, ": no phonemes for '", word, "'");
    lex.AddEntry(word, phones);
  }
  return lex;
}

void PronLexicon::AddEntry(const std::string& word, const std::vector<std::string>& phones) {
  std::vector<std::string> stripped;
  stripped.reserve(phones.size());
  for (const auto& p : phones) stripped.push_back(StripStress(p));
  entries_[LowerAscii(word)] = std::move(stripped);
}

bool PronLexicon::Contains(const std::string& word) const {
  return entries_.find(LowerAscii(word)) != entries_.end();
}

std::vector<std::string> PronLexicon::Pronounce(const std::string& word) const {
  const std::string key = LowerAscii(word);
  auto it = entries_.find(key);
  if (it != entries_.end()) return it->second;
  std::vector<std::string> phones;
  for (char c : key) {
    const auto& mapped = LetterPhones(c);
    phones.insert(phones.end(), mapped.begin(), mapped.end());
  }
  return phones;
}

std::vector<std::string> PronLexicon::PronounceAll(const std::vector<std::string>& tokens) const {
  std::vector<std::string> phones;
  for (const auto& tok : tokens) {
    const std::vector<std::string> p = Pronounce(tok);
    phones.insert(phones.end(), p.begin(), p.end());
  }
  return phones;
}

std::array<int, kNumConsonants> ConsonantCounts(const std::vector<std::string>& phones) {
  std::array<int, kNumConsonants> counts{};
  for (const auto& p : phones) {
    const int idx = ConsonantIndex(p);
    if (idx >= 0) ++counts[idx];
  }
  return counts;
}

}  // namespace vectorscope
