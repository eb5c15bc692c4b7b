// core/include/vectorscope/g2p.hpp

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

#ifndef VECTORSCOPE_G2P_HPP_
#define VECTORSCOPE_G2P_HPP_

#include <array>
#include <map>
#include <string>
#include <vector>

namespace vectorscope {

// The 24 English consonant phonemes (ARPAbet), fixed order.
inline constexpr int kNumConsonants = 24;
const std::array<std::string, kNumConsonants>& ConsonantInventory();

// Index in ConsonantInventory(), or -1 for vowels / unknown symbols.
int ConsonantIndex(const std::string& phone);

// Word-to-pronunciation map with ARPAbet symbols.  Lookups are
// case-insensitive and stress digits are stripped on load.  Words not in
// the lexicon fall back to a per-letter rule table (one phone per letter,
// apostrophes dropped), so Pronounce never fails.
class PronLexicon {
 public:
  PronLexicon() = default;

  // File format: one entry per line, "word TAB space-separated phonemes".
  // Lines starting with '#' are comments.
  static PronLexicon LoadFile(const std::string& path);

  void AddEntry(const std::string& word, const std::vector<std::string>& phones);
  bool Contains(const std::string& word) const;
  std::size_t NumWords() const { return entries_.size(); }

  std::vector<std::string> Pronounce(const std::string& word) const;
  // Concatenated pronunciation of a token sequence.
  std::vector<std::string> PronounceAll(const std::vector<std::string>& tokens) const;

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

// Per-consonant occurrence counts over a phoneme sequence, indexed as in
// ConsonantInventory().  Vowels are ignored.
std::array<int, kNumConsonants> ConsonantCounts(const std::vector<std::string>& phones);

}  // namespace vectorscope

#endif  // VECTORSCOPE_G2P_HPP_
