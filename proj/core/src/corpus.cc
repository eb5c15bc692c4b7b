// core/src/corpus.cc

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

#include "vectorscope/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vectorscope/common.hpp"

namespace vectorscope {

std::string GenderName(Gender g) {
  return g == Gender::kMale ? "male" : "female";
}

Gender GenderFromName(const std::string& name) {
  if (name == "male") return Gender::kMale;
  if (name == "female") return Gender::kFemale;
  Fail("unknown gender '", name, "' (expected male|female)");
}

std::string AugTypeName(AugType a) {
  switch (a) {
    case AugType::kClean: return "clean";
    case AugType::kBabble: return "babble";
    case AugType::kMusic: return "music";
    case AugType::kNoise: return "noise";
  }
  Fail("bad AugType value");
}

AugType AugTypeFromName(const std::string& name) {
  if (name == "clean") return AugType::kClean;
  if (name == "babble") return AugType::kBabble;
  if (name == "music") return AugType::kMusic;
  if (name == "noise") return AugType::kNoise;
  Fail("unknown aug_type '", name, "' (expected clean|babble|music|noise)");
}

int SpeedClassIndex(double factor) {
  for (int i = 0; i < 3; ++i)
    if (std::abs(factor - kSpeedFactors[i]) < 1e-9) return i;
  return -1;
}

const UtteranceRecord& Manifest::Get(const std::string& utt_id) const {
  auto it = by_utt.find(utt_id);
  Require(it != by_utt.end(), "utt_id '", utt_id, "' not in manifest");
  return records[it->second];
}

Manifest MakeManifest(std::vector<UtteranceRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const UtteranceRecord& a, const UtteranceRecord& b) {
              return a.utt_id < b.utt_id;
            });
  Manifest m;
  m.records = std::move(records);
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    const UtteranceRecord& rec = m.records[i];
    Require(!rec.utt_id.empty(), "record ", i, " has empty utt_id");
    Require(rec.duration_s > 0.0, "utt '", rec.utt_id, "': duration_s must be > 0, got ",
            rec.duration_s);
    Require(SpeedClassIndex(rec.speed_factor) >= 0, "utt '", rec.utt_id,
            "': speed_factor ", rec.speed_factor, " not in {0.5, 1.0, 1.5}");
    const bool inserted = m.by_utt.emplace(rec.utt_id, i).second;
    Require(inserted, "duplicate utt_id '", rec.utt_id, "'");
    m.by_speaker[rec.speaker_id].push_back(i);
    m.by_session[rec.session_id].push_back(i);
    m.by_transcript[NormalizeTranscript(rec.transcript)].push_back(i);
  }
  for (const UtteranceRecord& rec : m.records) {
    if (!rec.parent_utt_id.empty())
      Require(m.by_utt.count(rec.parent_utt_id) != 0, "utt '", rec.utt_id,
              "': parent '", rec.parent_utt_id, "' not in manifest");
  }
  return m;
}

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

double ParseReal(const std::string& s, const std::string& what, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    Require(used == s.size(), "line ", line_no, ": trailing junk in ", what, " '", s, "'");
    return v;
  } catch (const std::invalid_argument&) {
    Fail("line ", line_no, ": cannot parse ", what, " '", s, "'");
  } catch (const std::out_of_range&) {
    Fail("line ", line_no, ": ", what, " '", s, "' out of range");
  }
}

}  // namespace

Manifest LoadManifest(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), "cannot open manifest '", path, "'");
  std::vector<UtteranceRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> f = SplitTabs(line);
    Require(f.size() == 9, "'", path, "' line ", line_no, ": expected 9 tab-separated fields, got ",
            f.size());
    try {
      UtteranceRecord rec;
      rec.utt_id = f[0];
      rec.speaker_id = f[1];
      rec.session_id = f[2];
      rec.gender = GenderFromName(f[3]);
      rec.aug_type = AugTypeFromName(f[4]);
      rec.speed_factor = ParseReal(f[5], "speed_factor", line_no);
      rec.duration_s = ParseReal(f[6], "duration_s", line_no);
      rec.audio_path = f[7];
      rec.transcript = f[8];
      Require(!rec.utt_id.empty(), "empty utt_id");
      Require(!rec.speaker_id.empty(), "empty speaker_id");
      Require(!rec.session_id.empty(), "empty session_id");
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      Fail("'", path, "' line ", line_no, ": ", e.what());
    }
  }
  try {
    return MakeManifest(std::move(records));
  } catch (const std::exception& e) {
    Fail("'", path, "': ", e.what());
  }
}

void WriteManifest(const std::string& path, const Manifest& manifest) {
  std::ostringstream out;
  out << "# utt_id\tspeaker_id\tsession_id\tgender\taug_type\tspeed_factor\t"
         "duration_s\taudio_path\ttranscript\n";
  char num[64];
  for (const UtteranceRecord& rec : manifest.records) {
    std::snprintf(num, sizeof(num), "%.1f", rec.speed_factor);
    out << rec.utt_id << '\t' << rec.speaker_id << '\t' << rec.session_id << '\t'
        << GenderName(rec.gender) << '\t' << AugTypeName(rec.aug_type) << '\t' << num << '\t';
    std::snprintf(num, sizeof(num), "%.17g", rec.duration_s);
    out << num << '\t' << rec.audio_path << '\t' << rec.transcript << '\n';
  }
  AtomicWriteFile(path, out.str());
}

std::string NormalizeTranscript(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = true;
      continue;
    }
    if (std::isalnum(c) || c == '\'') {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  return out;
}

std::vector<std::string> Tokenize(const std::string& text) {
  const std::string norm = NormalizeTranscript(text);
  std::vector<std::string> tokens;
  std::istringstream in(norm);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

namespace {

// Frequency ranking with lexicographic tie-break, shared by the word and
// transcription tasks.
std::vector<std::string> TopKByCount(const std::map<std::string, std::size_t>& counts, int k) {
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const std::size_t n = std::min<std::size_t>(k, ranked.size());
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(ranked[i].first);
  return out;
}

}  // namespace

std::vector<std::string> TopKWords(const Manifest& manifest, int k) {
  Require(k > 0, "TopKWords: k must be positive, got ", k);
  std::map<std::string, std::size_t> counts;
  for (const UtteranceRecord& rec : manifest.records)
    for (const std::string& tok : Tokenize(rec.transcript)) ++counts[tok];
  Require(!counts.empty(), "TopKWords: all transcripts are empty");
  return TopKByCount(counts, k);
}

const std::vector<TaskId>& AllTasks() {
  static const std::vector<TaskId> tasks = {
      TaskId::kSession, TaskId::kGender,  TaskId::kSpeed,  TaskId::kTranscription,
      TaskId::kWord,    TaskId::kPhoneme, TaskId::kLength, TaskId::kAugType};
  return tasks;
}

std::string TaskName(TaskId task) {
  switch (task) {
    case TaskId::kSession: return "session";
    case TaskId::kGender: return "gender";
    case TaskId::kSpeed: return "speed";
    case TaskId::kTranscription: return "transcription";
    case TaskId::kWord: return "word";
    case TaskId::kPhoneme: return "phoneme";
    case TaskId::kLength: return "length";
    case TaskId::kAugType: return "aug_type";
  }
  Fail("bad TaskId value");
}

TaskId TaskFromName(const std::string& name) {
  for (TaskId task : AllTasks())
    if (TaskName(task) == name) return task;
  Fail("unknown task '", name,
       "' (expected session|gender|speed|transcription|word|phoneme|length|aug_type)");
}

std::size_t LabelSet::NumLabeled() const {
  if (regression) return real_labels.size();
  if (multi_label) return bit_labels.size();
  return class_labels.size();
}

namespace {

void RequireTranscripts(const Manifest& manifest, TaskId task) {
  for (const UtteranceRecord& rec : manifest.records)
    Require(!NormalizeTranscript(rec.transcript).empty(), TaskName(task), " task: utt '",
            rec.utt_id, "' has an empty transcript");
}

}  // namespace

LabelSet DeriveTaskLabels(const Manifest& manifest, TaskId task, const TaskAux& aux) {
  Require(!manifest.records.empty(), "DeriveTaskLabels: empty manifest");
  LabelSet set;
  set.task_id = task;
  switch (task) {
    case TaskId::kSession: {
      for (const auto& [session_id, members] : manifest.by_session) {
        (void)members;
        set.class_inventory.push_back(session_id);
      }
      for (const UtteranceRecord& rec : manifest.records) {
        const auto it =
            std::lower_bound(set.class_inventory.begin(), set.class_inventory.end(), rec.session_id);
        set.class_labels[rec.utt_id] = static_cast<int>(it - set.class_inventory.begin());
      }
      break;
    }
    case TaskId::kGender: {
      set.class_inventory = {"male", "female"};
      for (const UtteranceRecord& rec : manifest.records)
        set.class_labels[rec.utt_id] = rec.gender == Gender::kMale ? 0 : 1;
      break;
    }
    case TaskId::kSpeed: {
      set.class_inventory = {"0.5", "1.0", "1.5"};
      for (const UtteranceRecord& rec : manifest.records)
        set.class_labels[rec.utt_id] = SpeedClassIndex(rec.speed_factor);
      break;
    }
    case TaskId::kTranscription: {
      RequireTranscripts(manifest, task);
      std::map<std::string, std::size_t> counts;
      for (const UtteranceRecord& rec : manifest.records)
        ++counts[NormalizeTranscript(rec.transcript)];
      set.class_inventory = TopKByCount(counts, aux.top_transcriptions);
      std::map<std::string, int> index;
      for (std::size_t i = 0; i < set.class_inventory.size(); ++i)
        index[set.class_inventory[i]] = static_cast<int>(i);
      // Utterances outside the top classes are left out of the LabelSet.
      for (const UtteranceRecord& rec : manifest.records) {
        const auto it = index.find(NormalizeTranscript(rec.transcript));
        if (it != index.end()) set.class_labels[rec.utt_id] = it->second;
      }
      break;
    }
    case TaskId::kWord: {
      RequireTranscripts(manifest, task);
      set.multi_label = true;
      set.class_inventory = TopKWords(manifest, aux.top_words);
      for (const UtteranceRecord& rec : manifest.records) {
        const std::vector<std::string> tokens = Tokenize(rec.transcript);
        std::vector<int> bits(set.class_inventory.size(), 0);
        for (std::size_t w = 0; w < set.class_inventory.size(); ++w)
          if (std::find(tokens.begin(), tokens.end(), set.class_inventory[w]) != tokens.end())
            bits[w] = 1;
        set.bit_labels[rec.utt_id] = std::move(bits);
      }
      break;
    }
    case TaskId::kPhoneme: {
      RequireTranscripts(manifest, task);
      Require(aux.lexicon != nullptr, "phoneme task needs a pronunciation lexicon");
      set.multi_label = true;
      const auto& inv = ConsonantInventory();
      set.class_inventory.assign(inv.begin(), inv.end());
      for (const UtteranceRecord& rec : manifest.records) {
        const auto counts = ConsonantCounts(aux.lexicon->PronounceAll(Tokenize(rec.transcript)));
        std::vector<int> bits(kNumConsonants, 0);
        for (int i = 0; i < kNumConsonants; ++i)
          if (counts[i] >= aux.phoneme_min_count) bits[i] = 1;
        set.bit_labels[rec.utt_id] = std::move(bits);
      }
      break;
    }
    case TaskId::kLength: {
      set.regression = true;
      for (const UtteranceRecord& rec : manifest.records)
        set.real_labels[rec.utt_id] = rec.duration_s;
      break;
    }
    case TaskId::kAugType: {
      set.class_inventory = {"clean", "babble", "music", "noise"};
      for (const UtteranceRecord& rec : manifest.records)
        set.class_labels[rec.utt_id] = static_cast<int>(rec.aug_type);
      break;
    }
  }
  return set;
}

SplitResult StratifiedSplit(const Manifest& manifest, double test_fraction,
                            const std::map<std::string, std::string>& strata,
                            std::uint64_t seed) {
  Require(test_fraction > 0.0 && test_fraction < 1.0, "test_fraction must be in (0,1), got ",
          test_fraction);
  std::map<std::string, std::vector<std::string>> members;
  for (const auto& [utt_id, stratum] : strata) {
    Require(manifest.Has(utt_id), "strata map references unknown utt_id '", utt_id, "'");
    members[stratum].push_back(utt_id);
  }
  Require(!members.empty(), "StratifiedSplit: no records to split");
  for (const auto& [stratum, ids] : members)
    Require(ids.size() >= 2, "stratum '", stratum, "' has only ", ids.size(),
            " member; need at least 2");

  // Per-stratum test count is floor(n*fraction); the fractional remainders
  // are resolved by systematic rounding over a seeded stratum order, which
  // keeps the total within one element of N*fraction.
  std::vector<std::string> stratum_names;
  stratum_names.reserve(members.size());
  for (const auto& [stratum, ids] : members) {
    (void)ids;
    stratum_names.push_back(stratum);
  }
  Rng order_rng(CombineSeed(seed, "stratum-order"));
  for (std::size_t i = stratum_names.size(); i > 1; --i)
    std::swap(stratum_names[i - 1], stratum_names[order_rng.UniformInt(i)]);

  std::map<std::string, bool> in_test;
  double acc = Rng(CombineSeed(seed, "round-offset")).Uniform();
  for (const std::string& stratum : stratum_names) {
    std::vector<std::string>& ids = members[stratum];
    const double want = static_cast<double>(ids.size()) * test_fraction;
    std::size_t count = static_cast<std::size_t>(std::floor(want));
    acc += want - std::floor(want);
    if (acc >= 1.0) {
      acc -= 1.0;
      ++count;
    }
    std::sort(ids.begin(), ids.end());
    Rng pick_rng(CombineSeed(seed, "members:" + stratum));
    for (std::size_t i = ids.size(); i > 1; --i)
      std::swap(ids[i - 1], ids[pick_rng.UniformInt(i)]);
    for (std::size_t i = 0; i < ids.size(); ++i) in_test[ids[i]] = i < count;
  }

  std::vector<UtteranceRecord> train, test;
  for (const UtteranceRecord& rec : manifest.records) {
    const auto it = in_test.find(rec.utt_id);
    if (it == in_test.end()) continue;  // not covered by the strata map
    (it->second ? test : train).push_back(rec);
  }
  SplitResult out;
  out.train = MakeManifest(std::move(train));
  out.test = MakeManifest(std::move(test));
  return out;
}

SplitResult StratifiedSplit(const Manifest& manifest, double test_fraction, StratifyKey key,
                            const LabelSet* labels, std::uint64_t seed) {
  std::map<std::string, std::string> strata;
  if (key == StratifyKey::kSpeaker) {
    for (const UtteranceRecord& rec : manifest.records) strata[rec.utt_id] = rec.speaker_id;
  } else {
    Require(labels != nullptr, "StratifyKey::kLabel needs a LabelSet");
    Require(!labels->regression && !labels->multi_label,
            "StratifyKey::kLabel needs single-label classes; use kSpeaker for ",
            TaskName(labels->task_id));
    for (const auto& [utt_id, cls] : labels->class_labels) {
      if (!manifest.Has(utt_id)) continue;
      strata[utt_id] = labels->class_inventory[cls];
    }
  }
  return StratifiedSplit(manifest, test_fraction, strata, seed);
}

}  // namespace vectorscope
