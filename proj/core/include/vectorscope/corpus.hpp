// core/include/vectorscope/corpus.hpp

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

#ifndef VECTORSCOPE_CORPUS_HPP_
#define VECTORSCOPE_CORPUS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vectorscope/g2p.hpp"

namespace vectorscope {

enum class Gender { kMale, kFemale };
enum class AugType { kClean, kBabble, kMusic, kNoise };

std::string GenderName(Gender g);
Gender GenderFromName(const std::string& name);
std::string AugTypeName(AugType a);
AugType AugTypeFromName(const std::string& name);

// Speed factors are restricted to this inventory.
inline constexpr double kSpeedFactors[3] = {0.5, 1.0, 1.5};
int SpeedClassIndex(double factor);  // -1 if not in the inventory

struct UtteranceRecord {
  std::string utt_id;
  std::string speaker_id;
  std::string session_id;
  Gender gender = Gender::kMale;
  AugType aug_type = AugType::kClean;
  double speed_factor = 1.0;
  double duration_s = 0.0;
  std::string audio_path;
  std::string transcript;
  // In-memory link to the clean original of an augmented copy; not part of
  // the manifest file format.
  std::string parent_utt_id;
};

// Records sorted by utt_id with consistent index maps.  Immutable after
// construction; build a new one to change the record set.
struct Manifest {
  std::vector<UtteranceRecord> records;
  std::map<std::string, std::size_t> by_utt;
  std::map<std::string, std::vector<std::size_t>> by_speaker;
  std::map<std::string, std::vector<std::size_t>> by_session;
  // Keyed by normalized transcript.
  std::map<std::string, std::vector<std::size_t>> by_transcript;

  std::size_t NumRecords() const { return records.size(); }
  const UtteranceRecord& Get(const std::string& utt_id) const;
  bool Has(const std::string& utt_id) const { return by_utt.count(utt_id) != 0; }
};

// Sorts, validates, and indexes.  Rejects duplicate utt_ids, nonpositive
// durations, and speed factors outside the inventory.
Manifest MakeManifest(std::vector<UtteranceRecord> records);

// Manifest file: UTF-8 text, one record per line, 9 tab-separated fields
// (utt_id, speaker_id, session_id, gender, aug_type, speed_factor,
// duration_s, audio_path, transcript), '#' lines are comments.
Manifest LoadManifest(const std::string& path);
void WriteManifest(const std::string& path, const Manifest& manifest);

// Lowercase, strip non-alphanumeric except apostrophes, collapse runs of
// whitespace to single spaces, trim.
std::string NormalizeTranscript(const std::string& text);
std::vector<std::string> Tokenize(const std::string& text);

// Words ranked by corpus frequency over all records, ties lexicographic;
// result length min(k, vocabulary size).
std::vector<std::string> TopKWords(const Manifest& manifest, int k);

enum class TaskId {
  kSession,
  kGender,
  kSpeed,
  kTranscription,
  kWord,
  kPhoneme,
  kLength,
  kAugType,
};

const std::vector<TaskId>& AllTasks();
std::string TaskName(TaskId task);
TaskId TaskFromName(const std::string& name);

struct TaskAux {
  const PronLexicon* lexicon = nullptr;  // phoneme task
  int top_words = 50;                    // word task vocabulary size
  int top_transcriptions = 100;          // transcription task class count
  int phoneme_min_count = 3;             // occurrences needed for a 1 label
};

// Labels for one probing task.  Single-label tasks fill class_labels,
// multi-label tasks (word, phoneme) fill bit_labels with one bit per
// inventory entry, regression fills real_labels with empty inventory.
struct LabelSet {
  TaskId task_id = TaskId::kSession;
  bool regression = false;
  bool multi_label = false;
  std::vector<std::string> class_inventory;
  std::map<std::string, int> class_labels;
  std::map<std::string, std::vector<int>> bit_labels;
  std::map<std::string, double> real_labels;

  std::size_t NumLabeled() const;
};

LabelSet DeriveTaskLabels(const Manifest& manifest, TaskId task, const TaskAux& aux = {});

// Disjoint, exhaustive partition with per-stratum test share within one
// element of test_fraction.  Strata maps utt_id to a stratum name; every
// record must be covered and every stratum needs >= 2 members.
struct SplitResult {
  Manifest train;
  Manifest test;
};

SplitResult StratifiedSplit(const Manifest& manifest, double test_fraction,
                            const std::map<std::string, std::string>& strata,
                            std::uint64_t seed);

enum class StratifyKey { kLabel, kSpeaker };

// Convenience wrapper: key = kSpeaker stratifies by speaker_id; key =
// kLabel stratifies by the task's class label (labels required, and only
// records present in the LabelSet are split).
SplitResult StratifiedSplit(const Manifest& manifest, double test_fraction, StratifyKey key,
                            const LabelSet* labels, std::uint64_t seed);

}  // namespace vectorscope

#endif  // VECTORSCOPE_CORPUS_HPP_
