// core/include/vectorscope/experiment.hpp

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

#ifndef VECTORSCOPE_EXPERIMENT_HPP_
#define VECTORSCOPE_EXPERIMENT_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vectorscope/backend.hpp"
#include "vectorscope/corpus.hpp"
#include "vectorscope/dsp.hpp"
#include "vectorscope/ivector.hpp"
#include "vectorscope/xvector.hpp"

namespace vectorscope {

// Line-delimited `key = value` pairs under `[section]` headers; keys are
// addressed as "section.key".  '#' lines are comments; duplicate keys are
// rejected.
class KeyValueConfig {
 public:
  static KeyValueConfig FromFile(const std::string& path);
  static KeyValueConfig FromString(const std::string& text, const std::string& name);

  bool Has(const std::string& key) const;
  std::string GetString(const std::string& key) const;
  std::string GetString(const std::string& key, const std::string& fallback) const;
  std::int64_t GetInt(const std::string& key, std::int64_t fallback) const;
  double GetReal(const std::string& key, double fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;
  // Comma-separated, whitespace-trimmed.
  std::vector<std::string> GetList(const std::string& key) const;

  const std::map<std::string, std::string>& Entries() const { return entries_; }
  const std::string& Name() const { return name_; }

 private:
  std::map<std::string, std::string> entries_;
  std::string name_;
};

// Everything a sweep needs: corpus paths, the per-system front-ends, the
// dimension grid, and training knobs.  One root seed feeds every stage.
struct ExperimentConfig {
  std::string train_manifest;
  std::string probe_manifest;
  std::string backend_manifest;  // empty reuses train_manifest
  std::string work_dir = "work";
  std::string lexicon;  // optional pronunciation lexicon

  std::vector<std::string> systems = {"xvector", "ivector"};
  std::vector<int> dims = {32, 64};
  std::vector<TaskId> tasks;  // empty means all eight
  std::uint64_t seed = 0;
  bool desk_scale = true;  // desk-sized TDNN layers instead of full-size

  FrontendConfig xvector_frontend;  // filterbank features
  FrontendConfig ivector_frontend;  // cepstral features
  TdnnTrainConfig xvector_train;
  UbmTrainConfig ubm;
  int tv_iters = 5;
  BackendTrainConfig backend;
  std::size_t max_trials_per_type = 0;

  int probe_hidden = 500;
  int probe_epochs = 100;
  double probe_lr = 0.001;

  static ExperimentConfig FromConfig(const KeyValueConfig& kv);

  // Dimension list nonempty and positive, known systems and tasks,
  // referenced manifests present on disk.
  void Validate() const;

  const FrontendConfig& FrontendFor(const std::string& system) const;
};

}  // namespace vectorscope

#endif  // VECTORSCOPE_EXPERIMENT_HPP_
