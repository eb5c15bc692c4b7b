// core/src/experiment.cc

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

#include "vectorscope/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "vectorscope/common.hpp"

namespace vectorscope {

namespace {

std::string Trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::FromFile(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), "cannot open config file ", path);
  std::ostringstream text;
  text << in.rdbuf();
  return FromString(text.str(), path);
}

KeyValueConfig KeyValueConfig::FromString(const std::string& text, const std::string& name) {
  KeyValueConfig config;
  config.name_ = name;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = Trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    if (stripped.front() == '[') {
      Require(stripped.back() == ']', name, ":", lineno, ": malformed section header: ", stripped);
      section = Trim(stripped.substr(1, stripped.size() - 2));
      Require(!section.empty(), name, ":", lineno, ": empty section name");
      continue;
    }
    const std::size_t eq = stripped.find('=');
    Require(eq != std::string::npos, name, ":", lineno, ": expected `key = value`, got: ", stripped);
    std::string key = Trim(stripped.substr(0, eq));
    const std::string value = Trim(stripped.substr(eq + 1));
    Require(!key.empty(), name, ":", lineno, ": empty key");
    if (!section.empty()) key = section + "." + key;
    Require(config.entries_.find(key) == config.entries_.end(),
            name, ":", lineno, ": duplicate key ", key);
    config.entries_[key] = value;
  }
  return config;
}

bool KeyValueConfig::Has(const std::string& key) const {
  return entries_.find(key) != entries_.end();
}

std::string KeyValueConfig::GetString(const std::string& key) const {
  auto it = entries_.find(key);
  Require(it != entries_.end(), name_, ": missing required key ", key);
  return it->second;
}

std::string KeyValueConfig::GetString(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

std::int64_t KeyValueConfig::GetInt(const std::string& key, std::int64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::size_t pos = 0;
  std::int64_t value = 0;
  try {
    value = std::stoll(it->second, &pos);
  } catch (const std::exception&) {
    Fail(name_, ": key ", key, " is not an integer: ", it->second);
  }
  Require(pos == it->second.size(), name_, ": key ", key, " is not an integer: ", it->second);
  return value;
}

double KeyValueConfig::GetReal(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    Fail(name_, ": key ", key, " is not a number: ", it->second);
  }
  Require(pos == it->second.size(), name_, ": key ", key, " is not a number: ", it->second);
  return value;
}

bool KeyValueConfig::GetBool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  Fail(name_, ": key ", key, " is not a boolean: ", v);
}

std::vector<std::string> KeyValueConfig::GetList(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return {};
  std::vector<std::string> items;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = Trim(item);
    if (!t.empty()) items.push_back(t);
  }
  return items;
}

ExperimentConfig ExperimentConfig::FromConfig(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.train_manifest = kv.GetString("paths.train_manifest", "");
  c.probe_manifest = kv.GetString("paths.probe_manifest", "");
  c.backend_manifest = kv.GetString("paths.backend_manifest", "");
  c.work_dir = kv.GetString("paths.work_dir", c.work_dir);
  c.lexicon = kv.GetString("paths.lexicon", "");

  if (kv.Has("experiment.systems")) c.systems = kv.GetList("experiment.systems");
  if (kv.Has("experiment.dims")) {
    c.dims.clear();
    for (const std::string& d : kv.GetList("experiment.dims")) {
      std::size_t pos = 0;
      int value = 0;
      try {
        value = std::stoi(d, &pos);
      } catch (const std::exception&) {
        Fail(kv.Name(), ": experiment.dims entry is not an integer: ", d);
      }
      Require(pos == d.size(), kv.Name(), ": experiment.dims entry is not an integer: ", d);
      c.dims.push_back(value);
    }
  }
  if (kv.Has("experiment.tasks")) {
    for (const std::string& t : kv.GetList("experiment.tasks")) {
      c.tasks.push_back(TaskFromName(t));
    }
  }
  c.seed = static_cast<std::uint64_t>(kv.GetInt("experiment.seed", 0));
  c.desk_scale = kv.GetBool("experiment.desk_scale", c.desk_scale);

  c.xvector_frontend.kind = FeatureKind::kFbank;
  c.xvector_frontend.num_filters = static_cast<int>(kv.GetInt("frontend.num_filters", 30));
  c.ivector_frontend.kind = FeatureKind::kMfcc;
  c.ivector_frontend.num_filters = c.xvector_frontend.num_filters;
  c.ivector_frontend.num_ceps = static_cast<int>(kv.GetInt("frontend.num_ceps", 20));
  for (FrontendConfig* f : {&c.xvector_frontend, &c.ivector_frontend}) {
    f->frame_len_s = kv.GetReal("frontend.frame_len_s", f->frame_len_s);
    f->frame_shift_s = kv.GetReal("frontend.frame_shift_s", f->frame_shift_s);
    f->cmn_window_s = kv.GetReal("frontend.cmn_window_s", f->cmn_window_s);
    f->sad_offset = kv.GetReal("frontend.sad_offset", f->sad_offset);
    f->apply_cmn = kv.GetBool("frontend.apply_cmn", f->apply_cmn);
    f->apply_sad = kv.GetBool("frontend.apply_sad", f->apply_sad);
  }

  c.xvector_train.chunk_min = static_cast<int>(kv.GetInt("xvector.chunk_min", c.xvector_train.chunk_min));
  c.xvector_train.chunk_max = static_cast<int>(kv.GetInt("xvector.chunk_max", c.xvector_train.chunk_max));
  c.xvector_train.batch_size = static_cast<int>(kv.GetInt("xvector.batch_size", c.xvector_train.batch_size));
  c.xvector_train.epochs = static_cast<int>(kv.GetInt("xvector.epochs", c.xvector_train.epochs));
  c.xvector_train.lr = kv.GetReal("xvector.learning_rate", c.xvector_train.lr);
  c.xvector_train.verbose = kv.GetBool("xvector.verbose", c.xvector_train.verbose);

  c.ubm.num_components = static_cast<int>(kv.GetInt("ivector.num_components", c.ubm.num_components));
  c.ubm.iters = static_cast<int>(kv.GetInt("ivector.ubm_iters", c.ubm.iters));
  c.ubm.full_cov = kv.GetBool("ivector.full_cov", c.ubm.full_cov);
  c.tv_iters = static_cast<int>(kv.GetInt("ivector.tv_iters", c.tv_iters));

  c.backend.lda_dim = static_cast<int>(kv.GetInt("backend.lda_dim", c.backend.lda_dim));
  c.backend.plda_iters = static_cast<int>(kv.GetInt("backend.plda_iters", c.backend.plda_iters));
  c.max_trials_per_type =
      static_cast<std::size_t>(kv.GetInt("backend.max_trials_per_type", 0));

  c.probe_hidden = static_cast<int>(kv.GetInt("probe.hidden", c.probe_hidden));
  c.probe_epochs = static_cast<int>(kv.GetInt("probe.epochs", c.probe_epochs));
  c.probe_lr = kv.GetReal("probe.learning_rate", c.probe_lr);
  return c;
}

void ExperimentConfig::Validate() const {
  Require(!dims.empty(), "experiment needs at least one embedding dimension");
  for (int d : dims) Require(d > 0, "embedding dimension must be positive, got ", d);
  Require(!systems.empty(), "experiment needs at least one system");
  for (const std::string& s : systems) {
    Require(s == "xvector" || s == "ivector", "unknown system ", s);
  }
  const std::set<std::string> uniq(systems.begin(), systems.end());
  Require(uniq.size() == systems.size(), "duplicate system in experiment config");
  for (const std::string& path : {train_manifest, probe_manifest, backend_manifest, lexicon}) {
    if (path.empty()) continue;
    Require(std::filesystem::exists(path), "configured path does not exist: ", path);
  }
  Require(probe_hidden > 0, "probe hidden width must be positive");
  Require(probe_epochs > 0, "probe epochs must be positive");
}

const FrontendConfig& ExperimentConfig::FrontendFor(const std::string& system) const {
  if (system == "xvector") return xvector_frontend;
  if (system == "ivector") return ivector_frontend;
  Fail("unknown system ", system);
}

}  // namespace vectorscope
