// tools/commands.cc

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

#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vectorscope/archive.hpp"
#include "vectorscope/augment.hpp"
#include "vectorscope/backend.hpp"
#include "vectorscope/common.hpp"
#include "vectorscope/corpus.hpp"
#include "vectorscope/dsp.hpp"
#include "vectorscope/experiment.hpp"
#include "vectorscope/g2p.hpp"
#include "vectorscope/ivector.hpp"
#include "vectorscope/probe.hpp"
#include "vectorscope/wav.hpp"
#include "vectorscope/xvector.hpp"

namespace vectorscope {
namespace {

struct Flags {
  std::string config_path;
  std::int64_t seed = 0;
  bool seed_set = false;
  int dim = 0;
  std::string task;
  std::string system;
  std::string out;
  std::string scores;  // `eer` positional
};

ExperimentConfig LoadExperiment(const Flags& flags) {
  Require(!flags.config_path.empty(), "--config is required");
  ExperimentConfig config = ExperimentConfig::FromConfig(KeyValueConfig::FromFile(flags.config_path));
  if (flags.seed_set) config.seed = static_cast<std::uint64_t>(flags.seed);
  config.Validate();
  Log("root seed ", config.seed);
  return config;
}

void RequireArtifact(const std::string& path, const std::string& producer) {
  Require(std::filesystem::exists(path),
          "missing upstream artifact ", path, " (produce it with `vectorscope ", producer, "`)");
}

std::string WorkPath(const ExperimentConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.work_dir);
  return (std::filesystem::path(config.work_dir) / name).string();
}

std::string FeaturePath(const ExperimentConfig& config, const std::string& system) {
  return WorkPath(config, system + "_feats.bin");
}

std::string ModelPath(const ExperimentConfig& config, const std::string& system, int dim) {
  return WorkPath(config, system + "_" + std::to_string(dim) + ".mdl");
}

std::string EmbeddingPath(const ExperimentConfig& config, const std::string& system, int dim) {
  return WorkPath(config, system + "_" + std::to_string(dim) + "_emb.bin");
}

std::string BackendPath(const ExperimentConfig& config, const std::string& system, int dim) {
  return WorkPath(config, system + "_" + std::to_string(dim) + "_backend.bin");
}

std::string TrialPath(const ExperimentConfig& config) { return WorkPath(config, "trials.tsv"); }

std::string ScorePath(const ExperimentConfig& config, const std::string& system, int dim) {
  return WorkPath(config, system + "_" + std::to_string(dim) + "_scores.tsv");
}

std::string ProbeManifestPath(const ExperimentConfig& config) {
  return config.probe_manifest.empty() ? config.train_manifest : config.probe_manifest;
}

std::string BackendManifestPath(const ExperimentConfig& config) {
  return config.backend_manifest.empty() ? config.train_manifest : config.backend_manifest;
}

// Union of every manifest the config references, deduplicated by utterance
// id.  Extraction covers this union so downstream stages never miss a key.
Manifest LoadAllRecords(const ExperimentConfig& config) {
  Require(!config.train_manifest.empty(), "config sets no train_manifest");
  std::set<std::string> paths = {config.train_manifest, ProbeManifestPath(config),
                                 BackendManifestPath(config)};
  std::map<std::string, UtteranceRecord> by_id;
  for (const std::string& path : paths) {
    const Manifest m = LoadManifest(path);
    for (const UtteranceRecord& r : m.records) {
      auto it = by_id.find(r.utt_id);
      if (it == by_id.end()) {
        by_id[r.utt_id] = r;
        continue;
      }
      Require(it->second.audio_path == r.audio_path && it->second.speaker_id == r.speaker_id,
              "utterance ", r.utt_id, " appears in two manifests with conflicting records");
    }
  }
  std::vector<UtteranceRecord> records;
  records.reserve(by_id.size());
  for (auto& [id, r] : by_id) records.push_back(std::move(r));
  return MakeManifest(std::move(records));
}

int FeatureDim(const FrontendConfig& frontend) {
  return frontend.kind == FeatureKind::kFbank ? frontend.num_filters : frontend.num_ceps;
}

FeatureArchive ComputeFeatures(const Manifest& manifest, const FrontendConfig& frontend) {
  const std::size_t n = manifest.records.size();
  std::vector<Eigen::MatrixXd> slots(n);
  ParallelFor(n, [&](std::size_t i) {
    const UtteranceRecord& r = manifest.records[i];
    slots[i] = ProcessUtterance(ReadWav(r.audio_path), frontend).values;
  });
  FeatureArchive archive;
  for (std::size_t i = 0; i < n; ++i) {
    archive[manifest.records[i].utt_id] = std::move(slots[i]);
  }
  return archive;
}

// The archive must cover the manifest; reports the first few gaps.
void RequireCoverage(const FeatureArchive& archive, const Manifest& manifest,
                     const std::string& archive_path) {
  std::vector<std::string> missing;
  for (const UtteranceRecord& r : manifest.records) {
    if (archive.find(r.utt_id) == archive.end()) missing.push_back(r.utt_id);
  }
  if (missing.empty()) return;
  std::ostringstream os;
  for (std::size_t i = 0; i < missing.size() && i < 8; ++i) os << " " << missing[i];
  Fail("feature archive ", archive_path, " is missing ", missing.size(),
       " manifest utterances:", os.str());
}

TdnnModel TrainXvectorModel(const ExperimentConfig& config, const Manifest& train,
                            const FeatureArchive& feats, int dim) {
  std::map<std::string, int> speaker_index;
  for (const auto& [speaker, utts] : train.by_speaker) {
    const int next = static_cast<int>(speaker_index.size());
    speaker_index[speaker] = next;
  }
  Require(speaker_index.size() >= 2, "x-vector training needs at least two speakers");
  std::vector<TdnnExample> examples;
  examples.reserve(train.records.size());
  for (const UtteranceRecord& r : train.records) {
    examples.push_back({&feats.at(r.utt_id), speaker_index.at(r.speaker_id)});
  }
  TdnnConfig net = config.desk_scale
                       ? TdnnConfig::Desk(dim, static_cast<int>(speaker_index.size()))
                       : TdnnConfig::Default(dim, static_cast<int>(speaker_index.size()));
  net.feature_dim = FeatureDim(config.xvector_frontend);
  const std::string tag = std::to_string(dim);
  TdnnModel init = InitTdnn(net, CombineSeed(config.seed, "xvector-init:" + tag));
  TdnnTrainConfig tcfg = config.xvector_train;
  tcfg.seed = CombineSeed(config.seed, "xvector-train:" + tag);
  TdnnTrainResult result = TrainTdnn(init, examples, tcfg);
  Log("xvector dim ", dim, " train accuracy ", TdnnAccuracy(result.model, examples));
  return std::move(result.model);
}

struct IvectorModel {
  GmmUbm ubm;
  TotalVariability tv;
};

// The UBM does not depend on the embedding dimension, so its seed tag is
// dimension-free and a sweep can reuse one UBM across ranks.
GmmUbm TrainUbmModel(const ExperimentConfig& config, const Manifest& train,
                     const FeatureArchive& feats) {
  std::vector<const Eigen::MatrixXd*> pointers;
  pointers.reserve(train.records.size());
  for (const UtteranceRecord& r : train.records) pointers.push_back(&feats.at(r.utt_id));
  UbmTrainConfig ucfg = config.ubm;
  ucfg.seed = CombineSeed(config.seed, "ubm");
  UbmTrainResult result = TrainUbm(pointers, ucfg);
  Log("ubm mean frame log-likelihood ",
      result.log_likelihoods.empty() ? 0.0 : result.log_likelihoods.back());
  return std::move(result.ubm);
}

TotalVariability TrainTvModel(const ExperimentConfig& config, const Manifest& train,
                              const FeatureArchive& feats, const GmmUbm& ubm, int dim) {
  const std::size_t n = train.records.size();
  std::vector<BaumWelchStats> stats(n);
  ParallelFor(n, [&](std::size_t i) {
    stats[i] = AccumulateStats(ubm, feats.at(train.records[i].utt_id));
  });
  TvTrainConfig tcfg;
  tcfg.rank = dim;
  tcfg.iters = config.tv_iters;
  tcfg.seed = CombineSeed(config.seed, "tv:" + std::to_string(dim));
  TvTrainResult result = TrainTv(stats, ubm, tcfg);
  Log("tv rank ", dim, " final objective ",
      result.objectives.empty() ? 0.0 : result.objectives.back());
  return std::move(result.tv);
}

EmbeddingSet ExtractXvectors(const TdnnModel& model, const Manifest& manifest,
                             const FeatureArchive& feats) {
  const std::size_t n = manifest.records.size();
  std::vector<Eigen::VectorXd> slots(n);
  ParallelFor(n, [&](std::size_t i) {
    slots[i] = ExtractXvector(model, feats.at(manifest.records[i].utt_id));
  });
  EmbeddingSet set;
  set.dim = model.config.embedding_dim;
  for (std::size_t i = 0; i < n; ++i) set.vectors[manifest.records[i].utt_id] = std::move(slots[i]);
  return set;
}

EmbeddingSet ExtractIvectors(const GmmUbm& ubm, const TotalVariability& tv,
                             const Manifest& manifest, const FeatureArchive& feats) {
  const std::size_t n = manifest.records.size();
  std::vector<Eigen::VectorXd> slots(n);
  ParallelFor(n, [&](std::size_t i) {
    const BaumWelchStats stats = AccumulateStats(ubm, feats.at(manifest.records[i].utt_id));
    slots[i] = ExtractIvector(ubm, tv, stats);
  });
  EmbeddingSet set;
  set.dim = tv.rank;
  for (std::size_t i = 0; i < n; ++i) set.vectors[manifest.records[i].utt_id] = std::move(slots[i]);
  return set;
}

ProbeTaskSpec SpecForTask(const ExperimentConfig& config, TaskId task, const std::string& system,
                          int dim, const PronLexicon* lexicon) {
  ProbeTaskSpec spec = ProbeTaskSpec::ForTask(task);
  spec.hidden = config.probe_hidden;
  spec.epochs = config.probe_epochs;
  spec.learning_rate = config.probe_lr;
  spec.seed = CombineSeed(config.seed, system + ":" + std::to_string(dim));
  spec.aux.lexicon = lexicon;
  return spec;
}

std::vector<TaskId> TasksFor(const ExperimentConfig& config) {
  if (config.tasks.empty()) return AllTasks();
  std::vector<TaskId> ordered;
  for (TaskId t : AllTasks()) {
    for (TaskId want : config.tasks) {
      if (want == t) {
        ordered.push_back(t);
        break;
      }
    }
  }
  return ordered;
}

int CmdFeatures(const Flags& flags) {
  const ExperimentConfig config = LoadExperiment(flags);
  const Manifest all = LoadAllRecords(config);
  std::vector<std::string> systems =
      flags.system.empty() ? config.systems : std::vector<std::string>{flags.system};
  Require(flags.out.empty() || systems.size() == 1,
          "--out needs --system to pick which archive it names");
  for (const std::string& system : systems) {
    const FeatureArchive archive = ComputeFeatures(all, config.FrontendFor(system));
    const std::string path = flags.out.empty() ? FeaturePath(config, system) : flags.out;
    WriteFeatureArchive(path, archive);
    Log("wrote ", archive.size(), " feature matrices to ", path);
  }
  return 0;
}

int CmdAugment(const Flags& flags) {
  const ExperimentConfig config = LoadExperiment(flags);
  const KeyValueConfig kv = KeyValueConfig::FromFile(flags.config_path);
  AugmentPolicy policy;
  const std::string mode = kv.GetString("augment.mode", "additive");
  if (mode == "additive") {
    policy.mode = AugmentMode::kAdditive;
  } else if (mode == "speed") {
    policy.mode = AugmentMode::kSpeed;
  } else {
    Fail("augment.mode must be additive or speed, got ", mode);
  }
  policy.seed = config.seed;
  policy.sad_frontend = config.xvector_frontend;
  policy.babble_snr.lo_db = kv.GetReal("augment.babble_snr_lo", policy.babble_snr.lo_db);
  policy.babble_snr.hi_db = kv.GetReal("augment.babble_snr_hi", policy.babble_snr.hi_db);
  policy.music_snr.lo_db = kv.GetReal("augment.music_snr_lo", policy.music_snr.lo_db);
  policy.music_snr.hi_db = kv.GetReal("augment.music_snr_hi", policy.music_snr.hi_db);
  policy.noise_snr.lo_db = kv.GetReal("augment.noise_snr_lo", policy.noise_snr.lo_db);
  policy.noise_snr.hi_db = kv.GetReal("augment.noise_snr_hi", policy.noise_snr.hi_db);
  if (kv.Has("augment.speed_factors")) {
    policy.speed_factors.clear();
    for (const std::string& f : kv.GetList("augment.speed_factors")) {
      policy.speed_factors.push_back(std::stod(f));
    }
  }
  NoiseCatalog catalog;
  if (policy.mode == AugmentMode::kAdditive) {
    const std::string catalog_path = kv.GetString("augment.catalog");
    RequireArtifact(catalog_path, "augment with a valid [augment] catalog path");
    catalog = LoadNoiseCatalog(catalog_path);
  }
  const std::string out_dir = flags.out.empty() ? WorkPath(config, "augmented") : flags.out;
  std::filesystem::create_directories(out_dir);
  const Manifest train = LoadManifest(config.train_manifest);
  const Manifest augmented = AugmentManifest(train, catalog, policy, out_dir);
  const std::string manifest_path = (std::filesystem::path(out_dir) / "manifest.tsv").string();
  WriteManifest(manifest_path, augmented);
  Log("wrote ", augmented.records.size(), " records to ", manifest_path);
  return 0;
}

int CmdTrainXvector(const Flags& flags) {
  const ExperimentConfig config = LoadExperiment(flags);
  Require(flags.dim > 0, "--dim is required");
  const Manifest train = LoadManifest(config.train_manifest);
  const std::string feats_path = FeaturePath(config, "xvector");
  RequireArtifact(feats_path, "features --system xvector");
  const FeatureArchive feats = ReadFeatureArchive(feats_path);
  RequireCoverage(feats, train, feats_path);
  const TdnnModel model = TrainXvectorModel(config, train, feats, flags.dim);
  const std::string path =
      flags.out.empty() ? ModelPath(config, "xvector", flags.dim) : flags.out;
  SaveTdnn(path, model);
  Log("wrote ", path);
  return 0;
}

int CmdTrainIvector(const Flags& flags) {
  const ExperimentConfig config = LoadExperiment(flags);
  Require(flags.dim > 0, "--dim is required");
  const Manifest train = LoadManifest(config.train_manifest);
  const std::string feats_path = FeaturePath(config, "ivector");
  RequireArtifact(feats_path, "features --system ivector");
  const FeatureArchive feats = ReadFeatureArchive(feats_path);
  RequireCoverage(feats, train, feats_path);
  const GmmUbm ubm = TrainUbmModel(config, train, feats);
  const TotalVariability tv = TrainTvModel(config, train, feats, ubm, flags.dim);
  const std::string path =
      flags.out.empty() ? ModelPath(config, "ivector", flags.dim) : flags.out;
  SaveIvectorModel(path, ubm, tv);
  Log("wrote ", path);
  return 0;
}

int CmdExtract(const Flags& flags) {
  const ExperimentConfig config = LoadExperiment(flags);
  Require(!flags.system.empty(), "--system is required");
  Require(flags.dim > 0, "--dim is required");
  const Manifest all = LoadAllRecords(config);
  const std::string feats_path = FeaturePath(config, flags.system);
  RequireArtifact(feats_path, "features --system " + flags.system);
  const FeatureArchive feats = ReadFeatureArchive(feats_path);
  RequireCoverage(feats, all, feats_path);
  const std::string model_path = ModelPath(config, flags.system, flags.dim);
  RequireArtifact(model_path, "train-" + flags.system + " --dim " + std::to_string(flags.dim));
  EmbeddingSet set;
  if (flags.system == "xvector") {
    set = ExtractXvectors(LoadTdnn(model_path), all, feats);
  } else {
    GmmUbm ubm;
    TotalVariability tv;
    LoadIvectorModel(model_path, &ubm, &tv);
    set = ExtractIvectors(ubm, tv, all, feats);
  }
  const std::string out =
      flags.out.empty() ? EmbeddingPath(config, flags.system, flags.dim) : flags.out;
  WriteEmbeddingSet(out, set);
  Log("wrote ", set.vectors.size(), " embeddings to ", out);
  return 0;
}

int CmdProbe(const Flags& flags) {
  const ExperimentConfig config = LoadExperiment(flags);
  Require(!flags.system.empty(), "--system is required");
  Require(flags.dim > 0, "--dim is required");
  const Manifest probe = LoadManifest(ProbeManifestPath(config));
  const std::string emb_path = EmbeddingPath(config, flags.system, flags.dim);
  RequireArtifact(emb_path, "extract --system " + flags.system + " --dim " + std::to_string(flags.dim));
  const EmbeddingSet embeddings = ReadEmbeddingSet(emb_path);
  PronLexicon lexicon;
  if (!config.lexicon.empty()) lexicon = PronLexicon::LoadFile(config.lexicon);
  const std::vector<TaskId> tasks =
      flags.task.empty() ? TasksFor(config) : std::vector<TaskId>{TaskFromName(flags.task)};
  const std::string report_dir =
      (!flags.task.empty() && !flags.out.empty()) ? "" : (flags.out.empty() ? WorkPath(config, "reports") : flags.out);
  if (!report_dir.empty()) std::filesystem::create_directories(report_dir);
  for (TaskId task : tasks) {
    const ProbeTaskSpec spec =
        SpecForTask(config, task, flags.system, flags.dim, config.lexicon.empty() ? nullptr : &lexicon);
    const TaskReport report = RunTask(task, embeddings, probe, spec);
    std::string tsv_path;
    if (report_dir.empty()) {
      tsv_path = flags.out;
    } else {
      std::ostringstream name;
      name << flags.system << "_" << flags.dim << "_" << TaskName(task) << ".tsv";
      tsv_path = (std::filesystem::path(report_dir) / name.str()).string();
    }
    std::string json_path = tsv_path;
    if (json_path.size() >= 4 && json_path.substr(json_path.size() - 4) == ".tsv") {
      json_path.resize(json_path.size() - 4);
    }
    json_path += ".json";
    WriteTaskReportTsv(tsv_path, report);
    WriteTaskReportJson(json_path, report);
    std::printf("%s\t%s\t%.6f\n", TaskName(task).c_str(), report.headline_name.c_str(),
                report.headline);
  }
  return 0;
}

int CmdBackendTrain(const Flags& flags) {
  const ExperimentConfig config = LoadExperiment(flags);
  Require(!flags.system.empty(), "--system is required");
  Require(flags.dim > 0, "--dim is required");
  const Manifest manifest = LoadManifest(BackendManifestPath(config));
  const std::string emb_path = EmbeddingPath(config, flags.system, flags.dim);
  RequireArtifact(emb_path, "extract --system " + flags.system + " --dim " + std::to_string(flags.dim));
  const EmbeddingSet embeddings = ReadEmbeddingSet(emb_path);
  BackendTrainResult result = TrainBackend(embeddings, manifest, config.backend);
  const std::string path =
      flags.out.empty() ? BackendPath(config, flags.system, flags.dim) : flags.out;
  SaveBackend(path, result.model);
  Log("wrote ", path, " (lda dim ", result.model.lda.projection.rows(), ")");
  return 0;
}

int CmdTrials(const Flags& flags) {
  const ExperimentConfig config = LoadExperiment(flags);
  const Manifest probe = LoadManifest(ProbeManifestPath(config));
  TrialPolicy policy;
  policy.max_per_type = config.max_trials_per_type;
  policy.seed = config.seed;
  const std::vector<Trial> trials = MakeTrials(probe, policy);
  const std::string path = flags.out.empty() ? TrialPath(config) : flags.out;
  WriteTrialFile(path, trials);
  Log("wrote ", trials.size(), " trials to ", path);
  return 0;
}

int CmdScore(const Flags& flags) {
  const ExperimentConfig config = LoadExperiment(flags);
  Require(!flags.system.empty(), "--system is required");
  Require(flags.dim > 0, "--dim is required");
  const std::string trial_path = TrialPath(config);
  RequireArtifact(trial_path, "trials");
  const std::string emb_path = EmbeddingPath(config, flags.system, flags.dim);
  RequireArtifact(emb_path, "extract --system " + flags.system + " --dim " + std::to_string(flags.dim));
  const std::string backend_path = BackendPath(config, flags.system, flags.dim);
  RequireArtifact(backend_path,
                  "backend-train --system " + flags.system + " --dim " + std::to_string(flags.dim));
  const std::vector<Trial> trials = ReadTrialFile(trial_path);
  const EmbeddingSet embeddings = ReadEmbeddingSet(emb_path);
  const BackendModel backend = LoadBackend(backend_path);
  const std::vector<ScoredTrial> scored = ScoreTrials(backend, embeddings, trials);
  const std::string path = flags.out.empty() ? ScorePath(config, flags.system, flags.dim) : flags.out;
  WriteScoreFile(path, scored);
  Log("wrote ", scored.size(), " scores to ", path);
  return 0;
}

int CmdEer(const Flags& flags) {
  std::string path = flags.scores;
  if (path.empty()) {
    const ExperimentConfig config = LoadExperiment(flags);
    Require(!flags.system.empty(), "--system is required when no score file is given");
    Require(flags.dim > 0, "--dim is required when no score file is given");
    path = ScorePath(config, flags.system, flags.dim);
  }
  RequireArtifact(path, "score");
  const std::vector<ScoredTrial> scored = ReadScoreFile(path);
  const std::map<TrialType, EerResult> by_type = EerByType(scored);
  std::ostringstream table;
  for (const auto& [type, result] : by_type) {
    char line[128];
    std::snprintf(line, sizeof(line), "%s\t%.6f\t%.6f\n", TrialTypeName(type).c_str(), result.eer,
                  result.threshold);
    std::fputs(line, stdout);
    table << line;
  }
  if (!flags.out.empty()) AtomicWriteFile(flags.out, table.str());
  return 0;
}

int CmdSweep(const Flags& flags) {
  const ExperimentConfig config = LoadExperiment(flags);
  const Manifest train = LoadManifest(config.train_manifest);
  const Manifest probe = LoadManifest(ProbeManifestPath(config));
  const Manifest all = LoadAllRecords(config);
  bool aug_training = false;
  for (const UtteranceRecord& r : train.records) {
    if (r.aug_type != AugType::kClean || r.speed_factor != 1.0) aug_training = true;
  }
  PronLexicon lexicon;
  if (!config.lexicon.empty()) lexicon = PronLexicon::LoadFile(config.lexicon);
  std::vector<int> dims = config.dims;
  std::sort(dims.begin(), dims.end());
  const std::vector<TaskId> tasks = TasksFor(config);

  std::ostringstream csv;
  csv << "system,dim,aug_training,task,metric_name,value\n";
  for (const std::string& system : config.systems) {
    const FeatureArchive feats = ComputeFeatures(all, config.FrontendFor(system));
    GmmUbm ubm;
    if (system == "ivector") ubm = TrainUbmModel(config, train, feats);
    for (int dim : dims) {
      EmbeddingSet embeddings;
      if (system == "xvector") {
        const TdnnModel model = TrainXvectorModel(config, train, feats, dim);
        embeddings = ExtractXvectors(model, probe, feats);
      } else {
        const TotalVariability tv = TrainTvModel(config, train, feats, ubm, dim);
        embeddings = ExtractIvectors(ubm, tv, probe, feats);
      }
      for (TaskId task : tasks) {
        const ProbeTaskSpec spec =
            SpecForTask(config, task, system, dim, config.lexicon.empty() ? nullptr : &lexicon);
        const TaskReport report = RunTask(task, embeddings, probe, spec);
        char value[64];
        std::snprintf(value, sizeof(value), "%.17g", report.headline);
        csv << system << "," << dim << "," << (aug_training ? "true" : "false") << ","
            << TaskName(task) << "," << report.headline_name << "," << value << "\n";
        Log("sweep ", system, " dim ", dim, " ", TaskName(task), " ", report.headline_name, " ",
            report.headline);
      }
    }
  }
  const std::string path = flags.out.empty() ? WorkPath(config, "sweep.csv") : flags.out;
  AtomicWriteFile(path, csv.str());
  Log("wrote ", path);
  return 0;
}

}  // namespace

int RunCommandLine(const std::vector<std::string>& args) {
  CLI::App app{"speaker embedding analysis toolkit"};
  app.name("vectorscope");
  app.require_subcommand(1);
  Flags flags;
  std::function<int(const Flags&)> handler;

  auto add_common = [&](CLI::App* cmd, bool with_system, bool with_dim, bool with_task) {
    cmd->add_option("--config", flags.config_path, "experiment config file");
    cmd->add_option("--seed", flags.seed, "root seed override")
        ->each([&](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--out", flags.out, "output path override");
    if (with_system) {
      cmd->add_option("--system", flags.system, "embedding system")
          ->check(CLI::IsMember({"xvector", "ivector"}));
    }
    if (with_dim) cmd->add_option("--dim", flags.dim, "embedding dimension");
    if (with_task) cmd->add_option("--task", flags.task, "probing task name");
  };

  struct CommandRow {
    const char* name;
    const char* help;
    bool system, dim, task;
    int (*run)(const Flags&);
  };
  const CommandRow rows[] = {
      {"features", "compute front-end features for every configured manifest", true, false, false,
       &CmdFeatures},
      {"augment", "expand the training manifest with noisy or speed-perturbed copies", false,
       false, false, &CmdAugment},
      {"train-xvector", "train the TDNN speaker classifier", false, true, false, &CmdTrainXvector},
      {"train-ivector", "train the GMM-UBM and total-variability model", false, true, false,
       &CmdTrainIvector},
      {"extract", "extract embeddings for every configured manifest", true, true, false,
       &CmdExtract},
      {"probe", "train and evaluate probing classifiers on extracted embeddings", true, true, true,
       &CmdProbe},
      {"backend-train", "fit the LDA and PLDA verification backend", true, true, false,
       &CmdBackendTrain},
      {"trials", "generate verification trial pairs from the evaluation manifest", false, false,
       false, &CmdTrials},
      {"score", "score trial pairs with the trained backend", true, true, false, &CmdScore},
      {"eer", "compute equal error rates per trial type from a score file", true, true, false,
       &CmdEer},
      {"sweep", "run every system, dimension, and probing task; emit a CSV of headline metrics",
       false, false, false, &CmdSweep},
  };
  for (const CommandRow& row : rows) {
    CLI::App* cmd = app.add_subcommand(row.name, row.help);
    add_common(cmd, row.system, row.dim, row.task);
    if (std::string(row.name) == "eer") {
      cmd->add_option("scores", flags.scores, "score file (defaults to the configured path)");
    }
    int (*run)(const Flags&) = row.run;
    cmd->callback([&handler, run]() { handler = run; });
  }

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    Require(handler != nullptr, "no subcommand selected");
    return handler(flags);
  } catch (const std::exception& e) {
    std::cerr << "vectorscope: error: " << e.what() << std::endl;
    return 1;
  }
}

}  // namespace vectorscope
