// tests/experiment_test.cc

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
#include <string>
#include <vector>

#include "testutil.hpp"
#include "vectorscope/experiment.hpp"

using namespace vectorscope;

TEST_CASE("sections prefix keys and comments are skipped") {
  const KeyValueConfig kv = KeyValueConfig::FromString(
      "# top comment\n"
      "[paths]\n"
      "train_manifest = /tmp/a.tsv\n"
      "\n"
      "[experiment]\n"
      "seed = 17\n"
      "desk_scale = false\n"
      "systems = xvector, ivector\n",
      "inline");
  CHECK(kv.Has("paths.train_manifest"));
  CHECK(kv.GetString("paths.train_manifest") == "/tmp/a.tsv");
  CHECK(kv.GetInt("experiment.seed", 0) == 17);
  CHECK(kv.GetBool("experiment.desk_scale", true) == false);
  const std::vector<std::string> systems = kv.GetList("experiment.systems");
  REQUIRE(systems.size() == 2);
  CHECK(systems[0] == "xvector");
  CHECK(systems[1] == "ivector");
  CHECK_FALSE(kv.Has("experiment.missing"));
}

TEST_CASE("values keep embedded equals signs and trim whitespace") {
  const KeyValueConfig kv =
      KeyValueConfig::FromString("[s]\nkey =  a = b \n", "inline");
  CHECK(kv.GetString("s.key") == "a = b");
}

TEST_CASE("duplicate keys are an error naming the location") {
  try {
    KeyValueConfig::FromString("[s]\nk = 1\nk = 2\n", "dupes");
    CHECK(false);
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find("dupes") != std::string::npos);
    CHECK(what.find("3") != std::string::npos);  // line of the second k
  }
}

TEST_CASE("malformed lines are errors") {
  CHECK_THROWS(KeyValueConfig::FromString("[s]\njust some words\n", "bad"));
  CHECK_THROWS(KeyValueConfig::FromString("[unclosed\nk = 1\n", "bad"));
  CHECK_THROWS(KeyValueConfig::FromString("[]\nk = 1\n", "bad"));  // empty section name
  // A key before any section header is legal and stays unprefixed.
  const KeyValueConfig kv = KeyValueConfig::FromString("k = 1\n", "ok");
  CHECK(kv.GetInt("k", 0) == 1);
}

TEST_CASE("typed getters reject garbage and honor fallbacks") {
  const KeyValueConfig kv = KeyValueConfig::FromString(
      "[s]\nint = 12\nreal = 2.5\nbool = true\nmessy = 12abc\n", "inline");
  CHECK(kv.GetInt("s.int", 0) == 12);
  CHECK(kv.GetReal("s.real", 0.0) == 2.5);
  CHECK(kv.GetReal("s.int", 0.0) == 12.0);
  CHECK(kv.GetBool("s.bool", false));
  CHECK(kv.GetInt("s.absent", 42) == 42);
  CHECK(kv.GetReal("s.absent", 1.5) == 1.5);
  CHECK(kv.GetBool("s.absent", true));
  CHECK_THROWS(kv.GetInt("s.messy", 0));
  CHECK_THROWS(kv.GetReal("s.messy", 0.0));
  CHECK_THROWS(kv.GetBool("s.int", false));
  CHECK_THROWS(kv.GetString("s.absent"));
}

TEST_CASE("files load like strings") {
  testing::TempDir dir;
  const std::string path = dir.Path("run.conf");
  {
    std::ofstream out(path);
    out << "[experiment]\nseed = 3\n";
  }
  const KeyValueConfig kv = KeyValueConfig::FromFile(path);
  CHECK(kv.GetInt("experiment.seed", 0) == 3);
  CHECK(kv.Name() == path);
  CHECK_THROWS(KeyValueConfig::FromFile(dir.Path("missing.conf")));
}

TEST_CASE("experiment configs map every documented key") {
  testing::TempDir dir;
  // The manifests only need to exist for validation.
  for (const char* name : {"train.tsv", "probe.tsv"}) {
    std::ofstream out(dir.Path(name));
    out << "# empty manifest\n";
  }
  const KeyValueConfig kv = KeyValueConfig::FromString(
      "[paths]\n"
      "train_manifest = " + dir.Path("train.tsv") + "\n"
      "probe_manifest = " + dir.Path("probe.tsv") + "\n"
      "work_dir = " + dir.Path("work") + "\n"
      "[experiment]\n"
      "systems = ivector\n"
      "dims = 8, 16\n"
      "tasks = gender, length\n"
      "seed = 99\n"
      "desk_scale = true\n"
      "[frontend]\n"
      "num_filters = 24\n"
      "num_ceps = 13\n"
      "apply_sad = false\n"
      "[xvector]\n"
      "epochs = 2\n"
      "chunk_min = 50\n"
      "chunk_max = 60\n"
      "learning_rate = 0.002\n"
      "[ivector]\n"
      "num_components = 8\n"
      "ubm_iters = 4\n"
      "tv_iters = 3\n"
      "[backend]\n"
      "lda_dim = 5\n"
      "plda_iters = 6\n"
      "max_trials_per_type = 1000\n"
      "[probe]\n"
      "hidden = 32\n"
      "epochs = 20\n"
      "learning_rate = 0.01\n",
      "inline");
  const ExperimentConfig config = ExperimentConfig::FromConfig(kv);
  config.Validate();

  CHECK(config.train_manifest == dir.Path("train.tsv"));
  CHECK(config.probe_manifest == dir.Path("probe.tsv"));
  CHECK(config.systems == std::vector<std::string>{"ivector"});
  CHECK(config.dims == std::vector<int>{8, 16});
  REQUIRE(config.tasks.size() == 2);
  CHECK(config.tasks[0] == TaskId::kGender);
  CHECK(config.seed == 99);
  CHECK(config.xvector_frontend.num_filters == 24);
  CHECK(config.xvector_frontend.apply_sad == false);
  CHECK(config.ivector_frontend.num_ceps == 13);
  CHECK(config.ivector_frontend.kind == FeatureKind::kMfcc);
  CHECK(config.xvector_frontend.kind == FeatureKind::kFbank);
  CHECK(config.xvector_train.epochs == 2);
  CHECK(config.xvector_train.chunk_min == 50);
  CHECK(config.xvector_train.lr == 0.002);
  CHECK(config.ubm.num_components == 8);
  CHECK(config.ubm.iters == 4);
  CHECK(config.tv_iters == 3);
  CHECK(config.backend.lda_dim == 5);
  CHECK(config.backend.plda_iters == 6);
  CHECK(config.max_trials_per_type == 1000);
  CHECK(config.probe_hidden == 32);
  CHECK(config.probe_epochs == 20);
  CHECK(config.probe_lr == 0.01);

  CHECK(&config.FrontendFor("xvector") == &config.xvector_frontend);
  CHECK(&config.FrontendFor("ivector") == &config.ivector_frontend);
  CHECK_THROWS(config.FrontendFor("dvector"));
}

TEST_CASE("validation rejects broken configurations") {
  testing::TempDir dir;
  {
    std::ofstream out(dir.Path("train.tsv"));
    out << "#\n";
  }
  ExperimentConfig config;
  config.train_manifest = dir.Path("train.tsv");

  ExperimentConfig no_dims = config;
  no_dims.dims.clear();
  CHECK_THROWS(no_dims.Validate());

  ExperimentConfig negative_dim = config;
  negative_dim.dims = {16, -1};
  CHECK_THROWS(negative_dim.Validate());

  ExperimentConfig bad_system = config;
  bad_system.systems = {"xvector", "dvector"};
  CHECK_THROWS(bad_system.Validate());

  ExperimentConfig dup_system = config;
  dup_system.systems = {"xvector", "xvector"};
  CHECK_THROWS(dup_system.Validate());

  ExperimentConfig missing_path = config;
  missing_path.train_manifest = dir.Path("nope.tsv");
  try {
    missing_path.Validate();
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("nope.tsv") != std::string::npos);
  }

  config.Validate();  // the baseline itself is fine
}

TEST_CASE("an empty config falls back to the documented defaults") {
  const KeyValueConfig kv = KeyValueConfig::FromString("", "inline");
  const ExperimentConfig config = ExperimentConfig::FromConfig(kv);
  CHECK(config.train_manifest.empty());
  CHECK(config.systems == std::vector<std::string>{"xvector", "ivector"});
  CHECK(config.dims == std::vector<int>{32, 64});
  CHECK(config.tasks.empty());  // meaning all of them
  CHECK(config.seed == 0);
  CHECK(config.desk_scale);
  CHECK(config.probe_hidden == 500);
  config.Validate();  // nothing to reject until a command needs a manifest
}
