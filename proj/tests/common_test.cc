// tests/common_test.cc

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

#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <vector>

#include "testutil.hpp"
#include "vectorscope/common.hpp"

using namespace vectorscope;

TEST_CASE("rng is deterministic per seed") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t x = a.RawU64(), y = b.RawU64(), z = c.RawU64();
    all_equal = all_equal && x == y;
    any_diff = any_diff || x != z;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform stays in the half-open unit interval") {
  Rng rng(1);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("uniform int covers the full range and nothing outside it") {
  Rng rng(7);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t v = rng.UniformInt(5);
    CHECK(v >= 0);
    CHECK(v < 5);
    seen.insert(v);
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("gaussian moments are sane") {
  Rng rng(3);
  const int n = 50000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.Gaussian();
    sum += g;
    sum2 += g * g;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.05));
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("combine seed separates tags and is stable") {
  const std::uint64_t a = CombineSeed(11, "ubm");
  const std::uint64_t b = CombineSeed(11, "tv:8");
  const std::uint64_t c = CombineSeed(12, "ubm");
  CHECK(a != b);
  CHECK(a != c);
  CHECK(a == CombineSeed(11, "ubm"));
}

TEST_CASE("parallel for touches every index exactly once") {
  const std::size_t n = 1000;
  std::vector<int> hits(n, 0);
  ParallelFor(n, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::accumulate(hits.begin(), hits.end(), 0) == static_cast<int>(n));
  CHECK(*std::min_element(hits.begin(), hits.end()) == 1);
}

TEST_CASE("parallel for rethrows worker exceptions") {
  CHECK_THROWS_AS(ParallelFor(16, [&](std::size_t i) {
                    if (i == 7) Fail("boom in worker");
                  }),
                  std::runtime_error);
}

TEST_CASE("worker count respects the environment cap") {
  ::setenv("VECTORSCOPE_THREADS", "1", 1);
  CHECK(WorkerCount() == 1);
  ::unsetenv("VECTORSCOPE_THREADS");
  CHECK(WorkerCount() >= 1);
}

TEST_CASE("atomic write replaces content completely") {
  testing::TempDir dir;
  const std::string path = dir.Path("file.txt");
  AtomicWriteFile(path, "first");
  AtomicWriteFile(path, "second");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content == "second");
}

TEST_CASE("require carries its message") {
  try {
    Require(false, "value was ", 42);
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "value was 42");
  }
}
