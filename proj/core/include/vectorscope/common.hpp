// core/include/vectorscope/common.hpp

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

#ifndef VECTORSCOPE_COMMON_HPP_
#define VECTORSCOPE_COMMON_HPP_

#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vectorscope {

/// Builds a message from the arguments and throws std::runtime_error.
template <typename... Args>
[[noreturn]] void Fail(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  throw std::runtime_error(os.str());
}

template <typename... Args>
void Require(bool condition, Args&&... args) {
  if (!condition) Fail(std::forward<Args>(args)...);
}

/// Diagnostic output to stderr, prefixed so pipeline logs are greppable.
void LogMessage(const char* prefix, const std::string& message);

template <typename... Args>
void Log(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  LogMessage("LOG", os.str());
}

template <typename... Args>
void Warn(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  LogMessage("WARNING", os.str());
}

/// Deterministic random source.  All randomness in the toolkit flows through
/// this class so that results are reproducible bit-for-bit from a seed,
/// independent of the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t RawU64();

  /// Uniform in [0, 1), 53-bit resolution.
  double Uniform();

  /// Uniform in [lo, hi).
  double Uniform(double lo, double hi);

  /// Uniform integer in [0, n); n must be positive.  Rejection sampling,
  /// no modulo bias.
  std::int64_t UniformInt(std::int64_t n);

  /// Standard normal via Box-Muller; caches the spare deviate.
  double Gaussian();

 private:
  std::uint64_t state_[4];  // xoshiro256++ state, never all-zero
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stable 64-bit hash (FNV-1a) used to derive per-item seeds from
/// (root seed, string id) pairs.
std::uint64_t HashString(std::string_view s);
std::uint64_t CombineSeed(std::uint64_t seed, std::string_view tag);

/// Worker count for parallel maps: hardware concurrency capped by the
/// VECTORSCOPE_THREADS environment variable (values < 1 mean 1).
int WorkerCount();

/// Runs fn(i) for i in [0, n).  Results must be written to preallocated,
/// index-addressed slots so the outcome does not depend on scheduling.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Writes content to path atomically (temp file + rename).
void AtomicWriteFile(const std::string& path, const std::string& content);

}  // namespace vectorscope

#endif  // VECTORSCOPE_COMMON_HPP_
