// core/include/vectorscope/archive.hpp

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

#ifndef VECTORSCOPE_ARCHIVE_HPP_
#define VECTORSCOPE_ARCHIVE_HPP_

#include <cstdint>
#include <map>
#include <string>

#include <Eigen/Dense>

namespace vectorscope {

// Little-endian binary stream builder shared by all model and archive
// formats.  Matrices are stored row-major regardless of Eigen's layout.
class BinaryWriter {
 public:
  void PutBytes(const void* data, std::size_t n);
  void PutMagic(const std::string& magic);  // raw bytes, no length prefix
  void PutU32(std::uint32_t v);
  void PutU64(std::uint64_t v);
  void PutF32(float v);
  void PutF64(double v);
  void PutString(const std::string& s);  // u32 length + bytes
  void PutVectorF32(const Eigen::VectorXd& v);
  void PutVectorF64(const Eigen::VectorXd& v);
  void PutMatrixF32(const Eigen::MatrixXd& m);  // payload only, no dims
  void PutMatrixF64(const Eigen::MatrixXd& m);

  const std::string& Buffer() const { return buf_; }
  void WriteTo(const std::string& path) const;

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  BinaryReader(std::string bytes, std::string name);
  static BinaryReader FromFile(const std::string& path);

  void ExpectMagic(const std::string& magic);
  std::uint32_t GetU32();
  std::uint64_t GetU64();
  float GetF32();
  double GetF64();
  std::string GetString();
  Eigen::VectorXd GetVectorF32(Eigen::Index dim);
  Eigen::VectorXd GetVectorF64(Eigen::Index dim);
  Eigen::MatrixXd GetMatrixF32(Eigen::Index rows, Eigen::Index cols);
  Eigen::MatrixXd GetMatrixF64(Eigen::Index rows, Eigen::Index cols);

  bool AtEnd() const { return pos_ == bytes_.size(); }
  const std::string& Name() const { return name_; }

 private:
  const unsigned char* Take(std::size_t n);

  std::string bytes_;
  std::size_t pos_ = 0;
  std::string name_;
};

// Per-utterance feature matrices, rows = frames, cols = feature dim.
// On-disk layout: magic "VSFEAT1", then for each utterance the utt_id
// (length-prefixed), T and F as u32, and T*F row-major f32 values.
using FeatureArchive = std::map<std::string, Eigen::MatrixXd>;

void WriteFeatureArchive(const std::string& path, const FeatureArchive& archive);
FeatureArchive ReadFeatureArchive(const std::string& path);

// Fixed-dimensional embeddings keyed by utt_id.  On-disk layout: magic
// "VSEMB1", then per entry utt_id, dim as u32, dim f32 values.  All
// entries in one archive must share the same dim.
struct EmbeddingSet {
  Eigen::Index dim = 0;
  std::map<std::string, Eigen::VectorXd> vectors;
};

void WriteEmbeddingSet(const std::string& path, const EmbeddingSet& set);
EmbeddingSet ReadEmbeddingSet(const std::string& path);

}  // namespace vectorscope

#endif  // VECTORSCOPE_ARCHIVE_HPP_
