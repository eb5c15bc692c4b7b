// core/src/archive.cc

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

#include "vectorscope/archive.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "vectorscope/common.hpp"

namespace vectorscope {

void BinaryWriter::PutBytes(const void* data, std::size_t n) {
  buf_.append(static_cast<const char*>(data), n);
}

void BinaryWriter::PutMagic(const std::string& magic) {
  buf_.append(magic);
}

void BinaryWriter::PutU32(std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  PutBytes(b, 4);
}

void BinaryWriter::PutU64(std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  PutBytes(b, 8);
}

void BinaryWriter::PutF32(float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  PutU32(bits);
}

void BinaryWriter::PutF64(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  PutU64(bits);
}

void BinaryWriter::PutString(const std::string& s) {
  PutU32(static_cast<std::uint32_t>(s.size()));
  buf_.append(s);
}

void BinaryWriter::PutVectorF32(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) PutF32(static_cast<float>(v[i]));
}

void BinaryWriter::PutVectorF64(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) PutF64(v[i]);
}

void BinaryWriter::PutMatrixF32(const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) PutF32(static_cast<float>(m(r, c)));
}

void BinaryWriter::PutMatrixF64(const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) PutF64(m(r, c));
}

void BinaryWriter::WriteTo(const std::string& path) const {
  AtomicWriteFile(path, buf_);
}

BinaryReader::BinaryReader(std::string bytes, std::string name)
    : bytes_(std::move(bytes)), name_(std::move(name)) {}

BinaryReader BinaryReader::FromFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), "cannot open '", path, "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return BinaryReader(std::move(bytes), path);
}

const unsigned char* BinaryReader::Take(std::size_t n) {
  Require(pos_ + n <= bytes_.size(), "'", name_, "': truncated at byte ", pos_,
          " (need ", n, " more)");
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes_.data()) + pos_;
  pos_ += n;
  return p;
}

void BinaryReader::ExpectMagic(const std::string& magic) {
  const unsigned char* p = Take(magic.size());
  Require(std::memcmp(p, magic.data(), magic.size()) == 0, "'", name_,
          "': bad magic, expected \"", magic, "\"");
}

std::uint32_t BinaryReader::GetU32() {
  const unsigned char* p = Take(4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t BinaryReader::GetU64() {
  const unsigned char* p = Take(8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

float BinaryReader::GetF32() {
  const std::uint32_t bits = GetU32();
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

double BinaryReader::GetF64() {
  const std::uint64_t bits = GetU64();
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::string BinaryReader::GetString() {
  const std::uint32_t len = GetU32();
  const unsigned char* p = Take(len);
  return std::string(reinterpret_cast<const char*>(p), len);
}

Eigen::VectorXd BinaryReader::GetVectorF32(Eigen::Index dim) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = GetF32();
  return v;
}

Eigen::VectorXd BinaryReader::GetVectorF64(Eigen::Index dim) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = GetF64();
  return v;
}

Eigen::MatrixXd BinaryReader::GetMatrixF32(Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = GetF32();
  return m;
}

Eigen::MatrixXd BinaryReader::GetMatrixF64(Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = GetF64();
  return m;
}

static const char kFeatMagic[] = "VSFEAT1";
static const char kEmbMagic[] = "VSEMB1";

void WriteFeatureArchive(const std::string& path, const FeatureArchive& archive) {
  BinaryWriter w;
  w.PutMagic(kFeatMagic);
  for (const auto& [utt_id, feats] : archive) {
    w.PutString(utt_id);
    w.PutU32(static_cast<std::uint32_t>(feats.rows()));
    w.PutU32(static_cast<std::uint32_t>(feats.cols()));
    w.PutMatrixF32(feats);
  }
  w.WriteTo(path);
}

FeatureArchive ReadFeatureArchive(const std::string& path) {
  BinaryReader r = BinaryReader::FromFile(path);
  r.ExpectMagic(kFeatMagic);
  FeatureArchive archive;
  while (!r.AtEnd()) {
    std::string utt_id = r.GetString();
    const std::uint32_t rows = r.GetU32();
    const std::uint32_t cols = r.GetU32();
    Require(archive.find(utt_id) == archive.end(), "'", path, "': duplicate utt_id '",
            utt_id, "'");
    archive.emplace(std::move(utt_id), r.GetMatrixF32(rows, cols));
  }
  return archive;
}

void WriteEmbeddingSet(const std::string& path, const EmbeddingSet& set) {
  BinaryWriter w;
  w.PutMagic(kEmbMagic);
  for (const auto& [utt_id, vec] : set.vectors) {
    Require(vec.size() == set.dim, "embedding for '", utt_id, "' has dim ", vec.size(),
            ", archive dim is ", set.dim);
    w.PutString(utt_id);
    w.PutU32(static_cast<std::uint32_t>(vec.size()));
    w.PutVectorF32(vec);
  }
  w.WriteTo(path);
}

EmbeddingSet ReadEmbeddingSet(const std::string& path) {
  BinaryReader r = BinaryReader::FromFile(path);
  r.ExpectMagic(kEmbMagic);
  EmbeddingSet set;
  while (!r.AtEnd()) {
    std::string utt_id = r.GetString();
    const std::uint32_t dim = r.GetU32();
    if (set.vectors.empty()) {
      set.dim = static_cast<Eigen::Index>(dim);
    } else {
      Require(static_cast<Eigen::Index>(dim) == set.dim, "'", path, "': entry '", utt_id,
              "' has dim ", dim, ", expected ", set.dim);
    }
    Require(set.vectors.find(utt_id) == set.vectors.end(), "'", path,
            "': duplicate utt_id '", utt_id, "'");
    set.vectors.emplace(std::move(utt_id), r.GetVectorF32(dim));
  }
  return set;
}

}  // namespace vectorscope
