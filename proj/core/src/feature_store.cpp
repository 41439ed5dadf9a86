// core/src/feature_store.cpp

// Copyright 2026  The vbchain Authors

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

#include "vbchain/feature_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "vbchain/error.hpp"

namespace vbchain {

static_assert(std::endian::native == std::endian::little,
              "feature store I/O assumes a little-endian host");

namespace {

void PutU32(std::ostream &os, std::uint32_t v) { os.write(reinterpret_cast<const char *>(&v), 4); }

std::uint32_t GetU32(const char *p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

}  // namespace

void FeatureStack::Validate() const {
  Require(num_layers >= 1 && frames >= 1 && dim >= 1, Errc::kInvalidArgument,
          "feature stack '" + file_id + "' needs at least one layer, frame and dim");
  Require(values.size() == num_layers * frames * dim, Errc::kInvalidArgument,
          "feature stack '" + file_id + "' value count does not match its shape");
  for (float v : values)
    Require(std::isfinite(v), Errc::kNonFinite,
            "feature stack '" + file_id + "' holds a non-finite value");
}

void WriteFeatureStack(const FeatureStack &stack, const std::filesystem::path &path) {
  stack.Validate();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  Require(os.good(), Errc::kIo, "cannot open " + path.string() + " for writing");
  os.write("VBFS", 4);
  PutU32(os, kFeatureStackVersion);
  PutU32(os, static_cast<std::uint32_t>(stack.num_layers));
  PutU32(os, static_cast<std::uint32_t>(stack.frames));
  PutU32(os, static_cast<std::uint32_t>(stack.dim));
  os.write(reinterpret_cast<const char *>(stack.values.data()),
           static_cast<std::streamsize>(stack.values.size() * sizeof(float)));
  Require(os.good(), Errc::kIo, "failed writing " + path.string());
}

FeatureStack ReadFeatureStack(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), Errc::kNotFound, "feature file not found: " + path.string());
  char header[kFeatureStackHeaderBytes];
  in.read(header, sizeof(header));
  Require(in.gcount() >= 4 && std::memcmp(header, "VBFS", 4) == 0, Errc::kBadMagic,
          "bad magic in feature file " + path.string());
  Require(in.gcount() == static_cast<std::streamsize>(sizeof(header)), Errc::kTruncated,
          "truncated header in feature file " + path.string());
  const std::uint32_t version = GetU32(header + 4);
  Require(version == kFeatureStackVersion, Errc::kVersionMismatch,
          "feature file " + path.string() + " has version " + std::to_string(version) +
              ", expected " + std::to_string(kFeatureStackVersion));
  FeatureStack s(path.stem().string(), GetU32(header + 8), GetU32(header + 12),
                 GetU32(header + 16));
  const auto bytes = static_cast<std::streamsize>(s.values.size() * sizeof(float));
  in.read(reinterpret_cast<char *>(s.values.data()), bytes);
  Require(in.gcount() == bytes, Errc::kTruncated,
          "truncated payload in feature file " + path.string());
  s.Validate();
  return s;
}

void WriteFeatureIndex(const std::filesystem::path &path,
                       const std::vector<FeatureIndexEntry> &entries) {
  std::ofstream os(path, std::ios::trunc);
  Require(os.good(), Errc::kIo, "cannot write " + path.string());
  for (const auto &e : entries) {
    nlohmann::ordered_json j;
    j["file_id"] = e.file_id;
    j["path"] = e.path;
    j["T"] = e.frames;
    j["D"] = e.dim;
    os << j.dump() << '\n';
  }
}

std::map<std::string, FeatureIndexEntry> ReadFeatureIndex(const std::filesystem::path &path) {
  std::ifstream in(path);
  Require(in.good(), Errc::kNotFound, "feature index not found: " + path.string());
  std::map<std::string, FeatureIndexEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      FeatureIndexEntry e{j.at("file_id").get<std::string>(), j.at("path").get<std::string>(),
                          j.at("T").get<std::size_t>(), j.at("D").get<std::size_t>()};
      Require(out.emplace(e.file_id, e).second, Errc::kParse,
              path.string() + ":" + std::to_string(lineno) + ": duplicate file_id " + e.file_id);
    } catch (const nlohmann::json::exception &ex) {
      Fail(Errc::kParse, path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace vbchain
