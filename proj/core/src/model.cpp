// core/src/model.cpp

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

#include "vbchain/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "json.hpp"
#include "vbchain/config.hpp"
#include "vbchain/error.hpp"

namespace vbchain {

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "little-endian host required");

constexpr std::uint64_t kInitTag = 0x696e6974;  // "init"
constexpr std::size_t kPreambleBytes = 16;

ojson OrderToJson(const ChainOrder &o) {
  return ojson{{"order", o.order}, {"accumulated", o.accumulated}};
}

ChainOrder OrderFromJson(const json &j) {
  ChainOrder o;
  o.order = j.at("order").get<std::vector<std::size_t>>();
  o.accumulated = j.at("accumulated").get<std::vector<double>>();
  return o;
}

Encoder MakeEncoder(const ModelConfig &config, std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, {kInitTag, 0}));
  return Encoder(config, rng);
}

TaskGraph MakeHeads(const ModelConfig &config, std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, {kInitTag, 1}));
  return TaskGraph(config, rng);
}

}  // namespace

const Matrix &TensorArchive::Get(const std::string &name) const {
  for (const auto &[n, m] : tensors)
    if (n == name) return m;
  Fail(Errc::kNotFound, "tensor '" + name + "' missing from archive");
}

void WriteTensorArchive(const std::filesystem::path &path, std::string_view magic,
                        const TensorArchive &archive) {
  Require(magic.size() == 4, Errc::kInvalidArgument, "archive magic must be 4 bytes");
  ojson table = ojson::array();
  std::uint64_t offset = 0;
  for (const auto &[name, m] : archive.tensors) {
    Require(m.size() == m.rows * m.cols, Errc::kInvalidArgument, "malformed tensor " + name);
    table.push_back({{"name", name}, {"rows", m.rows}, {"cols", m.cols}, {"offset", offset}});
    offset += m.size();
  }
  ojson header;
  header["meta"] = ojson::parse(archive.meta_json);
  header["tensors"] = std::move(table);
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  Require(out.good(), Errc::kIo, "cannot write " + path.string());
  const std::uint32_t version = kModelArtifactVersion;
  const std::uint64_t len = text.size();
  out.write(magic.data(), 4);
  out.write(reinterpret_cast<const char *>(&version), sizeof version);
  out.write(reinterpret_cast<const char *>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto &entry : archive.tensors) {
    const Matrix &m = entry.second;
    out.write(reinterpret_cast<const char *>(m.data.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  Require(out.good(), Errc::kIo, "write failed for " + path.string());
}

TensorArchive ReadTensorArchive(const std::filesystem::path &path, std::string_view magic) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), Errc::kNotFound, "no such file: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Require(bytes.size() >= kPreambleBytes, Errc::kTruncated,
          path.string() + ": truncated header");
  Require(std::memcmp(bytes.data(), magic.data(), 4) == 0, Errc::kBadMagic,
          path.string() + ": bad magic, expected '" + std::string(magic) + "'");
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  std::memcpy(&version, bytes.data() + 4, sizeof version);
  std::memcpy(&len, bytes.data() + 8, sizeof len);
  Require(version == kModelArtifactVersion, Errc::kVersionMismatch,
          path.string() + ": unsupported version " + std::to_string(version));
  Require(len <= bytes.size() - kPreambleBytes, Errc::kTruncated,
          path.string() + ": truncated header");
  json header;
  try {
    header = json::parse(bytes.begin() + kPreambleBytes,
                         bytes.begin() + static_cast<std::ptrdiff_t>(kPreambleBytes + len));
  } catch (const json::exception &e) {
    Fail(Errc::kParse, path.string() + ": malformed header: " + e.what());
  }
  TensorArchive out;
  const char *payload = bytes.data() + kPreambleBytes + len;
  const std::size_t payload_doubles = (bytes.size() - kPreambleBytes - len) / sizeof(double);
  try {
    out.meta_json = header.at("meta").dump();
    for (const json &t : header.at("tensors")) {
      Matrix m(t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>());
      const std::uint64_t off = t.at("offset").get<std::uint64_t>();
      Require(off + m.size() <= payload_doubles, Errc::kTruncated,
              path.string() + ": payload truncated");
      std::memcpy(m.data.data(), payload + off * sizeof(double), m.size() * sizeof(double));
      out.tensors.emplace_back(t.at("name").get<std::string>(), std::move(m));
    }
  } catch (const json::exception &e) {
    Fail(Errc::kParse, path.string() + ": malformed tensor table: " + e.what());
  }
  return out;
}

Model::Model(LabelSchema schema, ModelConfig config, std::uint64_t init_seed)
    : schema_(std::move(schema)),
      config_(config),
      encoder_(MakeEncoder(config, init_seed)),
      heads_(MakeHeads(config, init_seed)) {
  schema_.Validate();
}

ModelForward Model::Run(Tape &tape, std::span<const FeatureStack *const> stacks, bool train,
                        Rng *dropout_rng, const HeadHooks *hooks,
                        std::span<const std::vector<bool>> masks) {
  Encoder::Forward e = encoder_.Run(tape, stacks, masks, train, dropout_rng);
  ModelForward out;
  out.z = e.z;
  out.attention = std::move(e.attention);
  out.heads = heads_.Forward(tape, e.z, train, dropout_rng, hooks);
  return out;
}

std::vector<TaskPredictions> ToPredictions(const HeadOutputs &o) {
  std::vector<TaskPredictions> out;
  const std::size_t b = o.two.rows();
  out.reserve(b);
  auto row = [](Var v, std::size_t i) {
    const auto r = v.value().row(i);
    return std::vector<double>(r.begin(), r.end());
  };
  for (std::size_t i = 0; i < b; ++i)
    out.emplace_back(row(o.two, i), row(o.high, i), row(o.country, i), row(o.culture, i),
                     row(o.type, i));
  return out;
}

std::vector<TaskPredictions> Model::Predict(std::span<const FeatureStack *const> stacks,
                                            const HeadHooks *hooks) {
  Tape tape;
  return ToPredictions(Run(tape, stacks, false, nullptr, hooks).heads);
}

std::vector<Parameter *> Model::EncoderParameters() { return encoder_.Parameters(); }
std::vector<Parameter *> Model::HeadParameters() { return heads_.Parameters(); }

std::vector<Parameter *> Model::Parameters() {
  std::vector<Parameter *> out = EncoderParameters();
  const std::vector<Parameter *> h = HeadParameters();
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

std::vector<std::pair<std::string, Matrix *>> Model::NamedTensors() {
  std::vector<std::pair<std::string, Matrix *>> out;
  for (Parameter *p : Parameters()) out.emplace_back(p->name, &p->value);
  for (auto &b : encoder_.Buffers()) out.push_back(b);
  return out;
}

void SaveModel(Model &model, const std::filesystem::path &path) {
  TensorArchive a;
  ojson meta;
  meta["schema"] = ojson::parse(SchemaToJson(model.schema()));
  meta["model"] = ojson::parse(ModelConfigToJson(model.config()));
  meta["high_order"] = OrderToJson(model.heads().high_order());
  meta["culture_order"] = OrderToJson(model.heads().culture_order());
  a.meta_json = meta.dump();
  for (auto &[name, m] : model.NamedTensors()) a.tensors.emplace_back(name, *m);
  WriteTensorArchive(path, "VBMA", a);
}

Model LoadModel(const std::filesystem::path &path, const LabelSchema *expected) {
  const TensorArchive a = ReadTensorArchive(path, "VBMA");
  const json meta = json::parse(a.meta_json);
  LabelSchema schema;
  ModelConfig config;
  ChainOrder high, culture;
  try {
    schema = SchemaFromJson(meta.at("schema").dump());
    config = ModelConfigFromJson(meta.at("model").dump());
    high = OrderFromJson(meta.at("high_order"));
    culture = OrderFromJson(meta.at("culture_order"));
  } catch (const json::exception &e) {
    Fail(Errc::kParse, path.string() + ": malformed model header: " + e.what());
  }
  if (expected != nullptr && !(schema == *expected))
    Fail(Errc::kSchemaMismatch,
         path.string() + ": artifact label schema differs from the data's schema");
  Model model(schema, config, 0);
  model.heads().set_orders(std::move(high), std::move(culture));
  std::map<std::string, const Matrix *> by_name;
  for (const auto &[n, m] : a.tensors) by_name[n] = &m;
  for (auto &[name, m] : model.NamedTensors()) {
    auto it = by_name.find(name);
    Require(it != by_name.end(), Errc::kNotFound,
            path.string() + ": tensor '" + name + "' missing");
    Require(it->second->SameShape(*m), Errc::kSchemaMismatch,
            path.string() + ": tensor '" + name + "' has the wrong shape");
    *m = *it->second;
  }
  Require(by_name.size() == model.NamedTensors().size(), Errc::kSchemaMismatch,
          path.string() + ": artifact holds unexpected tensors");
  return model;
}

}  // namespace vbchain
