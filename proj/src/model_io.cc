// Copyright 2026 The ptraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ptraj/model_io.h"

#include <bit>
#include <cstdint>

#include "absl/status/status.h"
#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "ptraj/dataset.h"

namespace ptraj {
namespace {

void PutU64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

bool GetU64(absl::string_view& in, uint64_t& v) {
  if (in.size() < 8) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  }
  in.remove_prefix(8);
  return true;
}

absl::Status ParseLayer(absl::string_view value, nn::LayerSpec& spec) {
  std::vector<absl::string_view> f =
      absl::StrSplit(value, ' ', absl::SkipEmpty());
  if (f.size() == 5 && f[0] == "dense") {
    spec.kind = nn::LayerKind::kDense;
    auto act = nn::ParseActivation(f[4]);
    if (!act.ok()) return absl::DataLossError(act.status().message());
    spec.activation = *act;
  } else if (f.size() == 4 && f[0] == "embedding") {
    spec.kind = nn::LayerKind::kEmbedding;
  } else {
    return absl::DataLossError(absl::StrCat("bad layer entry: ", value));
  }
  spec.name = std::string(f[1]);
  if (!absl::SimpleAtoi(f[2], &spec.rows) ||
      !absl::SimpleAtoi(f[3], &spec.cols) || spec.rows <= 0 || spec.cols <= 0) {
    return absl::DataLossError(absl::StrCat("bad layer shape: ", value));
  }
  return absl::OkStatus();
}

}  // namespace

std::string SerializeModel(const ModelFile& model) {
  std::string manifest = absl::StrCat("tag=", model.tag, "\n");
  for (const auto& [k, v] : model.metadata) {
    absl::StrAppend(&manifest, "meta.", k, "=", v, "\n");
  }
  for (const nn::LayerSpec& s : model.layers) {
    if (s.kind == nn::LayerKind::kDense) {
      absl::StrAppend(&manifest, "layer=dense ", s.name, " ", s.rows, " ",
                      s.cols, " ", nn::ActivationName(s.activation), "\n");
    } else {
      absl::StrAppend(&manifest, "layer=embedding ", s.name, " ", s.rows, " ",
                      s.cols, "\n");
    }
  }
  std::string out(kModelMagic);
  PutU64(out, manifest.size());
  out += manifest;
  PutU64(out, model.params.size());
  out.reserve(out.size() + 8 * model.params.size());
  for (double p : model.params) PutU64(out, std::bit_cast<uint64_t>(p));
  return out;
}

absl::StatusOr<ModelFile> ParseModel(absl::string_view bytes) {
  if (!absl::StartsWith(bytes, kModelMagic)) {
    return absl::DataLossError("missing PTRAJMDL1 magic");
  }
  bytes.remove_prefix(kModelMagic.size());
  uint64_t manifest_len = 0;
  if (!GetU64(bytes, manifest_len) || manifest_len > bytes.size()) {
    return absl::DataLossError("truncated model manifest");
  }
  const absl::string_view manifest = bytes.substr(0, manifest_len);
  bytes.remove_prefix(manifest_len);

  ModelFile model;
  for (absl::string_view line : absl::StrSplit(manifest, '\n', absl::SkipEmpty())) {
    std::pair<absl::string_view, absl::string_view> kv =
        absl::StrSplit(line, absl::MaxSplits('=', 1));
    if (kv.first == "tag") {
      model.tag = std::string(kv.second);
    } else if (absl::StartsWith(kv.first, "meta.")) {
      model.metadata[std::string(kv.first.substr(5))] = std::string(kv.second);
    } else if (kv.first == "layer") {
      nn::LayerSpec spec;
      absl::Status st = ParseLayer(kv.second, spec);
      if (!st.ok()) return st;
      model.layers.push_back(std::move(spec));
    } else {
      return absl::DataLossError(absl::StrCat("unknown manifest entry: ", line));
    }
  }
  uint64_t count = 0;
  if (!GetU64(bytes, count) || bytes.size() != 8 * count) {
    return absl::DataLossError("parameter payload size mismatch");
  }
  size_t expected = 0;
  for (const nn::LayerSpec& s : model.layers) expected += s.param_count();
  if (expected != count) {
    return absl::DataLossError(absl::StrCat("manifest declares ", expected,
                                            " parameters, payload has ",
                                            count));
  }
  model.params.resize(count);
  for (uint64_t i = 0; i < count; ++i) {
    uint64_t raw = 0;
    GetU64(bytes, raw);
    model.params[i] = std::bit_cast<double>(raw);
  }
  return model;
}

absl::Status WriteModelFile(const std::string& path, const ModelFile& model) {
  return WriteFileAtomically(path, SerializeModel(model));
}

absl::StatusOr<ModelFile> ReadModelFile(const std::string& path) {
  absl::StatusOr<std::string> bytes = ReadFileToString(path);
  if (!bytes.ok()) return bytes.status();
  return ParseModel(*bytes);
}

}  // namespace ptraj
