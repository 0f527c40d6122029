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

// PTRAJMDL1 model container.
//
// Layout:
//   "PTRAJMDL1"                       9 bytes
//   manifest length                   u64 little-endian
//   manifest                          UTF-8 text, one entry per line:
//       tag=<TI|TPG>
//       meta.<key>=<value>            (sorted by key)
//       layer=dense <name> <in> <out> <activation>
//       layer=embedding <name> <vocab> <dim>
//   parameter count                   u64 little-endian
//   parameters                        f64 little-endian, manifest order

#ifndef PTRAJ_MODEL_IO_H_
#define PTRAJ_MODEL_IO_H_

#include <map>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "ptraj/nn.h"

namespace ptraj {

inline constexpr absl::string_view kModelMagic = "PTRAJMDL1";

struct ModelFile {
  std::string tag;
  std::map<std::string, std::string> metadata;
  std::vector<nn::LayerSpec> layers;
  std::vector<double> params;
};

std::string SerializeModel(const ModelFile& model);
absl::StatusOr<ModelFile> ParseModel(absl::string_view bytes);

absl::Status WriteModelFile(const std::string& path, const ModelFile& model);
absl::StatusOr<ModelFile> ReadModelFile(const std::string& path);

}  // namespace ptraj

#endif  // PTRAJ_MODEL_IO_H_
