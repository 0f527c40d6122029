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

#include <cstring>
#include <filesystem>

#include "gtest/gtest.h"

namespace ptraj {
namespace {

ModelFile Sample() {
  ModelFile m;
  m.tag = "TPG";
  m.metadata = {{"grid_rows", "10"}, {"radius", "5"}};
  m.layers = {
      {nn::LayerKind::kEmbedding, "emb", 3, 2, nn::Activation::kLinear},
      {nn::LayerKind::kDense, "out", 2, 2, nn::Activation::kSoftmax}};
  m.params = {0.1, -0.2, 1e-300, 3.0, -0.0, 5.5, 1, 2, 3, 4, 5, 6};
  return m;
}

TEST(ModelIoTest, RoundTripIsBitExact) {
  const ModelFile m = Sample();
  const std::string bytes = SerializeModel(m);
  EXPECT_EQ(bytes.substr(0, 9), "PTRAJMDL1");
  auto back = ParseModel(bytes);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->tag, m.tag);
  EXPECT_EQ(back->metadata, m.metadata);
  EXPECT_EQ(back->layers, m.layers);
  ASSERT_EQ(back->params.size(), m.params.size());
  EXPECT_EQ(std::memcmp(back->params.data(), m.params.data(),
                        m.params.size() * sizeof(double)),
            0);
  EXPECT_EQ(SerializeModel(*back), bytes);
}

TEST(ModelIoTest, RejectsCorruption) {
  const std::string bytes = SerializeModel(Sample());
  EXPECT_FALSE(ParseModel("PTRAJMDL2" + bytes.substr(9)).ok());
  EXPECT_FALSE(ParseModel(bytes.substr(0, bytes.size() - 3)).ok());
  EXPECT_FALSE(ParseModel(bytes + "x").ok());
  EXPECT_FALSE(ParseModel("").ok());
}

TEST(ModelIoTest, ParameterCountMustMatchManifest) {
  ModelFile m = Sample();
  m.params.pop_back();
  EXPECT_FALSE(ParseModel(SerializeModel(m)).ok());
}

TEST(ModelIoTest, FileRoundTrip) {
  const std::string path =
      (std::filesystem::path(::testing::TempDir()) / "m.model").string();
  ASSERT_TRUE(WriteModelFile(path, Sample()).ok());
  auto back = ReadModelFile(path);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->params, Sample().params);
}

}  // namespace
}  // namespace ptraj
