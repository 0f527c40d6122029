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

#include "ptraj/ti_model.h"

#include <cmath>
#include <numeric>

#include "gtest/gtest.h"
#include "ptraj/nn.h"
#include "test_util.h"

namespace ptraj {
namespace {

using testing_util::LayerOffset;
using testing_util::LayerSize;

OccupiedCellIndex Cells(int n) {
  std::vector<CellId> cells;
  for (int i = 0; i < n; ++i) cells.push_back(CellId{3 * i});
  return OccupiedCellIndex(cells);
}

void ZeroLayer(TiModel& m, absl::string_view name) {
  auto& p = m.mutable_params();
  const size_t off = LayerOffset(m.layer_specs(), name);
  std::fill(p.begin() + off, p.begin() + off + LayerSize(m.layer_specs(), name),
            0.0);
}

// Sets a head to put (almost) all mass on `index` regardless of input.
void ForceHead(TiModel& m, absl::string_view name, int index) {
  ZeroLayer(m, name);
  const auto& specs = m.layer_specs();
  const size_t off = LayerOffset(specs, name);
  for (const auto& s : specs) {
    if (s.name == name) {
      m.mutable_params()[off + s.rows * s.cols + index] = 200.0;
    }
  }
}

TEST(TiModelTest, ArchitectureSizes) {
  TiModel m(Cells(848));
  EXPECT_EQ(m.input_dim(), 1720);
  EXPECT_EQ(m.hidden(), 100);
  EXPECT_EQ(m.latent(), 50);
  const auto& s = m.layer_specs();
  ASSERT_EQ(s.size(), 8u);
  EXPECT_EQ(s[0].rows, 1720);
  EXPECT_EQ(s[2].cols, 50);
  EXPECT_EQ(s[3].cols, 50);
  EXPECT_EQ(s[5].cols, 848);
  EXPECT_EQ(s[6].cols, 848);
  EXPECT_EQ(s[7].cols, 24);
  EXPECT_EQ(TiModel(Cells(2851)).input_dim(), 5726);
}

TEST(TiModelTest, EncodeInputHasThreeOnes) {
  TiModel m(Cells(10), 4, 2);
  auto x = m.EncodeInput({CellId{3}, CellId{27}, TimeSlot{23}});
  ASSERT_TRUE(x.ok());
  EXPECT_EQ(x->size(), 44);
  EXPECT_EQ(x->sum(), 3.0);
  EXPECT_EQ((*x)[1], 1.0);
  EXPECT_EQ((*x)[10 + 9], 1.0);
  EXPECT_EQ((*x)[20 + 23], 1.0);
  EXPECT_FALSE(m.EncodeInput({CellId{4}, CellId{3}, TimeSlot{1}}).ok());
}

TEST(TiModelTest, UniformHeadsZeroKlLoss) {
  TiModel m(Cells(848), 8, 4);
  m.Initialize(1);
  for (const char* name :
       {"latent_mean", "latent_log_var", "head_src", "head_dst", "head_hour"}) {
    ZeroLayer(m, name);
  }
  Rng rng(2);
  const nn::Vec noise = nn::StandardNormalVector(4, rng);
  auto loss = m.Loss({CellId{0}, CellId{30}, TimeSlot{5}},
                     noise);
  ASSERT_TRUE(loss.ok());
  EXPECT_NEAR(*loss, 2 * std::log(848.0) + std::log(24.0), 1e-9);
  EXPECT_NEAR(*loss, 16.66, 0.01);
}

TEST(TiModelTest, ExactTruthLossIsZero) {
  TiModel m(Cells(5), 4, 3);
  m.Initialize(1);
  ZeroLayer(m, "latent_mean");
  ZeroLayer(m, "latent_log_var");
  ForceHead(m, "head_src", 1);
  ForceHead(m, "head_dst", 4);
  ForceHead(m, "head_hour", 9);
  auto loss = m.Loss({CellId{3}, CellId{12}, TimeSlot{9}}, nn::Vec::Zero(3));
  ASSERT_TRUE(loss.ok());
  EXPECT_NEAR(*loss, 0.0, 1e-12);
}

TEST(TiModelTest, LossNonNegative) {
  TiModel m(Cells(7), 6, 3);
  m.Initialize(4);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const DenseTriple t{i % 7, (i * 3) % 7, i % 24};
    EXPECT_GE(*m.Loss(m.params(), t, nn::StandardNormalVector(3, rng)), 0.0);
  }
}

TEST(TiModelTest, GradientMatchesFiniteDifferences) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    EXPECT_LT(testing_util::TiGradientError(seed), 1e-4) << "seed " << seed;
  }
}

TEST(TiModelTest, ForcedHeadsSampleDeterministically) {
  TiModel m(Cells(5), 4, 3);
  m.Initialize(1);
  ForceHead(m, "head_src", 2);
  ForceHead(m, "head_dst", 0);
  ForceHead(m, "head_hour", 17);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(m.Sample(rng),
              (EndpointTriple{CellId{6}, CellId{0}, TimeSlot{17}}));
  }
}

TEST(TiModelTest, HeadsAreDistributions) {
  TiModel m(Cells(9), 6, 3);
  m.Initialize(8);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const TiHeads h = m.Decode(nn::StandardNormalVector(3, rng));
    EXPECT_NEAR(h.src.sum(), 1.0, 1e-6);
    EXPECT_NEAR(h.dst.sum(), 1.0, 1e-6);
    EXPECT_NEAR(h.hour.sum(), 1.0, 1e-6);
  }
}

// Empirical marginal of sampled sources against the Monte-Carlo mixture of
// decoder heads.
TEST(TiModelTest, SampleMarginalMatchesDecoderMixture) {
  const int n = 6;
  TiModel m(Cells(n), 8, 2);
  m.Initialize(21);
  // Larger weights so the marginal is far from uniform.
  for (double& p : m.mutable_params()) p *= 4;
  Rng rng(1);
  nn::Vec mixture = nn::Vec::Zero(n);
  const int mc = 10000;
  for (int i = 0; i < mc; ++i) {
    mixture += m.Decode(nn::StandardNormalVector(2, rng)).src;
  }
  mixture /= mc;
  nn::Vec empirical = nn::Vec::Zero(n);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    empirical[*m.cells().Find(m.Sample(rng).src)] += 1.0 / draws;
  }
  EXPECT_LT(0.5 * (mixture - empirical).cwiseAbs().sum(), 0.05);
}

TEST(TiModelTest, OneRecordPerTrajectory) {
  Dataset ds;
  ds.trajectories = {{{CellId{0}, CellId{3}, CellId{6}}, TimeSlot{1}},
                     {{CellId{6}, CellId{3}}, TimeSlot{2}}};
  TiModel m(ds.OccupiedCells(), 4, 2);
  const auto r = TiTrainingRecords(m, ds);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].src, 0);
  EXPECT_EQ(r[0].dst, 2);
  EXPECT_EQ(r[1].hour, 2);
}

TEST(TiModelTest, RepeatedTripleIsLearned) {
  Dataset ds;
  for (int i = 0; i < 20; ++i) {
    ds.trajectories.push_back(
        {{CellId{0}, CellId{1}, CellId{2}, CellId{7}}, TimeSlot{8}});
  }
  TiModel m(ds.OccupiedCells(), 16, 4);
  m.Initialize(3);
  DpSgdConfig cfg{1.0, 0.0, 20, 0.2, 200, 5, 1};
  auto report = TrainTi(m, ds, cfg, nullptr);
  ASSERT_TRUE(report.ok()) << report.status();
  EXPECT_EQ(report->clip_violations, 0);
  Rng rng(9);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    hits += m.Sample(rng) ==
            EndpointTriple{CellId{0}, CellId{7}, TimeSlot{8}};
  }
  EXPECT_GT(hits, 900);
}

TEST(TiModelTest, ZeroNoiseFullBatchTrainingIsBitIdentical) {
  Dataset ds;
  for (int i = 0; i < 12; ++i) {
    ds.trajectories.push_back(
        {{CellId{i % 4}, CellId{4 + i % 3}}, TimeSlot{i % 5}});
  }
  DpSgdConfig cfg{1.0, 0.0, 12, 0.2, 1, 5, 1};
  TiModel a(ds.OccupiedCells(), 8, 3), b(ds.OccupiedCells(), 8, 3);
  a.Initialize(1);
  b.Initialize(1);
  ASSERT_TRUE(TrainTi(a, ds, cfg, nullptr).ok());
  ASSERT_TRUE(TrainTi(b, ds, cfg, nullptr).ok());
  EXPECT_EQ(std::vector<double>(a.params().begin(), a.params().end()),
            std::vector<double>(b.params().begin(), b.params().end()));
}

TEST(TiModelTest, FileRoundTrip) {
  TiModel m(Cells(5), 4, 3);
  m.Initialize(2);
  m.metadata()["n_train"] = "5";
  auto back = TiModel::FromFile(m.ToFile());
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->cells().cells(), m.cells().cells());
  EXPECT_EQ(back->hidden(), 4);
  EXPECT_EQ(back->latent(), 3);
  EXPECT_EQ(back->metadata().at("n_train"), "5");
  EXPECT_TRUE(std::equal(m.params().begin(), m.params().end(),
                         back->params().begin()));
  ModelFile wrong = m.ToFile();
  wrong.tag = "TPG";
  EXPECT_FALSE(TiModel::FromFile(wrong).ok());
}

}  // namespace
}  // namespace ptraj
