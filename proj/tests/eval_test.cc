// Copyright (c) 2026 The Prosodia Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <set>

#include "gtest/gtest.h"
#include "prosodia/common/binary_io.h"
#include "prosodia/common/error.h"
#include "prosodia/eval/sweep.h"
#include "test_util.h"

namespace prosodia::eval {
namespace {

using corpus::Feature;
using testing::Tiny;

TEST(SpearmanTest, PerfectAndReversedOrder) {
  std::vector<double> x = {1, 2, 3, 4, 5}, y = {10, 20, 25, 40, 100};
  EXPECT_DOUBLE_EQ(SpearmanRho(x, y), 1.0);
  std::vector<double> r(y.rbegin(), y.rend());
  EXPECT_DOUBLE_EQ(SpearmanRho(x, r), -1.0);
}

TEST(SpearmanTest, TiesUseAverageRanks) {
  // Ranks of y with ties averaged: {1, 2, 3.5, 5, 3.5}. Against {1..5}:
  // sum of centred products 8, sums of squares 10 and 9.5.
  std::vector<double> x = {1, 2, 3, 4, 5}, y = {5, 6, 7, 8, 7};
  EXPECT_NEAR(SpearmanRho(x, y), 8.0 / std::sqrt(10.0 * 9.5), 1e-12);
}

TEST(SpearmanTest, RejectsDegenerateInput) {
  std::vector<double> x = {1, 2, 3}, c = {4, 4, 4}, short_y = {1, 2};
  EXPECT_THROW(SpearmanRho(x, c), Error);
  EXPECT_THROW(SpearmanRho(x, short_y), Error);
}

TEST(GridTest, RangeSyntax) {
  std::vector<double> g = ParseGrid("-1:1:9");
  ASSERT_EQ(g.size(), 9u);
  EXPECT_EQ(g.front(), -1.0);
  EXPECT_EQ(g[4], 0.0);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_DOUBLE_EQ(g[1], -0.75);
  std::vector<double> wide = ParseGrid("-3:3:13");
  ASSERT_EQ(wide.size(), 13u);
  EXPECT_EQ(wide[6], 0.0);
  EXPECT_EQ(ParseGrid("0.5:0.5:1"), std::vector<double>{0.5});
}

TEST(GridTest, ListSyntaxAndErrors) {
  EXPECT_EQ(ParseGrid("-1,0,2.5"), (std::vector<double>{-1, 0, 2.5}));
  EXPECT_THROW(ParseGrid("1,1"), Error);
  EXPECT_THROW(ParseGrid("1,0"), Error);
  EXPECT_THROW(ParseGrid("1:0:3"), Error);
  EXPECT_THROW(ParseGrid("0:1:2.5"), Error);
  EXPECT_THROW(ParseGrid("0:1:0"), Error);
  EXPECT_THROW(ParseGrid("a,b"), Error);
  EXPECT_THROW(ParseGrid(""), Error);
}

SweepSpec Spec(int dims, const std::string& grid, int sentences) {
  SweepSpec s;
  s.dimensions.assign(corpus::kAllFeatures.begin(), corpus::kAllFeatures.begin() + dims);
  s.grid = ParseGrid(grid);
  s.sentences.assign(std::size_t(sentences), Tiny().sentences[0]);
  return s;
}

TEST(SweepTest, SynthesisCountSharesZeroBias) {
  EXPECT_EQ(SynthesisCount(Spec(5, "-1:1:9", 20)), 5 * 9 * 20 - 4 * 20);
  EXPECT_EQ(SynthesisCount(Spec(5, "-1:1:9", 20)), 820);
  EXPECT_EQ(SynthesisCount(Spec(1, "-1:1:9", 20)), 180);
  EXPECT_EQ(SynthesisCount(Spec(5, "-1:1:8", 20)), 800);
  EXPECT_EQ(SynthesisCount(Spec(1, "-3:3:13", 20)), 260);
}

TEST(SweepTest, SpecValidation) {
  SweepSpec s = Spec(2, "-1:1:3", 1);
  s.dimensions.push_back(Feature::kPitch);
  EXPECT_THROW(s.Validate(), Error);
  s = Spec(2, "-1:1:3", 1);
  s.sentences.clear();
  EXPECT_THROW(s.Validate(), Error);
  s = Spec(2, "-1:1:3", 1);
  s.grid = {0.0, -1.0};
  EXPECT_THROW(s.Validate(), Error);
}

struct SmallSweep {
  SweepSpec spec;
  SweepReport report;
};

const SmallSweep& Small() {
  static const SmallSweep sweep = [] {
    SmallSweep s;
    s.spec.grid = ParseGrid("-1:1:9");
    s.spec.sentences.assign(Tiny().sentences.begin(), Tiny().sentences.begin() + 2);
    s.report = RunSweep(*Tiny().synth, s.spec);
    return s;
  }();
  return sweep;
}

TEST(SweepTest, ReportLayout) {
  const SweepReport& r = Small().report;
  EXPECT_EQ(r.syntheses, SynthesisCount(Small().spec));
  ASSERT_EQ(r.points.size(), 45u);
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    EXPECT_EQ(r.points[i].dimension, corpus::kAllFeatures[i / 9]);
    EXPECT_EQ(r.points[i].bias, Small().spec.grid[i % 9]);
    EXPECT_EQ(r.points[i].n, 2);
    EXPECT_EQ(r.points[i].values.size(), 2u);
  }
  EXPECT_EQ(r.spearman.size(), 5u);
  EXPECT_EQ(r.endpoints.size(), 5u);
}

TEST(SweepTest, ZeroBiasPointsComeFromThePlainSynthesis) {
  const SmallSweep& s = Small();
  std::vector<corpus::ProsodyVector> plain;
  for (const auto& tokens : s.spec.sentences) {
    control::SynthesisRequest req;
    req.tokens = tokens;
    plain.push_back(control::RealizedProsody(Tiny().synth->Synthesize(req), *Tiny().stats));
  }
  int checked = 0;
  for (const SweepPoint& p : s.report.points) {
    if (p.bias != 0.0) continue;
    for (std::size_t i = 0; i < plain.size(); ++i) {
      EXPECT_EQ(p.values[i], plain[i][p.dimension]);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 5);
}

TEST(SweepTest, PointStatisticsMatchValues) {
  for (const SweepPoint& p : Small().report.points) {
    double mean = (p.values[0] + p.values[1]) / 2.0;
    EXPECT_NEAR(p.mean, mean, 1e-12);
    EXPECT_NEAR(p.std, std::abs(p.values[0] - p.values[1]) / 2.0, 1e-12);
  }
}

TEST(SweepTest, SpearmanPoolsAllPoints) {
  const SweepReport& r = Small().report;
  for (const auto& [dim, rho] : r.spearman) {
    std::vector<double> x, y;
    for (const SweepPoint& p : r.points) {
      if (p.dimension != dim) continue;
      for (double v : p.values) {
        x.push_back(p.bias);
        y.push_back(v);
      }
    }
    EXPECT_DOUBLE_EQ(rho, SpearmanRho(x, y));
  }
}

TEST(SweepTest, EndpointsAreDenormalizedRealizedMeans) {
  const SweepReport& r = Small().report;
  const auto& norm = Tiny().stats->norm;
  for (const Endpoints& e : r.endpoints) {
    int k = 0;
    for (const SweepPoint& p : r.points) {
      if (p.dimension != e.dimension) continue;
      if (p.bias == -1.0 || p.bias == 0.0 || p.bias == 1.0) {
        EXPECT_NEAR(e.values[std::size_t(k++)], corpus::Denormalize(p.mean, norm[e.dimension]),
                    1e-12);
      }
    }
    EXPECT_EQ(k, 3);
  }
  SweepSpec no_center = Small().spec;
  no_center.grid = {-1.0, 1.0};
  no_center.dimensions = {Feature::kDuration};
  no_center.sentences.resize(1);
  EXPECT_TRUE(RunSweep(*Tiny().synth, no_center).endpoints.empty());
}

TEST(SweepTest, OutputsAreDeterministicAndComplete) {
  testing::TempDir a("sweep_a"), b("sweep_b");
  EmitReport(Small().report, a.path());
  SweepReport again = RunSweep(*Tiny().synth, Small().spec);
  EmitReport(again, b.path());
  std::string csv = ReadFileBytes(a.path() / "sweep.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "dimension,bias,mean,std,n");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 46);
  std::string ends = ReadFileBytes(a.path() / "endpoints.csv");
  EXPECT_EQ(ends.substr(0, ends.find('\n')), "dimension,value_minus1,value_0,value_plus1");
  EXPECT_EQ(std::count(ends.begin(), ends.end(), '\n'), 6);
  for (const char* name : {"sweep.csv", "endpoints.csv", "sweep_pitch.svg",
                           "sweep_pitch_range.svg", "sweep_duration.svg",
                           "sweep_energy.svg", "sweep_tilt.svg"}) {
    ASSERT_TRUE(std::filesystem::exists(a.path() / name)) << name;
    EXPECT_EQ(ReadFileBytes(a.path() / name), ReadFileBytes(b.path() / name)) << name;
  }
  std::string svg = ReadFileBytes(a.path() / "sweep_tilt.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

}  // namespace
}  // namespace prosodia::eval
