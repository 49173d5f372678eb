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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "prosodia/common/binary_io.h"
#include "prosodia/common/error.h"
#include "prosodia/corpus/alignment.h"
#include "prosodia/corpus/dataset.h"
#include "prosodia/corpus/prosody.h"
#include "prosodia/corpus/stats.h"
#include "prosodia/corpus/tokens.h"
#include "prosodia/corpus/toy.h"
#include "test_util.h"

namespace prosodia::corpus {
namespace {

// Average-rank Spearman, written independently of the eval module.
double RankCorrelation(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        less += w < v[i];
        equal += w == v[i];
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  std::vector<double> a = ranks(x), b = ranks(y);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= a.size();
  mb /= b.size();
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  return num / std::sqrt(da * db);
}

AlignedUtterance Parse(const std::string& tsv) {
  std::istringstream in(tsv);
  return ParseAlignment(in);
}

int ParseErrorLine(const std::string& tsv) {
  try {
    Parse(tsv);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

// Shared across tests: the first 40 toy utterances and their targets.
struct ToySet {
  std::vector<ToyUtterance> toys;
  std::vector<Utterance> utts;
};

const ToySet& Toys() {
  static const ToySet set = [] {
    ToySet s;
    for (int i = 0; i < 40; ++i) {
      s.toys.push_back(RenderToyUtterance(7, i));
      s.utts.push_back(Featurize(s.toys.back().id, s.toys.back().audio,
                                 s.toys.back().aligned));
    }
    return s;
  }();
  return set;
}

TEST(TokensTest, ParsesPhonesBoundariesAndPunctuation) {
  auto t = ParsePhoneString("hh ah # l ow ,  w er l d .");
  ASSERT_EQ(t.size(), 11u);
  EXPECT_EQ(t[2].kind, TokenKind::kWordBoundary);
  EXPECT_EQ(t[5].kind, TokenKind::kPunctuation);
  EXPECT_EQ(PhonePositions(t).size(), 8u);
  auto words = WordPhonePositions(t);
  ASSERT_EQ(words.size(), 2u);
  EXPECT_EQ(words[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(words[1], (std::vector<int>{3, 4, 6, 7, 8, 9}));
  EXPECT_EQ(ParsePhoneString(FormatPhoneString(t)), t);
}

TEST(TokensTest, RejectsUnknownSymbols) {
  EXPECT_THROW(ParsePhoneString("hh zz"), Error);
}

TEST(TokensTest, IdsAreStable) {
  const Vocabulary& v = Vocabulary::Default();
  for (int i = 0; i < v.size(); ++i) EXPECT_EQ(v.At(i).id, i);
  EXPECT_EQ(v.Find("#")->kind, TokenKind::kWordBoundary);
}

TEST(AlignmentTest, MillisecondsRoundToFrames) {
  AlignedUtterance u = Parse(
      "hh\t0\t54\n"
      "ah\t54\t126\n"
      "#\t126\t126\n"
      "l\t126\t131\n"
      ".\t131\t131\n");
  ASSERT_EQ(u.tokens.size(), 5u);
  EXPECT_EQ(u.tokens[2].symbol, "#");
  EXPECT_EQ(u.tokens[4].symbol, ".");
  ASSERT_EQ(u.alignment.size(), 3u);
  EXPECT_EQ(u.alignment[0], (PhoneInterval{0, 5}));
  EXPECT_EQ(u.alignment[1], (PhoneInterval{5, 13}));
  // 126..131 ms rounds to 13..13; a phone keeps at least one frame.
  EXPECT_EQ(u.alignment[2], (PhoneInterval{13, 14}));
}

TEST(AlignmentTest, ErrorsNameTheLine) {
  EXPECT_EQ(ParseErrorLine("hh\t0\t50\nah\t50\n"), 2);
  EXPECT_EQ(ParseErrorLine("hh\t0\t50\nzz\t50\t60\n"), 2);
  EXPECT_EQ(ParseErrorLine("hh\t0\t50\nah\t60\t55\n"), 2);
  EXPECT_EQ(ParseErrorLine("hh\t0\t50\n#\t50\t60\n"), 2);
  EXPECT_EQ(ParseErrorLine("hh\t0\t50\nah\t40\t90\n"), 2);
  EXPECT_EQ(ParseErrorLine("hh\t0\tx\n"), 1);
  EXPECT_EQ(ParseErrorLine("hh\t0\t0\n"), 1);
}

TEST(AlignmentTest, FormatRoundTrips) {
  AlignedUtterance u = Toys().toys[0].aligned;
  AlignedUtterance back = Parse(FormatAlignment(u));
  EXPECT_EQ(back.tokens, u.tokens);
  EXPECT_EQ(back.alignment, u.alignment);
}

TEST(NormalizationTest, EnergyEndpointsMapToUnitRange) {
  FeatureStats s{-20.3, 4.3 / 3.0};
  EXPECT_NEAR(Normalize(-24.6, s), -1.0, 1e-6);
  EXPECT_NEAR(Normalize(-20.3, s), 0.0, 1e-6);
  EXPECT_NEAR(Normalize(-15.9, s), 1.0, 1e-6);
}

TEST(NormalizationTest, RoundTripsAreIdentity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> m(-50.0, 50.0), sig(1e-3, 10.0),
      z(-1.0, 1.0), u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    FeatureStats s{m(rng), sig(rng)};
    double n = z(rng);
    double back = Normalize(Denormalize(n, s), s);
    ASSERT_LE(std::abs(back - n), 1e-9 * std::max(1.0, std::abs(n)));
    double x = s.median - 3 * s.sigma + 6 * s.sigma * u(rng);
    double x_back = Denormalize(Normalize(x, s), s);
    ASSERT_LE(std::abs(x_back - x), 1e-9 * std::max(1.0, std::abs(x)));
  }
}

TEST(NormalizationTest, ClipsOutsideRangeButUnclippedDoesNot) {
  FeatureStats s{0.0, 1.0};
  EXPECT_EQ(Normalize(10.0, s), 1.0);
  EXPECT_EQ(Normalize(-10.0, s), -1.0);
  EXPECT_NEAR(NormalizeUnclipped(6.0, s), 2.0, 1e-12);
}

TEST(NormalizationTest, FitIsOrderInvariantAndStatsAreMedianAndSpread) {
  std::vector<ProsodyVector> v;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 101; ++i) {
    ProsodyVector p;
    for (double& x : p.values) x = 5.0 + 2.0 * n(rng);
    v.push_back(p);
  }
  NormStats a = FitNormStats(v);
  std::shuffle(v.begin(), v.end(), rng);
  NormStats b = FitNormStats(v);
  for (Feature f : kAllFeatures) {
    EXPECT_EQ(a[f].median, b[f].median);
    EXPECT_EQ(a[f].sigma, b[f].sigma);
    std::vector<double> col;
    for (const auto& p : v) col.push_back(p[f]);
    std::nth_element(col.begin(), col.begin() + 50, col.end());
    EXPECT_EQ(a[f].median, col[50]);
    EXPECT_NEAR(a[f].sigma, 2.0, 0.4);
  }
}

TEST(ProsodyTest, QuantileRangeOfUniformLogContour) {
  std::vector<double> contour;
  for (int i = 0; i <= 10000; ++i) {
    contour.push_back(std::log(100.0) + (std::log(200.0) - std::log(100.0)) * i / 10000.0);
  }
  double range = Quantile(contour, 0.95) - Quantile(contour, 0.05);
  EXPECT_NEAR(range, 0.9 * std::log(2.0), 1e-6);
}

TEST(ProsodyTest, ImputationInterpolatesAndFillsEdgesWithMean) {
  std::vector<std::optional<double>> v = {std::nullopt, 1.0, std::nullopt,
                                          std::nullopt, 4.0, std::nullopt};
  std::vector<double> out = ImputeMissing(v);
  EXPECT_DOUBLE_EQ(out[0], 2.5);
  EXPECT_DOUBLE_EQ(out[1], 1.0);
  EXPECT_DOUBLE_EQ(out[2], 2.0);
  EXPECT_DOUBLE_EQ(out[3], 3.0);
  EXPECT_DOUBLE_EQ(out[4], 4.0);
  EXPECT_DOUBLE_EQ(out[5], 2.5);
  EXPECT_THROW(ImputeMissing({std::nullopt}), Error);
}

TEST(DatasetTest, PhoneDurationsSumToMelFrames) {
  for (const Utterance& u : Toys().utts) {
    int sum = 0;
    for (int d : u.phone_prosody.duration_frames) {
      EXPECT_GE(d, 1);
      sum += d;
    }
    EXPECT_EQ(sum, u.n_frames()) << u.id;
    EXPECT_EQ(u.pitch.size(), u.n_frames());
  }
}

// 220 Hz glottal pulse train through a one-pole filter at 0.95, over four
// voiced phones.
TEST(DatasetTest, ExtractionRecoversRenderedPitchAndTilt) {
  const int sr = 24000;
  std::vector<double> x(std::size_t(sr), 0.0);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 0.02);
  double phase = 0.0, y = 0.0;
  for (double& v : x) {
    phase += 220.0 / sr;
    double e = noise(rng);
    if (phase >= 1.0) {
      phase -= 1.0;
      e += 1.0;
    }
    v = y = e + 0.95 * y;
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  for (double& v : x) v *= 0.5 / peak;
  AlignedUtterance aligned;
  aligned.tokens = ParsePhoneString("ah l # ow m .");
  aligned.alignment = {{0, 20}, {20, 45}, {45, 70}, {70, 98}};
  Utterance u = Featurize("pulse", dsp::AudioClip{x, sr}, aligned);
  EXPECT_NEAR(std::exp(u.utt_prosody[Feature::kPitch]), 220.0, 0.03 * 220.0);
  EXPECT_NEAR(u.utt_prosody[Feature::kTilt], -0.95, 0.02);
}

TEST(DatasetTest, ToyExtractionIsCloseToTargets) {
  const ToySet& s = Toys();
  std::vector<double> pitch_err;
  for (std::size_t i = 0; i < s.utts.size(); ++i) {
    const ToyTargets& t = s.toys[i].targets;
    const ProsodyVector& p = s.utts[i].utt_prosody;
    pitch_err.push_back(std::abs(std::exp(p[Feature::kPitch]) / t.pitch_hz - 1.0));
    EXPECT_NEAR(p[Feature::kTilt], -t.tilt_pole, 0.02) << i;
    EXPECT_NEAR(p[Feature::kEnergy], t.energy_db, 1.0) << i;
  }
  std::sort(pitch_err.begin(), pitch_err.end());
  EXPECT_LT(pitch_err[pitch_err.size() / 2], 0.015);
  EXPECT_LT(pitch_err.back(), 0.06);
}

TEST(DatasetTest, RankCorrelationWithTargetsExceedsPointNine) {
  const ToySet& s = Toys();
  std::array<std::vector<double>, kNumFeatures> got, want;
  for (std::size_t i = 0; i < s.utts.size(); ++i) {
    const ToyTargets& t = s.toys[i].targets;
    std::array<double, kNumFeatures> w = {t.pitch_hz, t.pitch_range, t.duration_ms,
                                          t.energy_db, -t.tilt_pole};
    for (Feature f : kAllFeatures) {
      got[int(f)].push_back(s.utts[i].utt_prosody[f]);
      want[int(f)].push_back(w[int(f)]);
    }
  }
  for (Feature f : kAllFeatures) {
    EXPECT_GT(RankCorrelation(got[int(f)], want[int(f)]), 0.9) << FeatureName(f);
  }
}

TEST(DatasetTest, NormalizedVectorsStayInUnitRange) {
  std::vector<ProsodyVector> raw;
  for (const auto& u : Toys().utts) raw.push_back(u.utt_prosody);
  NormStats stats = FitNormStats(std::span<const ProsodyVector>(raw).first(10));
  for (const auto& p : raw) {
    for (double x : stats.Normalize(p).values) {
      EXPECT_GE(x, -1.0);
      EXPECT_LE(x, 1.0);
    }
  }
}

TEST(DatasetTest, FrameCacheRoundTrips) {
  const ToySet& s = Toys();
  const Utterance& u = s.utts[3];
  Matrix cache = DecodeMatrix(EncodeMatrix(EncodeFrameCache(u), kFrameCacheMagic,
                                           BinaryPrecision::kFloat64),
                              kFrameCacheMagic);
  Utterance back = DecodeFrameCache(u.id, s.toys[3].aligned, cache);
  EXPECT_EQ(back.utt_prosody, u.utt_prosody);
  EXPECT_EQ(back.mel.frames, u.mel.frames);
  EXPECT_EQ(back.phone_prosody.duration_frames, u.phone_prosody.duration_frames);
}

TEST(DatasetTest, MatrixHeaderIsSixteenBytes) {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  std::string bytes = EncodeMatrix(m, "TEST", BinaryPrecision::kFloat32);
  EXPECT_EQ(bytes.size(), 16u + 6u * 4u);
  EXPECT_EQ(bytes.substr(0, 4), "TEST");
  EXPECT_EQ(DecodeMatrix(bytes, "TEST"), m);
  EXPECT_THROW(DecodeMatrix(bytes, "NOPE"), Error);
  EXPECT_THROW(DecodeMatrix(bytes.substr(0, 20), "TEST"), Error);
}

TEST(DatasetTest, CorpusDirectoryRoundTrip) {
  testing::TempDir dir("corpus");
  GenerateToyCorpus({10, 7}, dir.path());
  std::vector<ManifestEntry> manifest = ReadManifest(dir.path() / kManifestFile);
  ASSERT_EQ(manifest.size(), 10u);
  EXPECT_EQ(ReadToyTargets(dir.path()).size(), 10u);
  std::vector<Utterance> fresh = LoadCorpus(dir.path());
  FeaturizeCorpus(dir.path());
  EXPECT_TRUE(std::filesystem::exists(dir.path() / kFeatureDir));
  std::vector<Utterance> cached = LoadCorpus(dir.path());
  ASSERT_EQ(cached.size(), fresh.size());
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    EXPECT_EQ(cached[i].id, fresh[i].id);
    EXPECT_EQ(cached[i].utt_prosody, fresh[i].utt_prosody);
    EXPECT_EQ(cached[i].tokens, Toys().toys[i].aligned.tokens);
  }
  EXPECT_EQ(LoadCorpusTokens(dir.path()).size(), 10u);
}

TEST(DatasetTest, ManifestRejectsMissingFields) {
  testing::TempDir dir("manifest");
  std::ofstream(dir.path() / "m.jsonl") << "{\"id\":\"a\",\"wav\":\"a.wav\"}\n";
  EXPECT_THROW(ReadManifest(dir.path() / "m.jsonl"), Error);
  std::ofstream(dir.path() / "n.jsonl") << "not json\n";
  EXPECT_THROW(ReadManifest(dir.path() / "n.jsonl"), Error);
}

TEST(StatsTest, JsonRoundTrip) {
  CorpusStats s = FitCorpusStats(Toys().utts);
  CorpusStats back = CorpusStats::FromJson(s.ToJson());
  for (Feature f : kAllFeatures) {
    EXPECT_EQ(back.norm[f].median, s.norm[f].median);
    EXPECT_EQ(back.norm[f].sigma, s.norm[f].sigma);
  }
  EXPECT_EQ(back.mel_mean, s.mel_mean);
  EXPECT_EQ(back.mel_std, s.mel_std);
  EXPECT_EQ(back.tilt_slope, s.tilt_slope);
  EXPECT_EQ(back.phone_log_pitch.std, s.phone_log_pitch.std);
  EXPECT_THROW(CorpusStats::FromJson("{}"), Error);
}

TEST(StatsTest, FitLineRecoversExactLine) {
  std::vector<double> x = {0, 1, 2, 3, 4}, y;
  for (double v : x) y.push_back(1.5 - 0.25 * v);
  auto [a, b] = FitLine(x, y);
  EXPECT_NEAR(a, 1.5, 1e-12);
  EXPECT_NEAR(b, -0.25, 1e-12);
}

TEST(StatsTest, CalibratedMelTiltMatchesWaveformTilt) {
  CorpusStats s = FitCorpusStats(Toys().utts);
  for (const Utterance& u : Toys().utts) {
    double t = s.CalibratedTilt(dsp::UtteranceMelTiltProxy(u.mel));
    EXPECT_NEAR(t, u.utt_prosody[Feature::kTilt], 0.03) << u.id;
  }
}

TEST(ToyTest, RenderingIsDeterministic) {
  ToyUtterance a = RenderToyUtterance(7, 12), b = RenderToyUtterance(7, 12);
  EXPECT_EQ(a.audio.samples, b.audio.samples);
  EXPECT_EQ(a.aligned.tokens, b.aligned.tokens);
  EXPECT_NE(RenderToyUtterance(8, 12).audio.samples, a.audio.samples);
}

}  // namespace
}  // namespace prosodia::corpus
