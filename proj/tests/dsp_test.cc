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
#include <complex>
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "prosodia/common/error.h"
#include "prosodia/corpus/toy.h"
#include "prosodia/dsp/audio.h"
#include "prosodia/dsp/features.h"
#include "prosodia/dsp/fft.h"
#include "prosodia/dsp/framing.h"
#include "prosodia/dsp/mel.h"
#include "prosodia/dsp/pitch.h"
#include "test_util.h"

namespace prosodia::dsp {
namespace {

using testing::Ar1;
using testing::Sine;
using testing::WhiteNoise;

double MeanOf(const std::vector<std::optional<double>>& v) {
  double sum = 0.0;
  int n = 0;
  for (const auto& x : v) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  return n ? sum / n : std::nan("");
}

std::vector<bool> AllTrue(int n) { return std::vector<bool>(std::size_t(n), true); }

// Frequency of the largest magnitude bin over the whole clip.
double DominantHz(const AudioClip& clip) {
  int n = 1;
  while (n * 2 <= int(clip.size())) n *= 2;
  RealFft fft(n);
  std::vector<std::complex<double>> spec;
  std::vector<double> in(clip.samples.begin(), clip.samples.begin() + n);
  std::vector<double> w = HannWindow(n);
  for (int i = 0; i < n; ++i) in[i] *= w[i];
  fft.Forward(in, &spec);
  int best = 1;
  for (int k = 1; k < int(spec.size()); ++k) {
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  }
  return double(best) * clip.sample_rate / n;
}

TEST(FramingTest, OneSecondGivesNinetyEightFrames) {
  FrameGrid g = MakeFrameGrid(24000, 24000);
  EXPECT_EQ(g.frame_length, 600);
  EXPECT_EQ(g.frame_shift, 240);
  EXPECT_EQ(g.n_frames, 98);
}

TEST(FramingTest, FrameCountFormulaHoldsForRandomShapes) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    int sr = 8000 + int(rng() % 40000);
    double shift_ms = 1.0 + double(rng() % 20);
    double length_ms = shift_ms + double(rng() % 40);
    FrameGridParams p{length_ms, shift_ms};
    int L = int(std::lround(length_ms * sr / 1000));
    int S = int(std::lround(shift_ms * sr / 1000));
    std::size_t n = std::size_t(L) + rng() % 50000;
    FrameGrid g = MakeFrameGrid(n, sr, p);
    ASSERT_EQ(g.n_frames, int((n - L) / S) + 1);
    ASSERT_LE(SamplesForFrames(g.n_frames, L, S), n);
    ASSERT_GT(SamplesForFrames(g.n_frames + 1, L, S), n);
  }
}

TEST(FramingTest, RejectsShortClips) {
  EXPECT_THROW(MakeFrameGrid(599, 24000), Error);
  EXPECT_NO_THROW(MakeFrameGrid(600, 24000));
}

TEST(PitchTest, SineAt220IsTrackedWithinOnePercent) {
  PitchTrack t = TrackPitch(FrameSignal(Sine(220.0, 1.0)));
  ASSERT_EQ(t.size(), 98);
  for (int i = 2; i < t.size() - 2; ++i) {
    ASSERT_TRUE(t.voiced[i]) << "frame " << i;
    EXPECT_NEAR(t.f0[i], 220.0, 2.2) << "frame " << i;
  }
}

TEST(PitchTest, EachEstimatorFindsTheSine) {
  Frames frames = FrameSignal(Sine(150.0, 0.5));
  PitchBand band;
  for (const CandidateTrack& c :
       {EstimatePitchAcf(frames, band), EstimatePitchCmnd(frames, band),
        EstimatePitchCepstral(frames, band)}) {
    ASSERT_EQ(int(c.size()), frames.size());
    EXPECT_NEAR(c[10].hz, 150.0, 3.0);
  }
}

TEST(PitchTest, WhiteNoiseIsMostlyUnvoiced) {
  PitchTrack t = TrackPitch(FrameSignal(WhiteNoise(1.0, 3)));
  EXPECT_LT(t.voiced_count(), t.size() / 2);
}

TEST(PitchTest, VoteCorrectsSingleOctaveError) {
  // 440 is halved against the mean of the other two; the median of
  // {220, 219, 220} is 220.
  PitchCandidate v = VoteFrame({PitchCandidate{220.0, 0.9},
                                PitchCandidate{219.0, 0.9},
                                PitchCandidate{440.0, 0.9}});
  EXPECT_DOUBLE_EQ(v.hz, 220.0);
}

TEST(PitchTest, VoteIsPermutationInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> hz(60.0, 520.0), conf(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::array<PitchCandidate, 3> c;
    for (auto& x : c) {
      x = rng() % 5 == 0 ? PitchCandidate{} : PitchCandidate{hz(rng), conf(rng)};
    }
    if (trial % 7 == 0) c[1].hz = 2.0 * c[0].hz;
    PitchCandidate ref = VoteFrame(c);
    std::array<int, 3> order = {0, 1, 2};
    while (std::next_permutation(order.begin(), order.end())) {
      PitchCandidate p = VoteFrame({c[order[0]], c[order[1]], c[order[2]]});
      ASSERT_DOUBLE_EQ(p.hz, ref.hz);
    }
  }
}

TEST(PitchTest, VoicedFlagMatchesPositiveF0) {
  AudioClip clip = Sine(180.0, 0.5);
  AudioClip noise = WhiteNoise(0.5, 9);
  clip.samples.insert(clip.samples.end(), noise.samples.begin(), noise.samples.end());
  PitchTrack t = TrackPitch(FrameSignal(clip));
  for (int i = 0; i < t.size(); ++i) {
    ASSERT_EQ(t.voiced[i], t.f0[i] > 0.0);
  }
}

TEST(EnergyTest, ConstantAmplitudeIsMinusTwentyDb) {
  std::vector<double> frame(600, 0.1);
  EXPECT_NEAR(*FrameLevelDb(frame), -20.0, 1e-12);
  std::vector<double> alternating(600);
  for (int i = 0; i < 600; ++i) alternating[i] = i % 2 ? 0.1 : -0.1;
  EXPECT_NEAR(*FrameLevelDb(alternating), -20.0, 1e-12);
}

TEST(EnergyTest, ScalingByTenAddsTwentyDb) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(600), b(600);
    for (int i = 0; i < 600; ++i) b[i] = 10.0 * (a[i] = u(rng));
    EXPECT_NEAR(*FrameLevelDb(b) - *FrameLevelDb(a), 20.0, 1e-9);
  }
}

TEST(EnergyTest, ZeroFrameHasNoLevel) {
  EXPECT_FALSE(FrameLevelDb(std::vector<double>(600, 0.0)).has_value());
}

TEST(EnergyTest, QuietFramesAreSilent) {
  AudioClip clip = Sine(200.0, 0.5, 0.5);
  AudioClip quiet = Sine(200.0, 0.5, 0.001);
  clip.samples.insert(clip.samples.end(), quiet.samples.begin(), quiet.samples.end());
  Frames frames = FrameSignal(clip);
  std::vector<bool> silent = DetectSilence(frames);
  EXPECT_FALSE(silent[5]);
  EXPECT_TRUE(silent[frames.size() - 5]);
  auto energy = FrameEnergy(frames, silent);
  EXPECT_TRUE(energy[5].has_value());
  EXPECT_FALSE(energy[frames.size() - 5].has_value());
}

TEST(TiltTest, Ar1PoleIsRecovered) {
  Frames frames = FrameSignal(Ar1(0.95, 2.0, 4));
  EXPECT_NEAR(MeanOf(SpectralTilt(frames, AllTrue(frames.size()))), -0.95, 0.01);
}

TEST(TiltTest, WhiteNoiseIsFlat) {
  Frames frames = FrameSignal(WhiteNoise(2.0, 8));
  EXPECT_NEAR(MeanOf(SpectralTilt(frames, AllTrue(frames.size()))), 0.0, 0.05);
}

TEST(TiltTest, SlowSinusoidApproachesMinusOne) {
  Frames frames = FrameSignal(Sine(20.0, 1.0));
  EXPECT_LT(MeanOf(SpectralTilt(frames, AllTrue(frames.size()))), -0.99);
}

TEST(TiltTest, ScaleInvariant) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0), c(1e-3, 1e3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(600), b(600);
    double k = c(rng);
    for (int i = 0; i < 600; ++i) b[i] = k * (a[i] = u(rng));
    EXPECT_NEAR(*FrameTilt(a), *FrameTilt(b), 1e-12);
  }
}

TEST(TiltTest, OnlyVoicedFramesCarryTilt) {
  Frames frames = FrameSignal(Sine(200.0, 0.2));
  std::vector<bool> voiced(std::size_t(frames.size()), false);
  voiced[3] = true;
  auto tilt = SpectralTilt(frames, voiced);
  for (int i = 0; i < frames.size(); ++i) EXPECT_EQ(tilt[i].has_value(), i == 3);
}

TEST(MelTest, OneSecondShape) {
  MelSpectrogram mel = ComputeMel(Sine(300.0, 1.0));
  EXPECT_EQ(mel.n_frames(), 98);
  EXPECT_EQ(mel.n_mels(), 80);
}

TEST(MelTest, StationarySineHasConstantPeakBin) {
  MelSpectrogram mel = ComputeMel(Sine(1000.0, 1.0));
  Eigen::Index first;
  mel.frames.row(0).maxCoeff(&first);
  for (int t = 1; t < mel.n_frames(); ++t) {
    Eigen::Index k;
    mel.frames.row(t).maxCoeff(&k);
    ASSERT_EQ(k, first) << "frame " << t;
  }
}

TEST(MelTest, FiniteForSilenceAndExtremes) {
  AudioClip clip;
  clip.samples.assign(24000, 0.0);
  for (int i = 0; i < 100; ++i) clip.samples[std::size_t(i) * 97] = i % 2 ? 1e6 : -1e-300;
  EXPECT_TRUE(ComputeMel(clip).frames.allFinite());
}

TEST(MelTest, FilterbankRowsArePartitionsOfBand) {
  Matrix fb = MelFilterbank(MelConfig{}, 24000);
  EXPECT_EQ(fb.rows(), 80);
  EXPECT_EQ(fb.cols(), 513);
  EXPECT_GE(fb.minCoeff(), 0.0);
  for (int m = 0; m < fb.rows(); ++m) EXPECT_GT(fb.row(m).sum(), 0.0);
}

TEST(GriffinLimTest, ReconstructsSineFrequency) {
  MelSpectrogram mel = ComputeMel(Sine(440.0, 1.0));
  GriffinLimOptions opts;
  opts.n_iters = 32;
  AudioClip out = GriffinLim(mel, {}, opts);
  EXPECT_NEAR(DominantHz(out), 440.0, 22.0);
}

TEST(GriffinLimTest, MelErrorShrinksOverIterations) {
  MelSpectrogram target = ComputeMel(corpus::RenderToyUtterance(7, 3).audio);
  std::vector<double> errors;
  GriffinLimOptions opts;
  opts.n_iters = 16;
  opts.on_iteration = [&](int, const AudioClip& estimate) {
    MelSpectrogram m = ComputeMel(estimate);
    errors.push_back((m.frames - target.frames).cwiseAbs().mean());
  };
  GriffinLim(target, {}, opts);
  ASSERT_EQ(errors.size(), 16u);
  for (std::size_t i = 1; i < errors.size(); ++i) {
    EXPECT_LE(errors[i], errors[i - 1] * (1.0 + 1e-9)) << "iteration " << i;
  }
  EXPECT_LT(errors.back(), errors.front());
}

TEST(WavTest, RoundTripIsSixteenBitExact) {
  AudioClip clip = Sine(330.0, 0.1);
  AudioClip back = DecodeWav(EncodeWav(clip));
  ASSERT_EQ(back.size(), clip.size());
  EXPECT_EQ(back.sample_rate, 24000);
  for (std::size_t i = 0; i < clip.size(); ++i) {
    ASSERT_NEAR(back.samples[i], clip.samples[i], 1.0 / 32767.0);
  }
}

TEST(WavTest, RejectsGarbage) {
  EXPECT_THROW(DecodeWav("RIFF1234WAVEjunk"), Error);
}

}  // namespace
}  // namespace prosodia::dsp
