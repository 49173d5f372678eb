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

#ifndef PROSODIA_CORPUS_STATS_H_
#define PROSODIA_CORPUS_STATS_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prosodia/corpus/dataset.h"
#include "prosodia/corpus/prosody.h"

namespace prosodia::corpus {

struct MeanStd {
  double mean = 0.0;
  double std = 1.0;

  double Standardize(double v) const { return (v - mean) / std; }
  double Destandardize(double z) const { return mean + std * z; }
};

// Everything fitted once over a training corpus and needed again at
// synthesis time. Serialized as one JSON object whose top-level feature keys
// ("pitch", ..., "tilt") each hold {"median", "sigma"}.
struct CorpusStats {
  NormStats norm;
  MeanStd phone_log_duration;
  MeanStd phone_log_pitch;
  MeanStd phone_energy;
  // raw tilt ~= intercept + slope * UtteranceMelTiltProxy(mel)
  double tilt_intercept = 0.0;
  double tilt_slope = 1.0;
  // raw pitch range ~= intercept + slope * StepContourRange(...)
  double range_intercept = 0.0;
  double range_slope = 1.0;
  std::vector<double> mel_mean;
  std::vector<double> mel_std;

  double CalibratedTilt(double mel_proxy) const {
    return tilt_intercept + tilt_slope * mel_proxy;
  }
  // Maps a per-phone step-contour pitch range onto the frame-level scale.
  double CalibratedPitchRange(double step_range) const {
    return range_intercept + range_slope * step_range;
  }

  std::string ToJson() const;
  static CorpusStats FromJson(std::string_view json);
  void Save(const std::filesystem::path& path) const;
  static CorpusStats Load(const std::filesystem::path& path);
};

CorpusStats FitCorpusStats(std::span<const Utterance> utterances,
                           const AnalysisConfig& config = {});

// Ordinary least squares y ~ a + b x. Returns {a, b}.
std::pair<double, double> FitLine(std::span<const double> x,
                                  std::span<const double> y);

}  // namespace prosodia::corpus

#endif  // PROSODIA_CORPUS_STATS_H_
