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

#include "prosodia/corpus/stats.h"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "json.hpp"
#include "prosodia/common/binary_io.h"
#include "prosodia/common/error.h"
#include "prosodia/dsp/mel.h"

namespace prosodia::corpus {

using nlohmann::json;

namespace {

MeanStd FitMeanStd(const std::vector<double>& values, const char* what) {
  if (values.empty()) throw Error(std::string("no values for ") + what);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= double(values.size());
  if (!(var > 0.0)) throw Error(std::string("degenerate phone target ") + what);
  return {mean, std::sqrt(var)};
}

json ToJson(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }
MeanStd MeanStdFromJson(const json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>()};
}

}  // namespace

std::pair<double, double> FitLine(std::span<const double> x,
                                  std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error("line fit needs at least two paired points");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(x.size());
  my /= double(y.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error("line fit: constant regressor");
  double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

CorpusStats FitCorpusStats(std::span<const Utterance> utterances,
                           const AnalysisConfig& config) {
  if (utterances.empty()) throw Error("corpus stats: empty corpus");
  CorpusStats stats;
  std::vector<ProsodyVector> vectors;
  std::vector<double> log_dur, log_pitch, energy, proxy, tilt, step_range, range;
  const int n_mels = utterances.front().mel.n_mels();
  Eigen::VectorXd mel_sum = Eigen::VectorXd::Zero(n_mels);
  Eigen::VectorXd mel_sq = Eigen::VectorXd::Zero(n_mels);
  double mel_count = 0.0;
  for (const auto& utt : utterances) {
    vectors.push_back(utt.utt_prosody);
    PhoneTargets t = ImputedPhoneTargets(utt);
    log_dur.insert(log_dur.end(), t.log_duration.begin(), t.log_duration.end());
    log_pitch.insert(log_pitch.end(), t.log_pitch.begin(), t.log_pitch.end());
    energy.insert(energy.end(), t.energy_db.begin(), t.energy_db.end());
    proxy.push_back(dsp::UtteranceMelTiltProxy(utt.mel, config.mel));
    tilt.push_back(utt.utt_prosody[Feature::kTilt]);
    step_range.push_back(
        StepContourRange(utt.phone_prosody.duration_frames, t.log_pitch));
    range.push_back(utt.utt_prosody[Feature::kPitchRange]);
    if (utt.mel.n_mels() != n_mels) throw Error("corpus stats: Mel size varies");
    for (int r = 0; r < utt.mel.n_frames(); ++r) {
      Eigen::VectorXd row = utt.mel.frames.row(r).transpose();
      mel_sum += row;
      mel_sq += row.cwiseProduct(row);
    }
    mel_count += utt.mel.n_frames();
  }
  stats.norm = FitNormStats(vectors);
  stats.phone_log_duration = FitMeanStd(log_dur, "log_duration");
  stats.phone_log_pitch = FitMeanStd(log_pitch, "log_pitch");
  stats.phone_energy = FitMeanStd(energy, "energy");
  auto [intercept, slope] = FitLine(proxy, tilt);
  stats.tilt_intercept = intercept;
  stats.tilt_slope = slope;
  std::tie(stats.range_intercept, stats.range_slope) = FitLine(step_range, range);
  for (int m = 0; m < n_mels; ++m) {
    double mean = mel_sum(m) / mel_count;
    double var = std::max(mel_sq(m) / mel_count - mean * mean, 0.0);
    stats.mel_mean.push_back(mean);
    stats.mel_std.push_back(std::max(std::sqrt(var), 1e-3));
  }
  return stats;
}

std::string CorpusStats::ToJson() const {
  json j;
  for (Feature f : kAllFeatures) {
    j[std::string(FeatureName(f))] = {{"median", norm[f].median},
                                      {"sigma", norm[f].sigma}};
  }
  j["phone_targets"] = {{"log_duration", corpus::ToJson(phone_log_duration)},
                        {"log_pitch", corpus::ToJson(phone_log_pitch)},
                        {"energy", corpus::ToJson(phone_energy)}};
  j["tilt_calibration"] = {{"intercept", tilt_intercept},
                           {"slope", tilt_slope}};
  j["pitch_range_calibration"] = {{"intercept", range_intercept},
                                  {"slope", range_slope}};
  j["mel"] = {{"mean", mel_mean}, {"std", mel_std}};
  return j.dump(2) + "\n";
}

CorpusStats CorpusStats::FromJson(std::string_view text) {
  try {
    json j = json::parse(text);
    CorpusStats s;
    for (Feature f : kAllFeatures) {
      const json& e = j.at(std::string(FeatureName(f)));
      s.norm[f] = {e.at("median").get<double>(), e.at("sigma").get<double>()};
      if (!(s.norm[f].sigma > 0.0)) {
        throw Error("stats: sigma must be positive for " +
                    std::string(FeatureName(f)));
      }
    }
    const json& pt = j.at("phone_targets");
    s.phone_log_duration = MeanStdFromJson(pt.at("log_duration"));
    s.phone_log_pitch = MeanStdFromJson(pt.at("log_pitch"));
    s.phone_energy = MeanStdFromJson(pt.at("energy"));
    s.tilt_intercept = j.at("tilt_calibration").at("intercept").get<double>();
    s.tilt_slope = j.at("tilt_calibration").at("slope").get<double>();
    s.range_intercept =
        j.at("pitch_range_calibration").at("intercept").get<double>();
    s.range_slope = j.at("pitch_range_calibration").at("slope").get<double>();
    s.mel_mean = j.at("mel").at("mean").get<std::vector<double>>();
    s.mel_std = j.at("mel").at("std").get<std::vector<double>>();
    if (s.mel_mean.size() != s.mel_std.size()) {
      throw Error("stats: Mel mean/std length mismatch");
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(std::string("stats: ") + e.what());
  }
}

void CorpusStats::Save(const std::filesystem::path& path) const {
  WriteFileBytes(path, ToJson());
}

CorpusStats CorpusStats::Load(const std::filesystem::path& path) {
  return FromJson(ReadFileBytes(path));
}

}  // namespace prosodia::corpus
