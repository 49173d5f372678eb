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

#include "prosodia/corpus/toy.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "json.hpp"
#include "prosodia/common/binary_io.h"
#include "prosodia/common/error.h"
#include "prosodia/corpus/dataset.h"
#include "prosodia/corpus/prosody.h"

namespace prosodia::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSampleRate = dsp::kDefaultSampleRate;
constexpr int kShift = 240;
constexpr int kLength = 600;
constexpr double kShiftMs = 10.0;
constexpr double kPeakLimit = 0.95;

const std::set<std::string> kUnvoiced = {"f", "s", "sh", "th", "hh"};

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1), a fixed function of (symbol id, trait).
double SymbolTrait(int id, int trait) {
  std::uint64_t h = SplitMix64(std::uint64_t(id) * 31 + std::uint64_t(trait));
  return double(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

double DurationTrait(int id) { return 0.35 * SymbolTrait(id, 1); }
double AccentTrait(int id) { return 0.5 * SymbolTrait(id, 2); }
double LevelTrait(int id) { return 2.5 * SymbolTrait(id, 3); }

double LogUniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(
      std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
}

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::vector<PhoneToken> SampleTokens(std::mt19937_64& rng) {
  const Vocabulary& vocab = Vocabulary::Default();
  const std::vector<PhoneToken> phones = vocab.phones();
  std::uniform_int_distribution<int> pick(0, int(phones.size()) - 1);
  for (;;) {
    std::vector<PhoneToken> out;
    int n_words = std::uniform_int_distribution<int>(2, 4)(rng);
    int voiced = 0;
    for (int w = 0; w < n_words; ++w) {
      if (w > 0) {
        if (Uniform(rng, 0.0, 1.0) < 0.2) out.push_back(*vocab.Find(","));
        out.push_back(*vocab.Find(kWordBoundarySymbol));
      }
      int n_phones = std::uniform_int_distribution<int>(2, 5)(rng);
      for (int p = 0; p < n_phones; ++p) {
        out.push_back(phones[std::size_t(pick(rng))]);
        if (!kUnvoiced.count(out.back().symbol)) ++voiced;
      }
    }
    out.push_back(*vocab.Find("."));
    if (voiced >= 2) return out;
  }
}

// Linear interpolation through (x[i], y[i]), held constant outside.
double Interp(const std::vector<double>& x, const std::vector<double>& y,
              double at) {
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  auto it = std::upper_bound(x.begin(), x.end(), at);
  std::size_t i = std::size_t(it - x.begin());
  double w = (at - x[i - 1]) / (x[i] - x[i - 1]);
  return y[i - 1] + w * (y[i] - y[i - 1]);
}

}  // namespace

ToyUtterance RenderToyUtterance(std::uint64_t seed, int index) {
  std::mt19937_64 rng(SplitMix64(seed ^ SplitMix64(std::uint64_t(index))));
  std::normal_distribution<double> gauss(0.0, 1.0);

  ToyUtterance utt;
  char id[32];
  std::snprintf(id, sizeof(id), "utt_%04d", index);
  utt.id = id;

  const double pitch_hz = LogUniform(rng, 120.0, 300.0);
  const double range = Uniform(rng, 0.15, 0.8);
  const double mean_ms = LogUniform(rng, 55.0, 150.0);
  double energy_db = Uniform(rng, -35.0, -10.0);
  const double pole = Uniform(rng, 0.85, 0.99);

  utt.aligned.tokens = SampleTokens(rng);
  std::vector<int> phone_ids;
  for (const auto& tok : utt.aligned.tokens) {
    if (tok.is_phone()) phone_ids.push_back(tok.id);
  }
  const int n_phones = int(phone_ids.size());

  // Durations on the frame grid.
  int cursor = 0;
  double log_ms_sum = 0.0;
  for (int id_k : phone_ids) {
    double ms = mean_ms * std::exp(DurationTrait(id_k) + 0.1 * gauss(rng));
    ms = std::clamp(ms, 40.0, 200.0);
    int frames = std::max(1, int(std::lround(ms / kShiftMs)));
    utt.aligned.alignment.push_back({cursor, cursor + frames});
    cursor += frames;
    log_ms_sum += std::log(frames * kShiftMs);
  }
  const int n_frames = cursor;
  std::vector<int> frame_phone(static_cast<std::size_t>(n_frames));
  for (int k = 0; k < n_phones; ++k) {
    for (int t = utt.aligned.alignment[k].start_frame;
         t < utt.aligned.alignment[k].end_frame; ++t) {
      frame_phone[std::size_t(t)] = k;
    }
  }
  auto voiced_phone = [&](int k) {
    return !kUnvoiced.count(Vocabulary::Default().At(phone_ids[k]).symbol);
  };

  // Accent contour through voiced phone centres plus a gentle declination,
  // then centred and scaled so its 5-95% span over voiced frames is one.
  std::vector<double> cx, cy;
  for (int k = 0; k < n_phones; ++k) {
    if (!voiced_phone(k)) continue;
    const auto& iv = utt.aligned.alignment[k];
    cx.push_back(0.5 * (iv.start_frame + iv.end_frame));
    cy.push_back(AccentTrait(phone_ids[k]) + 0.3 * gauss(rng));
  }
  std::vector<double> accent(static_cast<std::size_t>(n_frames), 0.0), voiced_accent;
  for (int t = 0; t < n_frames; ++t) {
    accent[t] = Interp(cx, cy, t) - 0.4 * t / n_frames;
    if (voiced_phone(frame_phone[t])) voiced_accent.push_back(accent[t]);
  }
  double mean_accent = 0.0;
  for (double a : voiced_accent) mean_accent += a;
  mean_accent /= double(voiced_accent.size());
  double span =
      Quantile(voiced_accent, 0.95) - Quantile(voiced_accent, 0.05);
  if (!(span > 1e-6)) span = 1.0;
  std::vector<double> log_f0(static_cast<std::size_t>(n_frames)), voiced_log_f0;
  for (int t = 0; t < n_frames; ++t) {
    double f0 = pitch_hz * std::exp(range * (accent[t] - mean_accent) / span);
    log_f0[t] = std::log(std::clamp(f0, 75.0, 480.0));
    if (voiced_phone(frame_phone[t])) voiced_log_f0.push_back(log_f0[t]);
  }

  // Per-phone levels, offsets centred frame-weighted around the target.
  std::vector<double> level(static_cast<std::size_t>(n_phones));
  double offset_mean = 0.0;
  for (int k = 0; k < n_phones; ++k) {
    level[k] = LevelTrait(phone_ids[k]) + 0.5 * gauss(rng);
    offset_mean += level[k] * utt.aligned.alignment[k].frames();
  }
  offset_mean /= n_frames;
  for (double& l : level) l += energy_db - offset_mean;

  // Unit-gain source and filter, continuous across phone boundaries.
  const std::size_t n_samples =
      std::size_t(n_frames - 1) * kShift + std::size_t(kLength);
  std::vector<std::size_t> bounds(static_cast<std::size_t>(n_phones) + 1);
  bounds[0] = 0;
  for (int k = 1; k < n_phones; ++k) {
    bounds[k] =
        std::size_t(utt.aligned.alignment[k].start_frame) * kShift + 180;
  }
  bounds[n_phones] = n_samples;
  std::vector<double> x(n_samples, 0.0);
  double phase = 0.0, y = 0.0;
  for (int k = 0; k < n_phones; ++k) {
    const bool voiced = voiced_phone(k);
    for (std::size_t n = bounds[k]; n < bounds[k + 1]; ++n) {
      double pos = (double(n) - 0.5 * kLength) / kShift;
      int t = std::clamp(int(std::floor(pos)), 0, n_frames - 1);
      int t1 = std::min(t + 1, n_frames - 1);
      double w = std::clamp(pos - t, 0.0, 1.0);
      double hz = std::exp((1.0 - w) * log_f0[t] + w * log_f0[t1]);
      phase += hz / kSampleRate;
      double e = 0.0;
      if (phase >= 1.0) {
        phase -= 1.0;
        if (voiced) e = 1.0;
      }
      if (voiced) {
        e += 0.02 * gauss(rng);
        y = e + pole * y;
        x[n] = y;
      } else {
        y = 0.0;
        x[n] = gauss(rng);
      }
    }
    double mean_abs = 0.0;
    for (std::size_t n = bounds[k]; n < bounds[k + 1]; ++n) {
      mean_abs += std::abs(x[n]);
    }
    mean_abs /= double(bounds[k + 1] - bounds[k]);
    double gain = std::pow(10.0, level[k] / 20.0) / std::max(mean_abs, 1e-12);
    for (std::size_t n = bounds[k]; n < bounds[k + 1]; ++n) x[n] *= gain;
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > kPeakLimit) {
    double scale = kPeakLimit / peak;
    for (double& v : x) v *= scale;
    energy_db += 20.0 * std::log10(scale);
  }
  utt.audio.samples = std::move(x);
  utt.audio.sample_rate = kSampleRate;

  double mean_log_f0 = 0.0;
  for (double v : voiced_log_f0) mean_log_f0 += v;
  mean_log_f0 /= double(voiced_log_f0.size());
  utt.targets.pitch_hz = std::exp(mean_log_f0);
  utt.targets.pitch_range =
      Quantile(voiced_log_f0, 0.95) - Quantile(voiced_log_f0, 0.05);
  utt.targets.duration_ms = std::exp(log_ms_sum / n_phones);
  utt.targets.energy_db = energy_db;
  utt.targets.tilt_pole = pole;
  return utt;
}

std::vector<ToyUtterance> SynthesizeToyCorpus(const ToyCorpusOptions& options) {
  if (options.size < 10) throw Error("toy corpus needs at least 10 utterances");
  std::vector<ToyUtterance> out;
  out.reserve(std::size_t(options.size));
  for (int i = 0; i < options.size; ++i) {
    out.push_back(RenderToyUtterance(options.seed, i));
  }
  return out;
}

void WriteToyCorpus(const std::vector<ToyUtterance>& corpus,
                    const fs::path& out) {
  fs::create_directories(out / "wav");
  fs::create_directories(out / "align");
  std::vector<ManifestEntry> entries;
  std::string targets;
  for (const auto& utt : corpus) {
    ManifestEntry e;
    e.id = utt.id;
    e.wav = "wav/" + utt.id + ".wav";
    e.alignment = "align/" + utt.id + ".tsv";
    e.text = FormatPhoneString(utt.aligned.tokens);
    dsp::WriteWav(out / e.wav, utt.audio);
    WriteFileBytes(out / e.alignment, FormatAlignment(utt.aligned, kShiftMs));
    entries.push_back(std::move(e));
    json j = {{"id", utt.id},
              {"pitch_hz", utt.targets.pitch_hz},
              {"pitch_range", utt.targets.pitch_range},
              {"duration_ms", utt.targets.duration_ms},
              {"energy_db", utt.targets.energy_db},
              {"tilt_pole", utt.targets.tilt_pole}};
    targets += j.dump() + "\n";
  }
  WriteManifest(out / kManifestFile, entries);
  WriteFileBytes(out / "targets.jsonl", targets);
}

void GenerateToyCorpus(const ToyCorpusOptions& options, const fs::path& out) {
  WriteToyCorpus(SynthesizeToyCorpus(options), out);
}

std::vector<ToyTargets> ReadToyTargets(const fs::path& dir) {
  std::ifstream in(dir / "targets.jsonl");
  if (!in) throw Error("cannot open " + (dir / "targets.jsonl").string());
  std::vector<ToyTargets> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      out.push_back({j.at("pitch_hz").get<double>(),
                     j.at("pitch_range").get<double>(),
                     j.at("duration_ms").get<double>(),
                     j.at("energy_db").get<double>(),
                     j.at("tilt_pole").get<double>()});
    } catch (const json::exception& e) {
      throw ParseError(std::string("targets: ") + e.what(), line_no);
    }
  }
  return out;
}

}  // namespace prosodia::corpus
