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

#include "prosodia/dsp/pitch.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prosodia/common/error.h"
#include "prosodia/dsp/fft.h"

namespace prosodia::dsp {

namespace {

constexpr double kAcfVoicingThreshold = 0.5;
constexpr double kAcfPeakRatio = 0.85;
constexpr double kCmndThreshold = 0.2;
constexpr double kCepstralVoicingThreshold = 0.12;
constexpr double kCepstralFullConfidence = 0.4;
constexpr double kOctaveTolerance = 0.03;

struct LagRange {
  int min_lag;
  int max_lag;
};

LagRange LagsFor(const PitchBand& band, int sample_rate, int frame_length) {
  LagRange r;
  r.min_lag = std::max(2, int(std::floor(sample_rate / band.f_max)));
  r.max_lag = std::min(frame_length - 2, int(std::ceil(sample_rate / band.f_min)));
  if (r.max_lag <= r.min_lag) {
    throw Error("pitch: frame too short for the search band");
  }
  return r;
}

std::vector<double> Centered(std::span<const double> frame) {
  double mean = std::accumulate(frame.begin(), frame.end(), 0.0) / frame.size();
  std::vector<double> x(frame.begin(), frame.end());
  for (double& v : x) v -= mean;
  return x;
}

bool IsSilent(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e <= 1e-12 * double(x.size());
}

// Vertex offset of the parabola through (-1, a), (0, b), (1, c).
double ParabolicOffset(double a, double b, double c) {
  double denom = a - 2.0 * b + c;
  if (std::abs(denom) < 1e-15) return 0.0;
  return std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
}

double LagToHz(double lag, int sample_rate) { return sample_rate / lag; }

PitchCandidate InBand(PitchCandidate c, const PitchBand& band) {
  if (c.hz < band.f_min * 0.999 || c.hz > band.f_max * 1.001) return {};
  c.hz = std::clamp(c.hz, band.f_min, band.f_max);
  return c;
}

PitchCandidate AcfFrame(std::span<const double> frame, const PitchBand& band,
                        int sample_rate) {
  std::vector<double> x = Centered(frame);
  if (IsSilent(x)) return {};
  const int n = int(x.size());
  LagRange lags = LagsFor(band, sample_rate, n);
  // Normalized cross-correlation between x[0, n - lag) and x[lag, n).
  std::vector<double> head(n + 1, 0.0);  // prefix energies
  for (int i = 0; i < n; ++i) head[i + 1] = head[i] + x[i] * x[i];
  std::vector<double> nr(lags.max_lag + 2, 0.0);
  for (int lag = lags.min_lag - 1; lag <= lags.max_lag + 1; ++lag) {
    double r = 0.0;
    for (int j = 0; j + lag < n; ++j) r += x[j] * x[j + lag];
    double e0 = head[n - lag];
    double e1 = head[n] - head[lag];
    double denom = std::sqrt(e0 * e1);
    nr[lag] = denom > 0.0 ? r / denom : 0.0;
  }
  double best = -1.0;
  for (int lag = lags.min_lag; lag <= lags.max_lag; ++lag) {
    if (nr[lag] >= nr[lag - 1] && nr[lag] >= nr[lag + 1]) {
      best = std::max(best, nr[lag]);
    }
  }
  if (best <= 0.0) return {};
  for (int lag = lags.min_lag; lag <= lags.max_lag; ++lag) {
    if (nr[lag] >= nr[lag - 1] && nr[lag] >= nr[lag + 1] &&
        nr[lag] >= kAcfPeakRatio * best) {
      double conf = std::clamp(nr[lag], 0.0, 1.0);
      if (conf < kAcfVoicingThreshold) return {0.0, conf};
      double refined = lag + ParabolicOffset(nr[lag - 1], nr[lag], nr[lag + 1]);
      return InBand({LagToHz(refined, sample_rate), conf}, band);
    }
  }
  return {};
}

PitchCandidate CmndFrame(std::span<const double> frame, const PitchBand& band,
                         int sample_rate) {
  std::vector<double> x = Centered(frame);
  if (IsSilent(x)) return {};
  const int n = int(x.size());
  LagRange lags = LagsFor(band, sample_rate, n);
  std::vector<double> d(lags.max_lag + 2, 0.0);
  for (int lag = 1; lag <= lags.max_lag + 1; ++lag) {
    double s = 0.0;
    for (int j = 0; j + lag < n; ++j) {
      double diff = x[j] - x[j + lag];
      s += diff * diff;
    }
    d[lag] = s / (n - lag);
  }
  std::vector<double> cmnd(d.size(), 1.0);
  double running = 0.0;
  for (int lag = 1; lag < int(d.size()); ++lag) {
    running += d[lag];
    cmnd[lag] = running > 0.0 ? d[lag] * lag / running : 1.0;
  }
  int chosen = -1;
  for (int lag = lags.min_lag; lag <= lags.max_lag; ++lag) {
    if (cmnd[lag] < kCmndThreshold) {
      while (lag + 1 <= lags.max_lag && cmnd[lag + 1] < cmnd[lag]) ++lag;
      chosen = lag;
      break;
    }
  }
  if (chosen < 0) {
    double lowest = *std::min_element(cmnd.begin() + lags.min_lag,
                                      cmnd.begin() + lags.max_lag + 1);
    return {0.0, std::clamp(1.0 - lowest, 0.0, 1.0) * 0.5};
  }
  double refined =
      chosen + ParabolicOffset(cmnd[chosen - 1], cmnd[chosen], cmnd[chosen + 1]);
  double conf = std::clamp(1.0 - cmnd[chosen], 0.0, 1.0);
  return InBand({LagToHz(refined, sample_rate), conf}, band);
}

class CepstralAnalyzer {
 public:
  CepstralAnalyzer(int frame_length, int sample_rate)
      : fft_(FftSizeFor(frame_length)),
        window_(HannWindow(frame_length)),
        sample_rate_(sample_rate) {}

  PitchCandidate operator()(std::span<const double> frame,
                            const PitchBand& band) {
    std::vector<double> x = Centered(frame);
    if (IsSilent(x)) return {};
    LagRange lags = LagsFor(band, sample_rate_, fft_.size() / 2);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::max(x[i], 0.0) * window_[i];
    }
    fft_.Forward(x, &spectrum_);
    double peak_mag = 0.0;
    for (const auto& c : spectrum_) peak_mag = std::max(peak_mag, std::abs(c));
    if (peak_mag <= 0.0) return {};
    const double floor = peak_mag * 1e-5;
    for (auto& c : spectrum_) c = std::log(std::max(std::abs(c), floor));
    fft_.Inverse(spectrum_, &cepstrum_);
    int best = lags.min_lag;
    for (int q = lags.min_lag; q <= lags.max_lag; ++q) {
      if (cepstrum_[q] > cepstrum_[best]) best = q;
    }
    double peak = cepstrum_[best];
    double conf = std::clamp(peak / kCepstralFullConfidence, 0.0, 1.0);
    if (peak < kCepstralVoicingThreshold) return {0.0, conf};
    double refined = best + ParabolicOffset(cepstrum_[best - 1], peak,
                                            cepstrum_[best + 1]);
    return InBand({LagToHz(refined, sample_rate_), conf}, band);
  }

 private:
  static int FftSizeFor(int frame_length) {
    int n = 2;
    while (n < 2 * frame_length) n *= 2;
    return n;
  }

  RealFft fft_;
  std::vector<double> window_;
  int sample_rate_;
  std::vector<std::complex<double>> spectrum_;
  std::vector<double> cepstrum_;
};

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool Near(double value, double target) {
  return std::abs(value - target) <= kOctaveTolerance * target;
}

double OctaveCorrect(double value, double reference) {
  if (Near(value, 2.0 * reference)) return value / 2.0;
  if (Near(value, 0.5 * reference)) return value * 2.0;
  return value;
}

}  // namespace

void PitchBand::Validate(int sample_rate) const {
  if (!(f_min >= 20.0 && f_min < f_max && f_max <= sample_rate / 4.0)) {
    throw Error("pitch: band must satisfy 20 <= f_min < f_max <= sr/4");
  }
}

int PitchTrack::voiced_count() const {
  return int(std::count(voiced.begin(), voiced.end(), true));
}

CandidateTrack EstimatePitchAcf(const Frames& frames, const PitchBand& band) {
  band.Validate(frames.sample_rate());
  CandidateTrack out(static_cast<std::size_t>(frames.size()));
  for (int i = 0; i < frames.size(); ++i) {
    out[i] = AcfFrame(frames[i], band, frames.sample_rate());
  }
  return out;
}

CandidateTrack EstimatePitchCmnd(const Frames& frames, const PitchBand& band) {
  band.Validate(frames.sample_rate());
  CandidateTrack out(static_cast<std::size_t>(frames.size()));
  for (int i = 0; i < frames.size(); ++i) {
    out[i] = CmndFrame(frames[i], band, frames.sample_rate());
  }
  return out;
}

CandidateTrack EstimatePitchCepstral(const Frames& frames,
                                     const PitchBand& band) {
  band.Validate(frames.sample_rate());
  CepstralAnalyzer analyze(frames.length(), frames.sample_rate());
  CandidateTrack out(static_cast<std::size_t>(frames.size()));
  for (int i = 0; i < frames.size(); ++i) out[i] = analyze(frames[i], band);
  return out;
}

PitchCandidate VoteFrame(const std::array<PitchCandidate, 3>& candidates) {
  std::vector<const PitchCandidate*> voiced;
  for (const auto& c : candidates) {
    if (c.voiced()) voiced.push_back(&c);
  }
  if (voiced.size() < 2) return {};
  std::vector<double> corrected;
  double confidence = 0.0;
  if (voiced.size() == 3) {
    for (int i = 0; i < 3; ++i) {
      double other_a = voiced[(i + 1) % 3]->hz;
      double other_b = voiced[(i + 2) % 3]->hz;
      double reference = 0.5 * (other_a + other_b);
      corrected.push_back(OctaveCorrect(voiced[i]->hz, reference));
      confidence += voiced[i]->confidence / 3.0;
    }
  } else {
    // Reference is the more confident candidate; ties go to the lower pitch
    // so the result does not depend on argument order.
    const PitchCandidate* ref = voiced[0];
    const PitchCandidate* other = voiced[1];
    if (other->confidence > ref->confidence ||
        (other->confidence == ref->confidence && other->hz < ref->hz)) {
      std::swap(ref, other);
    }
    corrected = {ref->hz, OctaveCorrect(other->hz, ref->hz)};
    confidence = 0.5 * (ref->confidence + other->confidence);
  }
  return {Median(corrected), confidence};
}

PitchTrack VotePitch(const CandidateTrack& a, const CandidateTrack& b,
                     const CandidateTrack& c) {
  if (a.size() != b.size() || a.size() != c.size()) {
    throw Error("pitch: candidate tracks have mismatched lengths");
  }
  PitchTrack track;
  track.f0.resize(a.size(), 0.0);
  track.voiced.resize(a.size(), false);
  for (std::size_t i = 0; i < a.size(); ++i) {
    PitchCandidate v = VoteFrame({a[i], b[i], c[i]});
    track.f0[i] = v.hz;
    track.voiced[i] = v.voiced();
  }
  return track;
}

PitchTrack TrackPitch(const Frames& frames, const PitchBand& band) {
  PitchTrack track = VotePitch(EstimatePitchAcf(frames, band),
                               EstimatePitchCmnd(frames, band),
                               EstimatePitchCepstral(frames, band));
  for (std::size_t i = 0; i < track.f0.size(); ++i) {
    if (track.voiced[i]) {
      track.f0[i] = std::clamp(track.f0[i], band.f_min, band.f_max);
    }
  }
  return track;
}

}  // namespace prosodia::dsp
