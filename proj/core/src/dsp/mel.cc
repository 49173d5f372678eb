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

#include "prosodia/dsp/mel.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <numbers>
#include <random>

#include "prosodia/common/error.h"
#include "prosodia/dsp/features.h"
#include "prosodia/dsp/fft.h"

namespace prosodia::dsp {

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> PreEmphasize(const std::vector<double>& x, double a) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] - (i > 0 ? a * x[i - 1] : 0.0);
  }
  return y;
}

void Validate(const MelConfig& c, int sample_rate) {
  if (c.n_mels < 1 || c.n_fft < 2 || c.n_fft % 2 != 0 ||
      !(c.f_min >= 0.0 && c.f_min < c.f_max &&
        c.f_max <= sample_rate / 2.0 + 1e-9) ||
      !(c.power_floor > 0.0)) {
    throw Error("mel: invalid configuration");
  }
}

// Spreads Mel-band power back onto FFT bins as the filter-weighted average
// of per-bin band densities.
class MelInverter {
 public:
  MelInverter(const MelConfig& config, int sample_rate)
      : basis_(MelFilterbank(config, sample_rate)),
        area_(basis_.rowwise().sum()),
        coverage_(basis_.colwise().sum()) {
    for (Eigen::Index m = 0; m < basis_.rows(); ++m) {
      Eigen::Index lo = 0;
      while (lo < basis_.cols() && basis_(m, lo) == 0.0) ++lo;
      Eigen::Index hi = basis_.cols();
      while (hi > lo && basis_(m, hi - 1) == 0.0) --hi;
      support_.emplace_back(lo, hi);
    }
  }

  // power: linear Mel power (one frame); out: per-bin power.
  void Spread(const RowVector& mel_power, std::vector<double>* out) const {
    out->assign(static_cast<std::size_t>(basis_.cols()), 0.0);
    for (Eigen::Index m = 0; m < basis_.rows(); ++m) {
      if (area_(m) <= 0.0) continue;
      double density = mel_power(m) / area_(m);
      for (Eigen::Index k = 0; k < basis_.cols(); ++k) {
        double w = basis_(m, k);
        if (w != 0.0) (*out)[k] += w * density;
      }
    }
    for (Eigen::Index k = 0; k < basis_.cols(); ++k) {
      (*out)[k] = coverage_(k) > 0.0 ? (*out)[k] / coverage_(k) : 0.0;
    }
  }

  // Richardson-Lucy iterations toward a non-negative per-bin power whose
  // banded projection reproduces `mel_power`; starts from Spread.
  void Deconvolve(const RowVector& mel_power, int iters,
                  std::vector<double>* out) const {
    Spread(mel_power, out);
    std::vector<double>& p = *out;
    std::vector<double> ratio(p.size());
    for (int it = 0; it < iters; ++it) {
      std::fill(ratio.begin(), ratio.end(), 0.0);
      for (Eigen::Index m = 0; m < basis_.rows(); ++m) {
        auto [lo, hi] = support_[std::size_t(m)];
        double projected = 0.0;
        for (Eigen::Index k = lo; k < hi; ++k) projected += basis_(m, k) * p[k];
        if (!(projected > 0.0)) continue;
        double r = mel_power(m) / projected;
        for (Eigen::Index k = lo; k < hi; ++k) ratio[k] += basis_(m, k) * r;
      }
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (coverage_(Eigen::Index(k)) > 0.0) p[k] *= ratio[k] / coverage_(Eigen::Index(k));
      }
    }
  }

 private:
  Matrix basis_;
  Eigen::VectorXd area_;
  RowVector coverage_;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> support_;
};

constexpr int kDeconvolutionIters = 50;

}  // namespace

Matrix MelFilterbank(const MelConfig& config, int sample_rate) {
  Validate(config, sample_rate);
  const int bins = config.n_fft / 2 + 1;
  const double mel_lo = HzToMel(config.f_min);
  const double mel_hi = HzToMel(config.f_max);
  std::vector<double> edges(static_cast<std::size_t>(config.n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * double(i) /
                                    double(config.n_mels + 1));
  }
  const double bin_hz = double(sample_rate) / config.n_fft;
  Matrix fb = Matrix::Zero(config.n_mels, bins);
  for (int m = 0; m < config.n_mels; ++m) {
    double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    bool any = false;
    for (int k = 0; k < bins; ++k) {
      double f = k * bin_hz;
      double w = 0.0;
      if (f > lo && f <= center) {
        w = (f - lo) / (center - lo);
      } else if (f > center && f < hi) {
        w = (hi - f) / (hi - center);
      }
      if (w > 0.0) {
        fb(m, k) = w;
        any = true;
      }
    }
    if (!any) {
      int nearest = std::clamp(int(std::lround(center / bin_hz)), 0, bins - 1);
      fb(m, nearest) = 1.0;
    }
  }
  return fb;
}

MelSpectrogram ComputeMel(const AudioClip& clip, const MelConfig& config) {
  Validate(config, clip.sample_rate);
  AudioClip emphasized{PreEmphasize(clip.samples, config.preemphasis),
                       clip.sample_rate};
  Frames frames = FrameSignal(emphasized, config.grid);
  if (frames.length() > config.n_fft) {
    throw Error("mel: n_fft shorter than the frame length");
  }
  const Matrix fb = MelFilterbank(config, clip.sample_rate);
  const std::vector<double> window = HannWindow(frames.length());
  RealFft fft(config.n_fft);
  std::vector<double> buf(static_cast<std::size_t>(frames.length()));
  std::vector<std::complex<double>> spectrum;
  Eigen::VectorXd power(fft.bins());

  MelSpectrogram mel;
  mel.grid = frames.grid();
  mel.sample_rate = clip.sample_rate;
  mel.frames.resize(frames.size(), config.n_mels);
  const double log_floor = std::log(config.power_floor);
  for (int t = 0; t < frames.size(); ++t) {
    auto frame = frames[t];
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = frame[i] * window[i];
    fft.Forward(buf, &spectrum);
    for (int k = 0; k < fft.bins(); ++k) power(k) = std::norm(spectrum[k]);
    Eigen::VectorXd banded = fb * power;
    for (int m = 0; m < config.n_mels; ++m) {
      double p = banded(m);
      mel.frames(t, m) =
          p > config.power_floor && std::isfinite(p) ? std::log(p) : log_floor;
    }
  }
  return mel;
}

AudioClip GriffinLim(const MelSpectrogram& mel, const MelConfig& config,
                     const GriffinLimOptions& options) {
  Validate(config, mel.sample_rate);
  if (options.n_iters < 1) throw Error("griffin-lim: n_iters must be >= 1");
  if (mel.n_mels() != config.n_mels) {
    throw Error("griffin-lim: Mel bin count does not match configuration");
  }
  const int length = mel.grid.frame_length;
  const int shift = mel.grid.frame_shift;
  const int n_frames = mel.n_frames();
  if (n_frames < 1 || length < 1 || shift < 1) {
    throw Error("griffin-lim: empty Mel spectrogram");
  }
  RealFft fft(config.n_fft);
  const int bins = fft.bins();
  MelInverter inverter(config, mel.sample_rate);

  // Target magnitudes.
  std::vector<std::vector<double>> magnitude(static_cast<std::size_t>(n_frames));
  std::vector<double> bin_power;
  for (int t = 0; t < n_frames; ++t) {
    RowVector p = mel.frames.row(t).array().exp();
    for (Eigen::Index m = 0; m < p.size(); ++m) {
      if (mel.frames(t, m) <= std::log(config.power_floor) + 1e-9) p(m) = 0.0;
    }
    inverter.Deconvolve(p, kDeconvolutionIters, &bin_power);
    magnitude[t].resize(static_cast<std::size_t>(bins));
    for (int k = 0; k < bins; ++k) magnitude[t][k] = std::sqrt(bin_power[k]);
  }

  const std::vector<double> window = HannWindow(length);
  const std::size_t n_samples = SamplesForFrames(n_frames, length, shift);
  std::vector<double> norm(n_samples, 0.0);
  for (int t = 0; t < n_frames; ++t) {
    for (int i = 0; i < length; ++i) {
      norm[std::size_t(t) * shift + i] += window[i] * window[i];
    }
  }

  std::mt19937 rng(options.seed);
  std::uniform_real_distribution<double> phase_dist(-std::numbers::pi,
                                                    std::numbers::pi);
  std::vector<std::vector<std::complex<double>>> stft(static_cast<std::size_t>(n_frames));
  for (int t = 0; t < n_frames; ++t) {
    stft[t].resize(static_cast<std::size_t>(bins));
    for (int k = 0; k < bins; ++k) {
      stft[t][k] = std::polar(magnitude[t][k], phase_dist(rng));
    }
  }

  std::vector<double> signal(n_samples, 0.0);
  std::vector<double> frame_buf;
  std::vector<std::complex<double>> spectrum;
  auto overlap_add = [&] {
    std::fill(signal.begin(), signal.end(), 0.0);
    for (int t = 0; t < n_frames; ++t) {
      fft.Inverse(stft[t], &frame_buf);
      for (int i = 0; i < length; ++i) {
        signal[std::size_t(t) * shift + i] += frame_buf[i] * window[i];
      }
    }
    for (std::size_t i = 0; i < n_samples; ++i) {
      signal[i] = norm[i] > 1e-8 ? signal[i] / norm[i] : 0.0;
    }
  };
  auto finish = [&] {
    AudioClip out;
    out.sample_rate = mel.sample_rate;
    out.samples.resize(n_samples);
    double prev = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
      prev = signal[i] + config.preemphasis * prev;
      out.samples[i] = std::clamp(prev, -1.0, 1.0);
    }
    return out;
  };

  std::vector<double> windowed(static_cast<std::size_t>(length));
  for (int iter = 0; iter < options.n_iters; ++iter) {
    overlap_add();
    for (int t = 0; t < n_frames; ++t) {
      for (int i = 0; i < length; ++i) {
        windowed[i] = signal[std::size_t(t) * shift + i] * window[i];
      }
      fft.Forward(windowed, &spectrum);
      for (int k = 0; k < bins; ++k) {
        double a = std::abs(spectrum[k]);
        stft[t][k] = a > 1e-12 ? spectrum[k] * (magnitude[t][k] / a)
                               : std::complex<double>(magnitude[t][k], 0.0);
      }
    }
    if (options.on_iteration) {
      overlap_add();
      options.on_iteration(iter + 1, finish());
    }
  }
  overlap_add();
  return finish();
}

std::vector<double> MelTiltProxy(const MelSpectrogram& mel,
                                 const MelConfig& config) {
  Validate(config, mel.sample_rate);
  MelInverter inverter(config, mel.sample_rate);
  const int bins = config.n_fft / 2 + 1;
  std::vector<double> cos_w(static_cast<std::size_t>(bins));
  std::vector<double> emphasis(static_cast<std::size_t>(bins));
  const double a = config.preemphasis;
  for (int k = 0; k < bins; ++k) {
    double w = std::numbers::pi * k / (bins - 1);
    cos_w[k] = std::cos(w);
    emphasis[k] = 1.0 - 2.0 * a * std::cos(w) + a * a;
  }
  std::vector<double> out(static_cast<std::size_t>(mel.n_frames()), 0.0);
  std::vector<double> bin_power;
  for (int t = 0; t < mel.n_frames(); ++t) {
    RowVector p = mel.frames.row(t).array().exp();
    inverter.Spread(p, &bin_power);
    double r0 = 0.0;
    double r1 = 0.0;
    for (int k = 0; k < bins; ++k) {
      double edge = (k == 0 || k == bins - 1) ? 0.5 : 1.0;
      double s = edge * bin_power[k] / std::max(emphasis[k], 1e-6);
      r0 += s;
      r1 += s * cos_w[k];
    }
    out[t] = r0 > 0.0 ? std::clamp(-r1 / r0, -1.0, 1.0) : 0.0;
  }
  return out;
}

double UtteranceMelTiltProxy(const MelSpectrogram& mel,
                             const MelConfig& config) {
  std::vector<double> proxy = MelTiltProxy(mel, config);
  std::vector<double> level(proxy.size());
  double loudest = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < mel.n_frames(); ++t) {
    level[t] = std::log(mel.frames.row(t).array().exp().sum()) *
               (10.0 / std::numbers::ln10);
    loudest = std::max(loudest, level[t]);
  }
  std::vector<double> kept;
  for (std::size_t t = 0; t < proxy.size(); ++t) {
    if (level[t] >= loudest - kSilenceRangeDb) kept.push_back(proxy[t]);
  }
  if (kept.empty()) return 0.0;
  auto mid = kept.begin() + std::ptrdiff_t(kept.size() / 2);
  std::nth_element(kept.begin(), mid, kept.end());
  if (kept.size() % 2) return *mid;
  double upper = *mid;
  double lower = *std::max_element(kept.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace prosodia::dsp
