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

#include "prosodia/dsp/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "prosodia/common/error.h"

namespace prosodia::dsp {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& PlanMutex() {
  static std::mutex mu;
  return mu;
}

std::map<int, std::pair<fftw_plan, fftw_plan>>& PlanCache() {
  static std::map<int, std::pair<fftw_plan, fftw_plan>> cache;
  return cache;
}

}  // namespace

RealFft::RealFft(int n) : n_(n) {
  if (n < 2 || n % 2 != 0) throw Error("fft: size must be even and >= 2");
  real_ = fftw_alloc_real(static_cast<std::size_t>(n));
  spectrum_ = fftw_alloc_complex(static_cast<std::size_t>(bins()));
  std::lock_guard<std::mutex> lock(PlanMutex());
  auto& cache = PlanCache();
  auto it = cache.find(n);
  if (it == cache.end()) {
    auto* spec = static_cast<fftw_complex*>(spectrum_);
    fftw_plan fwd = fftw_plan_dft_r2c_1d(n, real_, spec, FFTW_ESTIMATE);
    fftw_plan inv = fftw_plan_dft_c2r_1d(n, spec, real_, FFTW_ESTIMATE);
    it = cache.emplace(n, std::make_pair(fwd, inv)).first;
  }
  forward_plan_ = it->second.first;
  inverse_plan_ = it->second.second;
}

RealFft::~RealFft() {
  fftw_free(real_);
  fftw_free(spectrum_);
}

void RealFft::Forward(std::span<const double> in,
                      std::vector<std::complex<double>>* out) {
  const std::size_t m = std::min(in.size(), std::size_t(n_));
  std::copy(in.begin(), in.begin() + std::ptrdiff_t(m), real_);
  std::fill(real_ + m, real_ + n_, 0.0);
  auto* spec = static_cast<fftw_complex*>(spectrum_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), real_, spec);
  out->resize(static_cast<std::size_t>(bins()));
  for (int k = 0; k < bins(); ++k) (*out)[k] = {spec[k][0], spec[k][1]};
}

void RealFft::Inverse(std::span<const std::complex<double>> in,
                      std::vector<double>* out) {
  if (in.size() != std::size_t(bins())) throw Error("fft: bin count mismatch");
  auto* spec = static_cast<fftw_complex*>(spectrum_);
  for (int k = 0; k < bins(); ++k) {
    spec[k][0] = in[k].real();
    spec[k][1] = in[k].imag();
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), spec, real_);
  out->resize(static_cast<std::size_t>(n_));
  const double scale = 1.0 / n_;
  for (int i = 0; i < n_; ++i) (*out)[i] = real_[i] * scale;
}

std::vector<double> HannWindow(int length) {
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / length);
  }
  return w;
}

}  // namespace prosodia::dsp
