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

#ifndef PROSODIA_DSP_FFT_H_
#define PROSODIA_DSP_FFT_H_

#include <complex>
#include <span>
#include <vector>

namespace prosodia::dsp {

// Real-to-complex transform of fixed size n (backed by FFTW). Each instance
// owns its scratch buffers, so separate instances may run on separate
// threads concurrently; plans are shared.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  // Input shorter than n is zero-padded.
  void Forward(std::span<const double> in,
               std::vector<std::complex<double>>* out);
  // Inverse of Forward, including the 1/n scaling.
  void Inverse(std::span<const std::complex<double>> in,
               std::vector<double>* out);

 private:
  int n_;
  double* real_;
  void* spectrum_;
  void* forward_plan_;
  void* inverse_plan_;
};

// Periodic Hann window of the given length.
std::vector<double> HannWindow(int length);

}  // namespace prosodia::dsp

#endif  // PROSODIA_DSP_FFT_H_
