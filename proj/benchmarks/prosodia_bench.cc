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
#include <numbers>

#include "benchmark/benchmark.h"
#include "prosodia/corpus/dataset.h"
#include "prosodia/corpus/stats.h"
#include "prosodia/corpus/toy.h"
#include "prosodia/dsp/framing.h"
#include "prosodia/dsp/mel.h"
#include "prosodia/dsp/pitch.h"
#include "prosodia/model/autodiff.h"
#include "prosodia/model/frontend.h"

namespace prosodia {
namespace {

dsp::AudioClip OneSecond() {
  corpus::ToyUtterance toy = corpus::RenderToyUtterance(7, 0);
  dsp::AudioClip clip = toy.audio;
  clip.samples.resize(std::size_t(clip.sample_rate), 0.0);
  return clip;
}

struct ModelFixture {
  corpus::CorpusStats stats;
  model::TrainExample example;
  model::FrontEndModel model{model::DeskConfig(), 7};
  std::vector<corpus::PhoneToken> tokens;

  ModelFixture() {
    std::vector<corpus::Utterance> utts;
    for (int i = 0; i < 10; ++i) {
      corpus::ToyUtterance toy = corpus::RenderToyUtterance(7, i);
      utts.push_back(corpus::Featurize(toy.id, toy.audio, toy.aligned));
    }
    stats = corpus::FitCorpusStats(utts);
    example = model::MakeTrainExample(utts[0], stats);
    tokens = corpus::RenderToyUtterance(7, 0).aligned.tokens;
  }
};

const ModelFixture& Fixture() {
  static const ModelFixture f;
  return f;
}

void BM_FrameSignal(benchmark::State& state) {
  dsp::AudioClip clip = OneSecond();
  for (auto _ : state) benchmark::DoNotOptimize(dsp::FrameSignal(clip));
}
BENCHMARK(BM_FrameSignal)->Unit(benchmark::kMicrosecond);

void BM_ComputeMel(benchmark::State& state) {
  dsp::AudioClip clip = OneSecond();
  for (auto _ : state) benchmark::DoNotOptimize(dsp::ComputeMel(clip));
}
BENCHMARK(BM_ComputeMel)->Unit(benchmark::kMillisecond);

void BM_TrackPitch(benchmark::State& state) {
  dsp::Frames frames = dsp::FrameSignal(OneSecond());
  for (auto _ : state) benchmark::DoNotOptimize(dsp::TrackPitch(frames));
}
BENCHMARK(BM_TrackPitch)->Unit(benchmark::kMillisecond);

void BM_Featurize(benchmark::State& state) {
  corpus::ToyUtterance toy = corpus::RenderToyUtterance(7, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(corpus::Featurize(toy.id, toy.audio, toy.aligned));
  }
}
BENCHMARK(BM_Featurize)->Unit(benchmark::kMillisecond);

void BM_GriffinLim(benchmark::State& state) {
  dsp::MelSpectrogram mel = dsp::ComputeMel(OneSecond());
  dsp::GriffinLimOptions options;
  options.n_iters = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dsp::GriffinLim(mel, {}, options));
}
BENCHMARK(BM_GriffinLim)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ForwardBackwardDesk(benchmark::State& state) {
  const ModelFixture& f = Fixture();
  for (auto _ : state) {
    ad::Tape tape;
    model::Binding binding(f.model.params(), tape);
    model::TrainForward out = f.model.ForwardTrain(f.example, binding, nullptr);
    tape.Backward(out.total);
    std::vector<Matrix> grads = f.model.params().ZerosLike();
    binding.AccumulateGrads(&grads);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_ForwardBackwardDesk)->Unit(benchmark::kMillisecond);

void BM_InferDesk(benchmark::State& state) {
  const ModelFixture& f = Fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.model.ForwardInfer(f.tokens, f.stats.phone_log_duration));
  }
}
BENCHMARK(BM_InferDesk)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace prosodia

BENCHMARK_MAIN();
