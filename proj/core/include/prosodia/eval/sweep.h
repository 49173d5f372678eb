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

#ifndef PROSODIA_EVAL_SWEEP_H_
#define PROSODIA_EVAL_SWEEP_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "prosodia/control/synthesizer.h"
#include "prosodia/corpus/prosody.h"
#include "prosodia/corpus/tokens.h"

namespace prosodia::eval {

struct SweepSpec {
  std::vector<corpus::Feature> dimensions = {corpus::kAllFeatures.begin(),
                                             corpus::kAllFeatures.end()};
  std::vector<double> grid;  // strictly increasing
  std::vector<std::vector<corpus::PhoneToken>> sentences;

  void Validate() const;
};

struct SweepPoint {
  corpus::Feature dimension = corpus::Feature::kPitch;
  double bias = 0.0;
  double mean = 0.0;  // realized, normalized (unclipped)
  double std = 0.0;   // population
  int n = 0;
  std::vector<double> values;  // one per sentence
};

struct Endpoints {
  corpus::Feature dimension = corpus::Feature::kPitch;
  // Realized means at bias -1, 0, +1, denormalized to physical units.
  std::array<double, 3> values{};
};

struct SweepReport {
  std::vector<SweepPoint> points;  // dimension-major, grid order
  std::vector<std::pair<corpus::Feature, double>> spearman;
  // Present only when the grid contains -1, 0 and +1.
  std::vector<Endpoints> endpoints;
  int syntheses = 0;
};

// Syntheses needed: |grid| * |sentences| per dimension, with the bias-0
// runs shared across dimensions when 0 is on the grid.
int SynthesisCount(const SweepSpec& spec);

SweepReport RunSweep(const control::Synthesizer& synth, const SweepSpec& spec);

// Spearman rank correlation, ties given their average rank. Throws on
// length mismatch, fewer than two points, or a constant input.
double SpearmanRho(std::span<const double> x, std::span<const double> y);

// "lo:hi:n" (n evenly spaced points including both ends) or a comma list.
std::vector<double> ParseGrid(std::string_view text);

// Writes sweep.csv, endpoints.csv and sweep_<dimension>.svg under out_dir.
void EmitReport(const SweepReport& report,
                const std::filesystem::path& out_dir);

std::string FormatSweepCsv(const SweepReport& report);
std::string FormatEndpointsCsv(const SweepReport& report);
std::string RenderSweepSvg(const SweepReport& report, corpus::Feature dim);

}  // namespace prosodia::eval

#endif  // PROSODIA_EVAL_SWEEP_H_
