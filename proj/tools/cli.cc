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

#include "cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "prosodia/common/binary_io.h"
#include "prosodia/common/error.h"
#include "prosodia/control/synthesizer.h"
#include "prosodia/corpus/dataset.h"
#include "prosodia/corpus/stats.h"
#include "prosodia/corpus/toy.h"
#include "prosodia/eval/sweep.h"
#include "prosodia/model/frontend.h"
#include "prosodia/service/api.h"
#include "prosodia/service/server.h"
#include "prosodia/training/trainer.h"

namespace prosodia::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  // gen-corpus
  int size = 200;
  std::uint64_t seed = 7;
  // shared paths
  std::string out, corpus, stats, config, model;
  // train overrides
  std::optional<long> steps;
  std::optional<std::uint64_t> train_seed;
  // synth
  std::string phones, wav, mel, json;
  control::BiasSpec bias;
  std::optional<int> emphasize_word;
  int gl_iters = 32;
  // sweep
  std::string dims = "all", grid = "-1:1:9";
  int sentences = 20;
  // serve
  std::string host = "127.0.0.1";
  int port = service::kDefaultPort;
};

std::shared_ptr<const control::Synthesizer> LoadSynthesizer(
    const std::string& model_path, const std::string& stats_path) {
  auto model = std::make_shared<const model::FrontEndModel>(
      model::LoadCheckpoint(model_path));
  auto stats = std::make_shared<const corpus::CorpusStats>(
      corpus::CorpusStats::Load(stats_path));
  return std::make_shared<const control::Synthesizer>(model, stats);
}

std::string DefaultStats(const Options& o) {
  if (!o.stats.empty()) return o.stats;
  return (fs::path(o.model).parent_path() / "stats.json").string();
}

std::vector<corpus::Feature> ParseDims(const std::string& text) {
  if (text == "all") return {corpus::kAllFeatures.begin(), corpus::kAllFeatures.end()};
  std::vector<corpus::Feature> out;
  std::stringstream ss(text);
  std::string name;
  while (std::getline(ss, name, ',')) {
    auto f = corpus::FeatureFromName(name);
    if (!f) throw Error("unknown dimension '" + name + "'");
    out.push_back(*f);
  }
  return out;
}

void RunGenCorpus(const Options& o, std::ostream& out) {
  corpus::GenerateToyCorpus({o.size, o.seed}, o.out);
  out << "wrote " << o.size << " utterances to " << o.out << "\n";
}

void RunFeaturize(const Options& o, std::ostream& out) {
  corpus::FeaturizeCorpus(o.corpus);
  out << "featurized " << o.corpus << "\n";
}

void RunFitStats(const Options& o, std::ostream& out) {
  auto utts = corpus::LoadCorpus(o.corpus);
  std::string path =
      o.out.empty() ? (fs::path(o.corpus) / "stats.json").string() : o.out;
  corpus::FitCorpusStats(utts).Save(path);
  out << "wrote " << path << "\n";
}

void RunTrain(const Options& o, std::ostream& out, std::ostream& err) {
  training::RunConfig rc;
  if (!o.config.empty()) rc = training::RunConfig::Load(o.config);
  if (o.steps) rc.train.steps = *o.steps;
  if (o.train_seed) rc.train.seed = *o.train_seed;
  rc.train.Validate();
  corpus::CorpusStats stats = corpus::CorpusStats::Load(o.stats);
  auto utts = corpus::LoadCorpus(o.corpus);
  std::vector<model::TrainExample> data;
  for (const auto& u : utts) data.push_back(model::MakeTrainExample(u, stats));
  training::TrainOptions opts;
  opts.out_dir = o.out;
  opts.progress = &err;
  training::Train(data, rc.model, rc.train, opts);
  stats.Save(fs::path(o.out) / "stats.json");
  out << "wrote " << (fs::path(o.out) / training::kModelFile).string() << "\n";
}

void RunSynth(const Options& o, std::ostream& out) {
  auto synth = LoadSynthesizer(o.model, o.stats);
  std::string text = o.phones;
  if (fs::is_regular_file(text)) text = ReadFileBytes(text);
  control::SynthesisRequest req;
  req.tokens = corpus::ParsePhoneString(text);
  req.bias = o.bias;
  if (o.emphasize_word) req.emphasis = control::EmphasisSpec{*o.emphasize_word};
  req.with_audio = !o.wav.empty();
  req.griffin_lim_iters = o.gl_iters;
  control::SynthesisResult r = synth->Synthesize(req);
  if (!o.wav.empty()) dsp::WriteWav(o.wav, *r.audio);
  if (!o.mel.empty()) {
    WriteMatrixFile(o.mel, r.mel.frames, service::kMelMagic,
                    BinaryPrecision::kFloat32);
  }
  if (!o.json.empty()) {
    WriteFileBytes(o.json,
                   service::EncodeSynthesisResponse(r, synth->stats(), std::nullopt));
  }
  corpus::ProsodyVector realized =
      control::RealizedProsody(r, synth->stats(), synth->analysis());
  out << "frames " << r.mel.n_frames() << "  phones " << r.durations.size()
      << "\n";
  for (corpus::Feature f : corpus::kAllFeatures) {
    out << "  " << corpus::FeatureName(f) << ": u_used " << r.u_used[f]
        << "  realized " << realized[f] << "\n";
  }
}

void RunSweep(const Options& o, std::ostream& out) {
  auto synth = LoadSynthesizer(o.model, DefaultStats(o));
  eval::SweepSpec spec;
  spec.dimensions = ParseDims(o.dims);
  spec.grid = eval::ParseGrid(o.grid);
  auto tokens = corpus::LoadCorpusTokens(o.corpus);
  if (o.sentences < 1) throw Error("--sentences must be >= 1");
  if (int(tokens.size()) < o.sentences) {
    throw Error("corpus has only " + std::to_string(tokens.size()) +
                " sentences");
  }
  spec.sentences.assign(tokens.begin(), tokens.begin() + o.sentences);
  eval::SweepReport report = eval::RunSweep(*synth, spec);
  eval::EmitReport(report, o.out);
  out << report.syntheses << " syntheses\n";
  for (const auto& [f, rho] : report.spearman) {
    out << "  " << corpus::FeatureName(f) << ": spearman " << rho << "\n";
  }
  out << "wrote " << o.out << "\n";
}

void RunServe(const Options& o, std::ostream& out, std::ostream& err) {
  auto api = std::make_shared<service::Api>();
  service::Server server(api);
  int port = server.Bind(o.host, o.port);
  out << "listening on http://" << o.host << ":" << port << "\n" << std::flush;
  std::string model = o.model, stats = DefaultStats(o);
  std::thread loader([&server, api, model, stats, &err] {
    try {
      api->Publish(LoadSynthesizer(model, stats));
      err << "model ready\n" << std::flush;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n" << std::flush;
      server.Stop();
    }
  });
  server.Listen();
  loader.join();
  if (!api->ready()) throw Error("model failed to load");
}

}  // namespace

int Dispatch(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  Options o;
  CLI::App app{"prosodia: parallel TTS front-end with hierarchical prosody control"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "prosodia 0.1.0");

  auto* gen = app.add_subcommand("gen-corpus", "Render the synthetic toy corpus");
  gen->add_option("--size", o.size, "Number of utterances")->capture_default_str();
  gen->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
  gen->add_option("--out", o.out, "Output directory")->required();

  auto* feat = app.add_subcommand("featurize", "Cache frame-level features");
  feat->add_option("--corpus", o.corpus, "Corpus directory")->required();

  auto* fit = app.add_subcommand("fit-stats", "Fit normalization statistics");
  fit->add_option("--corpus", o.corpus, "Corpus directory")->required();
  fit->add_option("--out", o.out, "Output JSON (default <corpus>/stats.json)");

  auto* train = app.add_subcommand("train", "Train the front-end model");
  train->add_option("--corpus", o.corpus, "Corpus directory")->required();
  train->add_option("--stats", o.stats, "stats.json from fit-stats")->required();
  train->add_option("--config", o.config, "Run config JSON {model, train}");
  train->add_option("--out", o.out, "Output directory")->required();
  train->add_option("--steps", o.steps, "Override train.steps");
  train->add_option("--seed", o.train_seed, "Override train.seed");

  auto* synth = app.add_subcommand("synth", "Synthesize a phone sequence");
  synth->add_option("--model", o.model, "Checkpoint (.pfe1)")->required();
  synth->add_option("--stats", o.stats, "stats.json")->required();
  synth->add_option("--phones", o.phones,
                    "Phone string, or a file holding one")->required();
  synth->add_option("--bias-pitch", o.bias.pitch, "Pitch bias");
  synth->add_option("--bias-pitch-range", o.bias.pitch_range, "Pitch-range bias");
  synth->add_option("--bias-duration", o.bias.duration, "Duration bias");
  synth->add_option("--bias-energy", o.bias.energy, "Energy bias");
  synth->add_option("--bias-tilt", o.bias.tilt, "Spectral-tilt bias");
  synth->add_option("--emphasize-word", o.emphasize_word, "0-based word index");
  synth->add_option("--wav", o.wav, "Write Griffin-Lim audio");
  synth->add_option("--mel", o.mel, "Write the Mel as PMEL float32");
  synth->add_option("--json", o.json, "Write the synthesis JSON");
  synth->add_option("--gl-iters", o.gl_iters, "Griffin-Lim iterations")
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Bias sweep and report");
  sweep->add_option("--model", o.model, "Checkpoint (.pfe1)")->required();
  sweep->add_option("--stats", o.stats, "stats.json (default: next to model)");
  sweep->add_option("--corpus", o.corpus, "Corpus of test sentences")->required();
  sweep->add_option("--dims", o.dims, "Comma list of features, or all")
      ->capture_default_str();
  sweep->add_option("--grid", o.grid, "lo:hi:n or comma list")
      ->capture_default_str();
  sweep->add_option("--sentences", o.sentences, "Sentences from the corpus")
      ->capture_default_str();
  sweep->add_option("--out", o.out, "Report directory")->required();

  auto* serve = app.add_subcommand("serve", "HTTP synthesis service");
  serve->add_option("--model", o.model, "Checkpoint (.pfe1)")->required();
  serve->add_option("--stats", o.stats, "stats.json (default: next to model)");
  serve->add_option("--host", o.host, "Bind address")->capture_default_str();
  serve->add_option("--port", o.port, "TCP port")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) RunGenCorpus(o, out);
    else if (*feat) RunFeaturize(o, out);
    else if (*fit) RunFitStats(o, out);
    else if (*train) RunTrain(o, out, err);
    else if (*synth) RunSynth(o, out);
    else if (*sweep) RunSweep(o, out);
    else if (*serve) RunServe(o, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace prosodia::cli
