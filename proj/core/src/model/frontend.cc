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

#include "prosodia/model/frontend.h"

#include <algorithm>
#include <cmath>

#include "prosodia/common/binary_io.h"
#include "prosodia/common/error.h"

namespace prosodia::model {

using ad::Var;
using corpus::Feature;

namespace {

constexpr int kUttDims = corpus::kNumFeatures;

int Col(Feature f) { return int(f); }

Matrix ColumnOf(const Matrix& m, Feature f) { return m.col(Col(f)); }

Var Conv(Var x, Var w, Var b, int kernel, int dilation) {
  Var cols = kernel == 1 ? x : ad::Im2Col(x, kernel, dilation);
  return ad::AddRow(ad::MatMul(cols, w), b);
}

Var MaybeDropout(Var x, double p, std::mt19937_64* rng) {
  return rng ? ad::Dropout(x, p, *rng) : x;
}

}  // namespace

int QuantizeBucket(double v, const QuantRange& range, int bins) {
  double pos = std::floor((v - range.lo) / (range.hi - range.lo) * bins);
  if (!(pos >= 0.0)) return 0;  // also catches NaN
  return int(std::min(pos, double(bins - 1)));
}

Matrix PositionalEncoding(int n, int dim) {
  Matrix pe(n, dim);
  for (int t = 0; t < n; ++t) {
    for (int c = 0; c < dim; ++c) {
      int i2 = c - c % 2;
      double angle = t / std::pow(10000.0, double(i2) / dim);
      pe(t, c) = c % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

TrainExample MakeTrainExample(const corpus::Utterance& utt,
                              const corpus::CorpusStats& stats) {
  TrainExample ex;
  ex.token_ids = corpus::TokenIds(utt.tokens);
  const int n_tokens = int(utt.tokens.size());
  corpus::PhoneTargets targets = corpus::ImputedPhoneTargets(utt);
  ex.phone_mask.assign(std::size_t(n_tokens), 0.0);
  ex.durations.assign(std::size_t(n_tokens), 0);
  ex.log_duration = Matrix::Zero(n_tokens, 1);
  ex.log_pitch = Matrix::Zero(n_tokens, 1);
  ex.energy = Matrix::Zero(n_tokens, 1);
  std::size_t k = 0;
  for (int i = 0; i < n_tokens; ++i) {
    if (!utt.tokens[std::size_t(i)].is_phone()) continue;
    if (k >= utt.alignment.size()) throw Error(utt.id + ": alignment too short");
    ex.phone_mask[std::size_t(i)] = 1.0;
    ex.durations[std::size_t(i)] = utt.alignment[k].frames();
    ex.log_duration(i, 0) =
        stats.phone_log_duration.Standardize(targets.log_duration[k]);
    ex.log_pitch(i, 0) = stats.phone_log_pitch.Standardize(targets.log_pitch[k]);
    ex.energy(i, 0) = stats.phone_energy.Standardize(targets.energy_db[k]);
    ++k;
  }
  if (k != utt.alignment.size()) throw Error(utt.id + ": alignment too long");
  ex.utterance = stats.norm.Normalize(utt.utt_prosody);
  const int n_mels = utt.mel.n_mels();
  if (int(stats.mel_mean.size()) != n_mels) {
    throw Error("stats Mel size differs from the utterance");
  }
  ex.mel = utt.mel.frames;
  for (int m = 0; m < n_mels; ++m) {
    ex.mel.col(m).array() =
        (ex.mel.col(m).array() - stats.mel_mean[std::size_t(m)]) /
        stats.mel_std[std::size_t(m)];
  }
  return ex;
}

FrontEndModel::FrontEndModel(const ModelConfig& config, std::uint64_t init_seed)
    : config_(config) {
  config_.Validate();
  std::mt19937_64 rng(init_seed);
  Build(&rng);
  params_.RoundToFloat();
}

FrontEndModel::FrontEndModel(const ModelConfig& config,
                             std::span<const float> flat)
    : config_(config) {
  config_.Validate();
  Build(nullptr);
  if (flat.size() != params_.ScalarCount()) {
    throw Error("checkpoint holds " + std::to_string(flat.size()) +
                " parameters but the config needs " +
                std::to_string(params_.ScalarCount()));
  }
  std::size_t at = 0;
  for (int i = 0; i < params_.size(); ++i) {
    Matrix& m = params_.value(i);
    for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = flat[at++];
  }
  if (!params_.AllFinite()) throw Error("checkpoint has non-finite parameters");
}

FrontEndModel::Linear FrontEndModel::AddLinear(const std::string& name,
                                               int fan_in, int out,
                                               std::mt19937_64* rng) {
  Matrix w = Matrix::Zero(fan_in, out);
  if (rng) {
    double a = 1.0 / std::sqrt(double(fan_in));
    std::uniform_real_distribution<double> u(-a, a);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(*rng);
  }
  Linear l;
  l.w = params_.Add(name + ".w", std::move(w));
  l.b = params_.Add(name + ".b", Matrix::Zero(1, out));
  return l;
}

FrontEndModel::Norm FrontEndModel::AddNorm(const std::string& name, int dim) {
  Norm n;
  n.gamma = params_.Add(name + ".gamma", Matrix::Ones(1, dim));
  n.beta = params_.Add(name + ".beta", Matrix::Zero(1, dim));
  return n;
}

int FrontEndModel::AddEmbedding(const std::string& name, int rows, int dim,
                                std::mt19937_64* rng) {
  Matrix e = Matrix::Zero(rows, dim);
  if (rng) {
    std::normal_distribution<double> g(0.0, 0.01);
    for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = g(*rng);
  }
  return params_.Add(name, std::move(e));
}

FrontEndModel::Predictor FrontEndModel::AddPredictor(const std::string& name,
                                                     int in, int out,
                                                     std::mt19937_64* rng) {
  const int k = config_.predictor_kernel, f = config_.predictor_filters;
  Predictor p;
  p.conv1 = AddLinear(name + ".conv1", k * in, f, rng);
  p.ln1 = AddNorm(name + ".ln1", f);
  p.conv2 = AddLinear(name + ".conv2", k * f, f, rng);
  p.ln2 = AddNorm(name + ".ln2", f);
  p.out = AddLinear(name + ".out", f, out, rng);
  return p;
}

void FrontEndModel::Build(std::mt19937_64* rng) {
  const int d = config_.embed_dim;
  const int ek = config_.encoder_conv_kernel, ef = config_.encoder_conv_filters;
  embedding_ = AddEmbedding("embedding", config_.vocab_size, d, rng);
  for (int i = 0; i < config_.encoder_layers; ++i) {
    const std::string base = "encoder." + std::to_string(i);
    EncoderLayer l;
    l.q = AddLinear(base + ".attn.q", d, d, rng);
    l.k = AddLinear(base + ".attn.k", d, d, rng);
    l.v = AddLinear(base + ".attn.v", d, d, rng);
    l.o = AddLinear(base + ".attn.o", d, d, rng);
    l.ln1 = AddNorm(base + ".ln1", d);
    l.conv1 = AddLinear(base + ".conv1", ek * d, ef, rng);
    l.conv2 = AddLinear(base + ".conv2", ek * ef, d, rng);
    l.ln2 = AddNorm(base + ".ln2", d);
    encoder_.push_back(l);
  }
  utt_ = AddPredictor("utterance_adaptor", d, kUttDims, rng);
  dur_ = AddPredictor("duration_predictor", d + 1, 1, rng);
  pitch_ = AddPredictor("pitch_predictor", d + 2, 1, rng);
  energy_ = AddPredictor("energy_predictor", d + 1, 1, rng);
  pitch_embedding_ = AddEmbedding("pitch_embedding", config_.pitch_bins, d, rng);
  energy_embedding_ =
      AddEmbedding("energy_embedding", config_.energy_bins, d, rng);
  tilt_ = AddLinear("tilt_projection", d + 1, d, rng);
  const int f = config_.decoder_filters;
  decoder_in_ = AddLinear("decoder.in", d, f, rng);
  for (int b = 0; b < config_.decoder_blocks; ++b) {
    for (std::size_t j = 0; j < config_.decoder_dilations.size(); ++j) {
      const std::string base =
          "decoder." + std::to_string(b) + "." + std::to_string(j);
      DecoderLayer l;
      l.conv = AddLinear(base + ".conv", config_.decoder_kernel * f, f, rng);
      l.ln = AddNorm(base + ".ln", f);
      l.dilation = config_.decoder_dilations[j];
      decoder_.push_back(l);
    }
  }
  mel_out_ = AddLinear("mel_out", f, config_.n_mels, rng);
}

Var FrontEndModel::Encode(std::span<const int> ids, Binding& p,
                          std::mt19937_64* rng) const {
  if (ids.empty()) throw Error("empty token sequence");
  for (int id : ids) {
    if (id < 0 || id >= config_.vocab_size) {
      throw Error("token id " + std::to_string(id) + " outside the vocabulary");
    }
  }
  const int d = config_.embed_dim, heads = config_.attn_heads, dh = d / heads;
  const double eps = config_.layernorm_eps, drop = config_.dropout;
  ad::Tape& tape = p.tape();
  Var x = ad::GatherRows(p(embedding_), ids);
  x = ad::Add(x, tape.Constant(PositionalEncoding(int(ids.size()), d)));
  for (const EncoderLayer& l : encoder_) {
    Var q = ad::AddRow(ad::MatMul(x, p(l.q.w)), p(l.q.b));
    Var k = ad::AddRow(ad::MatMul(x, p(l.k.w)), p(l.k.b));
    Var v = ad::AddRow(ad::MatMul(x, p(l.v.w)), p(l.v.b));
    std::vector<Var> outs;
    for (int h = 0; h < heads; ++h) {
      Var qh = ad::SliceCols(q, h * dh, dh);
      Var kh = ad::SliceCols(k, h * dh, dh);
      Var vh = ad::SliceCols(v, h * dh, dh);
      Var scores =
          ad::Scale(ad::MatMul(qh, ad::Transpose(kh)), 1.0 / std::sqrt(dh));
      outs.push_back(ad::MatMul(ad::SoftmaxRows(scores), vh));
    }
    Var attn = ad::AddRow(ad::MatMul(ad::ConcatCols(outs), p(l.o.w)), p(l.o.b));
    x = ad::LayerNorm(ad::Add(x, MaybeDropout(attn, drop, rng)), p(l.ln1.gamma),
                      p(l.ln1.beta), eps);
    const int ek = config_.encoder_conv_kernel;
    Var c = ad::Relu(Conv(x, p(l.conv1.w), p(l.conv1.b), ek, 1));
    c = Conv(c, p(l.conv2.w), p(l.conv2.b), ek, 1);
    x = ad::LayerNorm(ad::Add(x, MaybeDropout(c, drop, rng)), p(l.ln2.gamma),
                      p(l.ln2.beta), eps);
  }
  return x;
}

Var FrontEndModel::RunPredictor(const Predictor& pred, Var x, Binding& p,
                                std::mt19937_64* rng) const {
  const int k = config_.predictor_kernel;
  const double eps = config_.layernorm_eps, drop = config_.dropout;
  Var h = ad::Relu(Conv(x, p(pred.conv1.w), p(pred.conv1.b), k, 1));
  h = MaybeDropout(ad::LayerNorm(h, p(pred.ln1.gamma), p(pred.ln1.beta), eps),
                   drop, rng);
  h = ad::Relu(Conv(h, p(pred.conv2.w), p(pred.conv2.b), k, 1));
  h = MaybeDropout(ad::LayerNorm(h, p(pred.ln2.gamma), p(pred.ln2.beta), eps),
                   drop, rng);
  return ad::AddRow(ad::MatMul(h, p(pred.out.w)), p(pred.out.b));
}

FrontEndModel::Heads FrontEndModel::Predict(Var h, const Matrix& cond,
                                            Binding& p,
                                            std::mt19937_64* rng) const {
  ad::Tape& tape = p.tape();
  Heads out;
  std::vector<Var> dur_in = {h, tape.Constant(ColumnOf(cond, Feature::kDuration))};
  out.dur = RunPredictor(dur_, ad::ConcatCols(dur_in), p, rng);
  std::vector<Var> pitch_in = {h, tape.Constant(ColumnOf(cond, Feature::kPitch)),
                               tape.Constant(ColumnOf(cond, Feature::kPitchRange))};
  out.pitch = RunPredictor(pitch_, ad::ConcatCols(pitch_in), p, rng);
  std::vector<Var> energy_in = {h, tape.Constant(ColumnOf(cond, Feature::kEnergy))};
  out.energy = RunPredictor(energy_, ad::ConcatCols(energy_in), p, rng);
  return out;
}

Var FrontEndModel::Adapt(Var h, const Matrix& cond, const Matrix& pitch,
                         const Matrix& energy, Binding& p) const {
  const Eigen::Index n = h.rows();
  std::vector<int> pitch_ids(static_cast<std::size_t>(n)),
      energy_ids(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    pitch_ids[std::size_t(i)] =
        QuantizeBucket(pitch(i, 0), config_.pitch_range, config_.pitch_bins);
    energy_ids[std::size_t(i)] =
        QuantizeBucket(energy(i, 0), config_.energy_range, config_.energy_bins);
  }
  Var x = ad::Add(h, ad::GatherRows(p(pitch_embedding_), pitch_ids));
  x = ad::Add(x, ad::GatherRows(p(energy_embedding_), energy_ids));
  std::vector<Var> parts = {x, p.tape().Constant(ColumnOf(cond, Feature::kTilt))};
  return ad::AddRow(ad::MatMul(ad::ConcatCols(parts), p(tilt_.w)), p(tilt_.b));
}

Var FrontEndModel::Decode(Var h, std::span<const int> durations, Binding& p,
                          std::mt19937_64* rng) const {
  Var x = ad::RepeatRows(h, durations);
  if (x.rows() == 0) throw Error("all durations are zero");
  x = ad::Add(x, p.tape().Constant(
                     PositionalEncoding(int(x.rows()), config_.embed_dim)));
  x = ad::AddRow(ad::MatMul(x, p(decoder_in_.w)), p(decoder_in_.b));
  for (const DecoderLayer& l : decoder_) {
    Var c = ad::Relu(Conv(x, p(l.conv.w), p(l.conv.b), config_.decoder_kernel,
                          l.dilation));
    x = ad::LayerNorm(ad::Add(x, MaybeDropout(c, config_.dropout, rng)),
                      p(l.ln.gamma), p(l.ln.beta), config_.layernorm_eps);
  }
  return ad::AddRow(ad::MatMul(x, p(mel_out_.w)), p(mel_out_.b));
}

TrainForward FrontEndModel::ForwardTrain(const TrainExample& ex, Binding& p,
                                         std::mt19937_64* rng) const {
  const std::size_t n = ex.token_ids.size();
  if (ex.phone_mask.size() != n || ex.durations.size() != n ||
      std::size_t(ex.log_duration.rows()) != n ||
      std::size_t(ex.log_pitch.rows()) != n ||
      std::size_t(ex.energy.rows()) != n) {
    throw Error("training example has inconsistent token counts");
  }
  long frames = 0;
  for (int d : ex.durations) frames += d;
  if (frames != ex.mel.rows()) {
    throw Error("frame-count mismatch: durations sum to " +
                std::to_string(frames) + " but the Mel target has " +
                std::to_string(ex.mel.rows()) + " frames");
  }
  if (ex.mel.cols() != config_.n_mels) throw Error("Mel target has wrong width");

  Var h = Encode(ex.token_ids, p, rng);
  Var utt = RunPredictor(utt_, h, p, rng);
  Matrix cond(Eigen::Index(n), kUttDims);
  for (int c = 0; c < kUttDims; ++c) cond.col(c).setConstant(ex.utterance.values[c]);
  Heads heads = Predict(h, cond, p, rng);
  Var adapted = Adapt(h, cond, ex.log_pitch, ex.energy, p);
  Var mel = Decode(adapted, ex.durations, p, rng);

  std::vector<double> all(n, 1.0), frame_mask(std::size_t(frames), 1.0);
  Var l_mel = ad::MaskedMse(mel, ex.mel, frame_mask);
  Var l_dur = ad::MaskedMse(heads.dur, ex.log_duration, ex.phone_mask);
  Var l_pitch = ad::MaskedMse(heads.pitch, ex.log_pitch, ex.phone_mask);
  Var l_energy = ad::MaskedMse(heads.energy, ex.energy, ex.phone_mask);
  Var l_utt = ad::MaskedMse(utt, cond, all);
  const LossWeights& w = config_.loss_weights;
  std::vector<Var> terms = {ad::Scale(l_mel, w.mel), ad::Scale(l_dur, w.duration),
                            ad::Scale(l_pitch, w.pitch),
                            ad::Scale(l_energy, w.energy),
                            ad::Scale(l_utt, w.utterance)};
  TrainForward out;
  out.total = ad::SumScalars(terms);
  out.losses = {l_mel.value()(0, 0),   l_dur.value()(0, 0),
                l_pitch.value()(0, 0), l_energy.value()(0, 0),
                l_utt.value()(0, 0),   out.total.value()(0, 0)};
  out.output = {mel.value(), heads.dur.value(), heads.pitch.value(),
                heads.energy.value(), utt.value()};
  return out;
}

InferResult FrontEndModel::ForwardInfer(std::span<const int> token_ids,
                                        std::span<const double> phone_mask,
                                        const corpus::MeanStd& log_duration,
                                        const InferControls& controls) const {
  const Eigen::Index n = Eigen::Index(token_ids.size());
  if (phone_mask.size() != token_ids.size()) {
    throw Error("phone mask length differs from the token count");
  }
  if (controls.phone_bias.size() != 0 &&
      (controls.phone_bias.rows() != n || controls.phone_bias.cols() != kUttDims)) {
    throw Error("phone bias must be one row of 5 per token");
  }
  for (double b : controls.bias.values) {
    if (!std::isfinite(b)) throw Error("bias values must be finite");
  }
  if (!params_.AllFinite()) throw Error("model has non-finite parameters");

  ad::Tape tape(/*record=*/false);
  Binding p(params_, tape);
  Var h = Encode(token_ids, p, nullptr);
  Var utt = RunPredictor(utt_, h, p, nullptr);

  InferResult r;
  RowVector u_hat = utt.value().colwise().mean();
  Matrix cond(n, kUttDims);
  for (int c = 0; c < kUttDims; ++c) {
    r.u_hat.values[c] = u_hat(c);
    r.u_used.values[c] = u_hat(c) + controls.bias.values[c];
    cond.col(c).setConstant(r.u_used.values[c]);
  }
  if (controls.phone_bias.size() != 0) cond += controls.phone_bias;

  Heads heads = Predict(h, cond, p, nullptr);
  Matrix pitch = heads.pitch.value(), energy = heads.energy.value();
  r.durations.assign(std::size_t(n), 0);
  bool any_phone = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (phone_mask[std::size_t(i)] == 0.0) {
      pitch(i, 0) = 0.0;
      energy(i, 0) = 0.0;
      continue;
    }
    any_phone = true;
    double frames =
        std::exp(log_duration.Destandardize(heads.dur.value()(i, 0)));
    double rounded = std::round(std::min(frames, 1e6));
    r.durations[std::size_t(i)] = std::max(1, int(rounded));
  }
  if (!any_phone) throw Error("token sequence has no phones");
  Var adapted = Adapt(h, cond, pitch, energy, p);
  Var mel = Decode(adapted, r.durations, p, nullptr);
  r.output = {mel.value(), heads.dur.value(), heads.pitch.value(),
              heads.energy.value(), utt.value()};
  return r;
}

InferResult FrontEndModel::ForwardInfer(
    const std::vector<corpus::PhoneToken>& tokens,
    const corpus::MeanStd& log_duration, const InferControls& controls) const {
  std::vector<int> ids = corpus::TokenIds(tokens);
  std::vector<double> mask;
  for (const auto& t : tokens) mask.push_back(t.is_phone() ? 1.0 : 0.0);
  return ForwardInfer(ids, mask, log_duration, controls);
}

std::size_t ParameterCount(const ModelConfig& config) {
  return FrontEndModel(config, std::uint64_t{0}).params().ScalarCount();
}

std::string EncodeCheckpoint(const FrontEndModel& model) {
  std::string config = model.config().ToJson();
  std::string out(kCheckpointMagic, 4);
  AppendU32(&out, std::uint32_t(config.size()));
  out += config;
  AppendU64(&out, model.params().ScalarCount());
  for (int i = 0; i < model.params().size(); ++i) {
    const Matrix& m = model.params().value(i);
    for (Eigen::Index j = 0; j < m.size(); ++j) AppendF32(&out, float(m.data()[j]));
  }
  return out;
}

FrontEndModel DecodeCheckpoint(std::string_view bytes) {
  if (bytes.size() < 8 || bytes.substr(0, 4) != std::string_view(kCheckpointMagic, 4)) {
    throw Error("not a model checkpoint (bad magic)");
  }
  std::uint32_t config_len = LoadU32(bytes, 4);
  if (bytes.size() < 8 + std::size_t(config_len) + 8) {
    throw Error("truncated checkpoint header");
  }
  ModelConfig config =
      ModelConfig::FromJson(bytes.substr(8, std::size_t(config_len)));
  std::size_t at = 8 + std::size_t(config_len);
  std::uint64_t count = LoadU64(bytes, at);
  at += 8;
  if (bytes.size() - at != count * 4) {
    throw Error("checkpoint body size does not match its parameter count");
  }
  std::vector<float> flat(count);
  for (std::uint64_t i = 0; i < count; ++i) flat[i] = LoadF32(bytes, at + 4 * i);
  return FrontEndModel(config, flat);
}

void SaveCheckpoint(const std::filesystem::path& path,
                    const FrontEndModel& model) {
  WriteFileBytes(path, EncodeCheckpoint(model));
}

FrontEndModel LoadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(ReadFileBytes(path));
}

}  // namespace prosodia::model
