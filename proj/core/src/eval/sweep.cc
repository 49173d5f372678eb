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

#include "prosodia/eval/sweep.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>

#include "prosodia/common/binary_io.h"
#include "prosodia/common/error.h"
#include "prosodia/common/parallel.h"

namespace prosodia::eval {

using corpus::Feature;

namespace {

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

bool OnGrid(const std::vector<double>& grid, double v) {
  return std::find(grid.begin(), grid.end(), v) != grid.end();
}

std::vector<double> AverageRanks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    double avg = 0.5 * double(i + j);
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
    i = j + 1;
  }
  return rank;
}

}  // namespace

void SweepSpec::Validate() const {
  if (dimensions.empty()) throw Error("sweep: no dimensions");
  if (grid.empty()) throw Error("sweep: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw Error("sweep: non-finite grid value");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw Error("sweep: grid must be strictly increasing");
    }
  }
  if (sentences.empty()) throw Error("sweep: no sentences");
  for (std::size_t i = 0; i < dimensions.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (dimensions[i] == dimensions[j]) throw Error("sweep: repeated dimension");
    }
  }
}

int SynthesisCount(const SweepSpec& spec) {
  const int n = int(spec.sentences.size());
  const int dims = int(spec.dimensions.size());
  int total = dims * int(spec.grid.size()) * n;
  if (OnGrid(spec.grid, 0.0)) total -= (dims - 1) * n;
  return total;
}

double SpearmanRho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("spearman: length mismatch");
  if (x.size() < 2) throw Error("spearman: needs at least two points");
  std::vector<double> rx = AverageRanks(x), ry = AverageRanks(y);
  const double n = double(x.size());
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("spearman: constant input");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> ParseGrid(std::string_view text) {
  auto parse = [&](std::string s) {
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw Error("grid: cannot parse '" + s + "'");
    }
  };
  std::string s(text);
  std::vector<double> out;
  if (std::count(s.begin(), s.end(), ':') == 2) {
    std::size_t a = s.find(':'), b = s.find(':', a + 1);
    double lo = parse(s.substr(0, a)), hi = parse(s.substr(a + 1, b - a - 1));
    std::string count_text = s.substr(b + 1);
    double count = parse(count_text);
    if (count != std::floor(count) || count < 1) {
      throw Error("grid: point count must be a positive integer");
    }
    int n = int(count);
    if (n == 1) {
      if (lo != hi) throw Error("grid: one point needs lo == hi");
      return {lo};
    }
    for (int i = 0; i < n; ++i) {
      // Endpoints exact; interior points snapped so the centre is exactly 0
      // for symmetric grids.
      double t = double(i) / double(n - 1);
      double v = i == n - 1 ? hi : lo + (hi - lo) * t;
      if (std::abs(v) < 1e-12 * std::max(std::abs(lo), std::abs(hi))) v = 0.0;
      out.push_back(v);
    }
  } else {
    std::size_t start = 0;
    while (start <= s.size()) {
      std::size_t comma = s.find(',', start);
      if (comma == std::string::npos) comma = s.size();
      out.push_back(parse(s.substr(start, comma - start)));
      start = comma + 1;
    }
  }
  SweepSpec check;
  check.grid = out;
  check.sentences.resize(1);
  check.Validate();
  return out;
}

SweepReport RunSweep(const control::Synthesizer& synth, const SweepSpec& spec) {
  spec.Validate();
  const std::size_t n = spec.sentences.size();
  const bool share_zero = OnGrid(spec.grid, 0.0);

  // One job per distinct (dimension, bias); the shared zero job keeps the
  // first dimension's slot and is reused by the others.
  struct Job {
    Feature dim;
    double bias;
  };
  std::vector<Job> jobs;
  std::map<std::pair<int, std::size_t>, std::size_t> job_of;
  std::optional<std::size_t> zero_job;
  for (Feature dim : spec.dimensions) {
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
      double b = spec.grid[g];
      if (share_zero && b == 0.0 && zero_job) {
        job_of[{int(dim), g}] = *zero_job;
        continue;
      }
      job_of[{int(dim), g}] = jobs.size();
      if (share_zero && b == 0.0) zero_job = jobs.size();
      jobs.push_back({dim, b});
    }
  }

  std::vector<corpus::ProsodyVector> realized(jobs.size() * n);
  ParallelFor(jobs.size() * n, [&](std::size_t k) {
    const Job& job = jobs[k / n];
    control::SynthesisRequest req;
    req.tokens = spec.sentences[k % n];
    req.bias = control::BiasSpec::Single(job.dim, job.bias);
    control::SynthesisResult r = synth.Synthesize(req);
    realized[k] = control::RealizedProsody(r, synth.stats(), synth.analysis());
    for (double v : realized[k].values) {
      if (!std::isfinite(v)) throw Error("sweep: non-finite realized feature");
    }
  });

  SweepReport report;
  report.syntheses = int(jobs.size() * n);
  for (Feature dim : spec.dimensions) {
    std::vector<double> xs, ys;
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
      std::size_t j = job_of.at({int(dim), g});
      SweepPoint p;
      p.dimension = dim;
      p.bias = spec.grid[g];
      p.n = int(n);
      for (std::size_t s = 0; s < n; ++s) {
        double v = realized[j * n + s][dim];
        p.values.push_back(v);
        xs.push_back(p.bias);
        ys.push_back(v);
      }
      p.mean = std::accumulate(p.values.begin(), p.values.end(), 0.0) / double(n);
      double var = 0.0;
      for (double v : p.values) var += (v - p.mean) * (v - p.mean);
      p.std = std::sqrt(var / double(n));
      report.points.push_back(std::move(p));
    }
    if (xs.size() >= 2 && spec.grid.size() >= 2) {
      double rho;
      try {
        rho = SpearmanRho(xs, ys);
      } catch (const Error&) {
        rho = 0.0;  // a constant realized feature carries no ordering
      }
      report.spearman.push_back({dim, rho});
    }
    if (OnGrid(spec.grid, -1.0) && OnGrid(spec.grid, 0.0) &&
        OnGrid(spec.grid, 1.0)) {
      Endpoints e;
      e.dimension = dim;
      const double at[3] = {-1.0, 0.0, 1.0};
      for (int i = 0; i < 3; ++i) {
        for (const SweepPoint& p : report.points) {
          if (p.dimension == dim && p.bias == at[i]) {
            e.values[std::size_t(i)] =
                corpus::Denormalize(p.mean, synth.stats().norm[dim]);
          }
        }
      }
      report.endpoints.push_back(e);
    }
  }
  return report;
}

std::string FormatSweepCsv(const SweepReport& report) {
  std::string out = "dimension,bias,mean,std,n\n";
  for (const SweepPoint& p : report.points) {
    out += std::string(corpus::FeatureName(p.dimension)) + "," + Num(p.bias) +
           "," + Num(p.mean) + "," + Num(p.std) + "," + std::to_string(p.n) +
           "\n";
  }
  return out;
}

std::string FormatEndpointsCsv(const SweepReport& report) {
  std::string out = "dimension,value_minus1,value_0,value_plus1\n";
  for (const Endpoints& e : report.endpoints) {
    out += std::string(corpus::FeatureName(e.dimension)) + "," +
           Num(e.values[0]) + "," + Num(e.values[1]) + "," + Num(e.values[2]) +
           "\n";
  }
  return out;
}

std::string RenderSweepSvg(const SweepReport& report, Feature dim) {
  std::vector<const SweepPoint*> pts;
  for (const SweepPoint& p : report.points) {
    if (p.dimension == dim) pts.push_back(&p);
  }
  if (pts.empty()) throw Error("no sweep points for this dimension");
  const double w = 480, h = 320, m = 48;
  double x0 = pts.front()->bias, x1 = pts.back()->bias;
  double y0 = 0.0, y1 = 0.0;
  for (const SweepPoint* p : pts) {
    y0 = std::min({y0, p->mean - p->std, p->bias});
    y1 = std::max({y1, p->mean + p->std, p->bias});
  }
  if (x1 == x0) {
    x0 -= 1.0;
    x1 += 1.0;
  }
  if (y1 == y0) y1 = y0 + 1.0;
  auto sx = [&](double x) { return m + (x - x0) / (x1 - x0) * (w - 2 * m); };
  auto sy = [&](double y) { return h - m - (y - y0) / (y1 - y0) * (h - 2 * m); };
  std::string name(corpus::FeatureName(dim));
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(w) +
                  "\" height=\"" + Num(h) + "\" font-family=\"sans-serif\" "
                  "font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + Num(w / 2) + "\" y=\"20\" text-anchor=\"middle\">" + name +
       ": realized vs bias</text>\n";
  s += "<line x1=\"" + Num(m) + "\" y1=\"" + Num(h - m) + "\" x2=\"" +
       Num(w - m) + "\" y2=\"" + Num(h - m) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + Num(m) + "\" y1=\"" + Num(m) + "\" x2=\"" + Num(m) +
       "\" y2=\"" + Num(h - m) + "\" stroke=\"black\"/>\n";
  s += "<text x=\"" + Num(w / 2) + "\" y=\"" + Num(h - 12) +
       "\" text-anchor=\"middle\">bias</text>\n";
  s += "<text x=\"14\" y=\"" + Num(h / 2) + "\" transform=\"rotate(-90 14 " +
       Num(h / 2) + ")\" text-anchor=\"middle\">realized (normalized)</text>\n";
  // Identity reference.
  s += "<line x1=\"" + Num(sx(x0)) + "\" y1=\"" + Num(sy(x0)) + "\" x2=\"" +
       Num(sx(x1)) + "\" y2=\"" + Num(sy(x1)) +
       "\" stroke=\"#bbb\" stroke-dasharray=\"4 4\"/>\n";
  std::string line;
  for (const SweepPoint* p : pts) {
    double cx = sx(p->bias);
    s += "<line x1=\"" + Num(cx) + "\" y1=\"" + Num(sy(p->mean - p->std)) +
         "\" x2=\"" + Num(cx) + "\" y2=\"" + Num(sy(p->mean + p->std)) +
         "\" stroke=\"#1f77b4\"/>\n";
    s += "<circle cx=\"" + Num(cx) + "\" cy=\"" + Num(sy(p->mean)) +
         "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    line += (line.empty() ? "" : " ") + Num(cx) + "," + Num(sy(p->mean));
  }
  s += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"#1f77b4\"/>\n";
  s += "<text x=\"" + Num(m) + "\" y=\"" + Num(h - m + 16) +
       "\" text-anchor=\"middle\">" + Num(x0) + "</text>\n";
  s += "<text x=\"" + Num(w - m) + "\" y=\"" + Num(h - m + 16) +
       "\" text-anchor=\"middle\">" + Num(x1) + "</text>\n";
  s += "<text x=\"" + Num(m - 4) + "\" y=\"" + Num(sy(y1) + 4) +
       "\" text-anchor=\"end\">" + Num(y1) + "</text>\n";
  s += "<text x=\"" + Num(m - 4) + "\" y=\"" + Num(sy(y0) + 4) +
       "\" text-anchor=\"end\">" + Num(y0) + "</text>\n";
  s += "</svg>\n";
  return s;
}

void EmitReport(const SweepReport& report,
                const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());
  WriteFileBytes(out_dir / "sweep.csv", FormatSweepCsv(report));
  WriteFileBytes(out_dir / "endpoints.csv", FormatEndpointsCsv(report));
  std::vector<Feature> dims;
  for (const SweepPoint& p : report.points) {
    if (std::find(dims.begin(), dims.end(), p.dimension) == dims.end()) {
      dims.push_back(p.dimension);
    }
  }
  for (Feature d : dims) {
    WriteFileBytes(out_dir / ("sweep_" + std::string(corpus::FeatureName(d)) + ".svg"),
                   RenderSweepSvg(report, d));
  }
}

}  // namespace prosodia::eval
