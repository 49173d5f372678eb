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

#include "prosodia/model/autodiff.h"

#include <cmath>
#include <string>

#include "prosodia/common/error.h"

namespace prosodia::ad {

namespace {

void CheckSameTape(Var a, Var b) {
  if (a.tape() != b.tape()) throw Error("autodiff: operands on different tapes");
}

void CheckShape(bool ok, const char* op) {
  if (!ok) throw Error(std::string("autodiff: shape mismatch in ") + op);
}

}  // namespace

Matrix& Var::grad() const {
  if (node_->grad.size() == 0) {
    node_->grad = Matrix::Zero(node_->value.rows(), node_->value.cols());
  }
  return node_->grad;
}

Var Tape::Constant(Matrix value) {
  Node& n = nodes_.emplace_back();
  n.value = std::move(value);
  n.tape = this;
  return Var(&n);
}

Var Tape::Leaf(Matrix value) {
  Var v = Constant(std::move(value));
  v.node()->requires_grad = record_;
  return v;
}

Var Tape::Emit(Matrix value, std::span<const Var> inputs) {
  bool needs = false;
  for (Var in : inputs) needs = needs || in.requires_grad();
  Var v = Constant(std::move(value));
  v.node()->requires_grad = record_ && needs;
  return v;
}

Var Tape::Emit(Matrix value, std::initializer_list<Var> inputs) {
  return Emit(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()));
}

void Tape::SetBackward(Var out, std::function<void()> fn) {
  if (out.requires_grad()) out.node()->backward = std::move(fn);
}

void Tape::Backward(Var loss) {
  if (loss.tape() != this) throw Error("autodiff: loss from another tape");
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw Error("autodiff: Backward needs a scalar loss");
  }
  if (!record_) throw Error("autodiff: tape was not recording");
  loss.grad()(0, 0) += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->backward && it->grad.size() != 0) it->backward();
  }
}

Var MatMul(Var a, Var b) {
  CheckSameTape(a, b);
  CheckShape(a.cols() == b.rows(), "MatMul");
  Matrix v(a.rows(), b.cols());
  v.noalias() = a.value() * b.value();
  Var out = a.tape()->Emit(std::move(v), {a, b});
  Tape::SetBackward(out, [a, b, out] {
    if (a.requires_grad()) a.grad().noalias() += out.grad() * b.value().transpose();
    if (b.requires_grad()) b.grad().noalias() += a.value().transpose() * out.grad();
  });
  return out;
}

Var Add(Var a, Var b) {
  CheckSameTape(a, b);
  CheckShape(a.rows() == b.rows() && a.cols() == b.cols(), "Add");
  Var out = a.tape()->Emit(a.value() + b.value(), {a, b});
  Tape::SetBackward(out, [a, b, out] {
    if (a.requires_grad()) a.grad() += out.grad();
    if (b.requires_grad()) b.grad() += out.grad();
  });
  return out;
}

Var Sub(Var a, Var b) {
  CheckSameTape(a, b);
  CheckShape(a.rows() == b.rows() && a.cols() == b.cols(), "Sub");
  Var out = a.tape()->Emit(a.value() - b.value(), {a, b});
  Tape::SetBackward(out, [a, b, out] {
    if (a.requires_grad()) a.grad() += out.grad();
    if (b.requires_grad()) b.grad() -= out.grad();
  });
  return out;
}

Var Mul(Var a, Var b) {
  CheckSameTape(a, b);
  CheckShape(a.rows() == b.rows() && a.cols() == b.cols(), "Mul");
  Var out = a.tape()->Emit(a.value().cwiseProduct(b.value()), {a, b});
  Tape::SetBackward(out, [a, b, out] {
    if (a.requires_grad()) a.grad() += out.grad().cwiseProduct(b.value());
    if (b.requires_grad()) b.grad() += out.grad().cwiseProduct(a.value());
  });
  return out;
}

Var Scale(Var a, double s) {
  Var out = a.tape()->Emit(a.value() * s, {a});
  Tape::SetBackward(out, [a, out, s] { a.grad() += out.grad() * s; });
  return out;
}

Var AddRow(Var x, Var row) {
  CheckSameTape(x, row);
  CheckShape(row.rows() == 1 && row.cols() == x.cols(), "AddRow");
  Matrix v = x.value();
  v.rowwise() += row.value().row(0);
  Var out = x.tape()->Emit(std::move(v), {x, row});
  Tape::SetBackward(out, [x, row, out] {
    if (x.requires_grad()) x.grad() += out.grad();
    if (row.requires_grad()) row.grad() += out.grad().colwise().sum();
  });
  return out;
}

Var Relu(Var x) {
  Var out = x.tape()->Emit(x.value().cwiseMax(0.0), {x});
  Tape::SetBackward(out, [x, out] {
    x.grad() += (x.value().array() > 0.0).select(out.grad(), 0.0);
  });
  return out;
}

Var LayerNorm(Var x, Var gamma, Var beta, double eps) {
  CheckSameTape(x, gamma);
  CheckSameTape(x, beta);
  const Eigen::Index c = x.cols();
  CheckShape(gamma.rows() == 1 && gamma.cols() == c && beta.rows() == 1 &&
                 beta.cols() == c,
             "LayerNorm");
  Matrix xhat(x.rows(), c);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mu = x.value().row(r).mean();
    double var = (x.value().row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.value().row(r).array() - mu) * inv_std(r);
  }
  Matrix v = xhat;
  v.array().rowwise() *= gamma.value().row(0).array();
  v.rowwise() += beta.value().row(0);
  Var out = x.tape()->Emit(std::move(v), {x, gamma, beta});
  Tape::SetBackward(out, [x, gamma, beta, out, xhat = std::move(xhat),
                          inv_std = std::move(inv_std)] {
    const Matrix& dy = out.grad();
    if (gamma.requires_grad()) {
      gamma.grad() += dy.cwiseProduct(xhat).colwise().sum();
    }
    if (beta.requires_grad()) beta.grad() += dy.colwise().sum();
    if (!x.requires_grad()) return;
    const double n = double(xhat.cols());
    Matrix& dx = x.grad();
    for (Eigen::Index r = 0; r < xhat.rows(); ++r) {
      RowVector dxhat =
          dy.row(r).cwiseProduct(gamma.value().row(0));
      double s1 = dxhat.sum();
      double s2 = dxhat.dot(xhat.row(r));
      dx.row(r).array() += inv_std(r) / n *
                           (n * dxhat.array() - s1 - xhat.row(r).array() * s2);
    }
  });
  return out;
}

Var SoftmaxRows(Var x) {
  Matrix v(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double m = x.value().row(r).maxCoeff();
    v.row(r) = (x.value().row(r).array() - m).exp();
    v.row(r) /= v.row(r).sum();
  }
  Var out = x.tape()->Emit(std::move(v), {x});
  Tape::SetBackward(out, [x, out] {
    const Matrix& y = out.value();
    const Matrix& dy = out.grad();
    Matrix& dx = x.grad();
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      double s = dy.row(r).dot(y.row(r));
      dx.row(r).array() += y.row(r).array() * (dy.row(r).array() - s);
    }
  });
  return out;
}

Var Transpose(Var x) {
  Var out = x.tape()->Emit(x.value().transpose(), {x});
  Tape::SetBackward(out, [x, out] { x.grad() += out.grad().transpose(); });
  return out;
}

Var GatherRows(Var table, std::span<const int> ids) {
  Matrix v(Eigen::Index(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      throw Error("autodiff: GatherRows index " + std::to_string(ids[i]) +
                  " out of range");
    }
    v.row(Eigen::Index(i)) = table.value().row(ids[i]);
  }
  Var out = table.tape()->Emit(std::move(v), {table});
  std::vector<int> idx(ids.begin(), ids.end());
  Tape::SetBackward(out, [table, out, idx = std::move(idx)] {
    Matrix& g = table.grad();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      g.row(idx[i]) += out.grad().row(Eigen::Index(i));
    }
  });
  return out;
}

Var RepeatRows(Var x, std::span<const int> counts) {
  CheckShape(Eigen::Index(counts.size()) == x.rows(), "RepeatRows");
  Eigen::Index total = 0;
  for (int c : counts) {
    if (c < 0) throw Error("autodiff: negative repeat count");
    total += c;
  }
  Matrix v(total, x.cols());
  Eigen::Index t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (int k = 0; k < counts[i]; ++k) v.row(t++) = x.value().row(Eigen::Index(i));
  }
  Var out = x.tape()->Emit(std::move(v), {x});
  std::vector<int> cnt(counts.begin(), counts.end());
  Tape::SetBackward(out, [x, out, cnt = std::move(cnt)] {
    Matrix& g = x.grad();
    Eigen::Index t = 0;
    for (std::size_t i = 0; i < cnt.size(); ++i) {
      for (int k = 0; k < cnt[i]; ++k) g.row(Eigen::Index(i)) += out.grad().row(t++);
    }
  });
  return out;
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw Error("autodiff: ConcatCols of nothing");
  Eigen::Index cols = 0;
  for (Var p : parts) {
    CheckSameTape(parts[0], p);
    CheckShape(p.rows() == parts[0].rows(), "ConcatCols");
    cols += p.cols();
  }
  Matrix v(parts[0].rows(), cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    v.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  Var out = parts[0].tape()->Emit(std::move(v), parts);
  std::vector<Var> in(parts.begin(), parts.end());
  Tape::SetBackward(out, [out, in = std::move(in)] {
    Eigen::Index c = 0;
    for (Var p : in) {
      if (p.requires_grad()) p.grad() += out.grad().middleCols(c, p.cols());
      c += p.cols();
    }
  });
  return out;
}

Var SliceCols(Var x, Eigen::Index start, Eigen::Index n) {
  CheckShape(start >= 0 && n >= 0 && start + n <= x.cols(), "SliceCols");
  Var out = x.tape()->Emit(x.value().middleCols(start, n), {x});
  Tape::SetBackward(out, [x, out, start, n] {
    x.grad().middleCols(start, n) += out.grad();
  });
  return out;
}

Var Im2Col(Var x, int kernel, int dilation) {
  if (kernel < 1 || kernel % 2 == 0 || dilation < 1) {
    throw Error("autodiff: Im2Col needs an odd kernel and dilation >= 1");
  }
  const Eigen::Index t_len = x.rows(), c = x.cols();
  const int half = (kernel - 1) / 2;
  Matrix v = Matrix::Zero(t_len, kernel * c);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    for (int j = 0; j < kernel; ++j) {
      Eigen::Index src = t + Eigen::Index(j - half) * dilation;
      if (src >= 0 && src < t_len) v.block(t, j * c, 1, c) = x.value().row(src);
    }
  }
  Var out = x.tape()->Emit(std::move(v), {x});
  Tape::SetBackward(out, [x, out, kernel, dilation, half] {
    Matrix& g = x.grad();
    const Eigen::Index t_len = g.rows(), c = g.cols();
    for (Eigen::Index t = 0; t < t_len; ++t) {
      for (int j = 0; j < kernel; ++j) {
        Eigen::Index src = t + Eigen::Index(j - half) * dilation;
        if (src >= 0 && src < t_len) g.row(src) += out.grad().block(t, j * c, 1, c);
      }
    }
  });
  return out;
}

Var Dropout(Var x, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return x;
  if (p >= 1.0) throw Error("autodiff: dropout rate must be below 1");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix mask(x.rows(), x.cols());
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = u(rng) < p ? 0.0 : keep;
  }
  Var out = x.tape()->Emit(x.value().cwiseProduct(mask), {x});
  Tape::SetBackward(out, [x, out, mask = std::move(mask)] {
    x.grad() += out.grad().cwiseProduct(mask);
  });
  return out;
}

Var MaskedMse(Var pred, const Matrix& target, std::span<const double> mask) {
  CheckShape(pred.rows() == target.rows() && pred.cols() == target.cols() &&
                 Eigen::Index(mask.size()) == pred.rows(),
             "MaskedMse");
  Eigen::VectorXd m(pred.rows());
  double count = 0.0;
  for (Eigen::Index r = 0; r < pred.rows(); ++r) {
    m(r) = mask[std::size_t(r)] != 0.0 ? 1.0 : 0.0;
    count += m(r);
  }
  const double denom = count * double(pred.cols());
  Matrix diff = pred.value() - target;
  diff.array().colwise() *= m.array();
  Matrix v(1, 1);
  v(0, 0) = denom > 0.0 ? diff.squaredNorm() / denom : 0.0;
  Var out = pred.tape()->Emit(std::move(v), {pred});
  Tape::SetBackward(out, [pred, out, diff = std::move(diff), denom] {
    if (denom > 0.0) pred.grad() += diff * (2.0 * out.grad()(0, 0) / denom);
  });
  return out;
}

Var SumScalars(std::span<const Var> parts) {
  if (parts.empty()) throw Error("autodiff: SumScalars of nothing");
  Matrix v = Matrix::Zero(1, 1);
  for (Var p : parts) {
    CheckShape(p.rows() == 1 && p.cols() == 1, "SumScalars");
    CheckSameTape(parts[0], p);
    v(0, 0) += p.value()(0, 0);
  }
  Var out = parts[0].tape()->Emit(std::move(v), parts);
  std::vector<Var> in(parts.begin(), parts.end());
  Tape::SetBackward(out, [out, in = std::move(in)] {
    for (Var p : in) {
      if (p.requires_grad()) p.grad() += out.grad();
    }
  });
  return out;
}

}  // namespace prosodia::ad
