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

#ifndef PROSODIA_MODEL_AUTODIFF_H_
#define PROSODIA_MODEL_AUTODIFF_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "prosodia/common/matrix.h"

// A minimal reverse-mode differentiation core over dense 2-D matrices.
// Nodes live on a Tape in creation order, which is already a topological
// order, so Backward() simply walks the tape in reverse.
namespace prosodia::ad {

class Tape;

struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows into it
  bool requires_grad = false;
  Tape* tape = nullptr;
  std::function<void()> backward;
};

class Var {
 public:
  Var() = default;
  explicit Var(Node* node) : node_(node) {}

  const Matrix& value() const { return node_->value; }
  // Accumulator for d(loss)/d(this), zero-initialized on first use.
  Matrix& grad() const;
  bool requires_grad() const { return node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  Tape* tape() const { return node_->tape; }
  Node* node() const { return node_; }
  bool valid() const { return node_ != nullptr; }

 private:
  Node* node_ = nullptr;
};

class Tape {
 public:
  // With record == false no backward closures are kept: a pure forward.
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var Constant(Matrix value);
  // A differentiable input (requires grad when recording).
  Var Leaf(Matrix value);
  // Output of an op over `inputs`; requires grad if any input does.
  Var Emit(Matrix value, std::initializer_list<Var> inputs);
  Var Emit(Matrix value, std::span<const Var> inputs);
  static void SetBackward(Var out, std::function<void()> fn);

  // Seeds d(loss)/d(loss) = 1 for a 1x1 loss and back-propagates.
  void Backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  bool record_;
  std::deque<Node> nodes_;
};

Var MatMul(Var a, Var b);
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);  // elementwise
Var Scale(Var a, double s);
// x (r x c) + row (1 x c) broadcast over rows.
Var AddRow(Var x, Var row);
Var Relu(Var x);
// Row-wise normalization with learned gamma/beta (1 x c each).
Var LayerNorm(Var x, Var gamma, Var beta, double eps);
Var SoftmaxRows(Var x);
Var Transpose(Var x);
// out.row(i) = table.row(ids[i]).
Var GatherRows(Var table, std::span<const int> ids);
// Row i repeated counts[i] times, in order. Zero counts drop the row.
Var RepeatRows(Var x, std::span<const int> counts);
Var ConcatCols(std::span<const Var> parts);
Var SliceCols(Var x, Eigen::Index start, Eigen::Index n);
// Rows of k dilated taps, "same" zero padding: out(t, j*c + i) =
// x(t + (j - (k-1)/2) * dilation, i). k must be odd.
Var Im2Col(Var x, int kernel, int dilation);
// Inverted dropout; identity when p == 0.
Var Dropout(Var x, double p, std::mt19937_64& rng);
// Mean of (pred - target)^2 over rows with mask[r] != 0 and all columns.
// Zero when the mask is empty.
Var MaskedMse(Var pred, const Matrix& target, std::span<const double> mask);
// Sum of 1x1 values.
Var SumScalars(std::span<const Var> parts);

}  // namespace prosodia::ad

#endif  // PROSODIA_MODEL_AUTODIFF_H_
