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

#ifndef PROSODIA_MODEL_PARAMETERS_H_
#define PROSODIA_MODEL_PARAMETERS_H_

#include <string>
#include <vector>

#include "prosodia/common/matrix.h"
#include "prosodia/model/autodiff.h"

namespace prosodia::model {

// Named parameter blocks in registration order. That order is the canonical
// checkpoint order.
class ParameterStore {
 public:
  int Add(std::string name, Matrix value);

  int size() const { return int(values_.size()); }
  const std::string& name(int i) const { return names_.at(std::size_t(i)); }
  const Matrix& value(int i) const { return values_.at(std::size_t(i)); }
  Matrix& value(int i) { return values_.at(std::size_t(i)); }
  // -1 when absent.
  int Find(const std::string& name) const;

  std::size_t ScalarCount() const;
  bool AllFinite() const;
  // Rounds every value to the nearest float so float32 storage is lossless.
  void RoundToFloat();
  std::vector<Matrix> ZerosLike() const;

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
};

// Exposes the parameters of a store as leaves of one tape. Leaves are created
// on first use, so a forward pass only copies the blocks it touches.
class Binding {
 public:
  Binding(const ParameterStore& store, ad::Tape& tape)
      : store_(store), tape_(tape), vars_(std::size_t(store.size())) {}

  ad::Var operator()(int index);
  ad::Tape& tape() { return tape_; }

  // grads[i] += d(loss)/d(param i) for every block that received gradient.
  void AccumulateGrads(std::vector<Matrix>* grads) const;

 private:
  const ParameterStore& store_;
  ad::Tape& tape_;
  std::vector<ad::Var> vars_;
};

}  // namespace prosodia::model

#endif  // PROSODIA_MODEL_PARAMETERS_H_
