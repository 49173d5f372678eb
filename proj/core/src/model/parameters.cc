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

#include "prosodia/model/parameters.h"

#include "prosodia/common/error.h"

namespace prosodia::model {

int ParameterStore::Add(std::string name, Matrix value) {
  if (Find(name) >= 0) throw Error("duplicate parameter " + name);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return size() - 1;
}

int ParameterStore::Find(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (names_[std::size_t(i)] == name) return i;
  }
  return -1;
}

std::size_t ParameterStore::ScalarCount() const {
  std::size_t n = 0;
  for (const Matrix& m : values_) n += std::size_t(m.size());
  return n;
}

bool ParameterStore::AllFinite() const {
  for (const Matrix& m : values_) {
    if (!m.allFinite()) return false;
  }
  return true;
}

void ParameterStore::RoundToFloat() {
  for (Matrix& m : values_) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = double(float(m.data()[i]));
    }
  }
}

std::vector<Matrix> ParameterStore::ZerosLike() const {
  std::vector<Matrix> out;
  out.reserve(values_.size());
  for (const Matrix& m : values_) out.push_back(Matrix::Zero(m.rows(), m.cols()));
  return out;
}

ad::Var Binding::operator()(int index) {
  ad::Var& v = vars_.at(std::size_t(index));
  if (!v.valid()) v = tape_.Leaf(store_.value(index));
  return v;
}

void Binding::AccumulateGrads(std::vector<Matrix>* grads) const {
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (vars_[i].valid() && vars_[i].node()->grad.size() != 0) {
      (*grads)[i] += vars_[i].node()->grad;
    }
  }
}

}  // namespace prosodia::model
