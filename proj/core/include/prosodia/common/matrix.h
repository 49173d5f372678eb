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

#ifndef PROSODIA_COMMON_MATRIX_H_
#define PROSODIA_COMMON_MATRIX_H_

#include <Eigen/Core>

namespace prosodia {

// Row-major so that a row is one frame / one phone, contiguous in memory.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

}  // namespace prosodia

#endif  // PROSODIA_COMMON_MATRIX_H_
