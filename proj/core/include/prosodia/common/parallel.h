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

#ifndef PROSODIA_COMMON_PARALLEL_H_
#define PROSODIA_COMMON_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace prosodia {

// Worker count: hardware concurrency, capped by PROSODIA_THREADS when set.
int WorkerCount();

// Runs fn(i) for i in [0, n). Work items are independent; callers reduce
// results in index order, so output never depends on scheduling. The first
// exception thrown by any item is rethrown after all workers join.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn,
                 int max_workers = 0);

}  // namespace prosodia

#endif  // PROSODIA_COMMON_PARALLEL_H_
