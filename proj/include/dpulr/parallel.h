// Copyright 2026 The DP-ULR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPULR_PARALLEL_H_
#define DPULR_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace dpulr {

// Worker count: hardware concurrency, capped by DPULR_THREADS when set.
std::size_t ThreadCount();

// Runs fn(i) for i in [0, n). Callers write results to slot i and reduce
// afterwards in index order, so output does not depend on the thread count.
// If several calls throw, the exception from the smallest index propagates.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dpulr

#endif  // DPULR_PARALLEL_H_
