/*
 * Copyright 2026 The Turnover Analytics Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TURNOVER_PARALLEL_H_
#define TURNOVER_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace turnover {

// Runs fn(0..n-1) on up to hardware_concurrency threads. Work items must
// write to disjoint outputs. The first exception thrown is rethrown after
// all workers join.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace turnover

#endif  // TURNOVER_PARALLEL_H_
