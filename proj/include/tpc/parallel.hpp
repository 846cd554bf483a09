// Copyright 2026 the tpc authors
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

#pragma once

#include <cstdint>
#include <functional>

namespace tpc {

// Number of workers actually used for a requested thread count
// (0 = hardware concurrency).
int effective_threads(int requested);

// Splits [0, n) into exactly `chunks` contiguous ranges and runs
// fn(chunk_index, begin, end) on a worker per chunk. Chunk boundaries depend
// only on (n, chunks), so callers that merge per-chunk results in chunk order
// get reproducible reductions for a fixed thread count.
void parallel_chunks(std::int64_t n, int threads,
                     const std::function<void(int, std::int64_t, std::int64_t)>& fn);

}  // namespace tpc
