// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace splatcolor {

/// Sets the worker count used by every parallel loop. Zero selects the
/// hardware maximum.
void set_thread_count(int threads);
int thread_count();
int max_thread_count();

/// Runs fn(i) for i in [begin, end). Iterations must write disjoint state;
/// no iteration may throw.
template <class Fn>
void parallel_for(std::int64_t begin, std::int64_t end, Fn &&fn) {
    const int threads = thread_count();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1)
    for (std::int64_t i = begin; i < end; ++i) {
        fn(i);
    }
}

} // namespace splatcolor
