// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>

namespace splatcolor {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int threads) { g_threads.store(std::max(threads, 0)); }

int max_thread_count() { return std::max(1, omp_get_num_procs()); }

int thread_count() {
    const int requested = g_threads.load();
    return requested > 0 ? requested : max_thread_count();
}

} // namespace splatcolor
