// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace patternpress {

// Worker count: PATTERNPRESS_THREADS if set to a positive integer, else the
// hardware concurrency (at least 1).
unsigned thread_count();

// Runs body(i) for every i in [0, count) on up to thread_count() threads.
// Work is handed out by index, so callers that write results into slot i
// get output that is independent of the thread count. The first exception
// thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace patternpress
