// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace xling {

// Runs fn(i) for every i in [0, n) on at most `max_in_flight` threads and
// blocks until all calls return. Indices are claimed in increasing order.
// fn must not throw; callers capture per-index failures themselves.
void parallel_for(std::size_t n, std::size_t max_in_flight,
                  const std::function<void(std::size_t)>& fn);

}  // namespace xling
