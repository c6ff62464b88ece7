#pragma once

#include <cstddef>
#include <functional>

namespace mscreen {

/// Process-wide default worker count. Initialized from the
/// METRIC_SCREEN_THREADS environment variable when set, otherwise from
/// std::thread::hardware_concurrency().
int default_threads();

/// Override the process-wide default (0 restores the automatic value).
void set_default_threads(int n);

/// Resolve a per-call thread request: 0 means "use the default".
int resolve_threads(int requested);

/// Run fn(i) for i in [0, count) on up to `threads` workers. Work items are
/// handed out through a shared counter; fn must be safe to call concurrently
/// for distinct i. Exceptions are captured and the first one rethrown.
void parallel_for_index(std::size_t count,
                        const std::function<void(std::size_t)>& fn,
                        int threads = 0);

}  // namespace mscreen
