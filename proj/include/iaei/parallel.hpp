#pragma once

#include <functional>

namespace iaei {

int default_thread_count();

// Runs fn(i) for i in [begin, end) across `threads` workers with a static
// block partition. Results must be written to disjoint slots; the caller
// aggregates them in index order afterwards, so the outcome does not depend
// on the worker count. The first exception thrown by any worker is rethrown.
void parallel_for(int begin, int end, int threads,
                  const std::function<void(int)>& fn);

}  // namespace iaei
