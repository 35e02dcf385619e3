#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace sobocomp {

// Process-wide worker cap: 1 means sequential. The CLI sets this from
// --threads or SOBOCOMP_THREADS.
inline int& thread_cap() {
    static int cap = 1;
    return cap;
}

inline void set_thread_cap(int k) { thread_cap() = std::max(1, k); }

// Index-range parallel map. Work items write only to their own slots, so the
// result is identical for every cap.
inline void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& body) {
    int workers = std::min<int64_t>(thread_cap(), n);
    if (workers <= 1 || n <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int64_t lo = w * chunk;
        int64_t hi = std::min<int64_t>(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(body, lo, hi);
    }
    for (auto& t : pool) t.join();
}

}  // namespace sobocomp
