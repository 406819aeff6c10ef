#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace kdx::detail {

// Strided static partition of [0, n): every index is processed exactly once
// and writes to disjoint output rows, so results are bit-identical for any
// thread count.
inline void parallel_for(Eigen::Index n, int threads,
                         const std::function<void(Eigen::Index)>& body) {
    if (threads <= 1 || n <= 1) {
        for (Eigen::Index i = 0; i < n; ++i) body(i);
        return;
    }
    const int workers =
        static_cast<int>(std::min<Eigen::Index>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&body, w, workers, n] {
            for (Eigen::Index i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace kdx::detail
