#include "bsdelab/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace bsdelab::detail {

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    std::size_t workers = std::min(hw, n);
    if (workers == 1) {
        fn(0, n);
        return;
    }
    std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace bsdelab::detail
