#pragma once

#include <cstddef>
#include <functional>

namespace bsdelab::detail {

// Runs fn(begin, end) over a static partition of [0, n).  Intended for
// per-path work with disjoint writes only; reductions stay sequential so
// results never depend on thread count or scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace bsdelab::detail
