#include "raman/ranking.hpp"

#include <algorithm>
#include <numeric>

namespace raman {

Ranking rank_descending(std::span<const double> scores) {
    Ranking r(scores.size());
    std::iota(r.begin(), r.end(), std::size_t{0});
    std::stable_sort(r.begin(), r.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return r;
}

Ranking rank_ascending(std::span<const double> costs) {
    Ranking r(costs.size());
    std::iota(r.begin(), r.end(), std::size_t{0});
    std::stable_sort(r.begin(), r.end(),
                     [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
    return r;
}

}  // namespace raman
