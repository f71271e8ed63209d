#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace raman {

/// Class indices ordered from most to least likely.
using Ranking = std::vector<std::size_t>;

/// Orders indices by descending score; equal scores keep the lower index first.
Ranking rank_descending(std::span<const double> scores);

/// Orders indices by ascending cost; equal costs keep the lower index first.
Ranking rank_ascending(std::span<const double> costs);

}  // namespace raman
