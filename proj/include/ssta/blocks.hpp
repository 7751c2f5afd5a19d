#pragma once

#include <vector>

#include "ssta/errors.hpp"
#include "ssta/grid.hpp"

namespace ssta {

// Number of window starts whose target month is still inside a series of
// length T; negative results clamp to zero.
inline long block_count_with_targets(long months, int window = 12, int target_offset = 3,
                                     int stride = 1) {
    long n = months - window - target_offset + 1;
    if (n <= 0) return 0;
    return (n + stride - 1) / stride;
}

// Slices aligned grids into 12-month windows. Every window start up to
// T - window is emitted; the observed SSTA target row is attached when the
// target month is inside the grid, and left empty for test-time blocks.
inline std::vector<BlockSample> extract_blocks(const GridSet& grids, int window = 12,
                                               int target_offset = 3, int stride = 1) {
    if (window < 1 || target_offset < 1 || stride < 1)
        throw ConfigError("window, target_offset and stride must be positive");
    grids.validate_aligned();
    const TimeGrid& ssta = grids.get(Variable::SSTA);
    const Eigen::Index T = ssta.months();
    if (T < window) throw NoBlocks("series has " + std::to_string(T) + " months, window needs " +
                                   std::to_string(window));

    std::vector<BlockSample> out;
    for (Eigen::Index start = 0; start + window <= T; start += stride) {
        BlockSample sample;
        sample.block.window_start = ssta.month_index_at(start);
        sample.block.target_offset = target_offset;
        for (int vi = 0; vi < kNumVariables; ++vi) {
            if (!grids.grids[vi]) continue;
            sample.block.windows[vi] =
                grids.grids[vi]->values.middleRows(start, window).eval();
        }
        Eigen::Index target_row = start + window - 1 + target_offset;
        if (target_row < T) sample.target = ssta.values.row(target_row).transpose().eval();
        out.push_back(std::move(sample));
    }
    return out;
}

}  // namespace ssta
