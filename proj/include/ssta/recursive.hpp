#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "ssta/errors.hpp"
#include "ssta/grid.hpp"

namespace ssta {

// Read accounting for the no-leakage guarantee: recursive forecasting must
// never touch observed SSTA beyond the anchor month.
struct GridReadStats {
    int max_ssta_month_read = std::numeric_limits<int>::min();
    long ssta_rows_read = 0;
};

struct RecursiveResult {
    Eigen::VectorXd values;  // per location, at anchor + target_offset
    int rounds = 0;
    std::vector<int> predicted_months;  // every month produced, in order
    GridReadStats stats;
};

// A base forecaster mapping one block to one per-location value row.
using BlockPredictor = std::function<Eigen::VectorXd(const Block&)>;

namespace detail {

struct ChainState {
    Eigen::MatrixXd ssta;  // rows for months [first_month, first_month + rows)
    int first_month = 0;
    std::array<std::optional<Eigen::MatrixXd>, kNumVariables> frozen;  // non-SSTA windows

    Eigen::MatrixXd ssta_window(int end_month, int window) const {
        return ssta.middleRows(end_month - window + 1 - first_month, window);
    }
};

inline ChainState init_chain(const GridSet& grids, int anchor_month, int window, int earliest,
                             int target_offset, GridReadStats& stats) {
    grids.validate_aligned();
    const TimeGrid& observed = grids.get(Variable::SSTA);
    if (earliest < observed.start_month || anchor_month > observed.end_month())
        throw InsufficientHistory("grid does not cover the months the first round needs");

    ChainState st;
    st.first_month = earliest;
    const Eigen::Index L = observed.locations();
    st.ssta.setConstant(anchor_month + target_offset - earliest + 1, L, missing_value());
    for (int m = earliest; m <= anchor_month; ++m) {
        // Every observed row flows through here; the stats prove no read
        // ever passes the anchor.
        st.ssta.row(m - earliest) = observed.values.row(observed.row_of(m));
        stats.max_ssta_month_read = std::max(stats.max_ssta_month_read, m);
        ++stats.ssta_rows_read;
    }
    for (int vi = 0; vi < kNumVariables; ++vi) {
        if (vi == static_cast<int>(Variable::SSTA) || !grids.grids[vi]) continue;
        const TimeGrid& g = *grids.grids[vi];
        st.frozen[vi] =
            g.values.middleRows(g.row_of(anchor_month) - window + 1, window).eval();
    }
    return st;
}

inline Block make_block(const ChainState& st, int window_start, int window, int offset) {
    Block block;
    block.window_start = window_start;
    block.target_offset = offset;
    block.windows[static_cast<int>(Variable::SSTA)] =
        st.ssta_window(window_start + window - 1, window);
    for (int vi = 0; vi < kNumVariables; ++vi)
        if (st.frozen[vi]) block.windows[vi] = st.frozen[vi];
    return block;
}

}  // namespace detail

// Chains a fixed-offset forecaster to a longer horizon. Each round appends
// base_offset predicted SSTA rows; the other variables keep their last
// observed 12 months. Intermediate months past the requested horizon's
// needs are produced by the round structure and simply ignored.
inline RecursiveResult recursive_forecast(const BlockPredictor& predictor, const GridSet& grids,
                                          int anchor_month, int target_offset = 9,
                                          int base_offset = 3, int window = 12) {
    if (base_offset < 1 || target_offset < base_offset || target_offset % base_offset != 0)
        throw UnsupportedOffset("target offset " + std::to_string(target_offset) +
                                " is not a positive multiple of the base offset " +
                                std::to_string(base_offset));
    RecursiveResult result;
    // The first round's earliest window start is for the month right after
    // the anchor, predicted from the window ending base_offset before it.
    const int earliest = anchor_month + 1 - base_offset - window + 1;
    detail::ChainState st =
        detail::init_chain(grids, anchor_month, window, earliest, target_offset, result.stats);
    const int rounds = target_offset / base_offset;
    for (int r = 0; r < rounds; ++r) {
        for (int j = 1; j <= base_offset; ++j) {
            const int month = anchor_month + r * base_offset + j;
            const int window_start = month - base_offset - window + 1;
            Block block = detail::make_block(st, window_start, window, base_offset);
            Eigen::VectorXd pred = predictor(block);
            if (pred.size() != st.ssta.cols())
                throw ShapeError("forecaster returned a row of the wrong width");
            st.ssta.row(month - st.first_month) = pred.transpose();
            result.predicted_months.push_back(month);
        }
        ++result.rounds;
    }
    result.values = st.ssta.row(anchor_month + target_offset - st.first_month).transpose();
    return result;
}

// Variant with one forecaster per intra-round offset: every round uses a
// single window ending on the previous round's last month, and member j
// predicts j+1 months past it.
inline RecursiveResult recursive_forecast_per_offset(const std::vector<BlockPredictor>& predictors,
                                                     const GridSet& grids, int anchor_month,
                                                     int target_offset = 9, int window = 12) {
    const int base_offset = static_cast<int>(predictors.size());
    if (base_offset < 1 || target_offset < base_offset || target_offset % base_offset != 0)
        throw UnsupportedOffset("target offset " + std::to_string(target_offset) +
                                " is not a positive multiple of the member count " +
                                std::to_string(base_offset));
    RecursiveResult result;
    detail::ChainState st = detail::init_chain(grids, anchor_month, window,
                                               anchor_month - window + 1, target_offset,
                                               result.stats);
    const int rounds = target_offset / base_offset;
    for (int r = 0; r < rounds; ++r) {
        const int window_end = anchor_month + r * base_offset;
        for (int j = 1; j <= base_offset; ++j) {
            Block block = detail::make_block(st, window_end - window + 1, window, j);
            Eigen::VectorXd pred = predictors[static_cast<std::size_t>(j - 1)](block);
            if (pred.size() != st.ssta.cols())
                throw ShapeError("forecaster returned a row of the wrong width");
            st.ssta.row(window_end + j - st.first_month) = pred.transpose();
            result.predicted_months.push_back(window_end + j);
        }
        ++result.rounds;
    }
    result.values = st.ssta.row(anchor_month + target_offset - st.first_month).transpose();
    return result;
}

}  // namespace ssta
