#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ssta/errors.hpp"
#include "ssta/month.hpp"

namespace ssta {

enum class Variable { SSTA = 0, SST = 1, MSLP = 2, T2M = 3 };

inline constexpr int kNumVariables = 4;

inline const char* variable_name(Variable v) {
    switch (v) {
        case Variable::SSTA: return "SSTA";
        case Variable::SST: return "SST";
        case Variable::MSLP: return "MSLP";
        case Variable::T2M: return "T2M";
    }
    return "?";
}

inline Variable variable_from_name(const std::string& name) {
    if (name == "SSTA" || name == "ssta") return Variable::SSTA;
    if (name == "SST" || name == "sst") return Variable::SST;
    if (name == "MSLP" || name == "mslp") return Variable::MSLP;
    if (name == "T2M" || name == "t2m") return Variable::T2M;
    throw ConfigError("unknown variable: " + name);
}

inline bool is_missing(double x) { return std::isnan(x); }
inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }

// Dense monthly series of one variable over a fixed set of locations.
// Missing locations (land) are flagged per column and hold NaN for every
// time step; a column is never partially missing.
struct TimeGrid {
    Variable variable = Variable::SSTA;
    Eigen::MatrixXd values;                 // T x L, NaN at absent locations
    int start_month = 0;                    // month index of row 0
    std::vector<std::string> location_ids;  // size L
    std::vector<bool> present;              // size L, false = missing everywhere

    Eigen::Index months() const { return values.rows(); }
    Eigen::Index locations() const { return values.cols(); }

    int month_index_at(Eigen::Index t) const { return start_month + static_cast<int>(t); }
    int calendar_month_at(Eigen::Index t) const { return calendar_month(month_index_at(t)); }
    int end_month() const { return start_month + static_cast<int>(months()) - 1; }

    bool contains_month(int month_index_) const {
        return month_index_ >= start_month && month_index_ <= end_month();
    }
    Eigen::Index row_of(int month_index_) const {
        return static_cast<Eigen::Index>(month_index_ - start_month);
    }

    // Derives per-location presence flags and enforces the all-or-nothing
    // missing rule.
    void finalize() {
        if (values.rows() < 1 || values.cols() < 1)
            throw ShapeError("grid must have at least one month and one location");
        if (static_cast<Eigen::Index>(location_ids.size()) != values.cols())
            throw ShapeError("location id count does not match grid columns");
        present.assign(static_cast<std::size_t>(values.cols()), true);
        for (Eigen::Index l = 0; l < values.cols(); ++l) {
            bool any_missing = false, all_missing = true;
            for (Eigen::Index t = 0; t < values.rows(); ++t) {
                if (is_missing(values(t, l))) any_missing = true;
                else all_missing = false;
            }
            if (any_missing && !all_missing)
                throw DataError("location " + location_ids[static_cast<std::size_t>(l)] +
                                " is partially missing; locations must be fully present or fully absent");
            present[static_cast<std::size_t>(l)] = !any_missing;
        }
    }

    Eigen::Index present_count() const {
        Eigen::Index n = 0;
        for (bool p : present) n += p ? 1 : 0;
        return n;
    }
};

struct CoordinateEntry {
    std::string id;
    double latitude = 0;
    double longitude = 0;
};

// Result of the lattice regularity check run at parse time.
struct LatticeInfo {
    bool regular = false;
    std::string issue;       // empty when regular
    double lat0 = 0, lat_step = 1;
    double lon0 = 0, lon_step = 1;
    int n_lat = 0, n_lon = 0;            // index extents among present points
    bool lon_wraps = false;              // lattice spans the full circle
    int lon_period = 0;                  // columns in a full circle when it wraps
    std::vector<int> lat_index, lon_index;  // per location
};

struct CoordinateTable {
    std::vector<CoordinateEntry> entries;
    LatticeInfo lattice;

    std::size_t size() const { return entries.size(); }
};

// One 12-month input window over one or more variables plus the target
// arithmetic. Matrices are 12 x L slices in window time order.
struct Block {
    int window_start = 0;   // month index of the first window row
    int target_offset = 3;  // months past the window end
    std::array<std::optional<Eigen::MatrixXd>, kNumVariables> windows;

    int window_months() const {
        for (const auto& w : windows)
            if (w) return static_cast<int>(w->rows());
        return 0;
    }
    int window_end() const { return window_start + window_months() - 1; }
    int target_month() const { return window_end() + target_offset; }

    bool has(Variable v) const { return windows[static_cast<int>(v)].has_value(); }
    const Eigen::MatrixXd& window(Variable v) const {
        const auto& w = windows[static_cast<int>(v)];
        if (!w) throw MissingVariable(variable_name(v));
        return *w;
    }
};

// A block paired with its observed target row when the target month is
// inside the SSTA grid (absent for test-time blocks).
struct BlockSample {
    Block block;
    std::optional<Eigen::VectorXd> target;  // per-location SSTA at target month
};

// Per-(calendar month, location) mean and standard deviation over a base
// period.
struct ClimatologyTable {
    Eigen::MatrixXd avg;  // 12 x L
    Eigen::MatrixXd std;  // 12 x L, population convention
    int base_first = 0;   // month index
    int base_last = 0;

    Eigen::Index locations() const { return avg.cols(); }
};

// Lattice 8-neighborhoods among present locations; symmetric, no self
// entries, absent locations excluded.
struct NeighborMap {
    std::vector<std::vector<int>> neighbors;

    std::size_t size() const { return neighbors.size(); }
    const std::vector<int>& of(int location) const {
        return neighbors[static_cast<std::size_t>(location)];
    }
};

// The aligned bundle of variable grids a pipeline stage works on.
struct GridSet {
    std::array<std::optional<TimeGrid>, kNumVariables> grids;

    bool has(Variable v) const { return grids[static_cast<int>(v)].has_value(); }
    const TimeGrid& get(Variable v) const {
        const auto& g = grids[static_cast<int>(v)];
        if (!g) throw MissingVariable(variable_name(v));
        return *g;
    }
    TimeGrid& get_mutable(Variable v) {
        auto& g = grids[static_cast<int>(v)];
        if (!g) throw MissingVariable(variable_name(v));
        return *g;
    }
    void set(Variable v, TimeGrid grid) {
        grid.variable = v;
        grids[static_cast<int>(v)] = std::move(grid);
    }

    // All grids must share time extent, anchor, and location ids.
    void validate_aligned() const {
        const TimeGrid* ref = nullptr;
        for (const auto& g : grids) {
            if (!g) continue;
            if (!ref) {
                ref = &*g;
                continue;
            }
            if (g->months() != ref->months() || g->start_month != ref->start_month)
                throw ShapeError("variable grids are not aligned in time");
            if (g->location_ids != ref->location_ids)
                throw ShapeError("variable grids do not share locations");
        }
        if (!ref) throw MissingVariable("any");
    }
};

}  // namespace ssta
