#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ssta/errors.hpp"
#include "ssta/grid.hpp"

namespace ssta {

namespace detail {

inline constexpr double kCoordTol = 1e-6;  // degrees

// Sorted distinct axis values; entries closer than the tolerance collapse.
inline std::vector<double> distinct_sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v) {
        if (out.empty() || x - out.back() > kCoordTol) out.push_back(x);
    }
    return out;
}

// Infers origin/step for one axis and maps every value onto integer
// lattice indices. Present points may leave holes; every value must still
// sit on origin + k*step.
inline bool index_axis(const std::vector<double>& values, double& origin, double& step,
                       int& extent, std::vector<int>& index, std::string& issue) {
    std::vector<double> uniq = distinct_sorted(values);
    origin = uniq.front();
    if (uniq.size() == 1) {
        step = 1.0;  // degenerate axis, single row/column
        extent = 1;
        index.assign(values.size(), 0);
        return true;
    }
    step = uniq[1] - uniq[0];
    for (std::size_t i = 1; i < uniq.size(); ++i)
        step = std::min(step, uniq[i] - uniq[i - 1]);
    int max_idx = 0;
    index.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        double k = (values[i] - origin) / step;
        int ki = static_cast<int>(std::lround(k));
        if (std::abs(values[i] - (origin + ki * step)) > kCoordTol) {
            issue = "coordinate " + std::to_string(values[i]) + " is not on the lattice (step " +
                    std::to_string(step) + ")";
            return false;
        }
        index[i] = ki;
        max_idx = std::max(max_idx, ki);
    }
    extent = max_idx + 1;
    return true;
}

}  // namespace detail

// Checks the regular-lattice assumption and computes lattice indices for
// every present point. Never throws; the caller decides whether an
// irregular table is fatal.
inline LatticeInfo infer_lattice(const std::vector<CoordinateEntry>& entries) {
    LatticeInfo info;
    if (entries.empty()) {
        info.issue = "no coordinates";
        return info;
    }
    std::vector<double> lats, lons;
    lats.reserve(entries.size());
    lons.reserve(entries.size());
    for (const auto& e : entries) {
        lats.push_back(e.latitude);
        lons.push_back(e.longitude);
    }
    if (!detail::index_axis(lats, info.lat0, info.lat_step, info.n_lat, info.lat_index, info.issue))
        return info;
    if (!detail::index_axis(lons, info.lon0, info.lon_step, info.n_lon, info.lon_index, info.issue))
        return info;

    // Full-circle lattices connect across the dateline.
    double period = 360.0 / info.lon_step;
    int period_i = static_cast<int>(std::lround(period));
    if (std::abs(period - period_i) < 1e-9 && period_i >= 2 && info.n_lon == period_i) {
        info.lon_wraps = true;
        info.lon_period = period_i;
    }

    // Two locations on the same cell would make neighborhoods ambiguous.
    std::vector<long> cells(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i)
        cells[i] = static_cast<long>(info.lat_index[i]) * info.n_lon + info.lon_index[i];
    std::vector<long> sorted = cells;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        info.issue = "two locations occupy the same lattice cell";
        return info;
    }

    info.regular = true;
    return info;
}

// Builds the lattice 8-neighborhood over present locations. Neighbors are
// one step away in latitude and/or longitude; absent cells are simply not
// in the table so they never appear.
inline NeighborMap build_neighbor_map(const CoordinateTable& coords) {
    LatticeInfo lat = infer_lattice(coords.entries);
    if (!lat.regular) throw LatticeError("irregular lattice: " + lat.issue);

    std::vector<int> cell(static_cast<std::size_t>(lat.n_lat) * lat.n_lon, -1);
    auto cell_at = [&](int i, int j) -> int& {
        return cell[static_cast<std::size_t>(i) * lat.n_lon + j];
    };
    for (std::size_t k = 0; k < coords.entries.size(); ++k)
        cell_at(lat.lat_index[k], lat.lon_index[k]) = static_cast<int>(k);

    NeighborMap nmap;
    nmap.neighbors.resize(coords.entries.size());
    for (std::size_t k = 0; k < coords.entries.size(); ++k) {
        int i = lat.lat_index[k];
        int j = lat.lon_index[k];
        std::vector<int>& out = nmap.neighbors[k];
        for (int di = -1; di <= 1; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
                if (di == 0 && dj == 0) continue;
                int ni = i + di;
                if (ni < 0 || ni >= lat.n_lat) continue;
                int nj = j + dj;
                if (lat.lon_wraps) {
                    nj = (nj + lat.lon_period) % lat.lon_period;
                } else if (nj < 0 || nj >= lat.n_lon) {
                    continue;
                }
                int other = cell_at(ni, nj);
                if (other >= 0 && other != static_cast<int>(k)) out.push_back(other);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return nmap;
}

}  // namespace ssta
