#pragma once

#include <cmath>
#include <vector>

#include "ssta/errors.hpp"
#include "ssta/grid.hpp"

namespace ssta {

// Per-calendar-month mean and population standard deviation over the base
// period [base_first, base_last] (month indices, inclusive).
inline ClimatologyTable compute_monthly_climatology(const TimeGrid& sst, int base_first,
                                                    int base_last) {
    if (base_first > base_last)
        throw ConfigError("base period is empty");

    const Eigen::Index L = sst.locations();
    ClimatologyTable clim;
    clim.base_first = base_first;
    clim.base_last = base_last;
    clim.avg.setConstant(12, L, missing_value());
    clim.std.setConstant(12, L, missing_value());

    std::vector<std::vector<Eigen::Index>> steps(12);
    for (Eigen::Index t = 0; t < sst.months(); ++t) {
        int mi = sst.month_index_at(t);
        if (mi < base_first || mi > base_last) continue;
        steps[static_cast<std::size_t>(calendar_month(mi))].push_back(t);
    }
    for (int m = 0; m < 12; ++m)
        if (steps[static_cast<std::size_t>(m)].empty()) throw InsufficientCoverage(m);

    for (int m = 0; m < 12; ++m) {
        const auto& ts = steps[static_cast<std::size_t>(m)];
        const double n = static_cast<double>(ts.size());
        for (Eigen::Index l = 0; l < L; ++l) {
            if (!sst.present[static_cast<std::size_t>(l)]) continue;
            double sum = 0;
            for (Eigen::Index t : ts) sum += sst.values(t, l);
            double mean = sum / n;
            double sq = 0;
            for (Eigen::Index t : ts) {
                double d = sst.values(t, l) - mean;
                sq += d * d;
            }
            clim.avg(m, l) = mean;
            clim.std(m, l) = std::sqrt(sq / n);
        }
    }
    return clim;
}

// SSTA = SST minus the calendar-month climatology; missing stays missing.
inline TimeGrid anomalies_from_sst(const TimeGrid& sst, const ClimatologyTable& clim) {
    if (clim.locations() != sst.locations())
        throw ShapeError("climatology covers " + std::to_string(clim.locations()) +
                         " locations, grid has " + std::to_string(sst.locations()));
    TimeGrid out;
    out.variable = Variable::SSTA;
    out.start_month = sst.start_month;
    out.location_ids = sst.location_ids;
    out.values.resize(sst.months(), sst.locations());
    for (Eigen::Index t = 0; t < sst.months(); ++t) {
        int m = sst.calendar_month_at(t);
        for (Eigen::Index l = 0; l < sst.locations(); ++l)
            out.values(t, l) = sst.values(t, l) - clim.avg(m, l);
    }
    out.finalize();
    return out;
}

}  // namespace ssta
