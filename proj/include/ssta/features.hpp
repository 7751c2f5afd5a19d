#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "ssta/climatology.hpp"
#include "ssta/csv.hpp"
#include "ssta/errors.hpp"
#include "ssta/grid.hpp"

namespace ssta {

enum class FeatureLayout { RG48, UD50, UD74, BALTIC3 };

inline int layout_dim(FeatureLayout layout) {
    switch (layout) {
        case FeatureLayout::RG48: return 48;
        case FeatureLayout::UD50: return 50;
        case FeatureLayout::UD74: return 74;
        case FeatureLayout::BALTIC3: return 3;
    }
    return 0;
}

inline const char* layout_name(FeatureLayout layout) {
    switch (layout) {
        case FeatureLayout::RG48: return "RG48";
        case FeatureLayout::UD50: return "UD50";
        case FeatureLayout::UD74: return "UD74";
        case FeatureLayout::BALTIC3: return "BALTIC3";
    }
    return "?";
}

inline FeatureLayout layout_from_name(const std::string& name) {
    if (name == "RG48" || name == "rg48") return FeatureLayout::RG48;
    if (name == "UD50" || name == "ud50") return FeatureLayout::UD50;
    if (name == "UD74" || name == "ud74") return FeatureLayout::UD74;
    if (name == "BALTIC3" || name == "baltic3") return FeatureLayout::BALTIC3;
    throw ConfigError("unknown feature layout: " + name);
}

struct FeatureRow {
    FeatureLayout layout = FeatureLayout::RG48;
    Eigen::VectorXd values;
    int location_index = -1;
    double latitude = 0;
    double longitude = 0;
    int season = 0;        // 1..12, 0 = unknown
    int target_month = 0;  // month index
};

// Tabular rows in one layout, stored matrix-style with per-row metadata.
// Rows with any missing window value at the center location are never
// emitted; skipped_rows counts them.
struct FeatureMatrix {
    FeatureLayout layout = FeatureLayout::RG48;
    Eigen::MatrixXd values;   // n x layout_dim
    Eigen::VectorXd targets;  // n, NaN when the target is unknown
    std::vector<int> location_index;
    std::vector<double> latitude;
    std::vector<double> longitude;
    std::vector<int> season;
    std::vector<int> target_month;
    long skipped_rows = 0;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index dim() const { return values.cols(); }

    FeatureRow row(Eigen::Index i) const {
        FeatureRow r;
        r.layout = layout;
        r.values = values.row(i).transpose();
        r.location_index = location_index[static_cast<std::size_t>(i)];
        r.latitude = latitude[static_cast<std::size_t>(i)];
        r.longitude = longitude[static_cast<std::size_t>(i)];
        r.season = season[static_cast<std::size_t>(i)];
        r.target_month = target_month[static_cast<std::size_t>(i)];
        return r;
    }

    void append(const FeatureMatrix& other) {
        if (other.layout != layout) throw LayoutError("appending rows of a different layout");
        Eigen::Index n = rows(), m = other.rows();
        values.conservativeResize(n + m, other.dim());
        values.bottomRows(m) = other.values;
        targets.conservativeResize(n + m);
        targets.tail(m) = other.targets;
        auto extend = [](auto& dst, const auto& src) { dst.insert(dst.end(), src.begin(), src.end()); };
        extend(location_index, other.location_index);
        extend(latitude, other.latitude);
        extend(longitude, other.longitude);
        extend(season, other.season);
        extend(target_month, other.target_month);
        skipped_rows += other.skipped_rows;
    }
};

namespace detail {

inline FeatureMatrix make_matrix(FeatureLayout layout, Eigen::Index capacity) {
    FeatureMatrix fm;
    fm.layout = layout;
    fm.values.resize(capacity, layout_dim(layout));
    fm.targets.resize(capacity);
    return fm;
}

inline void shrink_matrix(FeatureMatrix& fm, Eigen::Index n) {
    fm.values.conservativeResize(n, fm.values.cols());
    fm.targets.conservativeResize(n);
}

}  // namespace detail

// One row per present location: the 12 SSTA lags at the location followed
// by per-month neighbor mean, max, and min. Lag 1 is the most recent
// window month. Locations with no present neighbor fall back to the center
// value for all three aggregates.
inline FeatureMatrix build_rg48_rows(const Block& block, const NeighborMap& nmap,
                                     const CoordinateTable& coords,
                                     const Eigen::VectorXd* target = nullptr) {
    const Eigen::MatrixXd& w = block.window(Variable::SSTA);
    if (w.rows() != 12) throw ShapeError("RG48 needs a 12-month window");
    const Eigen::Index L = w.cols();
    if (static_cast<Eigen::Index>(nmap.size()) != L)
        throw ShapeError("neighbor map does not cover the block locations");
    if (static_cast<Eigen::Index>(coords.size()) != L)
        throw ShapeError("coordinate table does not cover the block locations");

    FeatureMatrix fm = detail::make_matrix(FeatureLayout::RG48, L);
    Eigen::Index n = 0;
    for (Eigen::Index l = 0; l < L; ++l) {
        bool usable = true;
        for (int t = 0; t < 12 && usable; ++t)
            if (is_missing(w(t, l))) usable = false;
        if (!usable) {
            ++fm.skipped_rows;
            continue;
        }
        auto row = fm.values.row(n);
        const auto& nbrs = nmap.of(static_cast<int>(l));
        for (int lag = 0; lag < 12; ++lag) {
            const int t = 11 - lag;  // lag 1 = most recent month
            const double center = w(t, l);
            double sum = 0, mx = 0, mn = 0;
            int cnt = 0;
            for (int nb : nbrs) {
                double v = w(t, nb);
                if (is_missing(v)) continue;
                if (cnt == 0) { mx = v; mn = v; }
                else { mx = std::max(mx, v); mn = std::min(mn, v); }
                sum += v;
                ++cnt;
            }
            if (cnt == 0) { sum = center; mx = center; mn = center; cnt = 1; }
            row(lag) = center;
            row(12 + lag) = sum / cnt;
            row(24 + lag) = mx;
            row(36 + lag) = mn;
        }
        fm.targets(n) = target ? (*target)(l) : missing_value();
        fm.location_index.push_back(static_cast<int>(l));
        fm.latitude.push_back(coords.entries[static_cast<std::size_t>(l)].latitude);
        fm.longitude.push_back(coords.entries[static_cast<std::size_t>(l)].longitude);
        fm.season.push_back(calendar_month(block.target_month()) + 1);
        fm.target_month.push_back(block.target_month());
        ++n;
    }
    detail::shrink_matrix(fm, n);
    return fm;
}

// One row per present location: [SSTA x12, SST x12, MSLP x12, T2M x12,
// latitude, longitude] in window time order.
inline FeatureMatrix build_ud50_rows(const Block& block, const CoordinateTable& coords,
                                     const Eigen::VectorXd* target = nullptr) {
    static constexpr Variable kOrder[4] = {Variable::SSTA, Variable::SST, Variable::MSLP,
                                           Variable::T2M};
    for (Variable v : kOrder)
        if (!block.has(v)) throw MissingVariable(variable_name(v));
    const Eigen::MatrixXd& ssta = block.window(Variable::SSTA);
    if (ssta.rows() != 12) throw ShapeError("UD50 needs a 12-month window");
    const Eigen::Index L = ssta.cols();
    if (static_cast<Eigen::Index>(coords.size()) != L)
        throw ShapeError("coordinate table does not cover the block locations");

    FeatureMatrix fm = detail::make_matrix(FeatureLayout::UD50, L);
    Eigen::Index n = 0;
    for (Eigen::Index l = 0; l < L; ++l) {
        bool usable = true;
        for (Variable v : kOrder) {
            const auto& w = block.window(v);
            for (int t = 0; t < 12 && usable; ++t)
                if (is_missing(w(t, l))) usable = false;
        }
        if (!usable) {
            ++fm.skipped_rows;
            continue;
        }
        auto row = fm.values.row(n);
        int k = 0;
        for (Variable v : kOrder) {
            const auto& w = block.window(v);
            for (int t = 0; t < 12; ++t) row(k++) = w(t, l);
        }
        row(48) = coords.entries[static_cast<std::size_t>(l)].latitude;
        row(49) = coords.entries[static_cast<std::size_t>(l)].longitude;
        fm.targets(n) = target ? (*target)(l) : missing_value();
        fm.location_index.push_back(static_cast<int>(l));
        fm.latitude.push_back(row(48));
        fm.longitude.push_back(row(49));
        fm.season.push_back(calendar_month(block.target_month()) + 1);
        fm.target_month.push_back(block.target_month());
        ++n;
    }
    detail::shrink_matrix(fm, n);
    return fm;
}

// Appends the per-location climatology profile (12 monthly means, then 12
// monthly standard deviations, January first) to UD50 rows.
inline FeatureMatrix augment_ud74(const FeatureMatrix& rows, const ClimatologyTable& clim) {
    if (rows.layout != FeatureLayout::UD50)
        throw LayoutError(std::string("augmentation expects UD50 rows, got ") +
                          layout_name(rows.layout));
    FeatureMatrix fm = rows;
    fm.layout = FeatureLayout::UD74;
    fm.values.conservativeResize(rows.rows(), 74);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        int l = rows.location_index[static_cast<std::size_t>(i)];
        if (l < 0 || l >= clim.locations())
            throw ShapeError("climatology does not cover location index " + std::to_string(l));
        for (int m = 0; m < 12; ++m) {
            fm.values(i, 50 + m) = clim.avg(m, l);
            fm.values(i, 62 + m) = clim.std(m, l);
        }
    }
    return fm;
}

// Three consecutive September anomalies at one location, anchored on the
// most recent one; the implied target is the following September.
inline FeatureRow build_baltic_rows(const TimeGrid& ssta, int location, int anchor_september,
                                    int n_septembers = 3) {
    if (n_septembers != 3) throw ConfigError("the September layout uses exactly 3 lags");
    if (calendar_month(anchor_september) != 8)
        throw ConfigError("anchor month " + format_year_month(anchor_september) +
                          " is not a September");
    if (location < 0 || location >= ssta.locations())
        throw UnknownLocation("location index " + std::to_string(location));

    FeatureRow row;
    row.layout = FeatureLayout::BALTIC3;
    row.values.resize(3);
    for (int k = 0; k < 3; ++k) {
        int mi = anchor_september - 12 * (2 - k);
        if (!ssta.contains_month(mi))
            throw InsufficientHistory("grid does not contain September " +
                                      std::to_string(calendar_year(mi)));
        double v = ssta.values(ssta.row_of(mi), location);
        if (is_missing(v))
            throw InsufficientHistory("September " + std::to_string(calendar_year(mi)) +
                                      " is missing at the requested location");
        row.values(k) = v;
    }
    row.location_index = location;
    row.season = 9;
    row.target_month = anchor_september + 12;
    return row;
}

// Per-time-step rows of globally z-scored SST with periodic month labels;
// the label of row t is its calendar month (0 = January).
struct SeasonalDataset {
    Eigen::MatrixXd rows;     // T x L, missing locations hold 0 after scaling
    std::vector<int> labels;  // 0..11
};

// Population z-score across locations; a spatially constant row maps to
// zeros. Missing locations contribute nothing and read back as 0.
inline Eigen::VectorXd normalize_global_row(const Eigen::VectorXd& row) {
    Eigen::Index present = 0;
    double sum = 0;
    for (Eigen::Index l = 0; l < row.size(); ++l) {
        if (is_missing(row(l))) continue;
        sum += row(l);
        ++present;
    }
    if (present < 2) throw DegenerateNormalization("need at least 2 present locations");
    double mean = sum / static_cast<double>(present);
    double sq = 0;
    for (Eigen::Index l = 0; l < row.size(); ++l) {
        if (is_missing(row(l))) continue;
        double d = row(l) - mean;
        sq += d * d;
    }
    double sd = std::sqrt(sq / static_cast<double>(present));
    Eigen::VectorXd out = Eigen::VectorXd::Zero(row.size());
    if (sd == 0.0) return out;
    for (Eigen::Index l = 0; l < row.size(); ++l)
        if (!is_missing(row(l))) out(l) = (row(l) - mean) / sd;
    return out;
}

inline SeasonalDataset build_seasonal_dataset(const TimeGrid& sst) {
    if (sst.months() < 12)
        throw InsufficientHistory("seasonal dataset needs at least 12 months");
    SeasonalDataset ds;
    ds.rows.resize(sst.months(), sst.locations());
    ds.labels.resize(static_cast<std::size_t>(sst.months()));
    for (Eigen::Index t = 0; t < sst.months(); ++t) {
        ds.rows.row(t) = normalize_global_row(sst.values.row(t).transpose()).transpose();
        ds.labels[static_cast<std::size_t>(t)] = sst.calendar_month_at(t);
    }
    return ds;
}

// Debug export; the layout tag rides in a comment line so downstream
// tooling can sanity-check the shape.
inline std::string serialize_feature_csv(const FeatureMatrix& fm) {
    std::string out = "# layout=";
    out += layout_name(fm.layout);
    out += '\n';
    for (Eigen::Index c = 0; c < fm.dim(); ++c) {
        out += 'f';
        out += std::to_string(c);
        out += ',';
    }
    out += "location_index,latitude,longitude,season,target_month,target\n";
    for (Eigen::Index i = 0; i < fm.rows(); ++i) {
        for (Eigen::Index c = 0; c < fm.dim(); ++c) {
            out += format_double(fm.values(i, c));
            out += ',';
        }
        out += std::to_string(fm.location_index[static_cast<std::size_t>(i)]);
        out += ',';
        out += format_double(fm.latitude[static_cast<std::size_t>(i)]);
        out += ',';
        out += format_double(fm.longitude[static_cast<std::size_t>(i)]);
        out += ',';
        out += std::to_string(fm.season[static_cast<std::size_t>(i)]);
        out += ',';
        out += std::to_string(fm.target_month[static_cast<std::size_t>(i)]);
        out += ',';
        out += format_double(fm.targets(i));
        out += '\n';
    }
    return out;
}

}  // namespace ssta
