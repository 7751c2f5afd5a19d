#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "ssta/errors.hpp"
#include "ssta/grid.hpp"
#include "ssta/neighbors.hpp"

namespace ssta {

// Shortest round-trip decimal; the same formatting is used everywhere so
// serialized artifacts are byte-stable.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "NaN";
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    for (;;) {
        std::size_t c = line.find(',', pos);
        if (c == std::string_view::npos) {
            fields.push_back(trim(line.substr(pos)));
            break;
        }
        fields.push_back(trim(line.substr(pos, c - pos)));
        pos = c + 1;
    }
    return fields;
}

// Missing values are an empty field or a NaN literal.
inline double parse_field(std::string_view field, long line_no) {
    if (field.empty()) return missing_value();
    double v = 0;
    auto r = std::from_chars(field.data(), field.data() + field.size(), v);
    if (r.ec != std::errc{} || r.ptr != field.data() + field.size())
        throw ParseError(line_no, "non-numeric field '" + std::string(field) + "'");
    return v;
}

}  // namespace detail

// Value CSV: header row of location ids, then one row per month in
// chronological order. Files carry no timestamps; the caller anchors the
// series with start_month.
inline TimeGrid parse_value_csv(std::string_view text, Variable variable, int start_month) {
    auto lines = detail::split_lines(text);
    while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw EmptyInput("value CSV is empty");

    auto header = detail::split_fields(lines[0]);
    TimeGrid grid;
    grid.variable = variable;
    grid.start_month = start_month;
    for (auto id : header) {
        if (id.empty()) throw ParseError(1, "empty location id in header");
        grid.location_ids.emplace_back(id);
    }
    {
        auto ids = grid.location_ids;
        std::sort(ids.begin(), ids.end());
        auto dup = std::adjacent_find(ids.begin(), ids.end());
        if (dup != ids.end()) throw DuplicateLocation(*dup);
    }

    const long cols = static_cast<long>(header.size());
    const long rows = static_cast<long>(lines.size()) - 1;
    if (rows < 1) throw EmptyInput("value CSV has a header but no data rows");

    grid.values.resize(rows, cols);
    for (long t = 0; t < rows; ++t) {
        long line_no = t + 2;
        auto fields = detail::split_fields(lines[static_cast<std::size_t>(t) + 1]);
        if (static_cast<long>(fields.size()) != cols)
            throw ParseError(line_no, "expected " + std::to_string(cols) + " fields, got " +
                                 std::to_string(fields.size()),
                             cols, static_cast<long>(fields.size()));
        for (long l = 0; l < cols; ++l)
            grid.values(t, l) = detail::parse_field(fields[static_cast<std::size_t>(l)], line_no);
    }
    grid.finalize();
    return grid;
}

inline std::string serialize_value_csv(const TimeGrid& grid) {
    std::string out;
    for (std::size_t l = 0; l < grid.location_ids.size(); ++l) {
        if (l) out += ',';
        out += grid.location_ids[l];
    }
    out += '\n';
    for (Eigen::Index t = 0; t < grid.months(); ++t) {
        for (Eigen::Index l = 0; l < grid.locations(); ++l) {
            if (l) out += ',';
            out += format_double(grid.values(t, l));
        }
        out += '\n';
    }
    return out;
}

inline constexpr std::string_view kCoordinateHeader = "location_id,latitude,longitude";

inline CoordinateTable parse_coordinate_csv(std::string_view text) {
    auto lines = detail::split_lines(text);
    while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw EmptyInput("coordinate CSV is empty");

    CoordinateTable table;
    std::size_t first = 0;
    if (detail::trim(lines[0]) == kCoordinateHeader) first = 1;
    if (first >= lines.size()) throw EmptyInput("coordinate CSV has no entries");

    for (std::size_t i = first; i < lines.size(); ++i) {
        long line_no = static_cast<long>(i) + 1;
        auto fields = detail::split_fields(lines[i]);
        if (fields.size() != 3)
            throw ParseError(line_no, "expected 3 fields, got " + std::to_string(fields.size()), 3,
                             static_cast<long>(fields.size()));
        CoordinateEntry e;
        if (fields[0].empty()) throw ParseError(line_no, "empty location id");
        e.id = std::string(fields[0]);
        e.latitude = detail::parse_field(fields[1], line_no);
        e.longitude = detail::parse_field(fields[2], line_no);
        if (is_missing(e.latitude) || is_missing(e.longitude))
            throw ParseError(line_no, "coordinates may not be missing");
        if (e.latitude < -90.0 || e.latitude > 90.0)
            throw RangeError("latitude " + format_double(e.latitude) + " outside [-90, 90] at line " +
                             std::to_string(line_no));
        if (e.longitude < -180.0 || e.longitude >= 180.0)
            throw RangeError("longitude " + format_double(e.longitude) +
                             " outside [-180, 180) at line " + std::to_string(line_no));
        for (const auto& prev : table.entries)
            if (prev.id == e.id) throw DuplicateLocation(e.id);
        table.entries.push_back(std::move(e));
    }
    table.lattice = infer_lattice(table.entries);
    return table;
}

inline std::string serialize_coordinate_csv(const CoordinateTable& table) {
    std::string out{kCoordinateHeader};
    out += '\n';
    for (const auto& e : table.entries) {
        out += e.id;
        out += ',';
        out += format_double(e.latitude);
        out += ',';
        out += format_double(e.longitude);
        out += '\n';
    }
    return out;
}

// Drops fully-missing (land) locations from an aligned grid set and its
// coordinate table. Land columns never produce feature rows.
inline std::pair<GridSet, CoordinateTable> drop_missing_locations(const GridSet& gs,
                                                                  const CoordinateTable& coords) {
    gs.validate_aligned();
    const TimeGrid* ref = nullptr;
    for (const auto& g : gs.grids)
        if (g) { ref = &*g; break; }
    if (static_cast<std::size_t>(ref->locations()) != coords.size())
        throw ShapeError("coordinate table does not match grid columns");

    std::vector<Eigen::Index> keep;
    for (Eigen::Index l = 0; l < ref->locations(); ++l) {
        bool all_present = true;
        for (const auto& g : gs.grids)
            if (g && !g->present[static_cast<std::size_t>(l)]) all_present = false;
        if (all_present) keep.push_back(l);
    }
    if (keep.empty()) throw EmptyInput("all locations are missing");

    GridSet out;
    for (int vi = 0; vi < kNumVariables; ++vi) {
        if (!gs.grids[vi]) continue;
        const TimeGrid& g = *gs.grids[vi];
        TimeGrid f;
        f.variable = g.variable;
        f.start_month = g.start_month;
        f.values.resize(g.months(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            f.values.col(static_cast<Eigen::Index>(k)) = g.values.col(keep[k]);
            f.location_ids.push_back(g.location_ids[static_cast<std::size_t>(keep[k])]);
        }
        f.finalize();
        out.grids[vi] = std::move(f);
    }
    CoordinateTable ct;
    for (Eigen::Index l : keep) ct.entries.push_back(coords.entries[static_cast<std::size_t>(l)]);
    ct.lattice = infer_lattice(ct.entries);
    return {std::move(out), std::move(ct)};
}

}  // namespace ssta
