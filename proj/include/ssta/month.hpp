#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "ssta/errors.hpp"

namespace ssta {

// Month indices are proleptic: index = 12 * (year - 1940) + month, so
// index 0 is January 1940 and negative indices reach further back.
inline constexpr int kEpochYear = 1940;

inline int floor_div(int a, int b) {
    int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Calendar month 0..11 (0 = January) of a month index.
inline int calendar_month(int month_index) {
    return month_index - 12 * floor_div(month_index, 12);
}

inline int calendar_year(int month_index) {
    return kEpochYear + floor_div(month_index, 12);
}

inline int month_index(int year, int month_1_to_12) {
    return 12 * (year - kEpochYear) + (month_1_to_12 - 1);
}

// Parses "YYYY-MM" into a month index.
inline int parse_year_month(std::string_view text) {
    auto fail = [&] {
        throw ConfigError("expected YYYY-MM, got '" + std::string(text) + "'");
    };
    if (text.size() != 7 || text[4] != '-') fail();
    int year = 0, month = 0;
    auto r1 = std::from_chars(text.data(), text.data() + 4, year);
    auto r2 = std::from_chars(text.data() + 5, text.data() + 7, month);
    if (r1.ec != std::errc{} || r1.ptr != text.data() + 4) fail();
    if (r2.ec != std::errc{} || r2.ptr != text.data() + 7) fail();
    if (month < 1 || month > 12) fail();
    return month_index(year, month);
}

inline std::string format_year_month(int month_index_) {
    int y = calendar_year(month_index_);
    int m = calendar_month(month_index_) + 1;
    std::string s = std::to_string(y);
    s += '-';
    if (m < 10) s += '0';
    s += std::to_string(m);
    return s;
}

inline const char* month_name(int calendar_month_0_to_11) {
    static const char* names[12] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    return names[calendar_month_0_to_11];
}

}  // namespace ssta
