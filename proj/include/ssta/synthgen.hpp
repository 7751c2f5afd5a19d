#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "ssta/csv.hpp"
#include "ssta/errors.hpp"
#include "ssta/grid.hpp"
#include "ssta/rng.hpp"

namespace ssta {

// Seeded generator for challenge-shaped grids: hemisphere-antiphased
// seasonality, linear trend, a slow global oscillation, white noise, and a
// Bernoulli land mask. The seed fully determines the output.
struct SynthConfig {
    int n_lat = 20;
    int n_lon = 20;
    double lat0 = -47.5;
    double lon0 = 0.0;
    double step = 5.0;  // degrees, both axes
    int months = 480;
    int start_month = 0;  // month index of the first row
    std::uint64_t seed = 0;
    double seasonal_amplitude = 3.0;  // deg C, peak at the summer solstice month
    double trend_per_decade = 0.0;    // deg C per 120 months
    int oscillation_period = 48;      // months
    double oscillation_amplitude = 0.0;
    double noise_std = 0.0;
    double land_fraction = 0.0;  // [0, 1)
};

struct SynthData {
    TimeGrid sst;
    TimeGrid mslp;
    TimeGrid t2m;
    CoordinateTable coords;  // every lattice point, land included
    std::vector<bool> land;  // per location
};

inline void validate_synth_config(const SynthConfig& c) {
    if (c.n_lat < 1 || c.n_lon < 1 || c.n_lat * c.n_lon < 2 || !(c.step > 0))
        throw ConfigError("degenerate lattice");
    if (c.months < 24) throw ConfigError("generator needs at least 24 months");
    if (c.seasonal_amplitude < 0 || c.oscillation_amplitude < 0 || c.noise_std < 0)
        throw ConfigError("amplitudes must be non-negative");
    if (c.oscillation_period < 1) throw ConfigError("oscillation period must be positive");
    if (c.land_fraction < 0 || c.land_fraction >= 1) throw ConfigError("land fraction outside [0, 1)");
    double lat_hi = c.lat0 + (c.n_lat - 1) * c.step;
    if (c.lat0 < -90 || lat_hi > 90) throw ConfigError("latitudes leave [-90, 90]");
    double lon_hi = c.lon0 + (c.n_lon - 1) * c.step;
    if (c.lon0 < -180 || lon_hi >= 180) throw ConfigError("longitudes leave [-180, 180)");
}

inline SynthData generate(const SynthConfig& config) {
    validate_synth_config(config);
    const int L = config.n_lat * config.n_lon;
    const int T = config.months;

    SynthData data;
    data.coords.entries.reserve(static_cast<std::size_t>(L));
    for (int i = 0; i < config.n_lat; ++i) {
        for (int j = 0; j < config.n_lon; ++j) {
            CoordinateEntry e;
            e.id = "p" + std::to_string(i * config.n_lon + j);
            e.latitude = config.lat0 + i * config.step;
            e.longitude = config.lon0 + j * config.step;
            data.coords.entries.push_back(std::move(e));
        }
    }
    data.coords.lattice = infer_lattice(data.coords.entries);

    Rng root(config.seed);
    Rng rng_sst = root.split(1);
    Rng rng_t2m = root.split(2);
    Rng rng_mslp = root.split(3);
    Rng rng_land = root.split(4);

    data.land.resize(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) data.land[static_cast<std::size_t>(l)] = rng_land.uniform() < config.land_fraction;

    auto make_grid = [&](Variable v) {
        TimeGrid g;
        g.variable = v;
        g.start_month = config.start_month;
        g.values.resize(T, L);
        for (const auto& e : data.coords.entries) g.location_ids.push_back(e.id);
        return g;
    };
    data.sst = make_grid(Variable::SST);
    data.t2m = make_grid(Variable::T2M);
    data.mslp = make_grid(Variable::MSLP);

    constexpr double kTau = 2.0 * std::numbers::pi;
    for (int t = 0; t < T; ++t) {
        const int m = calendar_month(config.start_month + t);
        const double trend = config.trend_per_decade * t / 120.0;
        const double osc =
            config.oscillation_amplitude * std::sin(kTau * t / config.oscillation_period);
        for (int l = 0; l < L; ++l) {
            const double lat = data.coords.entries[static_cast<std::size_t>(l)].latitude;
            const double hemisphere = std::sin(lat * std::numbers::pi / 180.0);
            const double seasonal =
                config.seasonal_amplitude * hemisphere * std::cos(kTau * (m - 6) / 12.0);
            const double base = 18.0 - 12.0 * std::abs(lat) / 90.0;
            const double latent = base + seasonal + trend + osc;
            // Noise streams advance for land cells too, keeping ocean
            // values independent of the mask draw order.
            const double n_sst = rng_sst.normal();
            const double n_t2m = rng_t2m.normal();
            const double n_mslp = rng_mslp.normal();
            if (data.land[static_cast<std::size_t>(l)]) {
                data.sst.values(t, l) = missing_value();
                data.t2m.values(t, l) = missing_value();
                data.mslp.values(t, l) = missing_value();
            } else {
                data.sst.values(t, l) = latent + config.noise_std * n_sst;
                data.t2m.values(t, l) = 0.95 * latent + 1.0 + config.noise_std * n_t2m;
                data.mslp.values(t, l) = 101300.0 - 40.0 * latent + 50.0 * config.noise_std * n_mslp;
            }
        }
    }
    data.sst.finalize();
    data.t2m.finalize();
    data.mslp.finalize();
    return data;
}

// key=value manifest describing a generated dataset.
inline std::string synth_manifest(const SynthConfig& c, const SynthData& data) {
    long land_cells = 0;
    for (bool b : data.land) land_cells += b ? 1 : 0;
    std::string out;
    auto kv = [&out](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
    kv("generator", "sstakit-synth");
    kv("n_lat", std::to_string(c.n_lat));
    kv("n_lon", std::to_string(c.n_lon));
    kv("lat0", format_double(c.lat0));
    kv("lon0", format_double(c.lon0));
    kv("step", format_double(c.step));
    kv("months", std::to_string(c.months));
    kv("start_month", format_year_month(c.start_month));
    kv("seed", std::to_string(c.seed));
    kv("seasonal_amplitude", format_double(c.seasonal_amplitude));
    kv("trend_per_decade", format_double(c.trend_per_decade));
    kv("oscillation_period", std::to_string(c.oscillation_period));
    kv("oscillation_amplitude", format_double(c.oscillation_amplitude));
    kv("noise_std", format_double(c.noise_std));
    kv("land_fraction", format_double(c.land_fraction));
    kv("locations", std::to_string(c.n_lat * c.n_lon));
    kv("land_cells", std::to_string(land_cells));
    return out;
}

}  // namespace ssta
