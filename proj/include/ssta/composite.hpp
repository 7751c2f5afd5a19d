#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ssta/bayesian_ridge.hpp"
#include "ssta/blocks.hpp"
#include "ssta/errors.hpp"
#include "ssta/features.hpp"
#include "ssta/grid.hpp"
#include "ssta/mlp.hpp"

namespace ssta {

// Mean SSTA per (calendar month, location) over a trailing slice of the
// training range; the additive location/season correction.
struct CorrectionTable {
    Eigen::MatrixXd values;  // 12 x L
    int period_first = 0;    // month indices of the trailing slice
    int period_last = 0;

    Eigen::Index locations() const { return values.cols(); }
};

inline CorrectionTable compute_local_correction(const TimeGrid& ssta, int trailing_years = 10) {
    if (trailing_years < 1) throw ConfigError("trailing_years must be positive");
    const long span = trailing_years * 12L;
    if (ssta.months() < span)
        throw InsufficientHistory("correction needs " + std::to_string(span) + " months, grid has " +
                                  std::to_string(ssta.months()));
    CorrectionTable table;
    table.period_last = ssta.end_month();
    table.period_first = ssta.end_month() - static_cast<int>(span) + 1;
    table.values.setConstant(12, ssta.locations(), missing_value());

    for (int m = 0; m < 12; ++m) {
        // Walk backwards collecting the last trailing_years occurrences.
        std::vector<Eigen::Index> rows;
        for (Eigen::Index t = ssta.months() - 1; t >= 0 && static_cast<int>(rows.size()) < trailing_years; --t)
            if (ssta.calendar_month_at(t) == m) rows.push_back(t);
        for (Eigen::Index l = 0; l < ssta.locations(); ++l) {
            if (!ssta.present[static_cast<std::size_t>(l)]) continue;
            double sum = 0;
            for (Eigen::Index t : rows) sum += ssta.values(t, l);
            table.values(m, l) = sum / static_cast<double>(rows.size());
        }
    }
    return table;
}

enum class SeasonSource { known_calendar, mlp_classifier };

struct CompositeConfig {
    int short_years = 3;
    int long_years = 9;
    int correction_years = 10;
    double c_global = 0.1;
    SeasonSource season_source = SeasonSource::known_calendar;
    int window = 12;
    int target_offset = 3;
    BayesianRidgeConfig ridge;
    MlpConfig mlp;  // only used when season_source == mlp_classifier
};

// Two ridge models over RG48 rows (trained on trailing short/long windows)
// averaged, plus halved local and global corrections.
struct CompositeModel {
    BayesianRidgeModel model_short;
    BayesianRidgeModel model_long;
    int short_years = 3;
    int long_years = 9;
    CorrectionTable correction;
    double c_global = 0.1;
    SeasonSource season_source = SeasonSource::known_calendar;
    std::optional<MlpModel> season_classifier;
    int target_offset = 3;
    std::vector<std::string> location_ids;
};

namespace detail {

// Stacks RG48 rows for every block whose target month falls in the
// trailing window (window anchored on the target month).
inline FeatureMatrix rg48_training_rows(const std::vector<BlockSample>& samples,
                                        const NeighborMap& nmap, const CoordinateTable& coords,
                                        int first_target_month, int last_target_month) {
    FeatureMatrix out;
    bool first = true;
    for (const auto& sample : samples) {
        if (!sample.target) continue;
        int tm = sample.block.target_month();
        if (tm < first_target_month || tm > last_target_month) continue;
        FeatureMatrix rows = build_rg48_rows(sample.block, nmap, coords, &*sample.target);
        if (first) {
            out = std::move(rows);
            first = false;
        } else {
            out.append(rows);
        }
    }
    if (first) throw InsufficientHistory("no training blocks fall inside the trailing window");
    return out;
}

}  // namespace detail

inline CompositeModel fit_composite(const GridSet& train, const CoordinateTable& coords,
                                    const NeighborMap& nmap, const CompositeConfig& config = {}) {
    const TimeGrid& ssta = train.get(Variable::SSTA);
    if (config.short_years < 1 || config.long_years < 1)
        throw ConfigError("window years must be positive");
    const long need = (std::max(config.short_years, config.long_years) + 1) * 12L;
    if (ssta.months() < need)
        throw InsufficientHistory("training span must cover " + std::to_string(need) + " months");

    GridSet ssta_only;
    ssta_only.grids[static_cast<int>(Variable::SSTA)] = ssta;
    auto samples = extract_blocks(ssta_only, config.window, config.target_offset);

    const int end = ssta.end_month();
    CompositeModel model;
    model.short_years = config.short_years;
    model.long_years = config.long_years;
    model.c_global = config.c_global;
    model.season_source = config.season_source;
    model.target_offset = config.target_offset;
    model.location_ids = ssta.location_ids;

    FeatureMatrix rows_short =
        detail::rg48_training_rows(samples, nmap, coords, end - config.short_years * 12 + 1, end);
    FeatureMatrix rows_long =
        detail::rg48_training_rows(samples, nmap, coords, end - config.long_years * 12 + 1, end);
    model.model_short = fit_bayesian_ridge(rows_short, config.ridge);
    model.model_long = fit_bayesian_ridge(rows_long, config.ridge);
    model.correction = compute_local_correction(ssta, config.correction_years);

    if (config.season_source == SeasonSource::mlp_classifier) {
        const TimeGrid& sst = train.get(Variable::SST);
        model.season_classifier = fit_mlp_classifier(build_seasonal_dataset(sst), config.mlp);
    }
    return model;
}

// The composite forecast for one RG48 row with its season resolved:
// the two ridge predictions averaged plus half the summed corrections.
inline double predict_composite(const CompositeModel& model, const FeatureRow& row) {
    if (row.layout != FeatureLayout::RG48)
        throw LayoutError(std::string("composite prediction needs RG48 rows, got ") +
                          layout_name(row.layout));
    if (row.season < 1 || row.season > 12)
        throw DataError("row season is unresolved");
    if (row.location_index < 0 || row.location_index >= model.correction.locations())
        throw UnknownLocation("location index " + std::to_string(row.location_index) +
                              " not covered by the correction table");
    const double c_local = model.correction.values(row.season - 1, row.location_index);
    if (is_missing(c_local))
        throw UnknownLocation("correction table has no value for location " +
                              std::to_string(row.location_index));
    const double p_short = predict_bayesian_ridge(model.model_short, row.values);
    const double p_long = predict_bayesian_ridge(model.model_long, row.values);
    return 0.5 * (p_short + p_long) + 0.5 * (c_local + model.c_global);
}

// Forecast a whole block; locations whose rows cannot be built (missing
// window values) come back as NaN. When the model resolves seasons with
// the classifier, the season is read off the window's last SST row and
// advanced by the block's target offset.
inline Eigen::VectorXd forecast_composite_block(const CompositeModel& model, const Block& block,
                                                const CoordinateTable& coords,
                                                const NeighborMap& nmap) {
    FeatureMatrix rows = build_rg48_rows(block, nmap, coords);
    int season_override = 0;
    if (model.season_source == SeasonSource::mlp_classifier) {
        if (!model.season_classifier) throw DataError("model lacks its season classifier");
        const Eigen::MatrixXd& sst = block.window(Variable::SST);
        Eigen::VectorXd last = sst.row(sst.rows() - 1).transpose();
        int end_season = predict_season(*model.season_classifier, normalize_global_row(last));
        season_override = (end_season - 1 + block.target_offset) % 12 + 1;
    }
    const Eigen::Index L = block.window(Variable::SSTA).cols();
    Eigen::VectorXd out = Eigen::VectorXd::Constant(L, missing_value());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        FeatureRow row = rows.row(i);
        if (season_override) row.season = season_override;
        out(row.location_index) = predict_composite(model, row);
    }
    return out;
}

struct BalticConfig {
    std::array<int, 2> window_years{15, 10};
    BayesianRidgeConfig ridge;
};

// Two September-lag ridge models over different trailing periods, averaged
// without correction terms.
struct BalticModel {
    std::array<BayesianRidgeModel, 2> members;
    std::array<int, 2> window_years{15, 10};
};

inline BalticModel fit_baltic(const TimeGrid& ssta, const BalticConfig& config = {}) {
    std::vector<int> septembers;  // month indices, ascending
    for (Eigen::Index t = 0; t < ssta.months(); ++t)
        if (ssta.calendar_month_at(t) == 8) septembers.push_back(ssta.month_index_at(t));
    if (septembers.size() < 16)
        throw InsufficientHistory("needs at least 16 Septembers, grid has " +
                                  std::to_string(septembers.size()));

    BalticModel model;
    model.window_years = config.window_years;
    for (int k = 0; k < 2; ++k) {
        const int first_target = ssta.end_month() - config.window_years[static_cast<std::size_t>(k)] * 12 + 1;
        std::vector<Eigen::VectorXd> feats;
        std::vector<double> targets;
        for (int tm : septembers) {
            if (tm < first_target) continue;
            if (!ssta.contains_month(tm - 36)) continue;  // needs three prior Septembers
            for (Eigen::Index l = 0; l < ssta.locations(); ++l) {
                if (!ssta.present[static_cast<std::size_t>(l)]) continue;
                FeatureRow row = build_baltic_rows(ssta, static_cast<int>(l), tm - 12);
                feats.push_back(row.values);
                targets.push_back(ssta.values(ssta.row_of(tm), l));
            }
        }
        if (feats.empty()) throw InsufficientHistory("no September training rows in window");
        Eigen::MatrixXd X(static_cast<Eigen::Index>(feats.size()), 3);
        Eigen::VectorXd y(static_cast<Eigen::Index>(feats.size()));
        for (std::size_t i = 0; i < feats.size(); ++i) {
            X.row(static_cast<Eigen::Index>(i)) = feats[i].transpose();
            y(static_cast<Eigen::Index>(i)) = targets[i];
        }
        model.members[static_cast<std::size_t>(k)] = fit_bayesian_ridge(X, y, config.ridge);
    }
    return model;
}

// Mean of the two members for the September following the anchor.
inline double predict_baltic(const BalticModel& model, const TimeGrid& ssta, int location,
                             int anchor_september) {
    FeatureRow row = build_baltic_rows(ssta, location, anchor_september);
    double a = predict_bayesian_ridge(model.members[0], row.values);
    double b = predict_bayesian_ridge(model.members[1], row.values);
    return 0.5 * (a + b);
}

inline Eigen::VectorXd predict_baltic_all(const BalticModel& model, const TimeGrid& ssta,
                                          int anchor_september) {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(ssta.locations(), missing_value());
    for (Eigen::Index l = 0; l < ssta.locations(); ++l) {
        if (!ssta.present[static_cast<std::size_t>(l)]) continue;
        out(l) = predict_baltic(model, ssta, static_cast<int>(l), anchor_september);
    }
    return out;
}

struct EnsembleMember {
    std::string name;
    double weight = 0;
};

// Weighted sum of member predictions; weights are free and deliberately
// not renormalized.
struct EnsembleSpec {
    std::vector<EnsembleMember> members;
};

inline double ensemble_predict(const EnsembleSpec& spec, const std::vector<double>& predictions) {
    if (spec.members.empty()) throw ConfigError("ensemble needs at least one member");
    if (predictions.size() != spec.members.size())
        throw ShapeError("expected " + std::to_string(spec.members.size()) + " predictions, got " +
                         std::to_string(predictions.size()));
    double sum = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (!std::isfinite(spec.members[i].weight)) throw ConfigError("ensemble weight is not finite");
        sum += spec.members[i].weight * predictions[i];
    }
    return sum;
}

inline Eigen::VectorXd ensemble_predict(const EnsembleSpec& spec,
                                        const std::vector<Eigen::VectorXd>& predictions) {
    if (spec.members.empty()) throw ConfigError("ensemble needs at least one member");
    if (predictions.size() != spec.members.size())
        throw ShapeError("expected " + std::to_string(spec.members.size()) + " predictions, got " +
                         std::to_string(predictions.size()));
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(predictions.front().size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i].size() != sum.size()) throw ShapeError("ragged member predictions");
        if (!std::isfinite(spec.members[i].weight)) throw ConfigError("ensemble weight is not finite");
        sum += spec.members[i].weight * predictions[i];
    }
    return sum;
}

}  // namespace ssta
