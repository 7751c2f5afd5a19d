#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "ssta/errors.hpp"
#include "ssta/grid.hpp"
#include "ssta/persistence.hpp"
#include "ssta/rng.hpp"

namespace ssta {

// Root mean squared error over present pairs; missing positions are
// excluded pairwise.
inline double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
    if (pred.size() != truth.size() || pred.size() < 1)
        throw ShapeError("rmse needs two equal-length, non-empty vectors");
    double sq = 0;
    long n = 0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        if (is_missing(pred(i)) || is_missing(truth(i))) continue;
        double d = pred(i) - truth(i);
        sq += d * d;
        ++n;
    }
    if (n == 0) throw EmptyComparison();
    return std::sqrt(sq / static_cast<double>(n));
}

struct YearlyRmse {
    int year = 0;
    double rmse = 0;
    long count = 0;  // squared-error terms pooled into this row
};

// Squared errors grouped by target calendar year, pooled over locations.
inline std::vector<YearlyRmse> yearly_rmse(const std::vector<Eigen::VectorXd>& predictions,
                                           const std::vector<Eigen::VectorXd>& truths,
                                           const std::vector<int>& target_months) {
    if (predictions.size() != truths.size() || predictions.size() != target_months.size())
        throw ShapeError("predictions, truths and target months must align");
    std::map<int, std::pair<double, long>> acc;
    for (std::size_t b = 0; b < predictions.size(); ++b) {
        const auto& p = predictions[b];
        const auto& t = truths[b];
        if (p.size() != t.size()) throw ShapeError("prediction and truth lengths differ");
        auto& [sq, n] = acc[calendar_year(target_months[b])];
        for (Eigen::Index l = 0; l < p.size(); ++l) {
            if (is_missing(p(l)) || is_missing(t(l))) continue;
            double d = p(l) - t(l);
            sq += d * d;
            ++n;
        }
    }
    std::vector<YearlyRmse> out;
    for (const auto& [year, sn] : acc) {
        if (sn.second == 0) continue;
        out.push_back({year, std::sqrt(sn.first / static_cast<double>(sn.second)), sn.second});
    }
    return out;
}

// Challenge-style scoring: per-location RMSE over all blocks for the model
// and for persistence, then the mean of per-location differences. Positive
// skill beats the baseline.
struct SkillReport {
    double rmse_model = 0;        // mean of per-location model RMSE
    double rmse_persistence = 0;  // mean of per-location persistence RMSE
    double skill = 0;             // rmse_persistence - rmse_model
    Eigen::VectorXd per_location_skill;  // NaN where a location had no pairs
    long locations_scored = 0;
    long blocks_scored = 0;
    std::vector<YearlyRmse> per_year_model;
    std::vector<YearlyRmse> per_year_persistence;
};

inline SkillReport skill_score(const std::vector<Eigen::VectorXd>& predictions,
                               const std::vector<Eigen::VectorXd>& truths,
                               const std::vector<Block>& blocks) {
    if (predictions.size() != truths.size() || predictions.size() != blocks.size())
        throw ShapeError("predictions, truths and blocks must align");
    if (predictions.empty()) throw EmptyComparison("no blocks to score");

    const Eigen::Index L = predictions.front().size();
    Eigen::VectorXd sq_model = Eigen::VectorXd::Zero(L);
    Eigen::VectorXd sq_pers = Eigen::VectorXd::Zero(L);
    Eigen::VectorXi n_pairs = Eigen::VectorXi::Zero(L);

    std::vector<Eigen::VectorXd> pers_preds;
    std::vector<int> target_months;
    pers_preds.reserve(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& pred = predictions[b];
        const auto& truth = truths[b];
        if (pred.size() != L || truth.size() != L)
            throw ShapeError("ragged prediction/truth rows");
        Eigen::VectorXd pers = persistence_forecast(blocks[b]);
        if (pers.size() != L) throw ShapeError("block location count differs from predictions");
        for (Eigen::Index l = 0; l < L; ++l) {
            if (is_missing(truth(l))) continue;  // pairwise exclusion
            if (is_missing(pers(l)))
                throw IncompleteBaseline("persistence input missing where truth is present");
            if (is_missing(pred(l)))
                throw DataError("model prediction missing where truth is present");
            double dm = pred(l) - truth(l);
            double dp = pers(l) - truth(l);
            sq_model(l) += dm * dm;
            sq_pers(l) += dp * dp;
            n_pairs(l) += 1;
        }
        pers_preds.push_back(std::move(pers));
        target_months.push_back(blocks[b].target_month());
    }

    SkillReport report;
    report.blocks_scored = static_cast<long>(blocks.size());
    report.per_location_skill.setConstant(L, missing_value());
    double sum_model = 0, sum_pers = 0, sum_skill = 0;
    for (Eigen::Index l = 0; l < L; ++l) {
        if (n_pairs(l) == 0) continue;
        double rm = std::sqrt(sq_model(l) / n_pairs(l));
        double rp = std::sqrt(sq_pers(l) / n_pairs(l));
        report.per_location_skill(l) = rp - rm;
        sum_model += rm;
        sum_pers += rp;
        sum_skill += rp - rm;
        ++report.locations_scored;
    }
    if (report.locations_scored == 0) throw EmptyComparison("no location had any present pair");
    report.rmse_model = sum_model / static_cast<double>(report.locations_scored);
    report.rmse_persistence = sum_pers / static_cast<double>(report.locations_scored);
    report.skill = sum_skill / static_cast<double>(report.locations_scored);
    report.per_year_model = yearly_rmse(predictions, truths, target_months);
    report.per_year_persistence = yearly_rmse(pers_preds, truths, target_months);
    return report;
}

// RMSE of predicting value(t) from value(t-N), pooled over all valid time
// steps and locations, for N = 1..max_n.
inline std::vector<double> persistence_horizon_curve(const TimeGrid& ssta, int max_n) {
    if (max_n < 1) throw ConfigError("max_n must be positive");
    if (max_n >= ssta.months())
        throw RangeError("horizon " + std::to_string(max_n) + " needs more than " +
                         std::to_string(ssta.months()) + " months");
    std::vector<double> curve;
    curve.reserve(static_cast<std::size_t>(max_n));
    for (int n = 1; n <= max_n; ++n) {
        double sq = 0;
        long cnt = 0;
        for (Eigen::Index t = n; t < ssta.months(); ++t) {
            for (Eigen::Index l = 0; l < ssta.locations(); ++l) {
                if (!ssta.present[static_cast<std::size_t>(l)]) continue;
                double d = ssta.values(t - n, l) - ssta.values(t, l);
                sq += d * d;
                ++cnt;
            }
        }
        if (cnt == 0) throw EmptyComparison("no present values for the horizon curve");
        curve.push_back(std::sqrt(sq / static_cast<double>(cnt)));
    }
    return curve;
}

struct AnnualMean {
    int year = 0;
    double mean = 0;
};

// Mean over locations and the 12 months of each complete calendar year;
// partial years at either end are omitted.
inline std::vector<AnnualMean> annual_global_mean(const TimeGrid& grid) {
    if (grid.months() < 12) throw InsufficientHistory("needs at least 12 months");
    std::map<int, std::pair<double, long>> acc;  // year -> (sum, count of months seen)
    std::map<int, long> month_count;
    for (Eigen::Index t = 0; t < grid.months(); ++t) {
        int year = calendar_year(grid.month_index_at(t));
        double sum = 0;
        long n = 0;
        for (Eigen::Index l = 0; l < grid.locations(); ++l) {
            if (!grid.present[static_cast<std::size_t>(l)]) continue;
            sum += grid.values(t, l);
            ++n;
        }
        if (n == 0) throw EmptyComparison("no present locations");
        auto& [s, c] = acc[year];
        s += sum / static_cast<double>(n);
        c += 1;
        month_count[year] += 1;
    }
    std::vector<AnnualMean> out;
    for (const auto& [year, sc] : acc) {
        if (month_count[year] != 12) continue;  // incomplete year
        out.push_back({year, sc.first / 12.0});
    }
    return out;
}

// Scores the two halves of a shuffled public/private split independently.
// Every block must land in exactly one subset and the halves may differ by
// at most one block.
inline std::pair<SkillReport, SkillReport> split_score(
    const std::vector<Eigen::VectorXd>& predictions, const std::vector<Eigen::VectorXd>& truths,
    const std::vector<Block>& blocks, const std::vector<int>& assignment) {
    if (assignment.size() != blocks.size())
        throw SplitError("assignment length does not match block count");
    long n0 = 0, n1 = 0;
    for (int a : assignment) {
        if (a == 0) ++n0;
        else if (a == 1) ++n1;
        else throw SplitError("assignment values must be 0 or 1");
    }
    if (std::abs(n0 - n1) > 1)
        throw SplitError("unbalanced split: " + std::to_string(n0) + " vs " + std::to_string(n1));
    if (n0 == 0 || n1 == 0) throw SplitError("each subset needs at least one block");

    std::vector<Eigen::VectorXd> p0, p1, t0, t1;
    std::vector<Block> b0, b1;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (assignment[i] == 0) {
            p0.push_back(predictions[i]);
            t0.push_back(truths[i]);
            b0.push_back(blocks[i]);
        } else {
            p1.push_back(predictions[i]);
            t1.push_back(truths[i]);
            b1.push_back(blocks[i]);
        }
    }
    return {skill_score(p0, t0, b0), skill_score(p1, t1, b1)};
}

// Seeded k-fold assignment; folds differ in size by at most one.
inline std::vector<int> kfold_assignments(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2 || static_cast<std::size_t>(k) > n)
        throw ConfigError("fold count must be in [2, n]");
    std::vector<int> out(n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    for (std::size_t i = 0; i < n; ++i) out[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    return out;
}

}  // namespace ssta
