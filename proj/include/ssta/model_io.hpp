#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ssta/bayesian_ridge.hpp"
#include "ssta/composite.hpp"
#include "ssta/csv.hpp"
#include "ssta/errors.hpp"
#include "ssta/gbdt.hpp"
#include "ssta/mlp.hpp"

namespace ssta {

using AnyModel = std::variant<BayesianRidgeModel, MlpModel, GbdtModel, CompositeModel, BalticModel>;

inline constexpr std::string_view kModelMagic = "sstakit-model";
inline constexpr int kModelVersion = 1;

namespace detail {

inline void put_vector(std::string& out, std::string_view key, const Eigen::VectorXd& v) {
    out += key;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out += ' ';
        out += format_double(v(i));
    }
    out += '\n';
}

inline void put_row(std::string& out, std::string_view key, const Eigen::MatrixXd& m,
                    Eigen::Index row) {
    out += key;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        out += ' ';
        out += format_double(m(row, c));
    }
    out += '\n';
}

class LineReader {
public:
    explicit LineReader(std::string_view text) {
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t nl = text.find('\n', pos);
            std::string_view line =
                (nl == std::string_view::npos) ? text.substr(pos) : text.substr(pos, nl - pos);
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
            if (!line.empty()) lines_.push_back(line);
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }
    }

    bool done() const { return at_ >= lines_.size(); }

    // Next line, which must start with `key`; returns the remainder.
    std::string_view expect(std::string_view key) {
        if (done()) throw ParseError(static_cast<long>(at_ + 1), "unexpected end of model file");
        std::string_view line = lines_[at_++];
        if (line.substr(0, key.size()) != key ||
            (line.size() > key.size() && line[key.size()] != ' '))
            throw ParseError(static_cast<long>(at_), "expected '" + std::string(key) + "', got '" +
                                 std::string(line) + "'");
        std::string_view rest = line.substr(std::min(line.size(), key.size() + 1));
        return rest;
    }

    std::string_view peek() const {
        if (done()) return {};
        return lines_[at_];
    }

    static std::vector<std::string_view> split_ws(std::string_view s) {
        std::vector<std::string_view> out;
        std::size_t pos = 0;
        while (pos < s.size()) {
            while (pos < s.size() && s[pos] == ' ') ++pos;
            std::size_t end = pos;
            while (end < s.size() && s[end] != ' ') ++end;
            if (end > pos) out.push_back(s.substr(pos, end - pos));
            pos = end;
        }
        return out;
    }

    double as_double(std::string_view tok) const {
        double v = 0;
        auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
            throw ParseError(static_cast<long>(at_), "bad number '" + std::string(tok) + "'");
        return v;
    }

    long as_long(std::string_view tok) const {
        long v = 0;
        auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
            throw ParseError(static_cast<long>(at_), "bad integer '" + std::string(tok) + "'");
        return v;
    }

    double expect_double(std::string_view key) {
        auto toks = split_ws(expect(key));
        if (toks.size() != 1) throw ParseError(static_cast<long>(at_), "expected one value");
        return as_double(toks[0]);
    }

    long expect_long(std::string_view key) {
        auto toks = split_ws(expect(key));
        if (toks.size() != 1) throw ParseError(static_cast<long>(at_), "expected one value");
        return as_long(toks[0]);
    }

    Eigen::VectorXd expect_vector(std::string_view key) {
        auto toks = split_ws(expect(key));
        Eigen::VectorXd v(static_cast<Eigen::Index>(toks.size()));
        for (std::size_t i = 0; i < toks.size(); ++i)
            v(static_cast<Eigen::Index>(i)) = as_double(toks[i]);
        return v;
    }

private:
    std::vector<std::string_view> lines_;
    std::size_t at_ = 0;
};

inline void write_ridge(std::string& out, const BayesianRidgeModel& m) {
    out += "ridge {\n";
    out += "dim " + std::to_string(m.dim()) + "\n";
    put_vector(out, "weights", m.weights);
    out += "intercept " + format_double(m.intercept) + "\n";
    out += "alpha " + format_double(m.alpha) + "\n";
    out += "lambda " + format_double(m.lambda) + "\n";
    out += "iterations " + std::to_string(m.n_iterations_run) + "\n";
    out += "converged " + std::to_string(m.converged ? 1 : 0) + "\n";
    out += "target_mean " + format_double(m.target_mean) + "\n";
    put_vector(out, "feature_mean", m.feature_mean.transpose());
    put_vector(out, "eigvals", m.eigvals);
    for (Eigen::Index r = 0; r < m.eigvecs.rows(); ++r) put_row(out, "eigvec", m.eigvecs, r);
    out += "}\n";
}

inline BayesianRidgeModel read_ridge(LineReader& r) {
    r.expect("ridge {");
    BayesianRidgeModel m;
    long dim = r.expect_long("dim");
    m.weights = r.expect_vector("weights");
    if (m.weights.size() != dim) throw ParseError(0, "weight count does not match dim");
    m.intercept = r.expect_double("intercept");
    m.alpha = r.expect_double("alpha");
    m.lambda = r.expect_double("lambda");
    m.n_iterations_run = static_cast<int>(r.expect_long("iterations"));
    m.converged = r.expect_long("converged") != 0;
    m.target_mean = r.expect_double("target_mean");
    m.feature_mean = r.expect_vector("feature_mean").transpose();
    m.eigvals = r.expect_vector("eigvals");
    m.eigvecs.resize(dim, dim);
    for (long i = 0; i < dim; ++i) m.eigvecs.row(i) = r.expect_vector("eigvec").transpose();
    r.expect("}");
    return m;
}

inline void write_mlp(std::string& out, const MlpModel& m) {
    out += "mlp {\n";
    out += "in " + std::to_string(m.in_dim()) + "\n";
    out += "hidden " + std::to_string(m.hidden_dim()) + "\n";
    for (Eigen::Index r = 0; r < m.w1.rows(); ++r) put_row(out, "w1", m.w1, r);
    put_vector(out, "b1", m.b1);
    for (Eigen::Index r = 0; r < m.w2.rows(); ++r) put_row(out, "w2", m.w2, r);
    put_vector(out, "b2", m.b2);
    Eigen::VectorXd trace(static_cast<Eigen::Index>(m.loss_trace.size()));
    for (std::size_t i = 0; i < m.loss_trace.size(); ++i)
        trace(static_cast<Eigen::Index>(i)) = m.loss_trace[i];
    put_vector(out, "loss_trace", trace);
    out += "}\n";
}

inline MlpModel read_mlp(LineReader& r) {
    r.expect("mlp {");
    MlpModel m;
    long in = r.expect_long("in");
    long hidden = r.expect_long("hidden");
    m.w1.resize(hidden, in);
    for (long i = 0; i < hidden; ++i) m.w1.row(i) = r.expect_vector("w1").transpose();
    m.b1 = r.expect_vector("b1");
    m.w2.resize(kSeasonClasses, hidden);
    for (long i = 0; i < kSeasonClasses; ++i) m.w2.row(i) = r.expect_vector("w2").transpose();
    m.b2 = r.expect_vector("b2");
    Eigen::VectorXd trace = r.expect_vector("loss_trace");
    m.loss_trace.assign(trace.data(), trace.data() + trace.size());
    r.expect("}");
    return m;
}

inline void write_gbdt(std::string& out, const GbdtModel& m) {
    out += "gbdt {\n";
    out += "n_features " + std::to_string(m.n_features) + "\n";
    out += "learning_rate " + format_double(m.learning_rate) + "\n";
    out += "init_prediction " + format_double(m.init_prediction) + "\n";
    out += "n_trees " + std::to_string(m.trees.size()) + "\n";
    for (const auto& tree : m.trees) {
        out += "tree " + std::to_string(tree.nodes.size()) + "\n";
        for (const auto& nd : tree.nodes) {
            out += "node " + std::to_string(nd.feature) + " " + format_double(nd.threshold) + " " +
                   std::to_string(nd.left) + " " + std::to_string(nd.right) + " " +
                   format_double(nd.value) + "\n";
        }
    }
    Eigen::VectorXd mse(static_cast<Eigen::Index>(m.stage_mse.size()));
    for (std::size_t i = 0; i < m.stage_mse.size(); ++i)
        mse(static_cast<Eigen::Index>(i)) = m.stage_mse[i];
    put_vector(out, "stage_mse", mse);
    out += "}\n";
}

inline GbdtModel read_gbdt(LineReader& r) {
    r.expect("gbdt {");
    GbdtModel m;
    m.n_features = r.expect_long("n_features");
    m.learning_rate = r.expect_double("learning_rate");
    m.init_prediction = r.expect_double("init_prediction");
    long n_trees = r.expect_long("n_trees");
    for (long k = 0; k < n_trees; ++k) {
        long n_nodes = r.expect_long("tree");
        RegressionTree tree;
        for (long i = 0; i < n_nodes; ++i) {
            auto toks = LineReader::split_ws(r.expect("node"));
            if (toks.size() != 5) throw ParseError(0, "tree node needs 5 fields");
            TreeNode nd;
            nd.feature = static_cast<int>(r.as_long(toks[0]));
            nd.threshold = r.as_double(toks[1]);
            nd.left = static_cast<int>(r.as_long(toks[2]));
            nd.right = static_cast<int>(r.as_long(toks[3]));
            nd.value = r.as_double(toks[4]);
            tree.nodes.push_back(nd);
        }
        m.trees.push_back(std::move(tree));
    }
    Eigen::VectorXd mse = r.expect_vector("stage_mse");
    m.stage_mse.assign(mse.data(), mse.data() + mse.size());
    r.expect("}");
    return m;
}

inline void write_correction(std::string& out, const CorrectionTable& c) {
    out += "correction_period " + std::to_string(c.period_first) + " " +
           std::to_string(c.period_last) + "\n";
    for (int m = 0; m < 12; ++m) put_row(out, "correction", c.values, m);
}

inline CorrectionTable read_correction(LineReader& r, Eigen::Index locations) {
    CorrectionTable c;
    auto toks = LineReader::split_ws(r.expect("correction_period"));
    if (toks.size() != 2) throw ParseError(0, "correction period needs 2 values");
    c.period_first = static_cast<int>(r.as_long(toks[0]));
    c.period_last = static_cast<int>(r.as_long(toks[1]));
    c.values.resize(12, locations);
    for (int m = 0; m < 12; ++m) {
        Eigen::VectorXd row = r.expect_vector("correction");
        if (row.size() != locations) throw ParseError(0, "correction row width mismatch");
        c.values.row(m) = row.transpose();
    }
    return c;
}

inline void write_composite(std::string& out, const CompositeModel& m) {
    out += "composite {\n";
    out += "short_years " + std::to_string(m.short_years) + "\n";
    out += "long_years " + std::to_string(m.long_years) + "\n";
    out += "c_global " + format_double(m.c_global) + "\n";
    out += std::string("season_source ") +
           (m.season_source == SeasonSource::known_calendar ? "calendar" : "mlp") + "\n";
    out += "target_offset " + std::to_string(m.target_offset) + "\n";
    std::string ids;
    for (std::size_t i = 0; i < m.location_ids.size(); ++i) {
        if (i) ids += ',';
        ids += m.location_ids[i];
    }
    out += "location_ids " + ids + "\n";
    write_correction(out, m.correction);
    write_ridge(out, m.model_short);
    write_ridge(out, m.model_long);
    out += "classifier " + std::to_string(m.season_classifier ? 1 : 0) + "\n";
    if (m.season_classifier) write_mlp(out, *m.season_classifier);
    out += "}\n";
}

inline CompositeModel read_composite(LineReader& r) {
    r.expect("composite {");
    CompositeModel m;
    m.short_years = static_cast<int>(r.expect_long("short_years"));
    m.long_years = static_cast<int>(r.expect_long("long_years"));
    m.c_global = r.expect_double("c_global");
    std::string_view source = r.expect("season_source");
    if (source == "calendar") m.season_source = SeasonSource::known_calendar;
    else if (source == "mlp") m.season_source = SeasonSource::mlp_classifier;
    else throw ParseError(0, "unknown season source '" + std::string(source) + "'");
    m.target_offset = static_cast<int>(r.expect_long("target_offset"));
    std::string_view ids = r.expect("location_ids");
    {
        std::size_t pos = 0;
        while (pos <= ids.size()) {
            std::size_t c = ids.find(',', pos);
            if (c == std::string_view::npos) {
                m.location_ids.emplace_back(ids.substr(pos));
                break;
            }
            m.location_ids.emplace_back(ids.substr(pos, c - pos));
            pos = c + 1;
        }
    }
    m.correction = read_correction(r, static_cast<Eigen::Index>(m.location_ids.size()));
    m.model_short = read_ridge(r);
    m.model_long = read_ridge(r);
    if (r.expect_long("classifier") != 0) m.season_classifier = read_mlp(r);
    r.expect("}");
    return m;
}

inline void write_baltic(std::string& out, const BalticModel& m) {
    out += "baltic {\n";
    out += "window_years " + std::to_string(m.window_years[0]) + " " +
           std::to_string(m.window_years[1]) + "\n";
    write_ridge(out, m.members[0]);
    write_ridge(out, m.members[1]);
    out += "}\n";
}

inline BalticModel read_baltic(LineReader& r) {
    r.expect("baltic {");
    BalticModel m;
    auto toks = LineReader::split_ws(r.expect("window_years"));
    if (toks.size() != 2) throw ParseError(0, "window_years needs 2 values");
    m.window_years[0] = static_cast<int>(r.as_long(toks[0]));
    m.window_years[1] = static_cast<int>(r.as_long(toks[1]));
    m.members[0] = read_ridge(r);
    m.members[1] = read_ridge(r);
    r.expect("}");
    return m;
}

}  // namespace detail

inline const char* model_kind_name(const AnyModel& model) {
    switch (model.index()) {
        case 0: return "bayesian_ridge";
        case 1: return "mlp";
        case 2: return "gbdt";
        case 3: return "composite";
        case 4: return "baltic";
    }
    return "?";
}

inline std::string serialize_model(const AnyModel& model) {
    std::string out{kModelMagic};
    out += " " + std::to_string(kModelVersion) + "\n";
    out += std::string("kind ") + model_kind_name(model) + "\n";
    std::visit(
        [&out](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BayesianRidgeModel>) detail::write_ridge(out, m);
            else if constexpr (std::is_same_v<T, MlpModel>) detail::write_mlp(out, m);
            else if constexpr (std::is_same_v<T, GbdtModel>) detail::write_gbdt(out, m);
            else if constexpr (std::is_same_v<T, CompositeModel>) detail::write_composite(out, m);
            else detail::write_baltic(out, m);
        },
        model);
    out += "end\n";
    return out;
}

inline AnyModel parse_model(std::string_view text) {
    detail::LineReader r(text);
    auto toks = detail::LineReader::split_ws(r.expect(kModelMagic));
    if (toks.size() != 1 || r.as_long(toks[0]) != kModelVersion)
        throw ParseError(1, "unsupported model format version");
    std::string_view kind = r.expect("kind");
    AnyModel model;
    if (kind == "bayesian_ridge") model = detail::read_ridge(r);
    else if (kind == "mlp") model = detail::read_mlp(r);
    else if (kind == "gbdt") model = detail::read_gbdt(r);
    else if (kind == "composite") model = detail::read_composite(r);
    else if (kind == "baltic") model = detail::read_baltic(r);
    else throw ParseError(2, "unknown model kind '" + std::string(kind) + "'");
    r.expect("end");
    return model;
}

}  // namespace ssta
