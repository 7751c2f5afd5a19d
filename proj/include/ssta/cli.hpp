#pragma once

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ssta/blocks.hpp"
#include "ssta/climatology.hpp"
#include "ssta/composite.hpp"
#include "ssta/csv.hpp"
#include "ssta/errors.hpp"
#include "ssta/evaluation.hpp"
#include "ssta/features.hpp"
#include "ssta/gbdt.hpp"
#include "ssta/grid.hpp"
#include "ssta/io.hpp"
#include "ssta/model_io.hpp"
#include "ssta/neighbors.hpp"
#include "ssta/parallel.hpp"
#include "ssta/persistence.hpp"
#include "ssta/recursive.hpp"
#include "ssta/svg.hpp"
#include "ssta/synthgen.hpp"

namespace ssta::cli {

namespace fs = std::filesystem;

inline void log_info(const std::string& line) { std::fprintf(stderr, "[ssta] %s\n", line.c_str()); }

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Shared per-invocation options; every subcommand resolves from flags and
// the key=value config file, flags winning.
struct CommonOptions {
    std::string config_path;
    std::string start_month_text;
    std::string out;
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = SSTA_THREADS env or 1
    std::string ssta_path, sst_path, mslp_path, t2m_path, coords_path;

    int start_month() const { return parse_year_month(start_month_text); }
    int resolved_threads() const {
        if (threads > 0) return threads;
        if (const char* env = std::getenv("SSTA_THREADS")) {
            int v = std::atoi(env);
            if (v > 0) return v;
        }
        return 1;
    }
};

namespace detail {

inline void add_common(CLI::App* cmd, CommonOptions& o, bool with_grids) {
    cmd->add_option("--config", o.config_path, "key=value config file; flags override");
    cmd->add_option("--start-month", o.start_month_text, "anchor of the first CSV row (YYYY-MM)");
    cmd->add_option("--out", o.out, "output file or directory");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--threads", o.threads, "worker threads (default: SSTA_THREADS or 1)");
    if (with_grids) {
        cmd->add_option("--ssta", o.ssta_path, "SSTA value CSV");
        cmd->add_option("--sst", o.sst_path, "SST value CSV");
        cmd->add_option("--mslp", o.mslp_path, "MSLP value CSV");
        cmd->add_option("--t2m", o.t2m_path, "T2M value CSV");
        cmd->add_option("--coords", o.coords_path, "coordinate CSV");
    }
}

inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::map<std::string, std::string> kv;
    std::string text = read_file(path);
    long line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string line = (nl == std::string::npos) ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = (nl == std::string::npos) ? text.size() + 1 : nl + 1;
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto trim = [](std::string s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
            return s;
        };
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + " is not key=value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + " has an empty key");
        if (kv.count(key)) throw ConfigError("config key '" + key + "' given twice");
        kv[key] = val;
    }
    return kv;
}

// Injects config entries the command line did not set; keys must exist
// somewhere in the CLI so typos fail loudly.
inline std::vector<std::string> merge_config(const CLI::App& app, std::vector<std::string> args) {
    std::string config_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
    }
    if (config_path.empty()) return args;

    std::set<std::string> known;
    for (const CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        for (const CLI::Option* opt : sub->get_options())
            for (const std::string& name : opt->get_lnames()) known.insert(name);

    std::set<std::string> given;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0) continue;
        std::size_t eq = a.find('=');
        given.insert(eq == std::string::npos ? a.substr(2) : a.substr(2, eq - 2));
    }

    for (const auto& [key, value] : parse_config_file(config_path)) {
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
        if (given.count(key)) continue;  // explicit flag wins
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

inline TimeGrid load_value_csv(const std::string& path, Variable v, int start_month) {
    if (path.empty()) throw MissingVariable(variable_name(v));
    return parse_value_csv(read_file(path), v, start_month);
}

struct LoadedData {
    GridSet grids;
    CoordinateTable coords;
};

// Reads whatever grids were named, aligns them, and drops land columns.
inline LoadedData load_inputs(const CommonOptions& o, bool need_ssta, bool need_sst,
                              bool need_mslp, bool need_t2m) {
    const int anchor = o.start_month();
    GridSet gs;
    if (need_ssta || !o.ssta_path.empty())
        gs.set(Variable::SSTA, load_value_csv(o.ssta_path, Variable::SSTA, anchor));
    if (need_sst || !o.sst_path.empty())
        gs.set(Variable::SST, load_value_csv(o.sst_path, Variable::SST, anchor));
    if (need_mslp || !o.mslp_path.empty())
        gs.set(Variable::MSLP, load_value_csv(o.mslp_path, Variable::MSLP, anchor));
    if (need_t2m || !o.t2m_path.empty())
        gs.set(Variable::T2M, load_value_csv(o.t2m_path, Variable::T2M, anchor));
    gs.validate_aligned();
    if (o.coords_path.empty()) throw ConfigError("--coords is required");
    CoordinateTable coords = parse_coordinate_csv(read_file(o.coords_path));
    auto [dropped, kept_coords] = drop_missing_locations(gs, coords);
    return {std::move(dropped), std::move(kept_coords)};
}

inline void write_meta(const fs::path& artifact, const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    fs::path meta = artifact;
    meta += ".meta";
    atomic_write_file(meta, out);
}

inline std::string config_fingerprint(const std::vector<std::string>& args) {
    std::string joined;
    for (const auto& a : args) {
        joined += a;
        joined += '\x1f';
    }
    return hex64(fnv1a(joined));
}

// Single forecast row in value-CSV form (header + one data row).
inline std::string forecast_csv(const std::vector<std::string>& ids, const Eigen::VectorXd& row) {
    TimeGrid g;
    g.location_ids = ids;
    g.values = row.transpose();
    return serialize_value_csv(g);
}

inline std::string table_csv(const std::vector<std::string>& ids, const Eigen::MatrixXd& rows) {
    TimeGrid g;
    g.location_ids = ids;
    g.values = rows;
    return serialize_value_csv(g);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// subcommand payloads

struct SynthOptions {
    CommonOptions common;
    SynthConfig synth;
};

inline int run_synth(SynthOptions& o, const std::string& fingerprint) {
    if (o.common.out.empty()) throw ConfigError("--out directory is required");
    if (!o.common.start_month_text.empty()) o.synth.start_month = o.common.start_month();
    o.synth.seed = o.common.seed;
    SynthData data = generate(o.synth);

    // SSTA is derived exactly the way the ingestion side would do it:
    // climatology over the full generated span.
    ClimatologyTable clim =
        compute_monthly_climatology(data.sst, data.sst.start_month, data.sst.end_month());
    TimeGrid ssta = anomalies_from_sst(data.sst, clim);

    fs::create_directories(o.common.out);
    fs::path dir(o.common.out);
    atomic_write_file(dir / "sst.csv", serialize_value_csv(data.sst));
    atomic_write_file(dir / "ssta.csv", serialize_value_csv(ssta));
    atomic_write_file(dir / "mslp.csv", serialize_value_csv(data.mslp));
    atomic_write_file(dir / "t2m.csv", serialize_value_csv(data.t2m));
    atomic_write_file(dir / "coordinates.csv", serialize_coordinate_csv(data.coords));
    std::string manifest = synth_manifest(o.synth, data);
    manifest += "config_hash=" + fingerprint + "\n";
    atomic_write_file(dir / "manifest.txt", manifest);
    log_info("event=synth months=" + std::to_string(o.synth.months) +
             " locations=" + std::to_string(o.synth.n_lat * o.synth.n_lon));
    return 0;
}

struct ClimatologyOptions {
    CommonOptions common;
    std::string base_first, base_last;
};

inline int run_climatology(ClimatologyOptions& o) {
    if (o.common.out.empty()) throw ConfigError("--out directory is required");
    if (o.common.sst_path.empty()) throw ConfigError("--sst is required");
    TimeGrid sst = detail::load_value_csv(o.common.sst_path, Variable::SST, o.common.start_month());
    int first = o.base_first.empty() ? sst.start_month : parse_year_month(o.base_first);
    int last = o.base_last.empty() ? sst.end_month() : parse_year_month(o.base_last);
    ClimatologyTable clim = compute_monthly_climatology(sst, first, last);
    TimeGrid ssta = anomalies_from_sst(sst, clim);

    fs::create_directories(o.common.out);
    fs::path dir(o.common.out);
    atomic_write_file(dir / "climatology_avg.csv", detail::table_csv(sst.location_ids, clim.avg));
    atomic_write_file(dir / "climatology_std.csv", detail::table_csv(sst.location_ids, clim.std));
    atomic_write_file(dir / "anomalies.csv", serialize_value_csv(ssta));
    log_info("event=climatology base_first=" + format_year_month(first) +
             " base_last=" + format_year_month(last));
    return 0;
}

struct FeaturesOptions {
    CommonOptions common;
    std::string layout = "rg48";
    int window = 12;
    int offset = 3;
};

inline int run_features(FeaturesOptions& o) {
    if (o.common.out.empty()) throw ConfigError("--out file is required");
    FeatureLayout layout = layout_from_name(o.layout);
    if (layout == FeatureLayout::BALTIC3)
        throw ConfigError("the September layout is built by 'train --model-kind baltic'");

    bool need_all = layout != FeatureLayout::RG48;
    auto data = detail::load_inputs(o.common, true, need_all, need_all, need_all);
    auto samples = extract_blocks(data.grids, o.window, o.offset);

    std::optional<ClimatologyTable> clim;
    if (layout == FeatureLayout::UD74) {
        const TimeGrid& ssta = data.grids.get(Variable::SSTA);
        clim = compute_monthly_climatology(ssta, ssta.start_month, ssta.end_month());
    }
    std::optional<NeighborMap> nmap;
    if (layout == FeatureLayout::RG48) nmap = build_neighbor_map(data.coords);

    FeatureMatrix all;
    bool first = true;
    for (const auto& sample : samples) {
        const Eigen::VectorXd* target = sample.target ? &*sample.target : nullptr;
        FeatureMatrix rows = (layout == FeatureLayout::RG48)
                                 ? build_rg48_rows(sample.block, *nmap, data.coords, target)
                                 : build_ud50_rows(sample.block, data.coords, target);
        if (clim) rows = augment_ud74(rows, *clim);
        if (first) {
            all = std::move(rows);
            first = false;
        } else {
            all.append(rows);
        }
    }
    atomic_write_file(o.common.out, serialize_feature_csv(all));
    log_info("event=features layout=" + std::string(layout_name(all.layout)) + " rows=" +
             std::to_string(all.rows()) + " skipped=" + std::to_string(all.skipped_rows));
    return 0;
}

struct TrainOptions {
    CommonOptions common;
    std::string model_kind = "composite";
    // composite
    int short_years = 3;
    int long_years = 9;
    int correction_years = 10;
    double c_global = 0.1;
    std::string season_source = "calendar";
    int window = 12;
    int offset = 3;
    int mlp_hidden = 64;
    int mlp_epochs = 200;
    double mlp_lr = 0.05;
    int mlp_batch = 32;
    // baltic
    int baltic_long = 15;
    int baltic_short = 10;
    // gbdt
    std::string layout = "ud74";
    int trees = 200;
    int depth = 6;
    double gbdt_lr = 0.05;
    int min_leaf = 20;
    double subsample = 1.0;
};

inline int run_train(TrainOptions& o, const std::string& fingerprint) {
    if (o.common.out.empty()) throw ConfigError("--out model file is required");
    AnyModel model;

    if (o.model_kind == "composite") {
        bool mlp = o.season_source == "mlp";
        if (!mlp && o.season_source != "calendar")
            throw ConfigError("--season-source must be calendar or mlp");
        auto data = detail::load_inputs(o.common, true, mlp, false, false);
        NeighborMap nmap = build_neighbor_map(data.coords);
        CompositeConfig cfg;
        cfg.short_years = o.short_years;
        cfg.long_years = o.long_years;
        cfg.correction_years = o.correction_years;
        cfg.c_global = o.c_global;
        cfg.season_source = mlp ? SeasonSource::mlp_classifier : SeasonSource::known_calendar;
        cfg.window = o.window;
        cfg.target_offset = o.offset;
        cfg.mlp.hidden = o.mlp_hidden;
        cfg.mlp.epochs = o.mlp_epochs;
        cfg.mlp.learning_rate = o.mlp_lr;
        cfg.mlp.batch_size = o.mlp_batch;
        cfg.mlp.seed = o.common.seed;
        model = fit_composite(data.grids, data.coords, nmap, cfg);
    } else if (o.model_kind == "baltic") {
        auto data = detail::load_inputs(o.common, true, false, false, false);
        BalticConfig cfg;
        cfg.window_years = {o.baltic_long, o.baltic_short};
        model = fit_baltic(data.grids.get(Variable::SSTA), cfg);
    } else if (o.model_kind == "gbdt") {
        FeatureLayout layout = layout_from_name(o.layout);
        if (layout != FeatureLayout::UD50 && layout != FeatureLayout::UD74)
            throw ConfigError("gbdt trains on ud50 or ud74 rows");
        auto data = detail::load_inputs(o.common, true, true, true, true);
        auto samples = extract_blocks(data.grids, o.window, o.offset);
        std::optional<ClimatologyTable> clim;
        if (layout == FeatureLayout::UD74) {
            const TimeGrid& ssta = data.grids.get(Variable::SSTA);
            clim = compute_monthly_climatology(ssta, ssta.start_month, ssta.end_month());
        }
        FeatureMatrix all;
        bool first = true;
        for (const auto& sample : samples) {
            if (!sample.target) continue;
            FeatureMatrix rows = build_ud50_rows(sample.block, data.coords, &*sample.target);
            if (clim) rows = augment_ud74(rows, *clim);
            if (first) {
                all = std::move(rows);
                first = false;
            } else {
                all.append(rows);
            }
        }
        if (first) throw EmptyTraining("no blocks with targets");
        GbdtConfig cfg;
        cfg.n_trees = o.trees;
        cfg.max_depth = o.depth;
        cfg.learning_rate = o.gbdt_lr;
        cfg.min_leaf = o.min_leaf;
        cfg.subsample = o.subsample;
        cfg.seed = o.common.seed;
        model = fit_gbdt(all.values, all.targets, cfg);
    } else {
        throw ConfigError("--model-kind must be composite, baltic or gbdt");
    }

    std::string text = serialize_model(model);
    atomic_write_file(o.common.out, text);
    detail::write_meta(o.common.out, {{"model_id", hex64(fnv1a(text))},
                                      {"kind", model_kind_name(model)},
                                      {"config_hash", fingerprint}});
    log_info(std::string("event=train kind=") + model_kind_name(model) + " out=" + o.common.out);
    return 0;
}

namespace detail {

// Block forecaster for a loaded model. Shared ownership keeps the lambda
// self-contained; the climatology (for 74-wide GBDT rows) is derived once
// from the full SSTA series handed to the command.
inline BlockPredictor make_predictor(std::shared_ptr<const AnyModel> model,
                                     std::shared_ptr<const LoadedData> data,
                                     std::shared_ptr<const NeighborMap> nmap,
                                     std::shared_ptr<const ClimatologyTable> clim) {
    if (std::holds_alternative<CompositeModel>(*model)) {
        return [model, data, nmap](const Block& block) {
            return forecast_composite_block(std::get<CompositeModel>(*model), block, data->coords,
                                            *nmap);
        };
    }
    if (std::holds_alternative<GbdtModel>(*model)) {
        const GbdtModel& m = std::get<GbdtModel>(*model);
        if (m.n_features != 50 && m.n_features != 74)
            throw ConfigError("gbdt model has an unexpected feature width");
        bool wide = m.n_features == 74;
        if (wide && !clim) throw ConfigError("74-wide gbdt model needs climatology inputs");
        return [model, data, clim, wide](const Block& block) {
            FeatureMatrix rows = build_ud50_rows(block, data->coords);
            if (wide) rows = augment_ud74(rows, *clim);
            Eigen::VectorXd preds = predict_gbdt(std::get<GbdtModel>(*model), rows.values);
            Eigen::VectorXd out = Eigen::VectorXd::Constant(
                block.window(Variable::SSTA).cols(), missing_value());
            for (Eigen::Index i = 0; i < rows.rows(); ++i)
                out(rows.location_index[static_cast<std::size_t>(i)]) = preds(i);
            return out;
        };
    }
    throw ConfigError("this model kind cannot forecast blocks");
}

struct PredictContext {
    std::shared_ptr<const LoadedData> data;
    std::shared_ptr<const AnyModel> model;  // null = persistence baseline
    std::shared_ptr<const NeighborMap> nmap;
    std::shared_ptr<const ClimatologyTable> clim;
    BlockPredictor predictor;
};

inline PredictContext make_context(const CommonOptions& common, const std::string& model_path,
                                   int offset) {
    PredictContext ctx;
    if (model_path.empty()) throw ConfigError("--model is required (path or 'persistence')");
    if (model_path == "persistence") {
        ctx.data = std::make_shared<const LoadedData>(
            load_inputs(common, true, !common.sst_path.empty(), !common.mslp_path.empty(),
                        !common.t2m_path.empty()));
        ctx.predictor = [offset](const Block& block) { return persistence_forecast(block, offset); };
        return ctx;
    }
    ctx.model = std::make_shared<const AnyModel>(parse_model(read_file(model_path)));
    bool gbdt = std::holds_alternative<GbdtModel>(*ctx.model);
    bool composite = std::holds_alternative<CompositeModel>(*ctx.model);
    bool needs_sst = composite &&
                     std::get<CompositeModel>(*ctx.model).season_source == SeasonSource::mlp_classifier;
    ctx.data = std::make_shared<const LoadedData>(
        load_inputs(common, true, gbdt || needs_sst || !common.sst_path.empty(), gbdt, gbdt));
    ctx.nmap = std::make_shared<const NeighborMap>(build_neighbor_map(ctx.data->coords));
    if (gbdt && std::get<GbdtModel>(*ctx.model).n_features == 74) {
        const TimeGrid& ssta = ctx.data->grids.get(Variable::SSTA);
        ctx.clim = std::make_shared<const ClimatologyTable>(
            compute_monthly_climatology(ssta, ssta.start_month, ssta.end_month()));
    }
    ctx.predictor = make_predictor(ctx.model, ctx.data, ctx.nmap, ctx.clim);
    return ctx;
}

}  // namespace detail

struct PredictOptions {
    CommonOptions common;
    std::string model_path;
    int window = 12;
    int offset = 3;
};

inline int run_predict(PredictOptions& o, const std::string& fingerprint) {
    if (o.common.out.empty()) throw ConfigError("--out file is required");
    detail::PredictContext ctx = detail::make_context(o.common, o.model_path, o.offset);
    const TimeGrid& ssta = ctx.data->grids.get(Variable::SSTA);
    if (ssta.months() < o.window) throw NoBlocks();

    Block block;
    block.window_start = ssta.end_month() - o.window + 1;
    block.target_offset = o.offset;
    for (int vi = 0; vi < kNumVariables; ++vi) {
        if (!ctx.data->grids.grids[vi]) continue;
        const TimeGrid& g = *ctx.data->grids.grids[vi];
        block.windows[vi] = g.values.bottomRows(o.window).eval();
    }
    Eigen::VectorXd forecast = ctx.predictor(block);

    atomic_write_file(o.common.out, detail::forecast_csv(ssta.location_ids, forecast));
    detail::write_meta(o.common.out,
                       {{"model_id", o.model_path == "persistence"
                                         ? "persistence"
                                         : hex64(fnv1a(read_file(o.model_path)))},
                        {"config_hash", fingerprint},
                        {"window_anchor", format_year_month(block.window_end())},
                        {"target_month", format_year_month(block.target_month())}});
    log_info("event=predict target=" + format_year_month(block.target_month()));
    return 0;
}

struct Forecast9Options {
    CommonOptions common;
    std::string model_path;
    std::string model1_path, model2_path, model3_path;  // per-offset chaining
    int horizon = 9;
    int window = 12;
};

inline int run_forecast9(Forecast9Options& o, const std::string& fingerprint) {
    if (o.common.out.empty()) throw ConfigError("--out file is required");
    const bool per_offset = !o.model1_path.empty() || !o.model2_path.empty() || !o.model3_path.empty();

    RecursiveResult result;
    std::vector<std::string> ids;
    int anchor = 0;
    if (per_offset) {
        if (o.model1_path.empty() || o.model2_path.empty() || o.model3_path.empty())
            throw ConfigError("per-offset chaining needs --model1, --model2 and --model3");
        detail::PredictContext c1 = detail::make_context(o.common, o.model1_path, 1);
        auto m2 = std::make_shared<const AnyModel>(parse_model(read_file(o.model2_path)));
        auto m3 = std::make_shared<const AnyModel>(parse_model(read_file(o.model3_path)));
        std::vector<BlockPredictor> preds{
            c1.predictor, detail::make_predictor(m2, c1.data, c1.nmap, c1.clim),
            detail::make_predictor(m3, c1.data, c1.nmap, c1.clim)};
        const TimeGrid& ssta = c1.data->grids.get(Variable::SSTA);
        anchor = ssta.end_month();
        ids = ssta.location_ids;
        result = recursive_forecast_per_offset(preds, c1.data->grids, anchor, o.horizon, o.window);
    } else {
        detail::PredictContext ctx = detail::make_context(o.common, o.model_path, 3);
        const TimeGrid& ssta = ctx.data->grids.get(Variable::SSTA);
        anchor = ssta.end_month();
        ids = ssta.location_ids;
        result = recursive_forecast(ctx.predictor, ctx.data->grids, anchor, o.horizon, 3, o.window);
    }

    atomic_write_file(o.common.out, detail::forecast_csv(ids, result.values));
    detail::write_meta(o.common.out,
                       {{"model_id", o.model_path == "persistence"
                                         ? "persistence"
                                         : (per_offset ? "per-offset" : hex64(fnv1a(read_file(o.model_path))))},
                        {"config_hash", fingerprint},
                        {"window_anchor", format_year_month(anchor)},
                        {"target_month", format_year_month(anchor + o.horizon)},
                        {"rounds", std::to_string(result.rounds)}});
    log_info("event=forecast9 target=" + format_year_month(anchor + o.horizon) +
             " rounds=" + std::to_string(result.rounds));
    return 0;
}

struct EvaluateOptions {
    CommonOptions common;
    std::string model_path;
    std::string eval_start;  // first target month scored; default all
    int window = 12;
    int offset = 3;
    std::int64_t split_seed = -1;  // >= 0: also score a random half split
};

inline int run_evaluate(EvaluateOptions& o, const std::string& fingerprint) {
    if (o.common.out.empty()) throw ConfigError("--out directory is required");
    detail::PredictContext ctx = detail::make_context(o.common, o.model_path, o.offset);

    auto samples = extract_blocks(ctx.data->grids, o.window, o.offset);
    int first_target = o.eval_start.empty() ? std::numeric_limits<int>::min()
                                            : parse_year_month(o.eval_start);
    std::vector<Block> blocks;
    std::vector<Eigen::VectorXd> truths;
    for (auto& sample : samples) {
        if (!sample.target) continue;
        if (sample.block.target_month() < first_target) continue;
        blocks.push_back(std::move(sample.block));
        truths.push_back(std::move(*sample.target));
    }
    if (blocks.empty()) throw EmptyComparison("no blocks with targets in the evaluation range");

    std::vector<Eigen::VectorXd> predictions(blocks.size());
    parallel_for(static_cast<long>(blocks.size()), o.common.resolved_threads(),
                 [&](long lo, long hi) {
                     for (long i = lo; i < hi; ++i)
                         predictions[static_cast<std::size_t>(i)] =
                             ctx.predictor(blocks[static_cast<std::size_t>(i)]);
                 });

    SkillReport report = skill_score(predictions, truths, blocks);

    std::string csv = "year,rmse_model,rmse_persistence,skill\n";
    for (std::size_t i = 0; i < report.per_year_model.size(); ++i) {
        const auto& ym = report.per_year_model[i];
        const auto& yp = report.per_year_persistence[i];
        csv += std::to_string(ym.year) + "," + format_double(ym.rmse) + "," +
               format_double(yp.rmse) + "," + format_double(yp.rmse - ym.rmse) + "\n";
    }
    csv += "ALL," + format_double(report.rmse_model) + "," + format_double(report.rmse_persistence) +
           "," + format_double(report.skill) + "\n";

    fs::create_directories(o.common.out);
    fs::path dir(o.common.out);
    atomic_write_file(dir / "report.csv", csv);

    std::string loc_csv = "location_id,skill\n";
    const auto& ids = ctx.data->grids.get(Variable::SSTA).location_ids;
    for (Eigen::Index l = 0; l < report.per_location_skill.size(); ++l)
        loc_csv += ids[static_cast<std::size_t>(l)] + "," +
                   format_double(report.per_location_skill(l)) + "\n";
    atomic_write_file(dir / "per_location_skill.csv", loc_csv);

    std::vector<std::pair<std::string, std::string>> meta{
        {"model_id", o.model_path == "persistence" ? "persistence"
                                                   : hex64(fnv1a(read_file(o.model_path)))},
        {"config_hash", fingerprint},
        {"blocks", std::to_string(report.blocks_scored)},
        {"locations", std::to_string(report.locations_scored)},
        {"skill", format_double(report.skill)}};
    if (o.split_seed >= 0) {
        auto assignment = kfold_assignments(blocks.size(), 2, static_cast<std::uint64_t>(o.split_seed));
        auto [pub, priv_] = split_score(predictions, truths, blocks, assignment);
        meta.emplace_back("public_skill", format_double(pub.skill));
        meta.emplace_back("private_skill", format_double(priv_.skill));
    }
    detail::write_meta(dir / "report.csv", meta);
    log_info("event=evaluate blocks=" + std::to_string(report.blocks_scored) +
             " skill=" + format_double(report.skill));
    return 0;
}

struct ReportOptions {
    CommonOptions common;
    std::string evaluation_csv;
    int max_n = 24;
};

inline int run_report(ReportOptions& o) {
    if (o.common.out.empty()) throw ConfigError("--out directory is required");
    if (o.common.sst_path.empty()) throw ConfigError("--sst is required");
    TimeGrid sst = detail::load_value_csv(o.common.sst_path, Variable::SST, o.common.start_month());

    fs::create_directories(o.common.out);
    fs::path dir(o.common.out);

    auto annual = annual_global_mean(sst);
    ChartSeries mean_series{"global mean", "#1f77b4", {}};
    std::string mean_csv = "year,mean\n";
    for (const auto& am : annual) {
        mean_series.points.emplace_back(am.year, am.mean);
        mean_csv += std::to_string(am.year) + "," + format_double(am.mean) + "\n";
    }
    atomic_write_file(dir / "global_mean.csv", mean_csv);
    atomic_write_file(dir / "fig_global_mean.svg",
                      render_line_chart("Global average temperature per year", "year", "deg C",
                                        {mean_series}));

    auto curve = persistence_horizon_curve(sst, o.max_n);
    ChartSeries curve_series{"N months back", "#d62728", {}};
    std::string curve_csv = "n,rmse\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        curve_series.points.emplace_back(static_cast<double>(i + 1), curve[i]);
        curve_csv += std::to_string(i + 1) + "," + format_double(curve[i]) + "\n";
    }
    atomic_write_file(dir / "horizon_curve.csv", curve_csv);
    atomic_write_file(dir / "fig_horizon_curve.svg",
                      render_line_chart("RMSE of N-months-back estimation", "N (months)", "RMSE",
                                        {curve_series}));

    if (!o.evaluation_csv.empty()) {
        // report.csv rows: year,rmse_model,rmse_persistence,skill
        std::string text = read_file(o.evaluation_csv);
        ChartSeries model_series{"model", "#2ca02c", {}};
        ChartSeries base_series{"persistence", "#7f7f7f", {}};
        std::size_t pos = text.find('\n');
        long line_no = 1;
        while (pos != std::string::npos && pos + 1 < text.size()) {
            std::size_t next = text.find('\n', pos + 1);
            std::string line = text.substr(pos + 1, next == std::string::npos ? std::string::npos
                                                                              : next - pos - 1);
            pos = next;
            ++line_no;
            if (line.empty() || line.rfind("ALL", 0) == 0) continue;
            auto fields = ssta::detail::split_fields(line);
            if (fields.size() != 4)
                throw ParseError(line_no, "expected 4 evaluation columns", 4,
                                 static_cast<long>(fields.size()));
            double year = ssta::detail::parse_field(fields[0], line_no);
            model_series.points.emplace_back(year, ssta::detail::parse_field(fields[1], line_no));
            base_series.points.emplace_back(year, ssta::detail::parse_field(fields[2], line_no));
        }
        atomic_write_file(dir / "fig_yearly_rmse.svg",
                          render_line_chart("RMSE per year", "year", "RMSE",
                                            {model_series, base_series}));
    }
    log_info("event=report out=" + o.common.out);
    return 0;
}

// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args) {
    CLI::App app{"SSTA forecasting toolkit"};
    app.require_subcommand(1);

    SynthOptions synth_o;
    auto* synth_cmd = app.add_subcommand("synth", "generate a seeded synthetic dataset");
    detail::add_common(synth_cmd, synth_o.common, false);
    synth_cmd->add_option("--months", synth_o.synth.months, "series length");
    synth_cmd->add_option("--nlat", synth_o.synth.n_lat, "lattice rows");
    synth_cmd->add_option("--nlon", synth_o.synth.n_lon, "lattice columns");
    synth_cmd->add_option("--lat0", synth_o.synth.lat0, "first latitude");
    synth_cmd->add_option("--lon0", synth_o.synth.lon0, "first longitude");
    synth_cmd->add_option("--step", synth_o.synth.step, "lattice step (degrees)");
    synth_cmd->add_option("--seasonal-amp", synth_o.synth.seasonal_amplitude, "seasonal amplitude");
    synth_cmd->add_option("--trend", synth_o.synth.trend_per_decade, "warming per decade");
    synth_cmd->add_option("--osc-period", synth_o.synth.oscillation_period, "oscillation period");
    synth_cmd->add_option("--osc-amp", synth_o.synth.oscillation_amplitude, "oscillation amplitude");
    synth_cmd->add_option("--noise", synth_o.synth.noise_std, "noise sigma");
    synth_cmd->add_option("--land-fraction", synth_o.synth.land_fraction, "masked cell fraction");

    ClimatologyOptions clim_o;
    auto* clim_cmd = app.add_subcommand("climatology", "climatology table and anomalies");
    detail::add_common(clim_cmd, clim_o.common, true);
    clim_cmd->add_option("--base-first", clim_o.base_first, "base period start (YYYY-MM)");
    clim_cmd->add_option("--base-last", clim_o.base_last, "base period end (YYYY-MM)");

    FeaturesOptions feat_o;
    auto* feat_cmd = app.add_subcommand("features", "export tabular feature rows");
    detail::add_common(feat_cmd, feat_o.common, true);
    feat_cmd->add_option("--layout", feat_o.layout, "rg48, ud50 or ud74");
    feat_cmd->add_option("--window", feat_o.window, "window length");
    feat_cmd->add_option("--offset", feat_o.offset, "target offset");

    TrainOptions train_o;
    auto* train_cmd = app.add_subcommand("train", "fit a forecaster");
    detail::add_common(train_cmd, train_o.common, true);
    train_cmd->add_option("--model-kind", train_o.model_kind, "composite, baltic or gbdt");
    train_cmd->add_option("--short-years", train_o.short_years, "short trailing window");
    train_cmd->add_option("--long-years", train_o.long_years, "long trailing window");
    train_cmd->add_option("--correction-years", train_o.correction_years, "trailing correction years");
    train_cmd->add_option("--c-global", train_o.c_global, "global correction constant");
    train_cmd->add_option("--season-source", train_o.season_source, "calendar or mlp");
    train_cmd->add_option("--window", train_o.window, "window length");
    train_cmd->add_option("--offset", train_o.offset, "target offset");
    train_cmd->add_option("--mlp-hidden", train_o.mlp_hidden, "classifier hidden units");
    train_cmd->add_option("--mlp-epochs", train_o.mlp_epochs, "classifier epochs");
    train_cmd->add_option("--mlp-lr", train_o.mlp_lr, "classifier learning rate");
    train_cmd->add_option("--mlp-batch", train_o.mlp_batch, "classifier batch size");
    train_cmd->add_option("--baltic-long", train_o.baltic_long, "September window, long (years)");
    train_cmd->add_option("--baltic-short", train_o.baltic_short, "September window, short (years)");
    train_cmd->add_option("--layout", train_o.layout, "gbdt layout: ud50 or ud74");
    train_cmd->add_option("--trees", train_o.trees, "boosting stages");
    train_cmd->add_option("--depth", train_o.depth, "tree depth");
    train_cmd->add_option("--gbdt-lr", train_o.gbdt_lr, "boosting learning rate");
    train_cmd->add_option("--min-leaf", train_o.min_leaf, "minimum samples per leaf");
    train_cmd->add_option("--subsample", train_o.subsample, "row fraction per stage");

    PredictOptions pred_o;
    auto* pred_cmd = app.add_subcommand("predict", "one forecast from the latest window");
    detail::add_common(pred_cmd, pred_o.common, true);
    pred_cmd->add_option("--model", pred_o.model_path, "model file or 'persistence'");
    pred_cmd->add_option("--window", pred_o.window, "window length");
    pred_cmd->add_option("--offset", pred_o.offset, "target offset");

    Forecast9Options f9_o;
    auto* f9_cmd = app.add_subcommand("forecast9", "recursive long-horizon forecast");
    detail::add_common(f9_cmd, f9_o.common, true);
    f9_cmd->add_option("--model", f9_o.model_path, "model file or 'persistence'");
    f9_cmd->add_option("--model1", f9_o.model1_path, "offset-1 model (per-offset chaining)");
    f9_cmd->add_option("--model2", f9_o.model2_path, "offset-2 model (per-offset chaining)");
    f9_cmd->add_option("--model3", f9_o.model3_path, "offset-3 model (per-offset chaining)");
    f9_cmd->add_option("--horizon", f9_o.horizon, "months ahead (multiple of 3)");
    f9_cmd->add_option("--window", f9_o.window, "window length");

    EvaluateOptions eval_o;
    auto* eval_cmd = app.add_subcommand("evaluate", "skill vs the persistence baseline");
    detail::add_common(eval_cmd, eval_o.common, true);
    eval_cmd->add_option("--model", eval_o.model_path, "model file or 'persistence'");
    eval_cmd->add_option("--eval-start", eval_o.eval_start, "first target month scored (YYYY-MM)");
    eval_cmd->add_option("--window", eval_o.window, "window length");
    eval_cmd->add_option("--offset", eval_o.offset, "target offset");
    eval_cmd->add_option("--split-seed", eval_o.split_seed, "also score a random half split");

    ReportOptions report_o;
    auto* report_cmd = app.add_subcommand("report", "diagnostic charts");
    detail::add_common(report_cmd, report_o.common, true);
    report_cmd->add_option("--evaluation", report_o.evaluation_csv, "report.csv from 'evaluate'");
    report_cmd->add_option("--max-n", report_o.max_n, "horizon curve length");

    std::vector<std::string> merged;
    try {
        merged = detail::merge_config(app, args);
        std::vector<const char*> argv;
        argv.push_back("ssta");
        for (const auto& a : merged) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exits 0
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error type=UsageError code=1 msg=\"%s\"\n", e.what());
        return 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error type=ConfigError code=1 msg=\"%s\"\n", e.what());
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "error type=%s code=2 msg=\"%s\"\n", e.kind(), e.what());
        return 2;
    }

    const std::string fingerprint = detail::config_fingerprint(merged);
    try {
        if (synth_cmd->parsed()) return run_synth(synth_o, fingerprint);
        if (clim_cmd->parsed()) return run_climatology(clim_o);
        if (feat_cmd->parsed()) return run_features(feat_o);
        if (train_cmd->parsed()) return run_train(train_o, fingerprint);
        if (pred_cmd->parsed()) return run_predict(pred_o, fingerprint);
        if (f9_cmd->parsed()) return run_forecast9(f9_o, fingerprint);
        if (eval_cmd->parsed()) return run_evaluate(eval_o, fingerprint);
        if (report_cmd->parsed()) return run_report(report_o);
        std::fprintf(stderr, "error type=UsageError code=1 msg=\"no subcommand\"\n");
        return 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error type=ConfigError code=1 msg=\"%s\"\n", e.what());
        return 1;
    } catch (const Error& e) {
        int code = e.category() == ErrorCategory::numeric ? 3 : 2;
        std::fprintf(stderr, "error type=%s code=%d msg=\"%s\"\n", e.kind(), code, e.what());
        return code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error type=Unexpected code=2 msg=\"%s\"\n", e.what());
        return 2;
    }
}

}  // namespace ssta::cli
