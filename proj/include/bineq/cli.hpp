#pragma once

/// Batch driver: `rpme`, `mgbe` and `eval` subcommands over CSV input.
///
/// Exit codes: 0 when every dataset succeeded, 2 when at least one dataset
/// failed (reported in-band in the `error` column / field), 1 on usage or
/// I/O errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "binned.hpp"
#include "eval.hpp"
#include "mgbe.hpp"
#include "parallel.hpp"
#include "rpme.hpp"

namespace bineq::cli {

using nlohmann::json;

inline std::string fmt6(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string fmt6(const std::optional<double>& v) { return v ? fmt6(*v) : std::string(); }

/// Quotes a CSV field when it contains a comma, quote or newline.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
inline json num_or_null(const std::optional<double>& v) { return v ? num_or_null(*v) : json(nullptr); }

inline json stats_json(const StatsBundle& s) {
    return {{"mean", num_or_null(s.mean)},   {"median", num_or_null(s.median)},
            {"variance", num_or_null(s.variance)}, {"sd", num_or_null(s.sd)},
            {"cv", num_or_null(s.cv)},       {"gini", num_or_null(s.gini)},
            {"theil", num_or_null(s.theil)}, {"mld", num_or_null(s.mld)}};
}

inline std::string stats_csv(const StatsBundle& s) {
    return fmt6(s.mean) + ',' + fmt6(s.median) + ',' + fmt6(s.sd) + ',' + fmt6(s.cv) + ',' + fmt6(s.gini) +
           ',' + fmt6(s.theil) + ',' + fmt6(s.mld);
}

struct SharedOptions {
    std::string input;
    std::string output = "-";
    std::string format = "csv";
    double scale = 1.0;
    std::size_t jobs = default_jobs();
    std::uint64_t seed = 0;
};

/// One dataset's outcome, already rendered for both formats.
struct RenderedRow {
    std::string csv;
    json object;
    bool ok = true;
};

inline RenderedRow render_rpme(const BinnedDataset& ds, const RpmeConfig& cfg) {
    RenderedRow row;
    const std::string head = csv_field(ds.id()) + ',' + fmt6(ds.n()) + ',' + std::to_string(ds.populated_count()) +
                             ',' + std::string(to_string(cfg.flavor)) + ',';
    row.object = {{"dataset_id", ds.id()},
                  {"n", ds.n()},
                  {"B", ds.populated_count()},
                  {"flavor", std::string(to_string(cfg.flavor))},
                  {"alpha_min", cfg.alpha_min}};
    try {
        const auto r = rpme_estimate(ds, cfg);
        row.csv = head + fmt6(r.alpha_hat) + ',' + fmt6(r.alpha_tilde) + ',' + fmt6(r.top_value) + ',' +
                  stats_csv(r.stats) + ',';
        row.object["alpha_hat"] = num_or_null(r.alpha_hat);
        row.object["alpha_tilde"] = num_or_null(r.alpha_tilde);
        row.object["top_value"] = num_or_null(r.top_value);
        row.object["stats"] = stats_json(r.stats);
        row.object["diagnostics"] = {{"mean_width", r.diagnostics.mean_width},
                                     {"max_width", r.diagnostics.max_width},
                                     {"max_width_over_sd", num_or_null(r.diagnostics.max_width_over_sd)},
                                     {"variance_bias_mean_width", num_or_null(r.diagnostics.variance_bias_mean_width)},
                                     {"variance_bias_max_width", num_or_null(r.diagnostics.variance_bias_max_width)},
                                     {"widths_ok", r.diagnostics.widths_ok}};
        row.object["error"] = nullptr;
    } catch (const std::exception& e) {
        row.ok = false;
        row.csv = head + ",,,,,,,,,," + csv_field(e.what());
        row.object["error"] = e.what();
    }
    return row;
}

inline RenderedRow render_mgbe(const BinnedDataset& ds, const MgbeConfig& cfg) {
    RenderedRow row;
    const std::string head = csv_field(ds.id()) + ',' + fmt6(ds.n()) + ',' + std::to_string(ds.populated_count()) + ',';
    row.object = {{"dataset_id", ds.id()},
                  {"n", ds.n()},
                  {"B", ds.populated_count()},
                  {"criterion", std::string(to_string(cfg.criterion))},
                  {"combine", std::string(to_string(cfg.combine))}};
    try {
        const auto r = mgbe_estimate(ds, cfg);
        std::size_t survivors = 0;
        json models = json::array();
        for (const auto& m : r.per_model) {
            survivors += m.survived();
            json params = json::array();
            for (double p : m.fit.params) params.push_back(p);
            models.push_back({{"model", std::string(to_string(m.fit.kind))},
                              {"k", m.fit.k},
                              {"params", params},
                              {"loglik", num_or_null(m.fit.loglik)},
                              {"converged", m.fit.converged},
                              {"mean_defined", m.fit.mean_defined},
                              {"variance_defined", m.fit.variance_defined},
                              {"g2", num_or_null(m.diagnostics.g2)},
                              {"df", m.diagnostics.df},
                              {"p_value", num_or_null(m.diagnostics.p_value)},
                              {"aic", num_or_null(m.diagnostics.aic)},
                              {"bic", num_or_null(m.diagnostics.bic)},
                              {"weight", m.weight},
                              {"screened", m.survived() ? json(nullptr) : json(m.screened_reason)},
                              {"stats", m.stats ? stats_json(*m.stats) : json(nullptr)}});
        }
        const std::string selected = r.selected ? std::string(to_string(*r.selected)) : "";
        row.csv = head + selected + ',' + std::to_string(survivors) + ',' + stats_csv(r.stats) + ',';
        row.object["selected"] = r.selected ? json(selected) : json(nullptr);
        row.object["stats"] = stats_json(r.stats);
        row.object["models"] = models;
        row.object["error"] = nullptr;
    } catch (const std::exception& e) {
        row.ok = false;
        row.csv = head + ",,,,,,,,," + csv_field(e.what());
        row.object["error"] = e.what();
    }
    return row;
}

/// Routes output to a file or stdout ("-").
class OutputSink {
public:
    explicit OutputSink(const std::string& path) {
        if (path != "-") {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open output '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
    void finish() {
        stream().flush();
        if (!stream()) throw std::runtime_error("write to output failed");
    }

private:
    std::ofstream file_;
};

inline std::vector<BinnedDataset> read_input(const SharedOptions& o) {
    if (o.input == "-") return parse_datasets(std::cin, o.scale);
    std::ifstream in(o.input);
    if (!in) throw std::runtime_error("cannot read input '" + o.input + "'");
    return parse_datasets(in, o.scale);
}

template <class Render>
int run_batch(const SharedOptions& o, const std::string& csv_header, Render&& render, std::ostream& err) {
    const auto datasets = read_input(o);
    const auto rows = parallel_map(datasets.size(), o.jobs, [&](std::size_t i) { return render(datasets[i]); });

    OutputSink sink(o.output);
    auto& out = sink.stream();
    bool all_ok = true;
    if (o.format == "json") {
        json arr = json::array();
        for (const auto& r : rows) arr.push_back(r.object);
        out << arr.dump(2) << '\n';
    } else {
        out << csv_header << '\n';
        for (const auto& r : rows) out << r.csv << '\n';
    }
    for (const auto& r : rows) {
        if (r.ok) continue;
        all_ok = false;
        err << "dataset " << r.object["dataset_id"].template get<std::string>() << ": "
            << r.object["error"].template get<std::string>() << '\n';
    }
    sink.finish();
    return all_ok ? 0 : 2;
}

// ---------------------------------------------------------------------------
// eval spec
//
// {
//   "seed": 0,
//   "bin_scheme": [0, 10000, ...],            optional, default ACS 16 bins
//   "rebin": [2, 2],                          optional merge schedule
//   "datasets": [
//     {"kind": "lognormal", "params": [32500, 0.9], "n_draws": 1000,
//      "count": 50, "params_range": [[25000, 45000], [0.6, 1.1]],
//      "n_draws_range": [200, 4000]}
//   ],
//   "estimators": [
//     {"name": "rpme", "type": "rpme", "flavor": "harmonic", "alpha_min": 1},
//     {"name": "mgbe", "type": "mgbe", "models": "all", "criterion": "aic",
//      "combine": "select", "quantiles": 1000, "restarts": 5}
//   ]
// }
//
// "count" replicates an entry with consecutive seeds. The optional ranges
// draw per-replicate parameters (log-uniform) and sample sizes (uniform)
// from the replicate seed.
// ---------------------------------------------------------------------------

inline std::vector<SyntheticSpec> expand_dataset_entry(const json& j, const std::vector<double>& scheme,
                                                       std::uint64_t base_seed, std::size_t first_index) {
    const auto kind = parse_kind(j.at("kind").get<std::string>());
    const std::size_t count = j.value("count", std::size_t{1});
    const std::uint64_t seed0 = j.value("seed", base_seed + first_index);
    std::vector<SyntheticSpec> out;
    for (std::size_t r = 0; r < count; ++r) {
        SyntheticSpec s;
        s.kind = kind;
        s.bin_scheme = scheme;
        s.seed = detail::splitmix64(seed0 + r);
        s.id = std::string(to_string(kind)) + "-" + std::to_string(first_index + r);
        std::mt19937_64 rng(detail::splitmix64(s.seed ^ 0xa5a5a5a5ULL));
        if (j.contains("params_range")) {
            std::vector<double> p;
            for (const auto& range : j.at("params_range")) {
                const double lo = range.at(0).get<double>(), hi = range.at(1).get<double>();
                if (!(lo > 0.0 && hi >= lo)) throw std::invalid_argument("bad params_range entry");
                p.push_back(std::exp(std::log(lo) + open_unit(rng()) * (std::log(hi) - std::log(lo))));
            }
            s.params = ParamVector(std::span<const double>(p));
        } else {
            const auto p = j.at("params").get<std::vector<double>>();
            s.params = ParamVector(std::span<const double>(p));
        }
        if (j.contains("n_draws_range")) {
            const auto lo = j.at("n_draws_range").at(0).get<std::size_t>();
            const auto hi = j.at("n_draws_range").at(1).get<std::size_t>();
            if (hi < lo) throw std::invalid_argument("bad n_draws_range");
            s.n_draws = lo + static_cast<std::size_t>(open_unit(rng()) * static_cast<double>(hi - lo + 1));
            s.n_draws = std::min(s.n_draws, hi);
        } else {
            s.n_draws = j.value("n_draws", std::size_t{1000});
        }
        s.validate();
        out.push_back(std::move(s));
    }
    return out;
}

inline EstimatorConfig parse_estimator(const json& j, std::uint64_t seed) {
    EstimatorConfig e;
    const auto type = j.at("type").get<std::string>();
    if (type == "rpme") {
        const auto flavor = parse_flavor(j.value("flavor", std::string("harmonic")));
        RpmeConfig cfg = RpmeConfig::with_defaults(flavor);
        if (j.contains("alpha_min")) cfg.alpha_min = j.at("alpha_min").get<double>();
        cfg.validate();
        e.name = j.value("name", "rpme-" + std::string(to_string(flavor)));
        e.config = cfg;
    } else if (type == "mgbe") {
        MgbeConfig cfg;
        cfg.models = parse_models(j.value("models", std::string("all")));
        cfg.criterion = parse_criterion(j.value("criterion", std::string("aic")));
        cfg.combine = parse_combine(j.value("combine", std::string("select")));
        cfg.quantiles = j.value("quantiles", 1000);
        cfg.fit.rel_tol = j.value("rel_tol", cfg.fit.rel_tol);
        cfg.fit.max_iter = j.value("max_iter", cfg.fit.max_iter);
        cfg.fit.restarts = j.value("restarts", cfg.fit.restarts);
        cfg.fit.seed = seed;
        cfg.validate();
        e.name = j.value("name", "mgbe-" + std::string(to_string(cfg.criterion)) + "-" +
                                     std::string(to_string(cfg.combine)));
        e.config = cfg;
    } else {
        throw std::invalid_argument("unknown estimator type '" + type + "'");
    }
    return e;
}

inline BenchmarkSpec parse_benchmark_spec(const json& j, std::uint64_t cli_seed) {
    BenchmarkSpec spec;
    const std::uint64_t seed = j.value("seed", cli_seed);
    const auto scheme = j.contains("bin_scheme") ? j.at("bin_scheme").get<std::vector<double>>() : acs16_bounds();
    if (j.contains("rebin")) spec.rebin = j.at("rebin").get<std::vector<std::size_t>>();
    for (std::size_t g : spec.rebin)
        if (g < 2) throw std::invalid_argument("rebin groups must be >= 2");
    for (const auto& entry : j.at("datasets")) {
        auto more = expand_dataset_entry(entry, scheme, seed, spec.datasets.size());
        spec.datasets.insert(spec.datasets.end(), more.begin(), more.end());
    }
    for (const auto& entry : j.at("estimators")) spec.estimators.push_back(parse_estimator(entry, seed));
    if (spec.datasets.empty()) throw std::invalid_argument("spec lists no datasets");
    if (spec.estimators.empty()) throw std::invalid_argument("spec lists no estimators");
    return spec;
}

inline const std::string rpme_csv_header =
    "dataset_id,n,B,flavor,alpha_hat,alpha_tilde,top_value,mean,median,sd,cv,gini,theil,mld,error";
inline const std::string mgbe_csv_header =
    "dataset_id,n,B,selected,n_survivors,mean,median,sd,cv,gini,theil,mld,error";

/// Parses `args` (argv[0] first) and runs the chosen subcommand.
inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
    CLI::App app{"Inequality statistics from binned income data"};
    app.require_subcommand(1);

    SharedOptions shared;
    auto add_shared = [&](CLI::App* sub, bool needs_input) {
        auto* in = sub->add_option("--input", shared.input, "CSV with dataset_id,bin_min,bin_max,count ('-' = stdin)");
        if (needs_input) in->required();
        sub->add_option("--output", shared.output, "output path ('-' = stdout)");
        sub->add_option("--format", shared.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--scale", shared.scale, "divide counts by this sampling factor")
            ->check(CLI::PositiveNumber);
        sub->add_option("--jobs", shared.jobs, "concurrent workers")->check(CLI::Range(std::size_t{1}, std::size_t{4096}));
        sub->add_option("--seed", shared.seed, "seed for fitting restarts and synthesis");
    };

    auto* rpme = app.add_subcommand("rpme", "robust Pareto midpoint estimator");
    add_shared(rpme, true);
    std::string flavor = "harmonic";
    std::optional<double> alpha_min;
    rpme->add_option("--flavor", flavor, "arithmetic|geometric|median|harmonic")
        ->check(CLI::IsMember({"arithmetic", "geometric", "median", "harmonic"}));
    rpme->add_option("--alpha-min", alpha_min, "floor on the Pareto shape estimate");

    auto* mgbe = app.add_subcommand("mgbe", "multimodel generalized beta estimator");
    add_shared(mgbe, true);
    std::string models = "all", criterion = "aic", combine = "select";
    MgbeConfig mcfg;
    mgbe->add_option("--models", models, "comma-separated models or 'all'");
    mgbe->add_option("--criterion", criterion, "aic|bic")->check(CLI::IsMember({"aic", "bic"}));
    mgbe->add_option("--combine", combine, "select|average")->check(CLI::IsMember({"select", "average"}));
    mgbe->add_option("--quantiles", mcfg.quantiles, "quantile grid size")->check(CLI::Range(2, 10000000));
    mgbe->add_option("--rel-tol", mcfg.fit.rel_tol, "relative log-likelihood tolerance")->check(CLI::PositiveNumber);
    mgbe->add_option("--max-iter", mcfg.fit.max_iter, "simplex iterations per run")->check(CLI::PositiveNumber);
    mgbe->add_option("--restarts", mcfg.fit.restarts, "multi-start count")->check(CLI::PositiveNumber);

    auto* eval = app.add_subcommand("eval", "accuracy benchmark on synthetic data");
    add_shared(eval, false);
    std::string spec_path;
    eval->add_option("--spec", spec_path, "benchmark JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream out, errs;
        const int code = app.exit(e, out, errs);
        err << out.str() << errs.str();
        return code == 0 ? 0 : 1;
    }

    try {
        if (rpme->parsed()) {
            const auto f = parse_flavor(flavor);
            RpmeConfig cfg{f, alpha_min.value_or(default_alpha_min(f))};
            cfg.validate();
            return run_batch(shared, rpme_csv_header, [&](const BinnedDataset& ds) { return render_rpme(ds, cfg); },
                             err);
        }
        if (mgbe->parsed()) {
            mcfg.models = parse_models(models);
            mcfg.criterion = parse_criterion(criterion);
            mcfg.combine = parse_combine(combine);
            mcfg.fit.seed = shared.seed;
            mcfg.validate();
            return run_batch(shared, mgbe_csv_header, [&](const BinnedDataset& ds) { return render_mgbe(ds, mcfg); },
                             err);
        }
        std::ifstream in(spec_path);
        if (!in) throw std::runtime_error("cannot read spec '" + spec_path + "'");
        auto spec = parse_benchmark_spec(json::parse(in), shared.seed);
        spec.jobs = shared.jobs;
        const auto report = run_benchmark(spec);
        OutputSink sink(shared.output);
        if (shared.format == "json")
            sink.stream() << report_to_json(report).dump(2) << '\n';
        else
            write_report_csv(sink.stream(), report);
        sink.finish();
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace bineq::cli
