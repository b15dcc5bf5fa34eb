#include "ucc/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>

#include "ucc/parallel.hpp"
#include "ucc/report.hpp"
#include "ucc/second_order.hpp"

namespace ucc {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct StageTimer {
    std::vector<std::pair<std::string, double>> stages;
    Clock::time_point mark = Clock::now();
    void stage(const std::string& name) {
        const auto now = Clock::now();
        stages.emplace_back(name, std::chrono::duration<double>(now - mark).count());
        mark = now;
    }
};

std::string fd(double v) { return format_double(v); }

JsonValue theta_json(const std::vector<double>& th) {
    JsonValue::Array a;
    for (double v : th) a.emplace_back(v);
    return JsonValue(std::move(a));
}

struct Outputs {
    CsvTable csv;
    JsonValue::Object summary;
    int exit_code = 0;
    std::string message;
};

Outputs run_exponent_bound(const ExperimentConfig& cfg) {
    Outputs out;
    auto fam = cfg.family.build();
    std::vector<std::vector<double>> grid = cfg.theta_grid;
    if (grid.empty()) grid.push_back(*cfg.theta);
    const auto& p = *cfg.input_dist;
    out.csv.header = {"theta", "mutual_info", "dispersion", "r1_opt", "bound", "s_star"};
    double worst_bound = std::numeric_limits<double>::infinity();
    for (const auto& th : grid) {
        ChannelPoint pt(fam, th);
        const auto o = optimal_r1(p, pt, *cfg.rate_r);
        const double mi = mutual_information(p, pt);
        const double v = dispersion(p, pt);
        worst_bound = std::min(worst_bound, o.bound);
        std::string ths;
        for (std::size_t i = 0; i < th.size(); ++i) ths += (i ? " " : "") + fd(th[i]);
        out.csv.rows.push_back({ths, fd(mi), fd(v), fd(o.r1), fd(o.bound), fd(o.s_star)});
    }
    const auto worst = optimal_r1_grid(p, fam, grid, *cfg.rate_r);
    out.summary = {{"R", JsonValue(*cfg.rate_r)},
                   {"R1", JsonValue(worst.r1)},
                   {"bound", JsonValue(worst.bound)},
                   {"s_star", JsonValue(worst.s_star)},
                   {"grid_points", JsonValue(double(grid.size()))}};
    if (cfg.rate_r1) {
        ChannelPoint pt(fam, grid.front());
        const auto rep = exponent_lower_bound(p, pt, *cfg.rate_r, *cfg.rate_r1);
        out.summary.emplace_back("fixed_r1_bound", JsonValue(rep.bound));
    }
    return out;
}

Outputs run_compound_design(const ExperimentConfig& cfg) {
    Outputs out;
    auto fam = cfg.family.build();
    const auto method = cfg.method == "M1" ? CompoundMethod::M1 : CompoundMethod::M2;
    const auto des = compound_design(fam, cfg.theta_grid, *cfg.rate_r, method, cfg.input_candidates);
    out.csv.header = {"theta", "bound_at_design"};
    for (const auto& th : cfg.theta_grid) {
        ChannelPoint pt(fam, th);
        const auto rep = exponent_lower_bound(des.input_dist, pt, *cfg.rate_r, des.r1);
        std::string ths;
        for (std::size_t i = 0; i < th.size(); ++i) ths += (i ? " " : "") + fd(th[i]);
        out.csv.rows.push_back({ths, fd(rep.bound)});
    }
    JsonValue::Array pj;
    for (double v : des.input_dist) pj.emplace_back(v);
    out.summary = {{"method", JsonValue(cfg.method)},
                   {"input_dist", JsonValue(std::move(pj))},
                   {"R1", JsonValue(des.r1)},
                   {"guaranteed_bound", JsonValue(des.bound)}};
    if (method == CompoundMethod::M1) out.summary.emplace_back("worst_mutual_info", JsonValue(des.worst_mutual_info));
    return out;
}

Outputs run_simulate_exponent(const ExperimentConfig& cfg) {
    Outputs out;
    auto fam = cfg.family.build();
    ChannelPoint pt(fam, *cfg.theta);
    ExponentExperimentSpec spec;
    spec.input_dist = *cfg.input_dist;
    spec.rate_r = *cfg.rate_r;
    spec.rate_r1 = cfg.rate_r1;
    spec.n_list = cfg.n_list;
    spec.trials = cfg.trials;
    spec.input_priors.assign(fam->input_count(), cfg.input_prior.build());
    spec.output_prior = cfg.output_prior.build();
    spec.qp_kind = cfg.output_mix == "type-average" ? OutputMixKind::TypeAverage : OutputMixKind::PriorIntegral;
    spec.seed = cfg.seed;
    const auto fit = fit_exponent(pt, spec);

    out.csv.header = {"n",     "M",     "log_M",            "R1",            "error", "ci_lo",
                      "ci_hi", "bound", "zero_substituted", "exponent_point"};
    for (const auto& c : fit.cells) {
        const CodeSize ms = code_size(c.n, fit.r);
        out.csv.rows.push_back({std::to_string(c.n), ms.representable ? std::to_string(ms.m) : "inf", fd(c.log_m),
                                fd(c.r1), fd(c.est.estimate), fd(c.est.ci_lo), fd(c.est.ci_hi), fd(fit.bound),
                                c.zero_substituted ? "1" : "0", fd(c.exponent_point)});
    }
    out.summary = {{"R", JsonValue(fit.r)},
                   {"R1", JsonValue(fit.r1)},
                   {"bound", JsonValue(fit.bound)},
                   {"s_star", JsonValue(fit.s_star)},
                   {"fitted_exponent", JsonValue(fit.fitted_exponent)},
                   {"std_error", JsonValue(fit.std_error)},
                   {"fit_usable", JsonValue(fit.fit_usable)},
                   {"pass", JsonValue(fit.pass)}};
    if (cfg.exact) {
        JsonValue::Array ex;
        for (int n : cfg.n_list) {
            const CompositionType comp = round_to_type(*cfg.input_dist, n);
            CodeEnsemble ens(fam, comp, fit.r, fit.r1, spec.input_priors, spec.output_prior, spec.qp_kind);
            ex.emplace_back(random_coding_error_exact(ens, pt));
        }
        out.summary.emplace_back("exact_errors", JsonValue(std::move(ex)));
    }
    if (!fit.pass) {
        out.exit_code = 4;
        out.message = "fitted exponent below the bound minus two standard errors";
    }
    return out;
}

Outputs run_second_order_exp(const ExperimentConfig& cfg) {
    Outputs out;
    auto fam = cfg.family.build();
    ChannelPoint pt(fam, *cfg.theta);
    SecondOrderSpec spec;
    spec.theta2 = cfg.theta2;
    spec.input_dist = *cfg.input_dist;
    spec.r1_star = cfg.r1_star;
    spec.r2_star = cfg.r2_star;
    spec.epsilon = cfg.epsilon;
    spec.n_list = cfg.n_list;
    spec.trials = cfg.trials;
    spec.input_priors.assign(fam->input_count(), cfg.input_prior.build());
    spec.output_prior = cfg.output_prior.build();
    spec.qp_kind = cfg.output_mix == "type-average" ? OutputMixKind::TypeAverage : OutputMixKind::PriorIntegral;
    spec.seed = cfg.seed;
    const auto run = run_second_order(pt, spec);

    out.csv.header = {"n", "theta", "M", "log_M", "R1", "error", "ci_lo", "ci_hi", "limit_epsilon"};
    for (const auto& c : run.cells) {
        std::string ths;
        for (std::size_t i = 0; i < c.theta.size(); ++i) ths += (i ? " " : "") + fd(c.theta[i]);
        const CodeSize ms = code_size(c.n, run.r1_star + run.r2_star / std::sqrt(double(c.n)));
        out.csv.rows.push_back({std::to_string(c.n), ths, ms.representable ? std::to_string(ms.m) : "inf",
                                fd(c.log_m), fd(c.r1), fd(c.est.estimate), fd(c.est.ci_lo), fd(c.est.ci_hi),
                                fd(run.limit_epsilon)});
    }
    out.summary = {{"R1_star", JsonValue(run.r1_star)},     {"R2_star", JsonValue(run.r2_star)},
                   {"mutual_info", JsonValue(run.mutual_info)}, {"dispersion", JsonValue(run.dispersion_v)},
                   {"f_shift", JsonValue(run.f_shift)},     {"limit_epsilon", JsonValue(run.limit_epsilon)}};
    return out;
}

Outputs run_clarke_barron(const ExperimentConfig& cfg) {
    Outputs out;
    auto fam = cfg.family.build();
    ChannelPoint pt(fam, *cfg.theta);
    const auto prior = cfg.input_prior.build();
    out.csv.header = {"n", "s", "estimate", "ci_lo", "ci_hi", "predicted_intercept"};
    JsonValue::Array slopes;
    for (double s : cfg.s_list) {
        auto fit = clarke_barron_slope(pt, cfg.input_index, prior, cfg.n_list, s, cfg.trials,
                                       derive_stream(cfg.seed, std::uint64_t(std::llround(1000 * s))));
        for (std::size_t i = 0; i < fit.n_values.size(); ++i) {
            out.csv.rows.push_back({std::to_string(fit.n_values[i]), fd(s), fd(fit.divergences[i]), fd(fit.ci_lo[i]),
                                    fd(fit.ci_hi[i]), fd(fit.predicted_intercept)});
        }
        slopes.emplace_back(JsonValue(JsonValue::Object{{"s", JsonValue(s)},
                                                        {"slope", JsonValue(fit.slope)},
                                                        {"intercept", JsonValue(fit.intercept)},
                                                        {"predicted_intercept", JsonValue(fit.predicted_intercept)}}));
    }
    out.summary = {{"x", JsonValue(double(cfg.input_index))}, {"fits", JsonValue(std::move(slopes))}};
    return out;
}

Outputs run_codebook_audit(const ExperimentConfig& cfg, const std::string& out_dir, const std::string& stem,
                           std::vector<std::string>& extra_outputs) {
    Outputs out;
    auto fam = cfg.family.build();
    std::vector<double> p =
        cfg.input_dist ? *cfg.input_dist : std::vector<double>(fam->input_count(), 1.0 / fam->input_count());
    out.csv.header = {"n", "M", "log_type_class", "packing_checked", "packing_verified", "max_group_avg_ratio"};
    for (int n : cfg.n_list) {
        const CompositionType comp = round_to_type(p, n);
        RngStream rng = derive_stream(cfg.seed, std::uint64_t(n));
        CodebookOptions opts;
        opts.verify = cfg.verify_packing;
        Codebook book = build_codebook(comp, *cfg.rate_r, cfg.rate_r1.value_or(*cfg.rate_r + 0.1), rng, opts);
        const auto tcs = type_class_size(comp);
        double max_ratio = 0;
        if (tcs.exact && *tcs.exact <= 5000) {
            Word w;
            for (int x = 0; x < comp.d(); ++x) w.insert(w.end(), std::size_t(comp.counts[x]), std::uint8_t(x));
            std::sort(w.begin(), w.end());
            do {
                max_ratio = std::max(max_ratio, group_average_ratio_max(book, w));
            } while (std::next_permutation(w.begin(), w.end()));
        }
        const std::string book_path = out_dir + "/" + stem + "-codebook-n" + std::to_string(n) + ".txt";
        save_codebook_file(book, book_path);
        extra_outputs.push_back(book_path);
        out.csv.rows.push_back({std::to_string(n), std::to_string(book.words.size()), fd(tcs.log_size),
                                book.packing_checked ? "1" : "0", book.packing_verified ? "1" : "0", fd(max_ratio)});
    }
    out.summary = {{"verify_packing", JsonValue(cfg.verify_packing)}};
    return out;
}

}  // namespace

std::vector<std::string> validate_experiment_file(const std::string& config_path) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const std::exception& e) {
        return {std::string("config: ") + e.what()};
    }
    return validate_config(cfg);
}

RunResult run_experiment_file(const std::string& config_path, const CliOverrides& ov) {
    RunResult res;
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const std::exception& e) {
        res.exit_code = 2;
        res.message = std::string("config: ") + e.what();
        return res;
    }
    if (ov.seed) {
        cfg.seed = *ov.seed;
        cfg.seed_given = true;
    }
    if (ov.workers) cfg.workers = *ov.workers;
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;

    const auto diags = validate_config(cfg);
    if (!diags.empty()) {
        res.exit_code = 2;
        res.message = "invalid config";
        for (const auto& d : diags) res.message += "\n  - " + d;
        return res;
    }
    worker_count() = cfg.workers;

    std::string stem = cfg.label;
    if (stem.empty()) {
        stem = fs::path(config_path).stem().string();
    }
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);

    StageTimer timer;
    Outputs outs;
    std::vector<std::string> extra_outputs;
    const auto wall_start = std::chrono::system_clock::now();
    try {
        switch (cfg.kind) {
            case ExperimentKind::ExponentBound: outs = run_exponent_bound(cfg); break;
            case ExperimentKind::CompoundDesign: outs = run_compound_design(cfg); break;
            case ExperimentKind::SimulateExponent: outs = run_simulate_exponent(cfg); break;
            case ExperimentKind::SecondOrder: outs = run_second_order_exp(cfg); break;
            case ExperimentKind::ClarkeBarron: outs = run_clarke_barron(cfg); break;
            case ExperimentKind::CodebookAudit: outs = run_codebook_audit(cfg, cfg.out_dir, stem, extra_outputs); break;
        }
    } catch (const std::exception& e) {
        res.exit_code = 3;
        res.message = std::string("numeric failure [") + experiment_kind_name(cfg.kind) + "]: " + e.what();
        return res;
    }
    timer.stage("experiment");

    const std::string csv_path = cfg.out_dir + "/" + stem + "-results.csv";
    const std::string json_path = cfg.out_dir + "/" + stem + "-summary.json";
    const std::string manifest_path = cfg.out_dir + "/" + stem + "-manifest.json";

    const std::string csv_body = outs.csv.to_string();

    JsonValue::Object summary_obj = {{"experiment", JsonValue(experiment_kind_name(cfg.kind))},
                                     {"label", JsonValue(stem)},
                                     {"seed", JsonValue(double(cfg.seed))}};
    for (auto& kv : outs.summary) summary_obj.emplace_back(std::move(kv));
    const std::string json_body = JsonValue(std::move(summary_obj)).dump();

    atomic_write_file(csv_path, csv_body);
    atomic_write_file(json_path, json_body);
    timer.stage("write-outputs");

    JsonValue::Array stages;
    for (const auto& [name, secs] : timer.stages)
        stages.emplace_back(JsonValue(JsonValue::Object{{"stage", JsonValue(name)}, {"seconds", JsonValue(secs)}}));
    JsonValue::Array digests;
    digests.emplace_back(JsonValue(JsonValue::Object{{"path", JsonValue(csv_path)},
                                                     {"sha256", JsonValue(sha256_hex(csv_body))}}));
    digests.emplace_back(JsonValue(JsonValue::Object{{"path", JsonValue(json_path)},
                                                     {"sha256", JsonValue(sha256_hex(json_body))}}));
    const auto wall_end = std::chrono::system_clock::now();
    const double wall_s = std::chrono::duration<double>(wall_end - wall_start).count();
    const std::time_t t0 = std::chrono::system_clock::to_time_t(wall_start);
    char iso[32];
    std::strftime(iso, sizeof(iso), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t0));
    JsonValue manifest(JsonValue::Object{
        {"artifact", JsonValue("ucc 0.1.0")},
        {"started_at", JsonValue(std::string(iso))},
        {"wall_clock_seconds", JsonValue(wall_s)},
        {"workers", JsonValue(double(effective_workers()))},
        {"stages", JsonValue(std::move(stages))},
        {"outputs", JsonValue(std::move(digests))},
        {"config", JsonValue::raw(cfg.raw_json)},
    });
    atomic_write_file(manifest_path, manifest.dump());

    res.exit_code = outs.exit_code;
    res.message = outs.message.empty() ? "ok" : outs.message;
    res.output_files = {csv_path, json_path, manifest_path};
    for (auto& p : extra_outputs) res.output_files.push_back(p);
    return res;
}

}  // namespace ucc
