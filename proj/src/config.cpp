#include "ucc/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ucc/info_measures.hpp"
#include "ucc/special.hpp"

namespace ucc {

using nlohmann::json;

std::shared_ptr<ChannelFamily> FamilyConfig::build() const {
    if (kind == "dmc") return make_dmc_family(d, m, box_half_width);
    if (kind == "gaussian-fading") return make_gaussian_fading(signal_points, eps0, linear_half_width);
    if (kind == "mimo-gaussian") return make_mimo_gaussian(signal_vectors, r, eps0, linear_half_width);
    throw std::invalid_argument("unknown family kind: " + kind);
}

PriorSpec PriorConfig::build() const {
    if (kind == "mean-jeffreys") return PriorSpec::mean_dirichlet(0.5);
    if (kind == "mean-uniform") return PriorSpec::mean_dirichlet(1.0);
    if (kind == "mean-dirichlet") return PriorSpec::mean_dirichlet(alpha);
    if (kind == "theta-box") return PriorSpec::theta_box(nodes_per_dim);
    if (kind == "grid-e") return PriorSpec::grid_e();
    if (kind == "grid-f") {
        auto p = PriorSpec::grid_f({}, shells);
        return p;
    }
    throw std::invalid_argument("unknown prior kind: " + kind);
}

const char* experiment_kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::ExponentBound: return "exponent-bound";
        case ExperimentKind::CompoundDesign: return "compound-design";
        case ExperimentKind::SimulateExponent: return "simulate-exponent";
        case ExperimentKind::SecondOrder: return "second-order";
        case ExperimentKind::ClarkeBarron: return "clarke-barron";
        case ExperimentKind::CodebookAudit: return "codebook-audit";
    }
    return "?";
}

namespace {

ExperimentKind parse_kind(const std::string& s) {
    if (s == "exponent-bound") return ExperimentKind::ExponentBound;
    if (s == "compound-design") return ExperimentKind::CompoundDesign;
    if (s == "simulate-exponent") return ExperimentKind::SimulateExponent;
    if (s == "second-order") return ExperimentKind::SecondOrder;
    if (s == "clarke-barron") return ExperimentKind::ClarkeBarron;
    if (s == "codebook-audit") return ExperimentKind::CodebookAudit;
    throw std::invalid_argument("unknown experiment kind: " + s);
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

PriorConfig parse_prior(const json& j) {
    PriorConfig p;
    read_if(j, "kind", p.kind);
    read_if(j, "alpha", p.alpha);
    read_if(j, "nodes_per_dim", p.nodes_per_dim);
    read_if(j, "shells", p.shells);
    return p;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    ExperimentConfig cfg;
    cfg.raw_json = buf.str();
    json j = json::parse(cfg.raw_json);

    cfg.kind = parse_kind(j.at("experiment").get<std::string>());
    read_if(j, "label", cfg.label);
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.seed_given = true;
    }
    read_if(j, "workers", cfg.workers);
    read_if(j, "out_dir", cfg.out_dir);

    if (j.contains("family")) {
        const json& f = j.at("family");
        read_if(f, "kind", cfg.family.kind);
        read_if(f, "d", cfg.family.d);
        read_if(f, "m", cfg.family.m);
        read_if(f, "box_half_width", cfg.family.box_half_width);
        read_if(f, "signal_points", cfg.family.signal_points);
        read_if(f, "signal_vectors", cfg.family.signal_vectors);
        read_if(f, "r", cfg.family.r);
        read_if(f, "eps0", cfg.family.eps0);
        read_if(f, "linear_half_width", cfg.family.linear_half_width);
    }
    read_opt(j, "theta", cfg.theta);
    read_if(j, "theta_grid", cfg.theta_grid);
    read_opt(j, "input_dist", cfg.input_dist);
    read_if(j, "input_candidates", cfg.input_candidates);

    if (j.contains("rates")) {
        const json& r = j.at("rates");
        read_opt(r, "R", cfg.rate_r);
        read_opt(r, "R1", cfg.rate_r1);
        read_opt(r, "R1_star", cfg.r1_star);
        read_opt(r, "R2_star", cfg.r2_star);
        read_opt(r, "epsilon", cfg.epsilon);
    }
    read_if(j, "n_list", cfg.n_list);
    read_if(j, "trials", cfg.trials);
    read_if(j, "exact", cfg.exact);

    if (j.contains("priors")) {
        const json& p = j.at("priors");
        if (p.contains("input")) cfg.input_prior = parse_prior(p.at("input"));
        if (p.contains("output")) cfg.output_prior = parse_prior(p.at("output"));
        read_if(p, "output_mix", cfg.output_mix);
    }
    read_if(j, "theta2", cfg.theta2);
    read_if(j, "method", cfg.method);
    read_if(j, "s_list", cfg.s_list);
    read_if(j, "x", cfg.input_index);
    read_if(j, "verify_packing", cfg.verify_packing);
    return cfg;
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> diags;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) diags.push_back(msg);
    };
    need(cfg.seed_given, "seed: a master seed is mandatory");

    std::shared_ptr<ChannelFamily> fam;
    try {
        fam = cfg.family.build();
    } catch (const std::exception& e) {
        diags.push_back(std::string("family: ") + e.what());
        return diags;
    }

    auto check_theta = [&](const std::vector<double>& th, const std::string& label) {
        if (int(th.size()) != fam->param_dim())
            diags.push_back(label + ": dimension must be " + std::to_string(fam->param_dim()));
        else if (!fam->theta_valid(th))
            diags.push_back(label + ": parameter outside the admissible set");
    };
    auto check_dist = [&](const std::vector<double>& p, const std::string& label) {
        if (int(p.size()) != fam->input_count()) {
            diags.push_back(label + ": length must be " + std::to_string(fam->input_count()));
            return;
        }
        double s = 0;
        for (double v : p) {
            if (v < 0) diags.push_back(label + ": negative mass");
            s += v;
        }
        if (std::fabs(s - 1.0) > 1e-9) diags.push_back(label + ": must sum to 1");
    };

    const bool needs_theta = cfg.kind == ExperimentKind::SimulateExponent || cfg.kind == ExperimentKind::SecondOrder ||
                             cfg.kind == ExperimentKind::ClarkeBarron ||
                             (cfg.kind == ExperimentKind::ExponentBound && cfg.theta_grid.empty());
    if (needs_theta) {
        if (!cfg.theta)
            diags.push_back("theta: required for this experiment");
        else
            check_theta(*cfg.theta, "theta");
    }
    for (const auto& th : cfg.theta_grid) check_theta(th, "theta_grid entry");

    const bool needs_dist = cfg.kind != ExperimentKind::CompoundDesign && cfg.kind != ExperimentKind::ClarkeBarron &&
                            cfg.kind != ExperimentKind::CodebookAudit;
    if (needs_dist) {
        if (!cfg.input_dist)
            diags.push_back("input_dist: required for this experiment");
        else
            check_dist(*cfg.input_dist, "input_dist");
    }
    if (cfg.kind == ExperimentKind::CodebookAudit && cfg.input_dist) check_dist(*cfg.input_dist, "input_dist");

    switch (cfg.kind) {
        case ExperimentKind::ExponentBound:
            need(cfg.rate_r.has_value(), "rates.R: required");
            if (cfg.rate_r && cfg.rate_r1 && !(*cfg.rate_r1 > *cfg.rate_r))
                diags.push_back("rates: the threshold rate R1 must exceed R");
            break;
        case ExperimentKind::CompoundDesign:
            need(cfg.rate_r.has_value(), "rates.R: required");
            need(!cfg.theta_grid.empty(), "theta_grid: required for compound design");
            need(!cfg.input_candidates.empty(), "input_candidates: required for compound design");
            for (const auto& p : cfg.input_candidates) check_dist(p, "input candidate");
            need(cfg.method == "M1" || cfg.method == "M2", "method: must be M1 or M2");
            break;
        case ExperimentKind::SimulateExponent: {
            need(cfg.rate_r.has_value(), "rates.R: required");
            need(cfg.n_list.size() >= 4, "n_list: need at least 4 blocklengths");
            need(cfg.trials >= 1, "trials: must be positive");
            if (cfg.rate_r && cfg.rate_r1 && !(*cfg.rate_r1 > *cfg.rate_r))
                diags.push_back("rates: the threshold rate R1 must exceed R");
            if (cfg.exact && fam->output_space().finite()) {
                for (int n : cfg.n_list) {
                    double lc = 0;
                    const auto comp = cfg.input_dist ? round_to_type(*cfg.input_dist, n)
                                                     : round_to_type(std::vector<double>(fam->input_count(),
                                                                                         1.0 / fam->input_count()),
                                                                     n);
                    for (int x = 0; x < comp.d(); ++x)
                        lc += log_binom(comp.counts[x] + fam->output_space().cardinality - 1,
                                        fam->output_space().cardinality - 1);
                    if (lc > std::log(4e6))
                        diags.push_back("exact: enumeration capacity exceeded at n = " + std::to_string(n));
                }
            }
            break;
        }
        case ExperimentKind::SecondOrder: {
            need(cfg.r2_star.has_value() || cfg.epsilon.has_value(), "rates: need R2_star or epsilon");
            need(!cfg.n_list.empty(), "n_list: required");
            need(cfg.trials >= 1, "trials: must be positive");
            if (cfg.theta && cfg.input_dist && int(cfg.theta->size()) == fam->param_dim() &&
                int(cfg.input_dist->size()) == fam->input_count() && fam->theta_valid(*cfg.theta)) {
                try {
                    ChannelPoint pt(fam, *cfg.theta);
                    const double v = dispersion(*cfg.input_dist, pt);
                    if (!(v > 0)) diags.push_back("second-order: dispersion V(P, W_theta) must be positive");
                    if (cfg.r1_star) {
                        const double mi = mutual_information(*cfg.input_dist, pt);
                        if (std::fabs(*cfg.r1_star - mi) > 1e-6)
                            diags.push_back("rates.R1_star: must equal I(P, W_theta1) for this experiment");
                    }
                    if (!cfg.theta2.empty()) {
                        if (int(cfg.theta2.size()) != fam->param_dim())
                            diags.push_back("theta2: dimension mismatch");
                        else
                            for (int n : cfg.n_list) {
                                auto th = *cfg.theta;
                                for (std::size_t i = 0; i < th.size(); ++i) th[i] += cfg.theta2[i] / std::sqrt(double(n));
                                if (!fam->theta_valid(th))
                                    diags.push_back("theta2: perturbed parameter leaves the set at n = " +
                                                    std::to_string(n));
                            }
                    }
                } catch (const std::exception& e) {
                    diags.push_back(std::string("second-order: ") + e.what());
                }
            }
            break;
        }
        case ExperimentKind::ClarkeBarron:
            need(cfg.n_list.size() >= 4, "n_list: need at least 4 blocklengths");
            need(!cfg.s_list.empty(), "s_list: required");
            for (double s : cfg.s_list)
                if (!(s > 0)) diags.push_back("s_list: orders must be positive");
            need(cfg.input_index >= 0 && cfg.input_index < fam->input_count(), "x: input index out of range");
            break;
        case ExperimentKind::CodebookAudit: {
            need(cfg.rate_r.has_value(), "rates.R: required");
            need(!cfg.n_list.empty(), "n_list: required");
            if (cfg.verify_packing)
                for (int n : cfg.n_list)
                    if (n > 10 || fam->input_count() > 3)
                        diags.push_back("verify_packing: exhaustive check capped at n <= 10, d <= 3 (n = " +
                                        std::to_string(n) + ")");
            break;
        }
    }
    // prior compatibility, only where the experiment builds mixtures
    const bool uses_priors = cfg.kind == ExperimentKind::SimulateExponent ||
                             cfg.kind == ExperimentKind::SecondOrder || cfg.kind == ExperimentKind::ClarkeBarron;
    if (uses_priors) {
        try {
            auto ps = cfg.input_prior.build();
            if ((ps.kind == PriorKind::MeanDirichlet || ps.kind == PriorKind::ThetaBoxUniform) &&
                fam->tag() != ConditionTag::A)
                diags.push_back("priors.input: continuous priors require a tag-A family; use grid-e or grid-f");
        } catch (const std::exception& e) {
            diags.push_back(std::string("priors.input: ") + e.what());
        }
        try {
            (void)cfg.output_prior.build();
        } catch (const std::exception& e) {
            diags.push_back(std::string("priors.output: ") + e.what());
        }
        if (cfg.output_mix != "prior-integral" && cfg.output_mix != "type-average")
            diags.push_back("priors.output_mix: must be prior-integral or type-average");
    }
    return diags;
}

}  // namespace ucc
