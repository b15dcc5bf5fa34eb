#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ucc/mixtures.hpp"
#include "ucc/simulator.hpp"

namespace ucc {

enum class ExperimentKind {
    ExponentBound,
    CompoundDesign,
    SimulateExponent,
    SecondOrder,
    ClarkeBarron,
    CodebookAudit,
};

struct FamilyConfig {
    std::string kind;  // dmc | gaussian-fading | mimo-gaussian
    int d = 2, m = 1;
    double box_half_width = 6.0;
    std::vector<double> signal_points;
    std::vector<std::vector<double>> signal_vectors;
    int r = 1;
    double eps0 = 0.05;
    double linear_half_width = 6.0;

    std::shared_ptr<ChannelFamily> build() const;
};

struct PriorConfig {
    std::string kind = "mean-jeffreys";  // mean-jeffreys|mean-uniform|mean-dirichlet|theta-box|grid-e|grid-f
    double alpha = 0.5;
    int nodes_per_dim = 0;
    int shells = 200;

    PriorSpec build() const;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::ExponentBound;
    std::string label;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int workers = 0;
    std::string out_dir = "out";

    FamilyConfig family;
    std::optional<std::vector<double>> theta;
    std::vector<std::vector<double>> theta_grid;
    std::optional<std::vector<double>> input_dist;
    std::vector<std::vector<double>> input_candidates;

    std::optional<double> rate_r;
    std::optional<double> rate_r1;
    std::optional<double> r1_star;
    std::optional<double> r2_star;
    std::optional<double> epsilon;

    std::vector<int> n_list;
    long long trials = 100000;
    bool exact = false;

    PriorConfig input_prior;
    PriorConfig output_prior;
    std::string output_mix = "prior-integral";  // or type-average

    std::vector<double> theta2;
    std::string method = "M2";
    std::vector<double> s_list = {0.5, 1.0};
    int input_index = 0;
    bool verify_packing = false;

    std::string raw_json;  // config echo for the manifest
};

ExperimentConfig load_config(const std::string& path);

// Schema and semantic diagnostics; empty means runnable.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

const char* experiment_kind_name(ExperimentKind k);

}  // namespace ucc
