#pragma once

#include "ucc/simulator.hpp"

namespace ucc {

struct ExponentCell {
    int n = 0;
    double r1 = 0;
    double log_m = 0;
    ErrorEstimate est;
    bool zero_substituted = false;  // no errors observed; 1/(trials+1) plugged in
    double exponent_point = 0;      // -(1/n) log(estimate or substitute)
};

struct ExponentFit {
    std::vector<ExponentCell> cells;
    double fitted_exponent = 0;  // intercept of -(1/n) log e against 1/n
    double std_error = 0;
    double bound = 0;  // theorem lower bound at (R, R1)
    double s_star = 0;
    double r = 0, r1 = 0;
    bool fit_usable = true;  // false when any cell needed the zero substitution
    bool pass = false;       // fitted_exponent >= bound - 2 std_error
};

struct ExponentExperimentSpec {
    std::vector<double> input_dist;
    double rate_r = 0;
    std::optional<double> rate_r1;  // default: optimal threshold rate for (P, theta, R)
    std::vector<int> n_list;
    long long trials = 100000;
    std::vector<PriorSpec> input_priors;  // empty: Jeffreys mean prior per input
    PriorSpec output_prior = PriorSpec::mean_dirichlet(0.5);
    OutputMixKind qp_kind = OutputMixKind::PriorIntegral;
    std::uint64_t seed = 1;
};

ExponentFit fit_exponent(const ChannelPoint& pt, const ExponentExperimentSpec& spec);

struct SecondOrderCell {
    int n = 0;
    std::vector<double> theta;  // theta1 + theta2 / sqrt(n)
    double r1 = 0;
    double log_m = 0;
    ErrorEstimate est;
};

struct SecondOrderRun {
    double r1_star = 0, r2_star = 0;
    double mutual_info = 0;
    double dispersion_v = 0;
    double f_shift = 0;         // directional first-order shift of I under theta2
    double limit_epsilon = 0;   // Phi((r2_star - f_shift)/sqrt(V))
    std::vector<SecondOrderCell> cells;
};

struct SecondOrderSpec {
    std::vector<double> theta2;       // local perturbation; empty = zero
    std::vector<double> input_dist;
    std::optional<double> r1_star;    // must equal I(P, W_theta1) when given
    std::optional<double> r2_star;    // either r2_star or epsilon
    std::optional<double> epsilon;
    std::vector<int> n_list;
    long long trials = 20000;
    std::vector<PriorSpec> input_priors;  // empty: Jeffreys mean prior per input
    PriorSpec output_prior = PriorSpec::mean_dirichlet(0.25);
    OutputMixKind qp_kind = OutputMixKind::PriorIntegral;
    std::uint64_t seed = 1;
};

SecondOrderRun run_second_order(const ChannelPoint& theta1_point, const SecondOrderSpec& spec);

}  // namespace ucc
