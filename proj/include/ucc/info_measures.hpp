#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ucc/channel_family.hpp"
#include "ucc/quadrature.hpp"

namespace ucc {

struct RateParameters {
    double r = 0;        // first-order rate, nats/symbol
    double r1 = 0;       // decoder threshold rate
    double r1_star = 0;  // first-order rate (second-order experiments)
    double r2_star = 0;  // second-order rate, nats/sqrt(symbol)
};

struct QuadSpec {
    int nodes_per_dim = 64;
    double inflate = 1.5;    // frame widening for mixture coverage
    bool check = true;       // compare against a coarser rule and signal divergence
    double check_tol = 1e-6;
};

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// log of integral(exp(log_f(y)) dy) over R^dim using tensor Gauss-Hermite in
// the given frame.
double log_integral_frame(const std::function<double(std::span<const double>)>& log_f, const GaussFrame& frame,
                          int nodes_per_dim);

// Moment-matched frame of the output mixture sum_x P(x) W_theta(.|x).
GaussFrame mixture_frame(std::span<const double> p, const ChannelPoint& pt, double inflate);

// --- divergences -----------------------------------------------------------

// Exact sums over matching finite supports.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double renyi_divergence(std::span<const double> p, std::span<const double> q, double s);

// Continuous supports: log-densities integrated against a frame covering p.
using LogDensity = std::function<double(std::span<const double>)>;
double kl_divergence_cont(const LogDensity& logp, const LogDensity& logq, const GaussFrame& p_frame,
                          const QuadSpec& spec = {});
double renyi_divergence_cont(const LogDensity& logp, const LogDensity& logq, double s, const GaussFrame& p_frame,
                             const QuadSpec& spec = {});

// --- channel functionals ----------------------------------------------------

// s I_{1-s}(P, W_theta) = -(1-s) log integral (sum_x P(x) W_x(y)^{1-s})^{1/(1-s)} dy.
// Zero at both endpoints s = 0 and s = 1 for full-support channels.
double gallager_s_info(std::span<const double> p, const ChannelPoint& pt, double s, const QuadSpec& spec = {});

double mutual_information(std::span<const double> p, const ChannelPoint& pt, const QuadSpec& spec = {});
double dispersion(std::span<const double> p, const ChannelPoint& pt, const QuadSpec& spec = {});

// --- exponent machinery ------------------------------------------------------

struct ExponentReport {
    double bound = 0;      // min(inner_max, r1 - r)
    double s_star = 0;     // maximizer of s I_{1-s} - s R1
    double inner_max = 0;  // max_s (s I_{1-s} - s R1)
    double r1 = 0;
    double r = 0;
};

// Theorem-style exponent lower bound at fixed (R, R1), R1 > R.
ExponentReport exponent_lower_bound(std::span<const double> p, const ChannelPoint& pt, double r, double r1,
                                    const QuadSpec& spec = {});

struct OptimalR1 {
    double r1 = 0;
    double bound = 0;   // max_s (s I_{1-s} - s R)/(1+s), worst case over the grid
    double s_star = 0;  // maximizer at the worst-case parameter
};

OptimalR1 optimal_r1(std::span<const double> p, const ChannelPoint& pt, double r, const QuadSpec& spec = {});
OptimalR1 optimal_r1_grid(std::span<const double> p, const std::shared_ptr<const ChannelFamily>& fam,
                          const std::vector<std::vector<double>>& theta_grid, double r, const QuadSpec& spec = {});

enum class CompoundMethod { M1, M2 };

struct CompoundDesign {
    std::vector<double> input_dist;
    double r1 = 0;
    double bound = 0;  // guaranteed exponent over the parameter grid
    CompoundMethod method = CompoundMethod::M2;
    double worst_mutual_info = 0;
};

CompoundDesign compound_design(const std::shared_ptr<const ChannelFamily>& fam,
                               const std::vector<std::vector<double>>& theta_grid, double r, CompoundMethod method,
                               const std::vector<std::vector<double>>& input_candidates, const QuadSpec& spec = {});

// --- second order ------------------------------------------------------------

struct SecondOrderReport {
    double mutual_info = 0;
    double dispersion = 0;
    double epsilon = 0;  // Phi(r2_star / sqrt(V))
    double r2_star = 0;
};

SecondOrderReport second_order_bound(std::span<const double> p, const ChannelPoint& pt, double r2_star,
                                     const QuadSpec& spec = {});
// Inverse map: the second-order rate achieving a target error level.
double r2_for_epsilon(std::span<const double> p, const ChannelPoint& pt, double epsilon, const QuadSpec& spec = {});

// Directional first-order shift of mutual information:
// f(theta2) = grad_theta I(P, W_theta)|_{theta1} . theta2, central differences.
double local_shift(std::span<const double> p, const std::shared_ptr<const ChannelFamily>& fam,
                   std::span<const double> theta1, std::span<const double> theta2, const QuadSpec& spec = {});

}  // namespace ucc
