#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ucc/channel_family.hpp"
#include "ucc/composition.hpp"
#include "ucc/rng.hpp"

namespace ucc {

enum class PriorKind {
    ThetaBoxUniform,  // continuous uniform density on the (selected) box, quadrature nodes
    MeanDirichlet,    // Dirichlet(alpha) on the output simplex; finite-output families, closed form
    GridE,            // lattice (1/sqrt(n)) Z^k intersected with the box, uniform weights
    GridF,            // nested-box lattices with shell weights 6/(pi^2 i^2)
};

struct PriorSpec {
    PriorKind kind = PriorKind::ThetaBoxUniform;
    double alpha = 1.0;      // MeanDirichlet concentration
    int nodes_per_dim = 0;   // ThetaBoxUniform: 0 = auto-scaled with n
    int shells = 200;        // GridF truncation
    std::vector<Box> nested_boxes;  // GridF; defaults to the family box repeated

    static PriorSpec theta_box(int nodes = 0) { return {PriorKind::ThetaBoxUniform, 1.0, nodes, 200, {}}; }
    static PriorSpec mean_dirichlet(double a) { return {PriorKind::MeanDirichlet, a, 0, 200, {}}; }
    static PriorSpec grid_e() { return {PriorKind::GridE, 1.0, 0, 200, {}}; }
    static PriorSpec grid_f(std::vector<Box> nested, int shells = 200) {
        return {PriorKind::GridF, 1.0, 0, shells, std::move(nested)};
    }
};

// A universal output distribution for i.i.d. blocks: either the mixture of a
// single input's output laws, or of the P-averaged output law, over a prior
// on the parameter set. Evaluable as a log-density on sequences and, for
// finite output spaces, on sufficient-statistic count vectors.
class MixtureModel {
public:
    // Mixture of W_theta(.|x) over the prior (prior lives on the coordinates
    // selected by input x; the remaining coordinates are irrelevant to x).
    static MixtureModel input_mixture(std::shared_ptr<const ChannelFamily> fam, const PriorSpec& prior, int x, int n);
    // Mixture of sum_x P(x) W_theta(.|x) over the full-parameter prior.
    static MixtureModel output_mixture(std::shared_ptr<const ChannelFamily> fam, const PriorSpec& prior,
                                       std::vector<double> input_dist, int n);

    bool finite_output() const { return finite_; }
    bool closed_form() const { return closed_form_; }
    int output_cardinality() const { return card_; }
    int block_length_hint() const { return n_; }

    // log Q(y^count) over a flat sequence buffer (dim components per symbol).
    double log_density_seq(std::span<const double> y_flat, int count) const;
    // finite output: log Q of any sequence with these symbol counts.
    double log_density_counts(std::span<const long long> counts) const;
    // binary output fast path: table[t] = log Q(length len, t ones).
    std::vector<double> binary_table(int len) const;

    // node access (empty for closed-form mixtures)
    std::size_t node_count() const { return log_w_.size(); }
    double node_log_weight(std::size_t q) const { return log_w_[q]; }
    std::span<const double> node_theta(std::size_t q) const { return thetas_[q]; }
    double node_log_pmf(std::size_t q, int y) const { return node_lp_[q][y]; }
    double node_log_density(std::size_t q, std::span<const double> y) const;

    // prior density at theta in the mixture's own chart (reporting aid)
    double prior_log_density(std::span<const double> theta_sel) const;

private:
    MixtureModel() = default;
    void build_nodes(const PriorSpec& prior, const Box& box, int n);
    void finalize_node_pmfs();

    std::shared_ptr<const ChannelFamily> fam_;
    bool output_mode_ = false;
    int x_ = 0;
    std::vector<double> input_dist_;
    bool finite_ = true;
    bool closed_form_ = false;
    double alpha_ = 1.0;
    int card_ = 0;
    int n_ = 1;
    int dim_ = 1;
    Box chart_box_;                           // box in the mixture's own chart
    std::vector<int> sel_;                    // selected coordinates (input mode)
    std::vector<std::vector<double>> thetas_;  // full-parameter node vectors
    std::vector<double> log_w_;
    std::vector<std::vector<double>> node_lp_;  // finite output: per-node log pmf
};

// Per-codeword product mixture: independent per-input blocks at the
// positions where the codeword equals each input symbol.
class CodewordMixture {
public:
    CodewordMixture(std::shared_ptr<const ChannelFamily> fam, const std::vector<PriorSpec>& per_input_priors, int n);

    // log Q_{x^n}(y^n); covariant under joint permutation of (x^n, y^n).
    double log_density(std::span<const std::uint8_t> word, std::span<const double> y_flat) const;
    // finite output: evaluation from the per-input count rows (row x = counts
    // of output symbols at the positions where the word equals x).
    double log_density_rows(std::span<const long long> rows) const;

    const MixtureModel& block(int x) const { return blocks_[x]; }
    int input_count() const { return int(blocks_.size()); }
    int output_cardinality() const { return card_; }

private:
    std::shared_ptr<const ChannelFamily> fam_;
    std::vector<MixtureModel> blocks_;
    int card_ = 0;
    int dim_ = 1;
};

// --- estimators --------------------------------------------------------------

struct RenyiEstimate {
    double value = 0;
    double ci_lo = 0, ci_hi = 0;
    bool exact = false;
    bool heavy_tail = false;  // top percentile carries most of the empirical mean
    long long trials = 0;
};

// D_{1+s}(P_theta^n || Q^n) against an input-block mixture. Exact
// sufficient-statistic enumeration when the count simplex is small enough,
// Monte Carlo otherwise.
RenyiEstimate estimate_renyi_to_mixture(const ChannelPoint& pt, int x, const MixtureModel& model, int n, double s,
                                        long long trials, RngStream rng, std::size_t exact_cap = 2000000);

struct SlopeFit {
    std::vector<int> n_values;
    std::vector<double> divergences;
    std::vector<double> ci_lo, ci_hi;  // degenerate in the exact regime
    double slope = 0;
    double intercept = 0;
    double predicted_intercept = 0;  // asymptotic constant for the continuous-prior mixture
};

// Least-squares fit of D_{1+s}(P^n || Q^n) against log n across a list of
// blocklengths (each mixture rebuilt for its own n).
SlopeFit clarke_barron_slope(const ChannelPoint& pt, int x, const PriorSpec& prior, std::span<const int> n_list,
                             double s, long long trials_if_mc, RngStream rng);

struct ChiSquareCheck {
    double ks_distance = 0;
    double stat_mean = 0;
    int dof = 0;
};

// Empirical law of the normalized score statistic against the chi-square CDF.
ChiSquareCheck chi_square_score_check(const ChannelPoint& pt, int x, int n, long long trials, RngStream rng);

}  // namespace ucc
