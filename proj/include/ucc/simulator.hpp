#pragma once

#include <optional>

#include "ucc/codebook.hpp"
#include "ucc/info_measures.hpp"
#include "ucc/mixtures.hpp"

namespace ucc {

enum class OutputMixKind {
    PriorIntegral,  // mixture of the P-averaged output law over the output prior
    TypeAverage,    // uniform average of the per-codeword mixtures over the type class
};

// Decoder-side objects shared by every code drawn from the ensemble:
// per-input block mixtures, the output mixture, and the threshold rate.
// Holds no channel parameter.
class CodeEnsemble {
public:
    CodeEnsemble(std::shared_ptr<const ChannelFamily> fam, CompositionType composition, double rate_r, double rate_r1,
                 std::vector<PriorSpec> input_priors, PriorSpec output_prior,
                 OutputMixKind qp_kind = OutputMixKind::PriorIntegral);

    const ChannelFamily& family() const { return *fam_; }
    std::shared_ptr<const ChannelFamily> family_ptr() const { return fam_; }
    const CompositionType& composition() const { return comp_; }
    int block_length() const { return comp_.n; }
    double rate_r() const { return rate_r_; }
    double rate_r1() const { return rate_r1_; }
    double threshold() const { return double(comp_.n) * rate_r1_; }
    CodeSize size() const { return code_size(comp_.n, rate_r_); }
    OutputMixKind output_mix_kind() const { return qp_kind_; }
    const CodewordMixture& codeword_mixture() const { return cw_mix_; }

    // log Q_{x^n}(y^n) and log Q_P(y^n)
    double log_codeword_mixture(std::span<const std::uint8_t> word, std::span<const double> y_flat) const {
        return cw_mix_.log_density(word, y_flat);
    }
    double log_output_mixture(std::span<const double> y_flat) const;

    // finite-output sufficient statistics
    double log_codeword_mixture_rows(std::span<const long long> rows) const { return cw_mix_.log_density_rows(rows); }
    double log_output_mixture_counts(std::span<const long long> out_counts) const;

    // membership score: log Q_{x^n}(y) - log Q_P(y) - n R1 (>= 0 means claimed)
    double score_seq(std::span<const std::uint8_t> word, std::span<const double> y_flat) const;

    // probability that a uniformly drawn word of the type class claims a
    // sequence with these output counts (finite output spaces)
    double competitor_claim_prob(std::span<const long long> out_counts) const;

private:
    std::shared_ptr<const ChannelFamily> fam_;
    CompositionType comp_;
    double rate_r_, rate_r1_;
    OutputMixKind qp_kind_;
    CodewordMixture cw_mix_;
    std::optional<MixtureModel> out_mix_;  // PriorIntegral only
};

// An explicit constant-composition code with the universal threshold decoder.
class UniversalCode {
public:
    UniversalCode(CodeEnsemble ensemble, Codebook book);

    // Assemble: draw the codebook from the ensemble with the given stream.
    static UniversalCode assemble(const CodeEnsemble& ensemble, RngStream& rng, const CodebookOptions& opts = {});

    const CodeEnsemble& ensemble() const { return ens_; }
    const Codebook& codebook() const { return book_; }
    std::size_t message_count() const { return book_.words.size(); }
    int block_length() const { return ens_.block_length(); }

    // First-match threshold decode; erasure = nullopt. Reads no channel parameter.
    std::optional<int> decode(std::span<const double> y_flat) const;

private:
    CodeEnsemble ens_;
    Codebook book_;
};

// Informed maximum-likelihood baseline (requires the true parameter).
int ml_decode_baseline(const UniversalCode& code, const ChannelPoint& pt, std::span<const double> y_flat);

enum class ErrorMode { Exact, McFixedCode, McRandomCoding };

struct ErrorEstimate {
    double estimate = 0;
    double ci_lo = 0, ci_hi = 1;  // Wilson 95% (degenerate for exact mode)
    long long trials = 0;
    long long errors = 0;
    ErrorMode mode = ErrorMode::Exact;
};

// Average decoding error of an explicit code: exact enumeration over the
// output space (finite, |Y|^n capped) or seeded Monte Carlo.
ErrorEstimate estimate_error_exact(const UniversalCode& code, const ChannelPoint& pt, std::size_t space_cap = 1000000);
ErrorEstimate estimate_error_mc(const UniversalCode& code, const ChannelPoint& pt, long long trials,
                                std::uint64_t seed);

// Random-coding error: each trial redraws the codebook implicitly; competitor
// membership is marginalized exactly over the type class. Finite outputs only.
ErrorEstimate estimate_error_random_coding(const CodeEnsemble& ens, const ChannelPoint& pt, long long trials,
                                           std::uint64_t seed);

// Exact expectation of the same random-coding error (enumerates the per-input
// count rows); usable when the count enumeration is small enough.
double random_coding_error_exact(const CodeEnsemble& ens, const ChannelPoint& pt, std::size_t cap = 4000000);

// Exact mass of each decode region plus erasure under W_theta(.|word0):
// diagnostics for the partition property.
std::vector<double> exact_region_masses(const UniversalCode& code, const ChannelPoint& pt,
                                        std::span<const std::uint8_t> word, std::size_t space_cap = 1000000);

}  // namespace ucc
