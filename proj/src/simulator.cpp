#include "ucc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "ucc/parallel.hpp"
#include "ucc/special.hpp"

namespace ucc {

namespace {

// Enumerate contingency tables t[x][y] >= 0 with column sums `cols` (length
// card) and row sums `rows` (length d); f receives the table row-major.
template <typename F>
void for_each_table(std::span<const long long> rows, std::span<const long long> cols, F&& f) {
    const int d = int(rows.size());
    const int card = int(cols.size());
    std::vector<long long> t(std::size_t(d) * card, 0);
    std::vector<long long> row_left(rows.begin(), rows.end());
    long long total_left = 0;
    for (long long c : cols) total_left += c;

    auto rec = [&](auto&& self, int y, int x, long long col_left) -> void {
        if (y == card) {
            f(std::span<const long long>(t.data(), t.size()));
            return;
        }
        if (x == d - 1) {
            // last row of this column is forced
            if (col_left > row_left[x]) return;
            t[std::size_t(x) * card + y] = col_left;
            row_left[x] -= col_left;
            const long long next_col = (y + 1 < card) ? cols[y + 1] : 0;
            self(self, y + 1, 0, next_col);
            row_left[x] += col_left;
            t[std::size_t(x) * card + y] = 0;
            return;
        }
        const long long hi = std::min(col_left, row_left[x]);
        for (long long v = 0; v <= hi; ++v) {
            t[std::size_t(x) * card + y] = v;
            row_left[x] -= v;
            self(self, y, x + 1, col_left - v);
            row_left[x] += v;
        }
        t[std::size_t(x) * card + y] = 0;
    };
    rec(rec, 0, 0, card > 0 ? cols[0] : 0);
}

struct LgammaTable {
    std::vector<double> v;
    explicit LgammaTable(long long n) : v(std::size_t(n) + 2) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::lgamma(double(i));
    }
    double log_fact(long long x) const { return v[std::size_t(x) + 1]; }
};

}  // namespace

CodeEnsemble::CodeEnsemble(std::shared_ptr<const ChannelFamily> fam, CompositionType composition, double rate_r,
                           double rate_r1, std::vector<PriorSpec> input_priors, PriorSpec output_prior,
                           OutputMixKind qp_kind)
    : fam_(std::move(fam)),
      comp_(std::move(composition)),
      rate_r_(rate_r),
      rate_r1_(rate_r1),
      qp_kind_(qp_kind),
      cw_mix_(fam_, input_priors, comp_.n) {
    if (comp_.d() != fam_->input_count()) throw std::invalid_argument("CodeEnsemble: composition arity mismatch");
    if (qp_kind_ == OutputMixKind::PriorIntegral)
        out_mix_ = MixtureModel::output_mixture(fam_, output_prior, comp_.probs(), comp_.n);
    const CodeSize ms = code_size(comp_.n, rate_r_);
    const TypeClassSize tcs = type_class_size(comp_);
    if (ms.log_m > tcs.log_size + 1e-12) throw std::invalid_argument("CodeEnsemble: message count exceeds |T_P|");
}

double CodeEnsemble::log_output_mixture(std::span<const double> y_flat) const {
    if (qp_kind_ == OutputMixKind::PriorIntegral) {
        return out_mix_->log_density_seq(y_flat, comp_.n);
    }
    if (fam_->output_space().finite()) {
        const int card = fam_->output_space().cardinality;
        std::vector<long long> counts(card, 0);
        for (int i = 0; i < comp_.n; ++i) counts[int(y_flat[std::size_t(i)])]++;
        return log_output_mixture_counts(counts);
    }
    // continuous type-average: explicit enumeration of the type class
    const TypeClassSize tcs = type_class_size(comp_);
    if (!tcs.exact || *tcs.exact > 100000)
        throw std::length_error("CodeEnsemble: type-average output mixture needs a small type class here");
    Word w;
    for (int x = 0; x < comp_.d(); ++x) w.insert(w.end(), std::size_t(comp_.counts[x]), std::uint8_t(x));
    std::sort(w.begin(), w.end());
    LogSumAcc acc;
    do {
        acc.add(cw_mix_.log_density(w, y_flat) - tcs.log_size);
    } while (std::next_permutation(w.begin(), w.end()));
    return acc.value();
}

double CodeEnsemble::log_output_mixture_counts(std::span<const long long> out_counts) const {
    if (!fam_->output_space().finite()) throw std::logic_error("log_output_mixture_counts: continuous output");
    if (qp_kind_ == OutputMixKind::PriorIntegral) return out_mix_->log_density_counts(out_counts);
    const int d = comp_.d();
    const int card = int(out_counts.size());
    const LgammaTable lg(comp_.n);
    double log_tp = lg.log_fact(comp_.n);
    for (int x = 0; x < d; ++x) log_tp -= lg.log_fact(comp_.counts[x]);
    LogSumAcc acc;
    for_each_table(comp_.counts, out_counts, [&](std::span<const long long> t) {
        double lcount = 0;
        for (int y = 0; y < card; ++y) {
            lcount += lg.log_fact(out_counts[y]);
            for (int x = 0; x < d; ++x) lcount -= lg.log_fact(t[std::size_t(x) * card + y]);
        }
        acc.add(lcount - log_tp + cw_mix_.log_density_rows(t));
    });
    return acc.value();
}

double CodeEnsemble::score_seq(std::span<const std::uint8_t> word, std::span<const double> y_flat) const {
    return log_codeword_mixture(word, y_flat) - log_output_mixture(y_flat) - threshold();
}

double CodeEnsemble::competitor_claim_prob(std::span<const long long> out_counts) const {
    if (!fam_->output_space().finite()) throw std::logic_error("competitor_claim_prob: continuous output");
    const int d = comp_.d();
    const int card = int(out_counts.size());
    const double gate = threshold() + log_output_mixture_counts(out_counts);
    if (std::isinf(gate) && gate > 0) return 0.0;
    const LgammaTable lg(comp_.n);
    double log_tp = lg.log_fact(comp_.n);
    for (int x = 0; x < d; ++x) log_tp -= lg.log_fact(comp_.counts[x]);
    double q = 0;
    for_each_table(comp_.counts, out_counts, [&](std::span<const long long> t) {
        if (cw_mix_.log_density_rows(t) < gate) return;
        double lcount = 0;
        for (int y = 0; y < card; ++y) {
            lcount += lg.log_fact(out_counts[y]);
            for (int x = 0; x < d; ++x) lcount -= lg.log_fact(t[std::size_t(x) * card + y]);
        }
        q += std::exp(lcount - log_tp);
    });
    return std::min(1.0, q);
}

UniversalCode::UniversalCode(CodeEnsemble ensemble, Codebook book) : ens_(std::move(ensemble)), book_(std::move(book)) {
    if (book_.n != ens_.block_length()) throw std::invalid_argument("UniversalCode: blocklength mismatch");
    if (!(book_.composition == ens_.composition())) throw std::invalid_argument("UniversalCode: composition mismatch");
}

UniversalCode UniversalCode::assemble(const CodeEnsemble& ensemble, RngStream& rng, const CodebookOptions& opts) {
    Codebook book = build_codebook(ensemble.composition(), ensemble.rate_r(), ensemble.rate_r1(), rng, opts);
    return UniversalCode(ensemble, std::move(book));
}

std::optional<int> UniversalCode::decode(std::span<const double> y_flat) const {
    for (std::size_t i = 0; i < book_.words.size(); ++i)
        if (ens_.score_seq(book_.words[i], y_flat) >= 0) return int(i);
    return std::nullopt;
}

int ml_decode_baseline(const UniversalCode& code, const ChannelPoint& pt, std::span<const double> y_flat) {
    const auto& fam = *pt.family;
    const int dim = fam.output_space().dim;
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < code.codebook().words.size(); ++i) {
        const auto& w = code.codebook().words[i];
        double v = 0;
        for (std::size_t j = 0; j < w.size(); ++j)
            v += fam.log_density(pt.theta, w[j], y_flat.subspan(j * dim, dim));
        if (v > best_v) {
            best_v = v;
            best = int(i);
        }
    }
    return best;
}

namespace {

// odometer over {0..card-1}^n
bool advance_word(std::vector<int>& y, int card) {
    for (std::size_t i = y.size(); i-- > 0;) {
        if (++y[i] < card) return true;
        y[i] = 0;
    }
    return false;
}

}  // namespace

ErrorEstimate estimate_error_exact(const UniversalCode& code, const ChannelPoint& pt, std::size_t space_cap) {
    const auto& fam = *pt.family;
    if (!fam.output_space().finite()) throw std::invalid_argument("estimate_error_exact: continuous output space");
    const int card = fam.output_space().cardinality;
    const int n = code.block_length();
    const std::size_t m = code.message_count();
    if (std::pow(double(card), n) > double(space_cap))
        throw std::length_error("estimate_error_exact: output space above the enumeration cap");

    std::vector<std::vector<double>> lp(fam.input_count(), std::vector<double>(card));
    for (int x = 0; x < fam.input_count(); ++x) fam.log_pmf(pt.theta, x, lp[x]);

    std::vector<int> y(n, 0);
    std::vector<double> yd(n);
    double err_sum = 0;
    do {
        for (int i = 0; i < n; ++i) yd[i] = double(y[i]);
        const auto dec = code.decode(yd);
        for (std::size_t i = 0; i < m; ++i) {
            if (dec && std::size_t(*dec) == i) continue;
            double lw = 0;
            for (int j = 0; j < n; ++j) lw += lp[code.codebook().words[i][j]][y[j]];
            err_sum += std::exp(lw);
        }
    } while (advance_word(y, card));
    ErrorEstimate out;
    out.estimate = std::clamp(err_sum / double(m), 0.0, 1.0);
    out.ci_lo = out.ci_hi = out.estimate;
    out.mode = ErrorMode::Exact;
    return out;
}

std::vector<double> exact_region_masses(const UniversalCode& code, const ChannelPoint& pt,
                                        std::span<const std::uint8_t> word, std::size_t space_cap) {
    const auto& fam = *pt.family;
    if (!fam.output_space().finite()) throw std::invalid_argument("exact_region_masses: continuous output space");
    const int card = fam.output_space().cardinality;
    const int n = code.block_length();
    if (std::pow(double(card), n) > double(space_cap))
        throw std::length_error("exact_region_masses: output space above the enumeration cap");
    std::vector<std::vector<double>> lp(fam.input_count(), std::vector<double>(card));
    for (int x = 0; x < fam.input_count(); ++x) fam.log_pmf(pt.theta, x, lp[x]);
    std::vector<double> mass(code.message_count() + 1, 0.0);  // last = erasure
    std::vector<int> y(n, 0);
    std::vector<double> yd(n);
    do {
        for (int i = 0; i < n; ++i) yd[i] = double(y[i]);
        const auto dec = code.decode(yd);
        double lw = 0;
        for (int j = 0; j < n; ++j) lw += lp[word[j]][y[j]];
        mass[dec ? std::size_t(*dec) : code.message_count()] += std::exp(lw);
    } while (advance_word(y, card));
    return mass;
}

ErrorEstimate estimate_error_mc(const UniversalCode& code, const ChannelPoint& pt, long long trials,
                                std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("estimate_error_mc: need trials >= 1");
    const auto& fam = *pt.family;
    const int dim = fam.output_space().dim;
    const int n = code.block_length();
    const std::size_t m = code.message_count();
    std::vector<std::uint8_t> err(std::size_t(trials), 0);
    parallel_for_index(trials, [&](std::int64_t t) {
        RngStream tr = derive_stream(seed, std::uint64_t(n), std::uint64_t(t));
        const std::size_t i = std::size_t(tr.uniform_below(m));
        const auto& w = code.codebook().words[i];
        std::vector<double> y(std::size_t(n) * dim);
        for (int j = 0; j < n; ++j)
            fam.sample(pt.theta, w[j], tr, std::span<double>(y).subspan(std::size_t(j) * dim, dim));
        const auto dec = code.decode(y);
        err[std::size_t(t)] = (!dec || std::size_t(*dec) != i) ? 1 : 0;
    });
    long long k = 0;
    for (auto e : err) k += e;
    ErrorEstimate out;
    out.estimate = double(k) / double(trials);
    const Interval w = wilson_interval(k, trials);
    out.ci_lo = w.lo;
    out.ci_hi = w.hi;
    out.trials = trials;
    out.errors = k;
    out.mode = ErrorMode::McFixedCode;
    return out;
}

namespace {

struct RandomCodingContext {
    const CodeEnsemble& ens;
    const ChannelPoint& pt;
    std::vector<std::vector<double>> pmf;  // per input, cumulative
    std::vector<double> q_table;           // indexed by count-vector rank (binary only)
    bool q_precomputed = false;

    explicit RandomCodingContext(const CodeEnsemble& e, const ChannelPoint& p) : ens(e), pt(p) {
        const auto& fam = ens.family();
        const int card = fam.output_space().cardinality;
        pmf.assign(fam.input_count(), std::vector<double>(card));
        std::vector<double> lp(card);
        for (int x = 0; x < fam.input_count(); ++x) {
            fam.log_pmf(pt.theta, x, lp);
            double acc = 0;
            for (int y = 0; y < card; ++y) {
                acc += std::exp(lp[y]);
                pmf[x][y] = acc;
            }
            pmf[x][card - 1] = 1.0;
        }
        if (card == 2) {
            const int n = ens.block_length();
            q_table.resize(std::size_t(n) + 1);
            parallel_for_index(n + 1, [&](std::int64_t c1) {
                const long long counts[2] = {n - c1, c1};
                q_table[std::size_t(c1)] = ens.competitor_claim_prob(std::span<const long long>(counts, 2));
            });
            q_precomputed = true;
        }
    }

    double claim_prob(std::span<const long long> counts) const {
        if (q_precomputed) return q_table[std::size_t(counts[1])];
        return ens.competitor_claim_prob(counts);
    }
};

}  // namespace

ErrorEstimate estimate_error_random_coding(const CodeEnsemble& ens, const ChannelPoint& pt, long long trials,
                                           std::uint64_t seed) {
    const auto& fam = ens.family();
    if (!fam.output_space().finite())
        throw std::invalid_argument("estimate_error_random_coding: finite output spaces only");
    if (trials < 1) throw std::invalid_argument("estimate_error_random_coding: need trials >= 1");
    if (&fam != &*pt.family && fam.output_space().cardinality != pt.family->output_space().cardinality)
        throw std::invalid_argument("estimate_error_random_coding: family mismatch");
    const int card = fam.output_space().cardinality;
    const int d = fam.input_count();
    const int n = ens.block_length();
    const auto& comp = ens.composition();
    const CodeSize ms = ens.size();
    RandomCodingContext ctx(ens, pt);

    std::vector<std::uint8_t> err(std::size_t(trials), 0);
    parallel_for_index(trials, [&](std::int64_t t) {
        RngStream tr = derive_stream(seed, std::uint64_t(n), std::uint64_t(t));
        // transmitted word: uniform over the type class; only per-input output
        // counts matter, so sample the rows directly
        std::vector<long long> rows(std::size_t(d) * card, 0);
        std::vector<long long> cols(card, 0);
        for (int x = 0; x < d; ++x) {
            for (long long j = 0; j < comp.counts[x]; ++j) {
                const double u = tr.uniform();
                int y = 0;
                while (u > ctx.pmf[x][y]) ++y;
                rows[std::size_t(x) * card + y]++;
                cols[y]++;
            }
        }
        const double gate = ens.threshold() + ens.log_output_mixture_counts(cols);
        if (ens.log_codeword_mixture_rows(rows) < gate) {
            err[std::size_t(t)] = 1;  // own region missed: wrong message or erasure
            return;
        }
        const double q = ctx.claim_prob(cols);
        if (q <= 0) return;
        // message index uniform over {1..M}; competitors beyond 2^62 handled on the log scale
        double log_i_minus_1;
        if (ms.representable) {
            const unsigned long long i = tr.uniform_below(ms.m) + 1;
            if (i == 1) return;
            log_i_minus_1 = std::log(double(i - 1));
        } else {
            log_i_minus_1 = ms.log_m + std::log(tr.uniform_pos());
        }
        const double factor = q < 1.0 ? -std::log1p(-q) / q : std::numeric_limits<double>::infinity();
        const double log_t = log_i_minus_1 + std::log(q);
        double p_steal;
        if (!std::isfinite(factor) || log_t > std::log(700.0)) {
            p_steal = 1.0;
        } else {
            p_steal = -std::expm1(-std::exp(log_t) * factor);
        }
        if (tr.uniform() < p_steal) err[std::size_t(t)] = 1;
    });
    long long k = 0;
    for (auto e : err) k += e;
    ErrorEstimate out;
    out.estimate = double(k) / double(trials);
    const Interval w = wilson_interval(k, trials);
    out.ci_lo = w.lo;
    out.ci_hi = w.hi;
    out.trials = trials;
    out.errors = k;
    out.mode = ErrorMode::McRandomCoding;
    return out;
}

double random_coding_error_exact(const CodeEnsemble& ens, const ChannelPoint& pt, std::size_t cap) {
    const auto& fam = ens.family();
    if (!fam.output_space().finite())
        throw std::invalid_argument("random_coding_error_exact: finite output spaces only");
    const int card = fam.output_space().cardinality;
    const int d = fam.input_count();
    const auto& comp = ens.composition();
    // enumeration size: product over inputs of count-vector simplices
    double log_cells = 0;
    for (int x = 0; x < d; ++x) log_cells += log_binom(comp.counts[x] + card - 1, card - 1);
    if (log_cells > std::log(double(cap))) throw std::length_error("random_coding_error_exact: enumeration too large");

    RandomCodingContext ctx(ens, pt);
    std::vector<std::vector<double>> lp(d, std::vector<double>(card));
    for (int x = 0; x < d; ++x) fam.log_pmf(pt.theta, x, lp[x]);
    const CodeSize ms = ens.size();

    // success factor E_i (1-q)^{i-1} = (1 - (1-q)^M) / (M q) for i uniform on {1..M}
    auto success_factor = [&](double q) -> double {
        if (q <= 0) return 1.0;
        const double log_mq = ms.log_m + std::log(q);
        if (log_mq < std::log(1e-8)) return 1.0 - 0.5 * std::exp(log_mq);
        double one_minus;  // 1 - (1-q)^M
        if (q >= 1.0) {
            one_minus = 1.0;
        } else {
            const double log_lt = log_mq + std::log(-std::log1p(-q) / q);  // log(-M log1p(-q))
            one_minus = log_lt > std::log(700.0) ? 1.0 : -std::expm1(-std::exp(log_lt));
        }
        return one_minus <= 0 ? 0.0 : std::exp(std::log(one_minus) - log_mq);
    };

    const LgammaTable lg(comp.n);
    double err = 0;
    // iterate over per-input rows via nested count-vector enumeration
    std::vector<long long> rows(std::size_t(d) * card, 0);
    auto rec = [&](auto&& self, int x, double log_prob) -> void {
        if (x == d) {
            std::vector<long long> cols(card, 0);
            for (int xx = 0; xx < d; ++xx)
                for (int y = 0; y < card; ++y) cols[y] += rows[std::size_t(xx) * card + y];
            const double gate = ens.threshold() + ens.log_output_mixture_counts(cols);
            const double pr = std::exp(log_prob);
            if (ens.log_codeword_mixture_rows(rows) < gate) {
                err += pr;
                return;
            }
            err += pr * (1.0 - success_factor(ctx.claim_prob(cols)));
            return;
        }
        std::vector<long long> c(card, 0);
        auto sub = [&](auto&& self2, int y, long long rem) -> void {
            if (y == card - 1) {
                c[y] = rem;
                double lq = lg.log_fact(comp.counts[x]);
                for (int yy = 0; yy < card; ++yy) {
                    lq -= lg.log_fact(c[yy]);
                    if (c[yy] > 0) lq += double(c[yy]) * lp[x][yy];
                }
                for (int yy = 0; yy < card; ++yy) rows[std::size_t(x) * card + yy] = c[yy];
                self(self, x + 1, log_prob + lq);
                return;
            }
            for (long long v = 0; v <= rem; ++v) {
                c[y] = v;
                self2(self2, y + 1, rem - v);
            }
        };
        sub(sub, 0, comp.counts[x]);
    };
    rec(rec, 0, 0.0);
    return err;
}

}  // namespace ucc
