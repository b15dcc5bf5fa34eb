#include "ucc/mixtures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "ucc/parallel.hpp"
#include "ucc/quadrature.hpp"
#include "ucc/special.hpp"

namespace ucc {

namespace {

int auto_panels(double width, int n) {
    const double target = width * std::sqrt(double(std::max(n, 1))) / 2.0;
    return std::max(4, int(std::ceil(target)));
}

void check_compat(const ChannelFamily& fam, const PriorSpec& prior) {
    switch (prior.kind) {
        case PriorKind::ThetaBoxUniform:
            if (fam.tag() != ConditionTag::A)
                throw std::invalid_argument("mixture: continuous box prior requires a tag-A family");
            break;
        case PriorKind::MeanDirichlet:
            if (fam.tag() != ConditionTag::A || !fam.output_space().finite())
                throw std::invalid_argument("mixture: Dirichlet mean prior requires a finite-output tag-A family");
            break;
        case PriorKind::GridE:
            if (fam.tag() == ConditionTag::C)
                throw std::invalid_argument("mixture: tag-C families need the nested-grid prior");
            break;
        case PriorKind::GridF:
            break;
    }
}

}  // namespace

void MixtureModel::build_nodes(const PriorSpec& prior, const Box& box, int n) {
    const int kd = box.dim();
    if (prior.kind == PriorKind::ThetaBoxUniform) {
        std::vector<QuadRule> rules(kd);
        std::size_t total = 1;
        for (int i = 0; i < kd; ++i) {
            const double w = box.hi[i] - box.lo[i];
            const int panels = prior.nodes_per_dim > 0 ? std::max(1, prior.nodes_per_dim / 8) : auto_panels(w, n);
            rules[i] = composite_legendre(box.lo[i], box.hi[i], panels, 8);
            total *= rules[i].size();
            if (total > 4u * 1000 * 1000) throw std::length_error("mixture: quadrature grid too large");
        }
        const double log_density0 = -std::log(box.volume());
        std::vector<std::size_t> idx(kd, 0);
        std::vector<double> sel(kd);
        for (;;) {
            double lw = log_density0;
            for (int i = 0; i < kd; ++i) {
                sel[i] = rules[i].nodes[idx[i]];
                lw += std::log(rules[i].weights[idx[i]]);
            }
            thetas_.push_back(sel);
            log_w_.push_back(lw);
            int pos = kd - 1;
            while (pos >= 0 && ++idx[pos] == rules[pos].size()) idx[pos--] = 0;
            if (pos < 0) break;
        }
        return;
    }
    // lattice grids with spacing 1/sqrt(n), anchored at the box lower corner
    const double h = 1.0 / std::sqrt(double(std::max(n, 1)));
    auto lattice = [&](const Box& b) {
        std::vector<std::vector<double>> pts;
        std::vector<long long> steps(kd);
        std::vector<long long> idx(kd, 0);
        for (int i = 0; i < kd; ++i) {
            steps[i] = (long long)std::floor((b.hi[i] - b.lo[i]) / h + 1e-12) + 1;
            if (steps[i] < 1) steps[i] = 1;
        }
        std::vector<double> sel(kd);
        for (;;) {
            for (int i = 0; i < kd; ++i) sel[i] = b.lo[i] + idx[i] * h;
            pts.push_back(sel);
            if (pts.size() > 4u * 1000 * 1000) throw std::length_error("mixture: lattice too large");
            int pos = kd - 1;
            while (pos >= 0 && ++idx[pos] == steps[pos]) idx[pos--] = 0;
            if (pos < 0) break;
        }
        return pts;
    };
    if (prior.kind == PriorKind::GridE) {
        auto pts = lattice(box);
        if (pts.empty()) throw std::runtime_error("mixture: empty lattice");
        const double lw = -std::log(double(pts.size()));
        for (auto& p : pts) {
            thetas_.push_back(std::move(p));
            log_w_.push_back(lw);
        }
        return;
    }
    // GridF: shell-weighted union of nested lattices, truncated and renormalized
    std::vector<Box> shells = prior.nested_boxes;
    if (shells.empty()) shells.assign(1, box);
    for (std::size_t i = 1; i < shells.size(); ++i)
        for (int c = 0; c < kd; ++c)
            if (shells[i].lo[c] > shells[i - 1].lo[c] + 1e-12 || shells[i].hi[c] < shells[i - 1].hi[c] - 1e-12)
                throw std::invalid_argument("mixture: nested boxes must be increasing");
    std::map<std::vector<double>, double> weight;  // node -> accumulated weight
    double total_w = 0;
    const double c0 = 6.0 / (3.14159265358979323846 * 3.14159265358979323846);
    for (int i = 0; i < prior.shells; ++i) {
        const Box& b = shells[std::min<std::size_t>(i, shells.size() - 1)];
        auto pts = lattice(b);
        if (pts.empty()) continue;
        const double wi = c0 / double((i + 1.0) * (i + 1.0));
        total_w += wi;
        const double per = wi / double(pts.size());
        for (auto& p : pts) weight[p] += per;
    }
    for (auto& [p, w] : weight) {
        thetas_.push_back(p);
        log_w_.push_back(std::log(w / total_w));
    }
}

void MixtureModel::finalize_node_pmfs() {
    if (!finite_) return;
    node_lp_.resize(thetas_.size());
    std::vector<double> full(fam_->param_dim());
    const Box& fb = fam_->param_box();
    for (int i = 0; i < fam_->param_dim(); ++i) full[i] = 0.5 * (fb.lo[i] + fb.hi[i]);
    for (std::size_t q = 0; q < thetas_.size(); ++q) {
        std::vector<double> theta = output_mode_ ? thetas_[q] : full;
        if (!output_mode_)
            for (std::size_t j = 0; j < sel_.size(); ++j) theta[sel_[j]] = thetas_[q][j];
        node_lp_[q].assign(card_, 0.0);
        if (output_mode_) {
            std::vector<double> lp(card_);
            std::vector<double> acc(card_, 0.0);
            for (int x = 0; x < fam_->input_count(); ++x) {
                fam_->log_pmf(theta, x, lp);
                for (int y = 0; y < card_; ++y) acc[y] += input_dist_[x] * std::exp(lp[y]);
            }
            for (int y = 0; y < card_; ++y) node_lp_[q][y] = std::log(acc[y]);
        } else {
            fam_->log_pmf(theta, x_, node_lp_[q]);
        }
    }
}

MixtureModel MixtureModel::input_mixture(std::shared_ptr<const ChannelFamily> fam, const PriorSpec& prior, int x,
                                         int n) {
    if (x < 0 || x >= fam->input_count()) throw std::invalid_argument("input_mixture: bad input symbol");
    check_compat(*fam, prior);
    MixtureModel m;
    m.fam_ = std::move(fam);
    m.output_mode_ = false;
    m.x_ = x;
    m.n_ = std::max(1, n);
    m.finite_ = m.fam_->output_space().finite();
    m.card_ = m.finite_ ? m.fam_->output_space().cardinality : 0;
    m.dim_ = m.fam_->output_space().dim;
    m.alpha_ = prior.alpha;
    auto sel = m.fam_->component_selector(x);
    m.sel_.assign(sel.begin(), sel.end());
    Box sub;
    for (int c : m.sel_) {
        sub.lo.push_back(m.fam_->param_box().lo[c]);
        sub.hi.push_back(m.fam_->param_box().hi[c]);
    }
    m.chart_box_ = sub;
    if (prior.kind == PriorKind::MeanDirichlet) {
        if (!(prior.alpha > 0)) throw std::invalid_argument("input_mixture: Dirichlet concentration must be positive");
        m.closed_form_ = true;
        return m;
    }
    PriorSpec ps = prior;
    if (prior.kind == PriorKind::GridF && prior.nested_boxes.empty()) ps.nested_boxes.assign(1, sub);
    if (prior.kind == PriorKind::GridF && !prior.nested_boxes.empty()) {
        // nested boxes are given in the full-parameter chart; restrict them
        ps.nested_boxes.clear();
        for (const auto& nb : prior.nested_boxes) {
            Box r;
            for (int c : m.sel_) {
                r.lo.push_back(nb.lo[c]);
                r.hi.push_back(nb.hi[c]);
            }
            ps.nested_boxes.push_back(std::move(r));
        }
    }
    m.build_nodes(ps, sub, m.n_);
    // drop nodes whose full parameter vector is inadmissible (the unselected
    // coordinates sit at the box midpoint)
    {
        std::vector<double> full(m.fam_->param_dim());
        const Box& fb = m.fam_->param_box();
        for (int i = 0; i < m.fam_->param_dim(); ++i) full[i] = 0.5 * (fb.lo[i] + fb.hi[i]);
        std::vector<std::vector<double>> keep_t;
        std::vector<double> keep_w;
        for (std::size_t q = 0; q < m.thetas_.size(); ++q) {
            for (std::size_t j = 0; j < m.sel_.size(); ++j) full[m.sel_[j]] = m.thetas_[q][j];
            if (m.fam_->theta_valid(full)) {
                keep_t.push_back(m.thetas_[q]);
                keep_w.push_back(m.log_w_[q]);
            }
        }
        if (keep_t.empty()) throw std::runtime_error("input_mixture: no admissible prior nodes");
        if (keep_t.size() != m.thetas_.size()) {
            double tot = kNegInf;
            for (double w : keep_w) tot = log_add_exp(tot, w);
            for (double& w : keep_w) w -= tot;
            m.thetas_ = std::move(keep_t);
            m.log_w_ = std::move(keep_w);
        }
    }
    m.finalize_node_pmfs();
    return m;
}

MixtureModel MixtureModel::output_mixture(std::shared_ptr<const ChannelFamily> fam, const PriorSpec& prior,
                                          std::vector<double> input_dist, int n) {
    if (int(input_dist.size()) != fam->input_count())
        throw std::invalid_argument("output_mixture: input distribution size mismatch");
    check_compat(*fam, prior);
    MixtureModel m;
    m.fam_ = std::move(fam);
    m.output_mode_ = true;
    m.input_dist_ = std::move(input_dist);
    m.n_ = std::max(1, n);
    m.finite_ = m.fam_->output_space().finite();
    m.card_ = m.finite_ ? m.fam_->output_space().cardinality : 0;
    m.dim_ = m.fam_->output_space().dim;
    m.alpha_ = prior.alpha;
    m.chart_box_ = m.fam_->param_box();
    if (prior.kind == PriorKind::MeanDirichlet) {
        if (!(prior.alpha > 0))
            throw std::invalid_argument("output_mixture: Dirichlet concentration must be positive");
        m.closed_form_ = true;
        return m;
    }
    m.build_nodes(prior, m.chart_box_, m.n_);
    // drop nodes outside the admissible set (e.g. non-PD precision blocks)
    if (!m.thetas_.empty()) {
        std::vector<std::vector<double>> keep_t;
        std::vector<double> keep_w;
        for (std::size_t q = 0; q < m.thetas_.size(); ++q)
            if (m.fam_->theta_valid(m.thetas_[q])) {
                keep_t.push_back(m.thetas_[q]);
                keep_w.push_back(m.log_w_[q]);
            }
        if (keep_t.empty()) throw std::runtime_error("output_mixture: no admissible prior nodes");
        if (keep_t.size() != m.thetas_.size()) {
            double tot = kNegInf;
            for (double w : keep_w) tot = log_add_exp(tot, w);
            for (double& w : keep_w) w -= tot;
        }
        m.thetas_ = std::move(keep_t);
        m.log_w_ = std::move(keep_w);
    }
    m.finalize_node_pmfs();
    return m;
}

double MixtureModel::log_density_counts(std::span<const long long> counts) const {
    if (!finite_) throw std::logic_error("log_density_counts: continuous output space");
    if (int(counts.size()) != card_) throw std::invalid_argument("log_density_counts: count vector size mismatch");
    long long n = 0;
    for (long long c : counts) n += c;
    if (closed_form_) {
        // Dirichlet(alpha) predictive over ordered sequences
        const double s_alpha = card_ * alpha_;
        double v = std::lgamma(s_alpha) - std::lgamma(double(n) + s_alpha);
        for (int y = 0; y < card_; ++y) v += std::lgamma(double(counts[y]) + alpha_) - std::lgamma(alpha_);
        return v;
    }
    LogSumAcc acc;
    for (std::size_t q = 0; q < thetas_.size(); ++q) {
        double t = log_w_[q];
        for (int y = 0; y < card_; ++y)
            if (counts[y] > 0) t += double(counts[y]) * node_lp_[q][y];
        acc.add(t);
    }
    return acc.value();
}

std::vector<double> MixtureModel::binary_table(int len) const {
    if (card_ != 2) throw std::logic_error("binary_table: output cardinality is not 2");
    std::vector<double> out(std::size_t(len) + 1);
    if (closed_form_) {
        for (int t = 0; t <= len; ++t) {
            const long long c[2] = {len - t, t};
            out[t] = log_density_counts(std::span<const long long>(c, 2));
        }
        return out;
    }
    for (int t = 0; t <= len; ++t) {
        LogSumAcc acc;
        for (std::size_t q = 0; q < thetas_.size(); ++q)
            acc.add(log_w_[q] + double(len - t) * node_lp_[q][0] + double(t) * node_lp_[q][1]);
        out[t] = acc.value();
    }
    return out;
}

double MixtureModel::node_log_density(std::size_t q, std::span<const double> y) const {
    if (finite_) return node_lp_[q][int(y[0])];
    std::vector<double> theta;
    if (output_mode_) {
        theta = thetas_[q];
        LogSumAcc acc;
        for (int x = 0; x < fam_->input_count(); ++x)
            if (input_dist_[x] > 0) acc.add(std::log(input_dist_[x]) + fam_->log_density(theta, x, y));
        return acc.value();
    }
    theta.assign(fam_->param_dim(), 0.0);
    const Box& fb = fam_->param_box();
    for (int i = 0; i < fam_->param_dim(); ++i) theta[i] = 0.5 * (fb.lo[i] + fb.hi[i]);
    for (std::size_t j = 0; j < sel_.size(); ++j) theta[sel_[j]] = thetas_[q][j];
    return fam_->log_density(theta, x_, y);
}

double MixtureModel::log_density_seq(std::span<const double> y_flat, int count) const {
    if (finite_) {
        std::vector<long long> counts(card_, 0);
        for (int i = 0; i < count; ++i) {
            const int y = int(y_flat[std::size_t(i)]);
            if (y < 0 || y >= card_) throw std::invalid_argument("log_density_seq: symbol out of range");
            counts[y]++;
        }
        return log_density_counts(counts);
    }
    LogSumAcc acc;
    for (std::size_t q = 0; q < thetas_.size(); ++q) {
        double t = log_w_[q];
        for (int i = 0; i < count; ++i)
            t += node_log_density(q, y_flat.subspan(std::size_t(i) * dim_, dim_));
        acc.add(t);
    }
    return acc.value();
}

double MixtureModel::prior_log_density(std::span<const double> theta_sel) const {
    if (closed_form_) {
        // Dirichlet density at p(theta) times the logistic-chart Jacobian
        std::vector<double> theta(fam_->param_dim(), 0.0);
        const Box& fb = fam_->param_box();
        for (int i = 0; i < fam_->param_dim(); ++i) theta[i] = 0.5 * (fb.lo[i] + fb.hi[i]);
        for (std::size_t j = 0; j < sel_.size(); ++j) theta[sel_[j]] = theta_sel[j];
        std::vector<double> lp(card_);
        fam_->log_pmf(theta, x_, lp);
        double v = std::lgamma(card_ * alpha_) - card_ * std::lgamma(alpha_);
        for (int y = 0; y < card_; ++y) v += (alpha_ - 1.0) * lp[y];
        for (int y = 0; y < card_; ++y) v += lp[y];  // Jacobian det = prod_y p_y
        return v;
    }
    return -std::log(chart_box_.volume());
}

CodewordMixture::CodewordMixture(std::shared_ptr<const ChannelFamily> fam,
                                 const std::vector<PriorSpec>& per_input_priors, int n)
    : fam_(std::move(fam)) {
    if (int(per_input_priors.size()) != fam_->input_count())
        throw std::invalid_argument("CodewordMixture: one prior per input required");
    card_ = fam_->output_space().finite() ? fam_->output_space().cardinality : 0;
    dim_ = fam_->output_space().dim;
    for (int x = 0; x < fam_->input_count(); ++x)
        blocks_.push_back(MixtureModel::input_mixture(fam_, per_input_priors[x], x, n));
}

double CodewordMixture::log_density(std::span<const std::uint8_t> word, std::span<const double> y_flat) const {
    if (y_flat.size() != word.size() * std::size_t(dim_))
        throw std::invalid_argument("CodewordMixture: sequence length mismatch");
    const int d = input_count();
    if (card_ > 0) {
        std::vector<long long> rows(std::size_t(d) * card_, 0);
        for (std::size_t i = 0; i < word.size(); ++i) rows[std::size_t(word[i]) * card_ + int(y_flat[i])]++;
        return log_density_rows(rows);
    }
    // continuous: gather per-input subsequences
    double total = 0;
    for (int x = 0; x < d; ++x) {
        std::vector<double> sub;
        int cnt = 0;
        for (std::size_t i = 0; i < word.size(); ++i)
            if (word[i] == x) {
                for (int c = 0; c < dim_; ++c) sub.push_back(y_flat[i * dim_ + c]);
                ++cnt;
            }
        if (cnt > 0) total += blocks_[x].log_density_seq(sub, cnt);
    }
    return total;
}

double CodewordMixture::log_density_rows(std::span<const long long> rows) const {
    const int d = input_count();
    if (int(rows.size()) != d * card_) throw std::invalid_argument("log_density_rows: row matrix size mismatch");
    double total = 0;
    for (int x = 0; x < d; ++x) total += blocks_[x].log_density_counts(rows.subspan(std::size_t(x) * card_, card_));
    return total;
}

// --- estimators --------------------------------------------------------------

namespace {

// Enumerate count vectors of length `bins` summing to n; calls f(counts).
template <typename F>
void for_each_count_vector(int n, int bins, F&& f) {
    std::vector<long long> c(bins, 0);
    auto rec = [&](auto&& self, int pos, long long rem) -> void {
        if (pos == bins - 1) {
            c[pos] = rem;
            f(std::span<const long long>(c.data(), bins));
            return;
        }
        for (long long v = 0; v <= rem; ++v) {
            c[pos] = v;
            self(self, pos + 1, rem - v);
        }
    };
    rec(rec, 0, n);
}

double log_multinomial(std::span<const long long> c) {
    long long n = 0;
    double v = 0;
    for (long long x : c) {
        n += x;
        v -= std::lgamma(double(x) + 1);
    }
    return v + std::lgamma(double(n) + 1);
}

std::size_t count_vector_count(int n, int bins) {
    double lc = log_binom(n + bins - 1, bins - 1);
    return lc > 40 ? ~std::size_t(0) : std::size_t(std::llround(std::exp(lc)));
}

}  // namespace

RenyiEstimate estimate_renyi_to_mixture(const ChannelPoint& pt, int x, const MixtureModel& model, int n, double s,
                                        long long trials, RngStream rng, std::size_t exact_cap) {
    if (!(s > 0)) throw std::invalid_argument("estimate_renyi_to_mixture: need s > 0");
    const auto& fam = *pt.family;
    RenyiEstimate out;
    if (fam.output_space().finite() && count_vector_count(n, fam.output_space().cardinality) <= exact_cap) {
        const int card = fam.output_space().cardinality;
        std::vector<double> lp(card);
        fam.log_pmf(pt.theta, x, lp);
        LogSumAcc acc;
        for_each_count_vector(n, card, [&](std::span<const long long> c) {
            double lseq = 0;
            for (int y = 0; y < card; ++y)
                if (c[y] > 0) lseq += double(c[y]) * lp[y];
            acc.add(log_multinomial(c) + (1 + s) * lseq - s * model.log_density_counts(c));
        });
        out.value = acc.value() / s;
        out.ci_lo = out.ci_hi = out.value;
        out.exact = true;
        return out;
    }
    if (trials < 1000) throw std::invalid_argument("estimate_renyi_to_mixture: need >= 1000 trials");
    const int dim = fam.output_space().dim;
    std::vector<double> vals(std::size_t(trials), 0.0);
    const std::uint64_t master = rng.next_u64();
    parallel_for_index(trials, [&](std::int64_t t) {
        RngStream tr = derive_stream(master, std::uint64_t(t));
        std::vector<double> y(std::size_t(n) * dim);
        double ltrue = 0;
        for (int i = 0; i < n; ++i) {
            auto yi = std::span<double>(y).subspan(std::size_t(i) * dim, dim);
            fam.sample(pt.theta, x, tr, yi);
            ltrue += fam.log_density(pt.theta, x, yi);
        }
        vals[std::size_t(t)] = s * (ltrue - model.log_density_seq(y, n));
    });
    // fixed-order reduction on the exponential scale
    double m = kNegInf;
    for (double v : vals) m = std::max(m, v);
    std::vector<double> w(vals.size());
    double sum = 0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        w[i] = std::exp(vals[i] - m);
        sum += w[i];
    }
    const double mean = sum / double(trials);
    double var = 0;
    for (double wi : w) var += (wi - mean) * (wi - mean);
    var /= double(trials - 1);
    const double half = 1.959963984540054 * std::sqrt(var / double(trials));
    out.value = (m + std::log(mean)) / s;
    out.ci_lo = mean - half > 0 ? (m + std::log(mean - half)) / s : -std::numeric_limits<double>::infinity();
    out.ci_hi = (m + std::log(mean + half)) / s;
    out.trials = trials;
    std::sort(w.begin(), w.end());
    double top = 0;
    const std::size_t k = std::max<std::size_t>(1, w.size() / 100);
    for (std::size_t i = w.size() - k; i < w.size(); ++i) top += w[i];
    out.heavy_tail = top > 0.5 * sum;
    return out;
}

SlopeFit clarke_barron_slope(const ChannelPoint& pt, int x, const PriorSpec& prior, std::span<const int> n_list,
                             double s, long long trials_if_mc, RngStream rng) {
    if (n_list.size() < 2) throw std::invalid_argument("clarke_barron_slope: need at least two blocklengths");
    SlopeFit fit;
    for (int n : n_list) {
        auto model = MixtureModel::input_mixture(pt.family, prior, x, n);
        auto est = estimate_renyi_to_mixture(pt, x, model, n, s, std::max<long long>(1000, trials_if_mc),
                                             derive_stream(rng.next_u64(), std::uint64_t(n)));
        fit.n_values.push_back(n);
        fit.divergences.push_back(est.value);
        fit.ci_lo.push_back(est.ci_lo);
        fit.ci_hi.push_back(est.ci_hi);
    }
    // least squares D = a + b log n
    const std::size_t m = fit.n_values.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double xi = std::log(double(fit.n_values[i]));
        sx += xi;
        sy += fit.divergences[i];
        sxx += xi * xi;
        sxy += xi * fit.divergences[i];
    }
    const double det = m * sxx - sx * sx;
    fit.slope = (m * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / m;
    // asymptotic constant for a continuous prior: (k/2)log(1/2pi) + (1/2)log det J
    //   + log(1/w(theta)) - (k/(2s)) log(1+s)
    try {
        const int kx = pt.family->component_dim(x);
        auto j = pt.family->fisher_information(pt.theta, x);
        double logdet = 0;
        SymMatrix jj = j;
        if (cholesky(jj)) logdet = chol_log_det(jj);
        auto model1 = MixtureModel::input_mixture(pt.family, prior, x, 1);
        const auto sel = pt.family->select(pt.theta, x);
        fit.predicted_intercept = -0.5 * kx * std::log(2 * 3.14159265358979323846) + 0.5 * logdet -
                                  model1.prior_log_density(sel) - 0.5 * kx / s * std::log1p(s);
    } catch (const std::exception&) {
        fit.predicted_intercept = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

ChiSquareCheck chi_square_score_check(const ChannelPoint& pt, int x, int n, long long trials, RngStream rng) {
    if (n < 100) throw std::invalid_argument("chi_square_score_check: need n >= 100");
    const auto& fam = *pt.family;
    const int kx = fam.component_dim(x);
    const auto sel = fam.select(pt.theta, x);
    // grad of the potential by central differences (the score is g - grad phi)
    std::vector<double> grad(kx);
    for (int j = 0; j < kx; ++j) {
        const double h = 1e-5 * (1 + std::fabs(sel[j]));
        auto tp = sel, tm = sel;
        tp[j] += h;
        tm[j] -= h;
        grad[j] = (fam.potential(x, tp) - fam.potential(x, tm)) / (2 * h);
    }
    SymMatrix jchol = fam.fisher_information(pt.theta, x);
    if (!cholesky(jchol)) throw std::runtime_error("chi_square_score_check: singular information matrix");
    const int dim = fam.output_space().dim;
    std::vector<double> stats(std::size_t(trials), 0.0);
    const std::uint64_t master = rng.next_u64();
    parallel_for_index(trials, [&](std::int64_t t) {
        RngStream tr = derive_stream(master, std::uint64_t(t));
        std::vector<double> score(kx, 0.0), g(kx), y(dim);
        for (int i = 0; i < n; ++i) {
            fam.sample(pt.theta, x, tr, y);
            fam.generators(x, y, g);
            for (int j = 0; j < kx; ++j) score[j] += g[j] - grad[j];
        }
        for (int j = 0; j < kx; ++j) score[j] /= std::sqrt(double(n));
        const auto solved = chol_solve(jchol, score);
        double q = 0;
        for (int j = 0; j < kx; ++j) q += score[j] * solved[j];
        stats[std::size_t(t)] = q;
    });
    std::sort(stats.begin(), stats.end());
    ChiSquareCheck out;
    out.dof = kx;
    double mean = 0;
    for (double v : stats) mean += v;
    out.stat_mean = mean / double(trials);
    double ks = 0;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const double f = chi2_cdf(kx, stats[i]);
        ks = std::max(ks, std::fabs(f - double(i) / double(trials)));
        ks = std::max(ks, std::fabs(double(i + 1) / double(trials) - f));
    }
    out.ks_distance = ks;
    return out;
}

}  // namespace ucc
