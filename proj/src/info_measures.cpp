#include "ucc/info_measures.hpp"

#include <algorithm>
#include <cmath>

#include "ucc/special.hpp"

namespace ucc {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Recursive tensor Gauss-Hermite over the frame; integrates exp(log_f) dy.
struct FrameIntegrator {
    const std::function<double(std::span<const double>)>& log_f;
    const GaussFrame& frame;
    const QuadRule& rule;
    std::vector<double> u, y;
    LogSumAcc acc;
    double log_w_base;

    FrameIntegrator(const std::function<double(std::span<const double>)>& f, const GaussFrame& fr, int nodes)
        : log_f(f), frame(fr), rule(gauss_hermite(nodes)), u(fr.dim), y(fr.dim) {
        log_w_base = frame.log_det + fr.dim * 0.5 * std::log(2.0);
    }

    void run(int pos, double log_w) {
        if (pos == frame.dim) {
            for (int a = 0; a < frame.dim; ++a) {
                double s = frame.center[a];
                for (int b = 0; b <= a; ++b) s += frame.chol[std::size_t(a) * frame.dim + b] * 1.4142135623730950488 * u[b];
                y[a] = s;
            }
            acc.add(log_w + log_f(y));
            return;
        }
        for (std::size_t i = 0; i < rule.size(); ++i) {
            u[pos] = rule.nodes[i];
            run(pos + 1, log_w + std::log(rule.weights[i]) + rule.nodes[i] * rule.nodes[i]);
        }
    }

    double value() {
        run(0, log_w_base);
        return acc.value();
    }
};

double log_integral_frame_impl(const std::function<double(std::span<const double>)>& log_f, const GaussFrame& frame,
                               int nodes) {
    FrameIntegrator it(log_f, frame, nodes);
    return it.value();
}

double checked_log_integral(const std::function<double(std::span<const double>)>& log_f, const GaussFrame& frame,
                            const QuadSpec& spec) {
    const double v = log_integral_frame_impl(log_f, frame, spec.nodes_per_dim);
    if (spec.check) {
        const double coarse = log_integral_frame_impl(log_f, frame, std::max(8, spec.nodes_per_dim / 2));
        if (!(std::fabs(v - coarse) <= spec.check_tol * (1 + std::fabs(v)) + 1e-9))
            throw QuadratureError("quadrature did not converge");
    }
    return v;
}

GaussFrame inflate_frame(GaussFrame f, double factor) {
    for (auto& c : f.chol) c *= factor;
    f.log_det += f.dim * std::log(factor);
    return f;
}

std::vector<double> pmf_from_log(std::span<const double> lp) {
    std::vector<double> p(lp.size());
    for (std::size_t i = 0; i < lp.size(); ++i) p[i] = std::exp(lp[i]);
    return p;
}

}  // namespace

double log_integral_frame(const std::function<double(std::span<const double>)>& log_f, const GaussFrame& frame,
                          int nodes_per_dim) {
    return log_integral_frame_impl(log_f, frame, nodes_per_dim);
}

GaussFrame mixture_frame(std::span<const double> p, const ChannelPoint& pt, double inflate) {
    const auto& fam = *pt.family;
    const int dim = fam.output_space().dim;
    GaussFrame out;
    out.dim = dim;
    out.center.assign(dim, 0.0);
    SymMatrix cov = SymMatrix::zero(dim);
    std::vector<GaussFrame> frames;
    for (int x = 0; x < fam.input_count(); ++x) frames.push_back(fam.quad_frame(pt.theta, x));
    for (int x = 0; x < fam.input_count(); ++x)
        for (int a = 0; a < dim; ++a) out.center[a] += p[x] * frames[x].center[a];
    for (int x = 0; x < fam.input_count(); ++x) {
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b <= a; ++b) {
                // component covariance = L L^T, plus mean spread
                double s = 0;
                for (int c = 0; c <= std::min(a, b); ++c)
                    s += frames[x].chol[std::size_t(a) * dim + c] * frames[x].chol[std::size_t(b) * dim + c];
                s += (frames[x].center[a] - out.center[a]) * (frames[x].center[b] - out.center[b]);
                cov.at(a, b) += p[x] * s;
            }
    }
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < a; ++b) cov.at(b, a) = cov.at(a, b);
    if (!cholesky(cov)) throw std::runtime_error("mixture_frame: degenerate output covariance");
    out.chol.assign(std::size_t(dim) * dim, 0.0);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b <= a; ++b) out.chol[std::size_t(a) * dim + b] = cov.at(a, b);
    out.log_det = 0.5 * chol_log_det(cov);
    return inflate_frame(out, inflate);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: support mismatch");
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) continue;
        if (q[i] <= 0) return std::numeric_limits<double>::infinity();
        s += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(0.0, s);
}

double renyi_divergence(std::span<const double> p, std::span<const double> q, double s) {
    if (p.size() != q.size()) throw std::invalid_argument("renyi_divergence: support mismatch");
    if (s == 0.0 || s <= -1.0) throw std::invalid_argument("renyi_divergence: need s > -1, s != 0");
    LogSumAcc acc;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) continue;
        if (q[i] <= 0 && s > 0) return std::numeric_limits<double>::infinity();
        acc.add((1 + s) * std::log(p[i]) - s * std::log(q[i]));
    }
    const double v = acc.value() / s;
    if (!std::isfinite(v)) throw std::runtime_error("renyi_divergence: expectation does not exist");
    return v;
}

double kl_divergence_cont(const LogDensity& logp, const LogDensity& logq, const GaussFrame& p_frame,
                          const QuadSpec& spec) {
    // E_p[log p - log q] as difference of signed integrals; integrate the
    // positive and negative parts of the integrand separately in log space.
    LogSumAcc pos, neg;
    auto log_f_pos = [&](std::span<const double> y) {
        const double lp = logp(y), lq = logq(y);
        const double t = lp - lq;
        return t > 0 ? lp + std::log(t) : kNegInf;
    };
    auto log_f_neg = [&](std::span<const double> y) {
        const double lp = logp(y), lq = logq(y);
        const double t = lp - lq;
        return t < 0 ? lp + std::log(-t) : kNegInf;
    };
    const double vp = log_integral_frame_impl(log_f_pos, p_frame, spec.nodes_per_dim);
    const double vn = log_integral_frame_impl(log_f_neg, p_frame, spec.nodes_per_dim);
    const double v = std::exp(vp) - std::exp(vn);
    if (spec.check) {
        const int c = std::max(8, spec.nodes_per_dim / 2);
        const double wp = log_integral_frame_impl(log_f_pos, p_frame, c);
        const double wn = log_integral_frame_impl(log_f_neg, p_frame, c);
        if (std::fabs((std::exp(wp) - std::exp(wn)) - v) > spec.check_tol * (1 + std::fabs(v)) + 1e-9)
            throw QuadratureError("kl_divergence_cont: quadrature did not converge");
    }
    return std::max(0.0, v);
}

double renyi_divergence_cont(const LogDensity& logp, const LogDensity& logq, double s, const GaussFrame& p_frame,
                             const QuadSpec& spec) {
    if (s == 0.0 || s <= -1.0) throw std::invalid_argument("renyi_divergence_cont: need s > -1, s != 0");
    auto log_f = [&](std::span<const double> y) { return (1 + s) * logp(y) - s * logq(y); };
    const double v = checked_log_integral(log_f, p_frame, spec) / s;
    if (!std::isfinite(v)) throw std::runtime_error("renyi_divergence_cont: expectation does not exist");
    return v;
}

double gallager_s_info(std::span<const double> p, const ChannelPoint& pt, double s, const QuadSpec& spec) {
    if (s < 0 || s > 1) throw std::invalid_argument("gallager_s_info: s must lie in [0,1]");
    if (s == 0.0 || s == 1.0) return 0.0;
    const auto& fam = *pt.family;
    const double u = 1 - s;
    if (fam.output_space().finite()) {
        const int card = fam.output_space().cardinality;
        std::vector<std::vector<double>> lp(fam.input_count(), std::vector<double>(card));
        for (int x = 0; x < fam.input_count(); ++x) fam.log_pmf(pt.theta, x, lp[x]);
        double total = 0;
        for (int y = 0; y < card; ++y) {
            LogSumAcc acc;
            for (int x = 0; x < fam.input_count(); ++x)
                if (p[x] > 0) acc.add(std::log(p[x]) + u * lp[x][y]);
            total += std::exp(acc.value() / u);
        }
        return -u * std::log(total);
    }
    auto log_f = [&](std::span<const double> y) {
        LogSumAcc acc;
        for (int x = 0; x < fam.input_count(); ++x)
            if (p[x] > 0) acc.add(std::log(p[x]) + u * fam.log_density(pt.theta, x, y));
        return acc.value() / u;
    };
    const GaussFrame frame = mixture_frame(p, pt, spec.inflate);
    return -u * checked_log_integral(log_f, frame, spec);
}

double mutual_information(std::span<const double> p, const ChannelPoint& pt, const QuadSpec& spec) {
    const auto& fam = *pt.family;
    if (fam.output_space().finite()) {
        const int card = fam.output_space().cardinality;
        std::vector<std::vector<double>> lp(fam.input_count(), std::vector<double>(card));
        std::vector<double> mix(card, 0.0);
        for (int x = 0; x < fam.input_count(); ++x) {
            fam.log_pmf(pt.theta, x, lp[x]);
            for (int y = 0; y < card; ++y) mix[y] += p[x] * std::exp(lp[x][y]);
        }
        double total = 0;
        for (int x = 0; x < fam.input_count(); ++x) {
            if (p[x] <= 0) continue;
            total += p[x] * kl_divergence(pmf_from_log(lp[x]), mix);
        }
        return std::max(0.0, total);
    }
    auto log_mix = [&](std::span<const double> y) {
        LogSumAcc acc;
        for (int x = 0; x < fam.input_count(); ++x)
            if (p[x] > 0) acc.add(std::log(p[x]) + fam.log_density(pt.theta, x, y));
        return acc.value();
    };
    double total = 0;
    for (int x = 0; x < fam.input_count(); ++x) {
        if (p[x] <= 0) continue;
        auto logp_x = [&](std::span<const double> y) { return fam.log_density(pt.theta, x, y); };
        total += p[x] * kl_divergence_cont(logp_x, log_mix, fam.quad_frame(pt.theta, x), spec);
    }
    return std::max(0.0, total);
}

double dispersion(std::span<const double> p, const ChannelPoint& pt, const QuadSpec& spec) {
    const auto& fam = *pt.family;
    const double mi = mutual_information(p, pt, spec);
    if (fam.output_space().finite()) {
        const int card = fam.output_space().cardinality;
        std::vector<std::vector<double>> lp(fam.input_count(), std::vector<double>(card));
        std::vector<double> mix(card, 0.0);
        for (int x = 0; x < fam.input_count(); ++x) {
            fam.log_pmf(pt.theta, x, lp[x]);
            for (int y = 0; y < card; ++y) mix[y] += p[x] * std::exp(lp[x][y]);
        }
        double total = 0;
        for (int x = 0; x < fam.input_count(); ++x) {
            if (p[x] <= 0) continue;
            for (int y = 0; y < card; ++y) {
                const double w = std::exp(lp[x][y]);
                if (w <= 0) continue;
                const double t = lp[x][y] - std::log(mix[y]) - mi;
                total += p[x] * w * t * t;
            }
        }
        return total;
    }
    auto log_mix = [&](std::span<const double> y) {
        LogSumAcc acc;
        for (int x = 0; x < fam.input_count(); ++x)
            if (p[x] > 0) acc.add(std::log(p[x]) + fam.log_density(pt.theta, x, y));
        return acc.value();
    };
    double total = 0;
    for (int x = 0; x < fam.input_count(); ++x) {
        if (p[x] <= 0) continue;
        auto log_f = [&](std::span<const double> y) {
            const double lw = fam.log_density(pt.theta, x, y);
            const double t = lw - log_mix(y) - mi;
            return lw + 2 * std::log(std::fabs(t) + 1e-300);
        };
        total += p[x] * std::exp(checked_log_integral(log_f, fam.quad_frame(pt.theta, x), spec));
    }
    return total;
}

ExponentReport exponent_lower_bound(std::span<const double> p, const ChannelPoint& pt, double r, double r1,
                                    const QuadSpec& spec) {
    if (!(r1 > r)) throw std::invalid_argument("exponent_lower_bound: need R1 > R");
    ExponentReport rep;
    rep.r = r;
    rep.r1 = r1;
    if (std::isinf(r1)) {
        // +inf threshold: inner term maximized at s = 0
        rep.s_star = 0;
        rep.inner_max = 0;
        rep.bound = 0;
        return rep;
    }
    auto g = [&](double s) { return gallager_s_info(p, pt, s, spec) - s * r1; };
    rep.s_star = golden_max(g, 0.0, 1.0, 1e-8);
    rep.inner_max = std::max(0.0, g(rep.s_star));
    rep.bound = std::max(0.0, std::min(rep.inner_max, r1 - r));
    return rep;
}

OptimalR1 optimal_r1(std::span<const double> p, const ChannelPoint& pt, double r, const QuadSpec& spec) {
    auto h = [&](double s) { return (gallager_s_info(p, pt, s, spec) - s * r) / (1 + s); };
    OptimalR1 out;
    out.s_star = golden_max(h, 0.0, 1.0, 1e-8);
    out.bound = std::max(0.0, h(out.s_star));
    if (out.bound == 0.0) out.s_star = 0.0;
    out.r1 = r + out.bound;
    return out;
}

OptimalR1 optimal_r1_grid(std::span<const double> p, const std::shared_ptr<const ChannelFamily>& fam,
                          const std::vector<std::vector<double>>& theta_grid, double r, const QuadSpec& spec) {
    if (theta_grid.empty()) throw std::invalid_argument("optimal_r1_grid: empty parameter grid");
    OptimalR1 worst;
    worst.bound = std::numeric_limits<double>::infinity();
    for (const auto& th : theta_grid) {
        const auto one = optimal_r1(p, ChannelPoint(fam, th), r, spec);
        if (one.bound < worst.bound) worst = one;
    }
    worst.r1 = r + worst.bound;
    return worst;
}

CompoundDesign compound_design(const std::shared_ptr<const ChannelFamily>& fam,
                               const std::vector<std::vector<double>>& theta_grid, double r, CompoundMethod method,
                               const std::vector<std::vector<double>>& input_candidates, const QuadSpec& spec) {
    if (theta_grid.empty() || input_candidates.empty())
        throw std::invalid_argument("compound_design: empty grid or candidate set");
    CompoundDesign best;
    best.method = method;
    best.bound = -std::numeric_limits<double>::infinity();
    double best_key = -std::numeric_limits<double>::infinity();
    for (const auto& cand : input_candidates) {
        if (method == CompoundMethod::M1) {
            double worst_i = std::numeric_limits<double>::infinity();
            for (const auto& th : theta_grid)
                worst_i = std::min(worst_i, mutual_information(cand, ChannelPoint(fam, th), spec));
            if (worst_i > best_key) {
                best_key = worst_i;
                best.input_dist = cand;
                best.worst_mutual_info = worst_i;
            }
        } else {
            const auto o = optimal_r1_grid(cand, fam, theta_grid, r, spec);
            if (o.bound > best_key) {
                best_key = o.bound;
                best.input_dist = cand;
                best.r1 = o.r1;
                best.bound = o.bound;
            }
        }
    }
    if (method == CompoundMethod::M1) {
        if (!(best.worst_mutual_info > r))
            throw std::runtime_error("compound_design: rate is not below the worst-case mutual information");
        best.r1 = 0.5 * (r + best.worst_mutual_info);  // midpoint of the admissible interval
        double worst_bound = std::numeric_limits<double>::infinity();
        for (const auto& th : theta_grid) {
            const auto rep = exponent_lower_bound(best.input_dist, ChannelPoint(fam, th), r, best.r1, spec);
            worst_bound = std::min(worst_bound, rep.bound);
        }
        best.bound = worst_bound;
    } else if (!(best.bound > 0)) {
        throw std::runtime_error("compound_design: no candidate achieves a positive bound");
    }
    return best;
}

SecondOrderReport second_order_bound(std::span<const double> p, const ChannelPoint& pt, double r2_star,
                                     const QuadSpec& spec) {
    SecondOrderReport rep;
    rep.mutual_info = mutual_information(p, pt, spec);
    rep.dispersion = dispersion(p, pt, spec);
    rep.r2_star = r2_star;
    if (!(rep.dispersion > 0)) throw std::runtime_error("second_order_bound: dispersion must be positive");
    rep.epsilon = std_normal_cdf(r2_star / std::sqrt(rep.dispersion));
    return rep;
}

double r2_for_epsilon(std::span<const double> p, const ChannelPoint& pt, double epsilon, const QuadSpec& spec) {
    const double v = dispersion(p, pt, spec);
    if (!(v > 0)) throw std::runtime_error("r2_for_epsilon: dispersion must be positive");
    return std::sqrt(v) * std_normal_quantile(epsilon);
}

double local_shift(std::span<const double> p, const std::shared_ptr<const ChannelFamily>& fam,
                   std::span<const double> theta1, std::span<const double> theta2, const QuadSpec& spec) {
    if (theta1.size() != theta2.size() || int(theta1.size()) != fam->param_dim())
        throw std::invalid_argument("local_shift: dimension mismatch");
    double total = 0;
    for (std::size_t i = 0; i < theta1.size(); ++i) {
        if (theta2[i] == 0) continue;
        const double h = 1e-4 * (1 + std::fabs(theta1[i]));
        std::vector<double> tp(theta1.begin(), theta1.end()), tm(theta1.begin(), theta1.end());
        tp[i] += h;
        tm[i] -= h;
        if (!fam->theta_valid(tp) || !fam->theta_valid(tm))
            throw std::domain_error("local_shift: theta1 too close to the parameter boundary");
        const double ip = mutual_information(p, ChannelPoint(fam, tp), spec);
        const double im = mutual_information(p, ChannelPoint(fam, tm), spec);
        total += (ip - im) / (2 * h) * theta2[i];
    }
    return total;
}

}  // namespace ucc
