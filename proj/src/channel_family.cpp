#include "ucc/channel_family.hpp"

#include <algorithm>
#include <cmath>

#include "ucc/special.hpp"

namespace ucc {

bool cholesky(SymMatrix& m) {
    const int n = m.n;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = m.at(i, j);
            for (int k = 0; k < j; ++k) s -= m.at(i, k) * m.at(j, k);
            if (i == j) {
                if (s <= 0) return false;
                m.at(i, i) = std::sqrt(s);
            } else {
                m.at(i, j) = s / m.at(j, j);
            }
        }
        for (int j = i + 1; j < n; ++j) m.at(i, j) = 0;
    }
    return true;
}

std::vector<double> chol_solve(const SymMatrix& chol, std::span<const double> b) {
    const int n = chol.n;
    std::vector<double> x(b.begin(), b.end());
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) x[i] -= chol.at(i, k) * x[k];
        x[i] /= chol.at(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int k = i + 1; k < n; ++k) x[i] -= chol.at(k, i) * x[k];
        x[i] /= chol.at(i, i);
    }
    return x;
}

double chol_log_det(const SymMatrix& chol) {
    double s = 0;
    for (int i = 0; i < chol.n; ++i) s += std::log(chol.at(i, i));
    return 2 * s;
}

ChannelPoint::ChannelPoint(std::shared_ptr<const ChannelFamily> fam, std::vector<double> th)
    : family(std::move(fam)), theta(std::move(th)) {
    if (!family) throw std::invalid_argument("ChannelPoint: null family");
    if (int(theta.size()) != family->param_dim()) throw std::invalid_argument("ChannelPoint: theta dimension mismatch");
    if (!family->theta_valid(theta)) throw std::invalid_argument("ChannelPoint: theta outside the parameter set");
}

double ChannelFamily::log_density(std::span<const double> theta, int x, std::span<const double> y) const {
    const auto sel = select(theta, x);
    std::vector<double> g(sel.size());
    generators(x, y, g);
    double dot = 0;
    for (std::size_t j = 0; j < sel.size(); ++j) dot += sel[j] * g[j];
    return log_base(x, y) + dot - potential(x, sel);
}

void ChannelFamily::log_pmf(std::span<const double> theta, int x, std::span<double> out) const {
    if (!space_.finite()) throw std::logic_error("log_pmf: output space is not finite");
    for (int y = 0; y < space_.cardinality; ++y) {
        const double yy = double(y);
        out[y] = log_density(theta, x, std::span<const double>(&yy, 1));
    }
}

SymMatrix ChannelFamily::fisher_information(std::span<const double> theta, int x) const {
    if (!box_.interior(theta, 1e-9)) throw std::domain_error("fisher_information: theta not interior to the box");
    auto sel = select(theta, x);
    const int kx = int(sel.size());
    SymMatrix j = SymMatrix::zero(kx);
    auto phi = [&](const std::vector<double>& t) { return potential(x, t); };
    for (int p = 0; p < kx; ++p) {
        const double hp = 1e-4 * (1.0 + std::fabs(sel[p]));
        for (int q = 0; q <= p; ++q) {
            double v;
            if (p == q) {
                auto tp = sel, tm = sel;
                tp[p] += hp;
                tm[p] -= hp;
                v = (phi(tp) - 2 * phi(sel) + phi(tm)) / (hp * hp);
            } else {
                const double hq = 1e-4 * (1.0 + std::fabs(sel[q]));
                auto tpp = sel, tpm = sel, tmp = sel, tmm = sel;
                tpp[p] += hp; tpp[q] += hq;
                tpm[p] += hp; tpm[q] -= hq;
                tmp[p] -= hp; tmp[q] += hq;
                tmm[p] -= hp; tmm[q] -= hq;
                v = (phi(tpp) - phi(tpm) - phi(tmp) + phi(tmm)) / (4 * hp * hq);
            }
            j.at(p, q) = j.at(q, p) = v;
        }
    }
    return j;
}

GaussFrame ChannelFamily::quad_frame(std::span<const double>, int) const {
    throw std::logic_error("quad_frame: not available for this family");
}

// ---------------------------------------------------------------------------
// Example 1: finite output set {0..m}, logistic parametrization.

namespace {

class DmcFamily final : public ChannelFamily {
public:
    DmcFamily(int d, int m, double half_width)
        : ChannelFamily("dmc", d, OutputSpace::finite_symbols(m + 1), d * m, Box::cube(d * m, half_width),
                        ConditionTag::A),
          m_(m) {
        selectors_.resize(d);
        for (int x = 0; x < d; ++x) {
            selectors_[x].resize(m);
            for (int j = 0; j < m; ++j) selectors_[x][j] = x * m + j;
        }
    }

    void generators(int, std::span<const double> y, std::span<double> g) const override {
        const int yy = int(y[0]);
        for (int j = 0; j < m_; ++j) g[j] = (yy == j + 1) ? 1.0 : 0.0;
    }

    double log_base(int, std::span<const double>) const override { return 0.0; }

    double potential(int, std::span<const double> t) const override {
        // log(1 + sum_j e^{t_j}), stable for large positive entries
        double mx = 0.0;
        for (double v : t) mx = std::max(mx, v);
        double s = std::exp(-mx);
        for (double v : t) s += std::exp(v - mx);
        return mx + std::log(s);
    }

    void log_pmf(std::span<const double> theta, int x, std::span<double> out) const override {
        const auto sel = select(theta, x);
        const double phi = potential(x, sel);
        out[0] = -phi;
        for (int j = 0; j < m_; ++j) out[j + 1] = sel[j] - phi;
    }

    void sample(std::span<const double> theta, int x, RngStream& rng, std::span<double> y_out) const override {
        std::vector<double> lp(m_ + 1);
        log_pmf(theta, x, lp);
        double u = rng.uniform();
        for (int y = 0; y <= m_; ++y) {
            u -= std::exp(lp[y]);
            if (u <= 0) {
                y_out[0] = double(y);
                return;
            }
        }
        y_out[0] = double(m_);
    }

    SymMatrix fisher_information(std::span<const double> theta, int x) const override {
        if (!box_.interior(theta, 1e-9)) throw std::domain_error("fisher_information: theta not interior to the box");
        // Hessian of log(1 + sum e^{t}) = diag(p) - p p^T on symbols 1..m
        std::vector<double> lp(m_ + 1);
        log_pmf(theta, x, lp);
        SymMatrix j = SymMatrix::zero(m_);
        for (int a = 0; a < m_; ++a) {
            const double pa = std::exp(lp[a + 1]);
            for (int b = 0; b <= a; ++b) {
                const double pb = std::exp(lp[b + 1]);
                const double v = (a == b ? pa * (1 - pa) : -pa * pb);
                j.at(a, b) = j.at(b, a) = v;
            }
        }
        return j;
    }

private:
    int m_;
};

// ---------------------------------------------------------------------------
// Example 2: Y = a*x + Z, Z ~ N(b, v); natural params (1/v, a/v, b/v).

class GaussianFadingFamily final : public ChannelFamily {
public:
    GaussianFadingFamily(std::vector<double> signals, double eps0, double lin_hw)
        : ChannelFamily("gaussian-fading", int(signals.size()), OutputSpace::real_line(), 3,
                        make_box(eps0, lin_hw), ConditionTag::B),
          signals_(std::move(signals)) {
        selectors_.assign(d_, {0, 1, 2});
    }

    void generators(int x, std::span<const double> y, std::span<double> g) const override {
        g[0] = -0.5 * y[0] * y[0];
        g[1] = y[0] * signals_[x];
        g[2] = y[0];
    }

    double log_base(int, std::span<const double>) const override { return 0.0; }

    double potential(int x, std::span<const double> t) const override {
        const double eta = t[1] * signals_[x] + t[2];
        return 0.5 * eta * eta / t[0] + 0.5 * std::log(2 * 3.14159265358979323846 / t[0]);
    }

    void sample(std::span<const double> theta, int x, RngStream& rng, std::span<double> y_out) const override {
        const double v = 1.0 / theta[0];
        const double mean = (theta[1] * signals_[x] + theta[2]) * v;
        y_out[0] = mean + std::sqrt(v) * rng.normal();
    }

    GaussFrame quad_frame(std::span<const double> theta, int x) const override {
        GaussFrame f;
        const double v = 1.0 / theta[0];
        f.center = {(theta[1] * signals_[x] + theta[2]) * v};
        f.chol = {std::sqrt(v)};
        f.log_det = 0.5 * std::log(v);
        f.dim = 1;
        return f;
    }

    const std::vector<double>& signals() const { return signals_; }

private:
    static Box make_box(double eps0, double lin_hw) {
        Box b;
        b.lo = {eps0, -lin_hw, -lin_hw};
        b.hi = {1.0 / eps0, lin_hw, lin_hw};
        return b;
    }
    std::vector<double> signals_;
};

// ---------------------------------------------------------------------------
// Example 3: Y = A x + Z in R^r, Z ~ N(b, Sigma);
// theta = (Theta1 = Sigma^{-1} upper triangle, Theta2 = Sigma^{-1} A row-major, theta3 = Sigma^{-1} b).

class MimoGaussianFamily final : public ChannelFamily {
public:
    MimoGaussianFamily(std::vector<std::vector<double>> signals, int r, double eps0, double lin_hw)
        : ChannelFamily("mimo-gaussian", int(signals.size()), OutputSpace::real_vector(r),
                        r * (r + 1) / 2 + r * int(signals.front().size()) + r,
                        make_box(r, int(signals.front().size()), eps0, lin_hw), ConditionTag::B),
          signals_(std::move(signals)),
          r_(r),
          t_(int(signals_.front().size())) {
        selectors_.resize(d_);
        for (int x = 0; x < d_; ++x) {
            selectors_[x].resize(k_);
            for (int j = 0; j < k_; ++j) selectors_[x][j] = j;
        }
    }

    int q_dim() const { return r_ * (r_ + 1) / 2; }

    // theta layout: [upper triangle of Theta1 rowwise] [Theta2 row-major r x t] [theta3]
    SymMatrix theta1(std::span<const double> t) const {
        SymMatrix m = SymMatrix::zero(r_);
        int idx = 0;
        for (int a = 0; a < r_; ++a)
            for (int b = a; b < r_; ++b) {
                m.at(a, b) = m.at(b, a) = t[idx++];
            }
        return m;
    }

    std::vector<double> eta(int x, std::span<const double> t) const {
        std::vector<double> e(r_);
        const int off2 = q_dim();
        const int off3 = off2 + r_ * t_;
        for (int a = 0; a < r_; ++a) {
            double s = t[off3 + a];
            for (int j = 0; j < t_; ++j) s += t[off2 + a * t_ + j] * signals_[x][j];
            e[a] = s;
        }
        return e;
    }

    void generators(int x, std::span<const double> y, std::span<double> g) const override {
        int idx = 0;
        for (int a = 0; a < r_; ++a)
            for (int b = a; b < r_; ++b) g[idx++] = (a == b) ? -0.5 * y[a] * y[a] : -y[a] * y[b];
        for (int a = 0; a < r_; ++a)
            for (int j = 0; j < t_; ++j) g[idx++] = y[a] * signals_[x][j];
        for (int a = 0; a < r_; ++a) g[idx++] = y[a];
    }

    double log_base(int, std::span<const double>) const override { return 0.0; }

    double potential(int x, std::span<const double> t) const override {
        SymMatrix th1 = theta1(t);
        if (!cholesky(th1)) throw std::domain_error("mimo potential: precision matrix not positive definite");
        const auto e = eta(x, t);
        const auto mu = chol_solve(th1, e);  // mean = Theta1^{-1} eta
        double quad = 0;
        for (int a = 0; a < r_; ++a) quad += e[a] * mu[a];
        return 0.5 * quad - 0.5 * chol_log_det(th1) + 0.5 * r_ * std::log(2 * 3.14159265358979323846);
    }

    bool theta_valid(std::span<const double> theta) const override {
        if (!box_.contains(theta, 1e-12)) return false;
        SymMatrix th1 = theta1(theta);
        return cholesky(th1);
    }

    void sample(std::span<const double> theta, int x, RngStream& rng, std::span<double> y_out) const override {
        SymMatrix th1 = theta1(theta);
        if (!cholesky(th1)) throw std::domain_error("mimo sample: precision matrix not positive definite");
        const auto mu = chol_solve(th1, eta(x, theta));
        // y = mu + L^{-T} z with Theta1 = L L^T
        std::vector<double> z(r_);
        for (int a = 0; a < r_; ++a) z[a] = rng.normal();
        for (int i = r_ - 1; i >= 0; --i) {
            for (int k = i + 1; k < r_; ++k) z[i] -= th1.at(k, i) * z[k];
            z[i] /= th1.at(i, i);
        }
        for (int a = 0; a < r_; ++a) y_out[a] = mu[a] + z[a];
    }

    GaussFrame quad_frame(std::span<const double> theta, int x) const override {
        SymMatrix th1 = theta1(theta);
        if (!cholesky(th1)) throw std::domain_error("mimo quad_frame: precision matrix not positive definite");
        GaussFrame f;
        f.dim = r_;
        f.center = chol_solve(th1, eta(x, theta));
        // Sigma = Theta1^{-1}; its Cholesky is obtained by inverting L^T columnwise
        SymMatrix sig = SymMatrix::zero(r_);
        for (int c = 0; c < r_; ++c) {
            std::vector<double> e(r_, 0.0);
            e[c] = 1.0;
            auto col = chol_solve(th1, e);
            for (int a = 0; a < r_; ++a) sig.at(a, c) = col[a];
        }
        if (!cholesky(sig)) throw std::domain_error("mimo quad_frame: covariance not positive definite");
        f.chol.assign(std::size_t(r_) * r_, 0.0);
        for (int a = 0; a < r_; ++a)
            for (int b = 0; b <= a; ++b) f.chol[std::size_t(a) * r_ + b] = sig.at(a, b);
        f.log_det = 0.5 * chol_log_det(sig);
        return f;
    }

private:
    static Box make_box(int r, int t, double eps0, double lin_hw) {
        Box b;
        const int q = r * (r + 1) / 2;
        const int k = q + r * t + r;
        b.lo.assign(k, -lin_hw);
        b.hi.assign(k, lin_hw);
        // diagonal precision entries stay positive and bounded away from 0
        int idx = 0;
        for (int a = 0; a < r; ++a)
            for (int bb = a; bb < r; ++bb) {
                if (a == bb) {
                    b.lo[idx] = eps0;
                    b.hi[idx] = 1.0 / eps0;
                }
                ++idx;
            }
        return b;
    }

    std::vector<std::vector<double>> signals_;
    int r_, t_;
};

}  // namespace

std::shared_ptr<ChannelFamily> make_dmc_family(int d, int m, double box_half_width) {
    if (d < 2) throw std::invalid_argument("make_dmc_family: need d >= 2 inputs");
    if (m < 1) throw std::invalid_argument("make_dmc_family: need m >= 1");
    return std::make_shared<DmcFamily>(d, m, box_half_width);
}

std::shared_ptr<ChannelFamily> make_gaussian_fading(std::vector<double> signal_points, double eps0,
                                                    double linear_half_width) {
    if (signal_points.size() < 2) throw std::invalid_argument("make_gaussian_fading: need d >= 2 signal points");
    auto sorted = signal_points;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("make_gaussian_fading: duplicate signal points");
    if (!(eps0 > 0)) throw std::invalid_argument("make_gaussian_fading: precision box must exclude 0");
    return std::make_shared<GaussianFadingFamily>(std::move(signal_points), eps0, linear_half_width);
}

std::shared_ptr<ChannelFamily> make_mimo_gaussian(std::vector<std::vector<double>> signal_vectors, int r, double eps0,
                                                  double linear_half_width) {
    if (signal_vectors.size() < 2) throw std::invalid_argument("make_mimo_gaussian: need d >= 2 signal vectors");
    if (r < 1) throw std::invalid_argument("make_mimo_gaussian: need r >= 1");
    const std::size_t t = signal_vectors.front().size();
    if (t < 1) throw std::invalid_argument("make_mimo_gaussian: need t >= 1");
    for (const auto& v : signal_vectors)
        if (v.size() != t) throw std::invalid_argument("make_mimo_gaussian: ragged signal vectors");
    if (!(eps0 > 0)) throw std::invalid_argument("make_mimo_gaussian: precision box must exclude 0");
    return std::make_shared<MimoGaussianFamily>(std::move(signal_vectors), r, eps0, linear_half_width);
}

std::vector<double> dmc_theta_for_rows(const std::vector<std::vector<double>>& rows) {
    const int d = int(rows.size());
    if (d < 2) throw std::invalid_argument("dmc_theta_for_rows: need d >= 2 rows");
    const int card = int(rows.front().size());
    const int m = card - 1;
    std::vector<double> theta(std::size_t(d) * m);
    for (int x = 0; x < d; ++x) {
        if (int(rows[x].size()) != card) throw std::invalid_argument("dmc_theta_for_rows: ragged rows");
        if (!(rows[x][0] > 0)) throw std::invalid_argument("dmc_theta_for_rows: zero mass on symbol 0");
        for (int j = 0; j < m; ++j) theta[std::size_t(x) * m + j] = std::log(rows[x][j + 1] / rows[x][0]);
    }
    return theta;
}

ChannelPoint make_bsc(double p, double box_half_width) {
    if (!(p > 0 && p < 1)) throw std::invalid_argument("make_bsc: crossover must be in (0,1)");
    auto fam = make_dmc_family(2, 1, box_half_width);
    return ChannelPoint(fam, dmc_theta_for_rows({{1 - p, p}, {p, 1 - p}}));
}

}  // namespace ucc
