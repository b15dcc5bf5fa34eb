#include <cmath>

#include "doctest.h"
#include "ucc/channel_family.hpp"
#include "ucc/info_measures.hpp"
#include "ucc/quadrature.hpp"

using namespace ucc;

namespace {

constexpr double kTau = 6.283185307179586477;

// total output mass of W_theta(.|x): exact sum or frame quadrature
double output_mass(const ChannelFamily& fam, std::span<const double> theta, int x) {
    if (fam.output_space().finite()) {
        std::vector<double> lp(fam.output_space().cardinality);
        fam.log_pmf(theta, x, lp);
        double s = 0;
        for (double v : lp) s += std::exp(v);
        return s;
    }
    auto log_f = [&](std::span<const double> y) { return fam.log_density(theta, x, y); };
    return std::exp(log_integral_frame(log_f, fam.quad_frame(theta, x), 64));
}

std::vector<double> random_interior_theta(const ChannelFamily& fam, RngStream& rng, double shrink = 0.8) {
    const Box& b = fam.param_box();
    std::vector<double> th(b.dim());
    for (;;) {
        for (int i = 0; i < b.dim(); ++i) {
            const double mid = 0.5 * (b.lo[i] + b.hi[i]);
            const double half = 0.5 * (b.hi[i] - b.lo[i]) * shrink;
            th[i] = mid + (2 * rng.uniform() - 1) * half;
        }
        if (fam.theta_valid(th)) return th;
    }
}

}  // namespace

TEST_CASE("dmc family constructor guards and symmetric point") {
    CHECK_THROWS(make_dmc_family(1, 1));
    CHECK_THROWS(make_dmc_family(2, 0));
    auto fam = make_dmc_family(2, 1);
    std::vector<double> theta = {0.0, 0.0};
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            const double yy = y;
            CHECK(fam->log_density(theta, x, std::span<const double>(&yy, 1)) ==
                  doctest::Approx(std::log(0.5)).epsilon(1e-12));
        }
}

TEST_CASE("dmc logistic inversion for a crossover channel") {
    // independent oracle: invert sigma(t) = p by bisection
    auto invert = [](double p) {
        double lo = -30, hi = 30;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (1.0 / (1.0 + std::exp(-mid)) < p ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const auto theta = dmc_theta_for_rows({{0.9, 0.1}, {0.1, 0.9}});
    CHECK(theta[0] == doctest::Approx(invert(0.1)).epsilon(1e-9));
    CHECK(theta[1] == doctest::Approx(invert(0.9)).epsilon(1e-9));
    CHECK(theta[0] == doctest::Approx(std::log(1.0 / 9.0)).epsilon(1e-12));
    CHECK(theta[1] == doctest::Approx(std::log(9.0)).epsilon(1e-12));
}

TEST_CASE("dmc d=3 m=2 has six parameters and normalizes") {
    auto fam = make_dmc_family(3, 2);
    CHECK(fam->param_dim() == 6);
    RngStream rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        const auto th = random_interior_theta(*fam, rng);
        for (int x = 0; x < 3; ++x) CHECK(output_mass(*fam, th, x) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("gaussian fading density and parametrization") {
    CHECK_THROWS(make_gaussian_fading({0.0, 0.0}));
    CHECK_THROWS(make_gaussian_fading({0.0, 1.0}, 0.0));
    auto fam = make_gaussian_fading({0.0, 1.0});
    // (a,b,v) = (1,0,1) -> theta = (1,1,0); input 0 is N(0,1)
    std::vector<double> theta = {1.0, 1.0, 0.0};
    const double y0 = 0.0;
    CHECK(fam->log_density(theta, 0, std::span<const double>(&y0, 1)) ==
          doctest::Approx(-0.5 * std::log(kTau)).epsilon(1e-12));
    const double y1 = 1.0;
    CHECK(fam->log_density(theta, 1, std::span<const double>(&y1, 1)) ==
          doctest::Approx(-0.5 * std::log(kTau)).epsilon(1e-12));
    // (a,b,v) = (2,1,0.5): input 1 is N(3, 0.5); check against the normal pdf and quadrature mass
    std::vector<double> th2 = {2.0, 4.0, 2.0};
    const double yv = 2.5;
    const double expect = -0.5 * std::log(kTau * 0.5) - (yv - 3.0) * (yv - 3.0) / (2 * 0.5);
    CHECK(fam->log_density(th2, 1, std::span<const double>(&yv, 1)) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(output_mass(*fam, th2, 1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("mimo with r=t=1 degenerates to fading") {
    auto fading = make_gaussian_fading({0.0, 1.0});
    auto mimo = make_mimo_gaussian({{0.0}, {1.0}}, 1);
    RngStream rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const auto th = random_interior_theta(*fading, rng);
        const int x = rep % 2;
        const double y = 3.0 * (2 * rng.uniform() - 1);
        CHECK(mimo->log_density(th, x, std::span<const double>(&y, 1)) ==
              doctest::Approx(fading->log_density(th, x, std::span<const double>(&y, 1))).epsilon(1e-10));
    }
}

TEST_CASE("mimo bivariate standard normal at the mode") {
    auto fam = make_mimo_gaussian({{0.0, 0.0}, {1.0, 0.0}}, 2);
    // Theta1 = I, Theta2 = 0, theta3 = 0: layout (1,0,1), 4 zeros, 2 zeros
    std::vector<double> theta = {1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    REQUIRE(int(theta.size()) == fam->param_dim());
    const double y[2] = {0.0, 0.0};
    CHECK(fam->log_density(theta, 0, std::span<const double>(y, 2)) ==
          doctest::Approx(-std::log(kTau)).epsilon(1e-12));
}

TEST_CASE("mimo random precision matrices normalize under tensor quadrature") {
    auto fam = make_mimo_gaussian({{0.0}, {1.0}}, 2);
    RngStream rng(17);
    int done = 0;
    while (done < 5) {
        const auto th = random_interior_theta(*fam, rng, 0.5);
        for (int x = 0; x < 2; ++x) CHECK(output_mass(*fam, th, x) == doctest::Approx(1.0).epsilon(1e-6));
        ++done;
    }
    // non-positive-definite precision rejected
    std::vector<double> bad(fam->param_dim(), 0.0);
    bad[0] = 1.0;
    bad[1] = 5.0;  // off-diagonal dominates
    bad[2] = 1.0;
    CHECK(!fam->theta_valid(bad));
    CHECK_THROWS(ChannelPoint(fam, bad));
}

TEST_CASE("normalization holds for random parameters in every builtin family") {
    RngStream rng(23);
    std::vector<std::shared_ptr<ChannelFamily>> fams = {make_dmc_family(2, 1), make_dmc_family(2, 2),
                                                        make_gaussian_fading({0.0, 1.0, -1.0}),
                                                        make_mimo_gaussian({{0.0}, {1.0}}, 1)};
    for (const auto& fam : fams)
        for (int rep = 0; rep < 10; ++rep) {
            const auto th = random_interior_theta(*fam, rng, 0.6);
            for (int x = 0; x < fam->input_count(); ++x)
                CHECK(output_mass(*fam, th, x) == doctest::Approx(1.0).epsilon(1e-6));
        }
}

TEST_CASE("log-density differences are affine in the generators") {
    RngStream rng(31);
    for (const auto& fam : {make_dmc_family(3, 2), make_gaussian_fading({0.0, 2.0})}) {
        const auto t1 = random_interior_theta(*fam, rng);
        const auto t2 = random_interior_theta(*fam, rng);
        for (int rep = 0; rep < 20; ++rep) {
            const int x = int(rng.uniform_below(fam->input_count()));
            std::vector<double> y(fam->output_space().dim);
            const auto tp = ChannelPoint(fam, t1);
            fam->sample(t1, x, rng, y);
            const auto s1 = fam->select(t1, x), s2 = fam->select(t2, x);
            std::vector<double> g(s1.size());
            fam->generators(x, y, g);
            double expect = -fam->potential(x, s1) + fam->potential(x, s2);
            for (std::size_t j = 0; j < g.size(); ++j) expect += (s1[j] - s2[j]) * g[j];
            const double got = fam->log_density(t1, x, y) - fam->log_density(t2, x, y);
            CHECK(got == doctest::Approx(expect).epsilon(1e-10));
        }
    }
}

TEST_CASE("sampling matches the law and is reproducible") {
    // crossover channel: empirical flip rate within a binomial interval
    auto bsc = make_bsc(0.1);
    RngStream rng(101);
    long long flips = 0;
    const int trials = 100000;
    std::vector<double> y(1);
    for (int i = 0; i < trials; ++i) {
        bsc.family->sample(bsc.theta, 0, rng, y);
        flips += y[0] == 1.0;
    }
    CHECK(std::fabs(double(flips) / trials - 0.1) < 0.01);

    auto fading = make_gaussian_fading({0.0, 1.0});
    std::vector<double> th = {1.0, 0.0, 0.0};
    RngStream r2(55);
    double mean = 0;
    for (int i = 0; i < 100000; ++i) {
        fading->sample(th, 1, r2, y);
        mean += y[0];
    }
    CHECK(std::fabs(mean / 100000) < 0.02);

    RngStream a(7), b(7);
    std::vector<double> ya(1), yb(1);
    for (int i = 0; i < 50; ++i) {
        fading->sample(th, 0, a, ya);
        fading->sample(th, 0, b, yb);
        CHECK(ya[0] == yb[0]);
    }
}

TEST_CASE("fisher information closed forms and fallback agree") {
    auto bsc = make_dmc_family(2, 1);
    std::vector<double> theta = {0.0, 0.0};
    const auto j = bsc->fisher_information(theta, 0);
    CHECK(j.at(0, 0) == doctest::Approx(0.25).epsilon(1e-9));

    // fading: library value vs an independent finite-difference reading with a
    // different step plus Richardson
    auto fading = make_gaussian_fading({0.0, 1.0});
    std::vector<double> th = {1.3, 0.4, -0.2};
    const auto sel = fading->select(th, 1);
    const auto jf = fading->fisher_information(th, 1);
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q <= p; ++q) {
            auto phi = [&](double hp, double hq) {
                auto t = sel;
                t[p] += hp;
                t[q] += hq;
                return fading->potential(1, t);
            };
            auto second = [&](double h) {
                if (p == q) return (phi(h, 0) - 2 * phi(0, 0) + phi(-h, 0)) / (h * h);
                return (phi(h, h) - phi(h, -h) - phi(-h, h) + phi(-h, -h)) / (4 * h * h);
            };
            const double d1 = second(2e-3), d2 = second(1e-3);
            const double richardson = (4 * d2 - d1) / 3;
            CHECK(jf.at(p, q) == doctest::Approx(richardson).epsilon(1e-5));
        }

    // boundary parameter rejected
    std::vector<double> edge = {fading->param_box().lo[0], 0.0, 0.0};
    CHECK_THROWS(fading->fisher_information(edge, 0));
}

TEST_CASE("fisher information is positive semidefinite at random points") {
    RngStream rng(77);
    for (const auto& fam : {make_dmc_family(3, 2), make_gaussian_fading({0.0, 1.0})}) {
        for (int rep = 0; rep < 20; ++rep) {
            const auto th = random_interior_theta(*fam, rng, 0.7);
            const int x = int(rng.uniform_below(fam->input_count()));
            auto j = fam->fisher_information(th, x);
            double trace = 0;
            for (int i = 0; i < j.n; ++i) trace += j.at(i, i);
            // finite-difference noise grows with the potential scale
            for (int i = 0; i < j.n; ++i) j.at(i, i) += 1e-6 * (1 + trace);
            CHECK(cholesky(j));
        }
    }
}

TEST_CASE("divergence curvature recovers the information matrix") {
    // 2 D(W_theta || W_theta+eps) / eps^2 -> u^T J u with Richardson in eps;
    // the Renyi order-(1+s) version converges to (1+s) u^T J u.
    RngStream rng(91);
    auto fam = make_dmc_family(2, 2);
    const auto th = random_interior_theta(*fam, rng, 0.4);
    const int x = 0;
    const auto sel = fam->select(th, x);
    const int kx = int(sel.size());
    std::vector<double> u(kx);
    double norm = 0;
    for (auto& v : u) {
        v = 2 * rng.uniform() - 1;
        norm += v * v;
    }
    for (auto& v : u) v /= std::sqrt(norm);
    const auto j = fam->fisher_information(th, x);
    double uju = 0;
    for (int a = 0; a < kx; ++a)
        for (int b = 0; b < kx; ++b) uju += u[a] * j.at(a, b) * u[b];

    const int card = fam->output_space().cardinality;
    auto pmf_at = [&](std::span<const double> t) {
        std::vector<double> lp(card), p(card);
        auto full = th;
        const auto selidx = fam->component_selector(x);
        for (int i = 0; i < kx; ++i) full[selidx[i]] = t[i];
        fam->log_pmf(full, x, lp);
        for (int y = 0; y < card; ++y) p[y] = std::exp(lp[y]);
        return p;
    };
    const auto p0 = pmf_at(sel);
    auto curvature = [&](double eps, double s) {
        auto t = sel;
        for (int i = 0; i < kx; ++i) t[i] += eps * u[i];
        const auto p1 = pmf_at(t);
        const double d = s == 0.0 ? kl_divergence(p0, p1) : renyi_divergence(p0, p1, s);
        return 2 * d / (eps * eps);
    };
    for (double s : {0.0, 0.5, 1.0}) {
        const double c1 = curvature(1e-2, s), c2 = curvature(1e-3, s);
        const double extrap = c2 + (c2 - c1) / 99.0;  // eps^2 errors shrink by 100
        const double target = (1.0 + s) * uju;
        CHECK(std::fabs(extrap - target) / target < 0.05);
    }
}
