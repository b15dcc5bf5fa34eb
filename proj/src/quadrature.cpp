#include "ucc/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace ucc {

namespace {

QuadRule compute_legendre(int n) {
    QuadRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton from the Chebyshev-based initial guess
        double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        r.nodes[n - 1 - i] = x;
        r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return r;
}

QuadRule compute_hermite(int n) {
    QuadRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double pim4 = 0.7511255444649425;  // pi^{-1/4}
    double x = 0;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        if (i == 0)
            x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            x -= 1.14 * std::pow(double(n), 0.426) / x;
        else if (i == 2)
            x = 1.86 * x - 0.86 * r.nodes[0];
        else if (i == 3)
            x = 1.91 * x - 0.91 * r.nodes[1];
        else
            x = 2.0 * x - r.nodes[i - 2];
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = pim4, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = x * std::sqrt(2.0 / (j + 1.0)) * p1 - std::sqrt(double(j) / (j + 1.0)) * p2;
            }
            pp = std::sqrt(2.0 * n) * p1;
            const double dx = p0 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-14) break;
        }
        r.nodes[i] = x;
        r.weights[i] = 2.0 / (pp * pp);
        r.nodes[n - 1 - i] = -x;
        r.weights[n - 1 - i] = r.weights[i];
    }
    // store ascending
    for (int i = 0; i < n / 2; ++i) {
        std::swap(r.nodes[i], r.nodes[n - 1 - i]);
        std::swap(r.weights[i], r.weights[n - 1 - i]);
    }
    return r;
}

}  // namespace

const QuadRule& gauss_legendre(int n) {
    if (n < 1 || n > 20000) throw std::invalid_argument("gauss_legendre: bad order");
    static std::map<int, QuadRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_legendre(n)).first;
    return it->second;
}

const QuadRule& gauss_hermite(int n) {
    if (n < 1 || n > 500) throw std::invalid_argument("gauss_hermite: bad order");
    static std::map<int, QuadRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_hermite(n)).first;
    return it->second;
}

QuadRule composite_legendre(double a, double b, int panels, int deg) {
    if (!(b > a) || panels < 1 || deg < 1) throw std::invalid_argument("composite_legendre: bad arguments");
    const QuadRule& base = gauss_legendre(deg);
    QuadRule r;
    r.nodes.reserve(std::size_t(panels) * deg);
    r.weights.reserve(std::size_t(panels) * deg);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        for (int j = 0; j < deg; ++j) {
            r.nodes.push_back(lo + 0.5 * h * (base.nodes[j] + 1.0));
            r.weights.push_back(0.5 * h * base.weights[j]);
        }
    }
    return r;
}

}  // namespace ucc
