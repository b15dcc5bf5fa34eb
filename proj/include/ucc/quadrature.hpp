#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace ucc {

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre rule on [-1, 1].
const QuadRule& gauss_legendre(int n);

// Gauss-Hermite rule for weight e^{-x^2} (physicists' convention).
const QuadRule& gauss_hermite(int n);

// Composite Gauss-Legendre rule on [a, b]: `panels` equal panels,
// `deg` points each. Weights integrate dx exactly for polynomials.
QuadRule composite_legendre(double a, double b, int panels, int deg = 8);

// Integrate a log-integrand over the real line against a Gaussian frame
// (center, sigma): returns log of integral(exp(log_f(y)) dy) using
// Gauss-Hermite with the given node count.
template <typename LogF>
double log_integral_gh(const LogF& log_f, double center, double sigma, int n_nodes) {
    const QuadRule& r = gauss_hermite(n_nodes);
    const double sqrt2s = 1.4142135623730950488 * sigma;
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double y = center + sqrt2s * r.nodes[i];
        // e^{x^2} compensates the GH weight so plain dy is integrated
        terms[i] = std::log(r.weights[i]) + r.nodes[i] * r.nodes[i] + log_f(y) + std::log(sqrt2s);
        if (terms[i] > m) m = terms[i];
    }
    if (m == -std::numeric_limits<double>::infinity()) return m;
    double s = 0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

}  // namespace ucc
