#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace ucc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v);

inline double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = a > b ? a : b;
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

// Streaming log-sum-exp with a running maximum.
class LogSumAcc {
public:
    void add(double x) {
        if (x == kNegInf) return;
        if (x <= max_) {
            sum_ += std::exp(x - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - x) + 1.0;
            max_ = x;
        }
    }
    double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

private:
    double max_ = kNegInf;
    double sum_ = 0.0;
};

// Standard normal CDF and quantile.
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730950488); }
double std_normal_quantile(double p);

// Regularized lower incomplete gamma P(a, x); chi-square CDF with k dof.
double gamma_p(double a, double x);
inline double chi2_cdf(int k, double x) { return x <= 0 ? 0.0 : gamma_p(0.5 * k, 0.5 * x); }

inline double log_binom(long long n, long long k) {
    return std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(n - k) + 1);
}

// Wilson 95% score interval for k successes in n trials.
struct Interval {
    double lo = 0, hi = 1;
};
Interval wilson_interval(long long k, long long n);

// Golden-section maximization of a unimodal function on [a, b].
// Returns the argmax; tolerance is on the argument.
template <typename F>
double golden_max(const F& f, double a, double b, double tol) {
    const double invphi = 0.6180339887498948482;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace ucc
