#include "ucc/composition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ucc/special.hpp"

namespace ucc {

std::vector<double> CompositionType::probs() const {
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) p[i] = double(counts[i]) / n;
    return p;
}

double CompositionType::entropy() const {
    double h = 0;
    for (long long c : counts)
        if (c > 0) {
            const double p = double(c) / n;
            h -= p * std::log(p);
        }
    return h;
}

CompositionType make_composition(int n, std::vector<long long> counts) {
    CompositionType t{n, std::move(counts)};
    if (n < 1) throw std::invalid_argument("composition: n must be >= 1");
    long long s = 0;
    for (long long c : t.counts) {
        if (c < 0) throw std::invalid_argument("composition: negative count");
        s += c;
    }
    if (s != n) throw std::invalid_argument("composition: counts must sum to n");
    return t;
}

std::vector<CompositionType> enumerate_types(int n, int d, std::size_t cap) {
    if (n < 1 || d < 2) throw std::invalid_argument("enumerate_types: need n >= 1, d >= 2");
    if (count_types(n, d) > cap) throw std::length_error("enumerate_types: enumeration above cap");
    std::vector<CompositionType> out;
    std::vector<long long> cur(d, 0);
    // lexicographic: first coordinate descending? lexicographic ascending on the tuple
    // (0,...,n), (0,...,1,n-1), ... generate recursively.
    auto rec = [&](auto&& self, int pos, long long rem) -> void {
        if (pos == d - 1) {
            cur[pos] = rem;
            out.push_back(CompositionType{n, cur});
            return;
        }
        for (long long c = 0; c <= rem; ++c) {
            cur[pos] = c;
            self(self, pos + 1, rem - c);
        }
    };
    rec(rec, 0, n);
    return out;
}

CompositionType round_to_type(std::span<const double> p, int n) {
    const int d = int(p.size());
    if (d < 1 || n < 1) throw std::invalid_argument("round_to_type: bad arguments");
    double tot = 0;
    for (double v : p) {
        if (v < 0) throw std::invalid_argument("round_to_type: negative probability");
        tot += v;
    }
    if (std::fabs(tot - 1.0) > 1e-9) throw std::invalid_argument("round_to_type: probabilities must sum to 1");
    std::vector<long long> c(d);
    std::vector<double> frac(d);
    long long assigned = 0;
    for (int i = 0; i < d; ++i) {
        const double t = p[i] * n;
        c[i] = (long long)std::floor(t);
        frac[i] = t - double(c[i]);
        assigned += c[i];
    }
    long long rem = n - assigned;
    // hand the remaining units to the largest fractional parts, lowest index first on ties
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return frac[a] > frac[b]; });
    for (long long r = 0; r < rem; ++r) c[order[std::size_t(r)]] += 1;
    return CompositionType{n, std::move(c)};
}

TypeClassSize type_class_size(const CompositionType& P) {
    TypeClassSize out;
    double ls = std::lgamma(double(P.n) + 1);
    for (long long c : P.counts) ls -= std::lgamma(double(c) + 1);
    out.log_size = ls;
    out.log_c = P.n * P.entropy() - ls;
    // exact multinomial via the stepwise-exact binomial recurrence
    unsigned long long v = 1;
    bool ok = P.n <= 170;
    if (ok) {
        long long placed = 0;
        for (long long c : P.counts) {
            for (long long i = 1; i <= c && ok; ++i) {
                unsigned long long num;
                if (__builtin_mul_overflow(v, (unsigned long long)(placed + i), &num)) {
                    ok = false;
                    break;
                }
                v = num / (unsigned long long)i;  // exact: C(placed+i, i) chain
            }
            placed += c;
        }
    }
    if (ok) out.exact = v;
    return out;
}

CompositionType word_composition(std::span<const std::uint8_t> word, int d) {
    std::vector<long long> c(d, 0);
    for (auto s : word) {
        if (s >= d) throw std::invalid_argument("word_composition: symbol out of range");
        c[s]++;
    }
    return CompositionType{int(word.size()), std::move(c)};
}

std::vector<long long> conditional_pattern(std::span<const std::uint8_t> ref, std::span<const std::uint8_t> other,
                                           int d) {
    if (ref.size() != other.size()) throw std::invalid_argument("conditional_pattern: length mismatch");
    std::vector<long long> v(std::size_t(d) * d, 0);
    for (std::size_t i = 0; i < ref.size(); ++i) v[std::size_t(ref[i]) * d + other[i]]++;
    return v;
}

}  // namespace ucc
