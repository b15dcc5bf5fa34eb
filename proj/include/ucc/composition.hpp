#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ucc {

// Input-word composition: per-symbol counts summing to the blocklength.
struct CompositionType {
    int n = 0;
    std::vector<long long> counts;

    int d() const { return int(counts.size()); }
    double prob(int x) const { return double(counts[x]) / n; }
    std::vector<double> probs() const;
    double entropy() const;  // nats

    bool operator==(const CompositionType&) const = default;
};

CompositionType make_composition(int n, std::vector<long long> counts);

// All compositions of n into d parts, lexicographic. Throws when the count
// would exceed `cap` entries.
std::vector<CompositionType> enumerate_types(int n, int d, std::size_t cap = 1000000);

inline std::size_t count_types(int n, int d) {
    // C(n+d-1, d-1) computed exactly in integer arithmetic
    unsigned long long r = 1;
    for (int i = 1; i < d; ++i) r = r * (std::uint64_t(n) + i) / i;
    return std::size_t(r);
}

// Closest type to a probability vector in total variation; ties toward the
// lowest symbol index.
CompositionType round_to_type(std::span<const double> p, int n);

struct TypeClassSize {
    std::optional<unsigned long long> exact;  // multinomial coefficient when it fits
    double log_size = 0;                      // log |T_P|
    double log_c = 0;                         // log c_{n,P} = n H(P) - log |T_P|
};

TypeClassSize type_class_size(const CompositionType& P);

// Empirical composition of a word over {0..d-1}.
CompositionType word_composition(std::span<const std::uint8_t> word, int d);

// Joint conditional pattern of `other` relative to `ref`: entry (a,b) counts
// positions where ref==a and other==b. Row-major d x d.
std::vector<long long> conditional_pattern(std::span<const std::uint8_t> ref, std::span<const std::uint8_t> other,
                                           int d);

}  // namespace ucc
