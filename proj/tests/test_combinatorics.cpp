#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ucc/codebook.hpp"
#include "ucc/composition.hpp"
#include "ucc/rng.hpp"

using namespace ucc;

TEST_CASE("type enumeration counts and ordering") {
    auto t42 = enumerate_types(4, 2);
    CHECK(t42.size() == 5);
    auto t23 = enumerate_types(2, 3);
    CHECK(t23.size() == 6);
    for (const auto& t : t42) {
        long long s = 0;
        for (long long c : t.counts) s += c;
        CHECK(s == 4);
    }
    // lexicographic on the count tuples
    for (std::size_t i = 1; i < t23.size(); ++i) CHECK(t23[i - 1].counts < t23[i].counts);
    CHECK(count_types(4, 2) == 5);
    CHECK(count_types(2, 3) == 6);
    CHECK_THROWS(enumerate_types(2000, 6));
}

TEST_CASE("round_to_type minimizes total variation with low-index ties") {
    CHECK(round_to_type(std::vector<double>{0.5, 0.5}, 4).counts == std::vector<long long>{2, 2});
    CHECK(round_to_type(std::vector<double>{1.0, 0.0}, 7).counts == std::vector<long long>{7, 0});
    // brute-force oracle over all candidate types
    RngStream rng(3);
    for (int rep = 0; rep < 30; ++rep) {
        const int d = 2 + int(rng.uniform_below(2));
        const int n = 3 + int(rng.uniform_below(8));
        std::vector<double> p(d);
        double s = 0;
        for (auto& v : p) s += v = rng.uniform() + 1e-3;
        for (auto& v : p) v /= s;
        auto tv = [&](const CompositionType& t) {
            double acc = 0;
            for (int i = 0; i < d; ++i) acc += std::fabs(double(t.counts[i]) / n - p[i]);
            return acc;
        };
        const auto got = round_to_type(p, n);
        double best = 1e300;
        for (const auto& cand : enumerate_types(n, d)) best = std::min(best, tv(cand));
        CHECK(tv(got) == doctest::Approx(best).epsilon(1e-12));
    }
    // the stated tie/rounding case
    CHECK(round_to_type(std::vector<double>{1.0 / 3, 2.0 / 3}, 4).counts == std::vector<long long>{1, 3});
}

TEST_CASE("type class sizes, exact and logarithmic") {
    const auto a = type_class_size(make_composition(4, {2, 2}));
    REQUIRE(a.exact.has_value());
    CHECK(*a.exact == 6);
    const auto b = type_class_size(make_composition(4, {1, 3}));
    REQUIRE(b.exact.has_value());
    CHECK(*b.exact == 4);
    CHECK(a.log_size == doctest::Approx(std::log(6.0)).epsilon(1e-12));

    // the constant c_{n,P} obeys its cardinality bound at n = 20
    const auto c = type_class_size(make_composition(20, {10, 10}));
    CHECK(c.log_c <= std::log(double(count_types(20, 2))) + 1e-12);
    CHECK(c.log_c >= 0.0);

    // identity: log c + log|T_P| = n H(P), both paths computed independently
    RngStream rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 3 + int(rng.uniform_below(30));
        const double p0 = rng.uniform() * 0.8 + 0.1;
        const auto Pc = round_to_type(std::vector<double>{p0, 1 - p0}, n);
        const auto t = type_class_size(Pc);
        CHECK(t.log_c + t.log_size == doctest::Approx(n * Pc.entropy()).epsilon(1e-10));
    }
}

TEST_CASE("summed type class sizes cover the full word count") {
    for (auto [n, d] : std::vector<std::pair<int, int>>{{20, 2}, {10, 3}}) {
        unsigned long long total = 0;
        for (const auto& t : enumerate_types(n, d)) {
            const auto s = type_class_size(t);
            REQUIRE(s.exact.has_value());
            total += *s.exact;
        }
        unsigned long long expect = 1;
        for (int i = 0; i < n; ++i) expect *= (unsigned long long)(d);
        CHECK(total == expect);
    }
}

TEST_CASE("message count formula") {
    const auto s1 = code_size(4, 0.55);
    CHECK(s1.m == 2);
    // floor(exp(n R - n^{1/4}))
    const auto s2 = code_size(8, 0.5);
    CHECK(s2.m == (unsigned long long)std::floor(std::exp(8 * 0.5 - std::pow(8.0, 0.25))));
    const auto s3 = code_size(512, 0.4);
    CHECK(!s3.representable);
    CHECK(s3.log_m == doctest::Approx(512 * 0.4 - std::pow(512.0, 0.25)));
}

TEST_CASE("codebook construction distinctness, composition, determinism") {
    const auto P = make_composition(4, {2, 2});
    RngStream rng(123);
    const double r = 0.55;  // M = 2
    auto book = build_codebook(P, r, 0.7, rng);
    CHECK(book.words.size() == 2);
    CHECK(book.words[0] != book.words[1]);
    for (const auto& w : book.words) CHECK(word_composition(w, 2) == P);

    RngStream r1(99), r2(99);
    auto b1 = build_codebook(P, r, 0.7, r1);
    auto b2 = build_codebook(P, r, 0.7, r2);
    CHECK(b1.words == b2.words);

    // message count above |T_P| is rejected
    RngStream r3(1);
    CHECK_THROWS(build_codebook(P, 1.2, 1.3, r3));
}

TEST_CASE("packing verification on a small codebook") {
    const auto P = make_composition(8, {4, 4});
    const double r = (std::log(4.0) + std::pow(8.0, 0.25) + 0.01) / 8.0;  // M = 4
    RngStream rng(2024);
    CodebookOptions opts;
    opts.verify = true;
    auto book = build_codebook(P, r, r + 0.2, rng, opts);
    CHECK(book.words.size() == 4);
    CHECK(book.packing_checked);
    CHECK(book.packing_verified);
    CHECK(packing_property_holds(book));
}

TEST_CASE("stabilizer-average ratio for verified codebooks") {
    const auto P = make_composition(8, {4, 4});
    const double r = (std::log(4.0) + std::pow(8.0, 0.25) + 0.01) / 8.0;
    RngStream rng(31337);
    CodebookOptions opts;
    opts.verify = true;
    auto book = build_codebook(P, r, r + 0.2, rng, opts);
    REQUIRE(book.packing_verified);
    // over the whole type class, the averaged hit rate stays within its cap
    Word probe;
    for (int x = 0; x < 2; ++x) probe.insert(probe.end(), 4, std::uint8_t(x));
    std::sort(probe.begin(), probe.end());
    do {
        CHECK(group_average_ratio_max(book, probe) <= 1.0 + 1e-9);
    } while (std::next_permutation(probe.begin(), probe.end()));

    // degenerate full codebook: ratio finite
    Codebook full;
    full.n = 4;
    full.composition = make_composition(4, {2, 2});
    full.rate_r = 0.6;
    Word w = {0, 0, 1, 1};
    std::sort(w.begin(), w.end());
    do {
        full.words.push_back(w);
    } while (std::next_permutation(w.begin(), w.end()));
    const double ratio = group_average_ratio_max(full, Word{1, 1, 0, 0});
    CHECK(std::isfinite(ratio));
    CHECK(ratio > 0);

    // single-word list: probes outside the reference orbit contribute nothing
    const Word ref = {0, 0, 1, 1};
    CHECK(group_average_ratio({ref}, ref, Word{1, 1, 0, 0}) >= 0);
    CHECK(group_average_ratio({ref, Word{0, 1, 0, 1}}, ref, Word{1, 0, 1, 0}) >= 0);
}

TEST_CASE("codebook text round-trip") {
    const auto P = make_composition(6, {3, 3});
    RngStream rng(8);
    auto book = build_codebook(P, 0.5, 0.6, rng);
    std::stringstream ss;
    save_codebook(book, ss);
    auto loaded = load_codebook(ss, 2);
    CHECK(loaded.words == book.words);
    CHECK(loaded.n == book.n);
    CHECK(loaded.composition == book.composition);

    std::stringstream bad("0 1 2\n");
    CHECK_THROWS(load_codebook(bad, 2));
}
