#include "ucc/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ucc/special.hpp"

namespace ucc {

CodeSize code_size(int n, double rate) {
    CodeSize s;
    s.log_m = n * rate - std::pow(double(n), 0.25);
    if (s.log_m <= std::log(2.0)) {
        s.m = 2;
        s.log_m = std::log(2.0);
        return s;
    }
    if (s.log_m < 62 * std::log(2.0)) {
        s.m = (unsigned long long)std::floor(std::exp(s.log_m));
        if (s.m < 2) s.m = 2;
    } else {
        s.m = ~0ULL;
        s.representable = false;
    }
    return s;
}

namespace {

Word sorted_base_word(const CompositionType& P) {
    Word w;
    w.reserve(P.n);
    for (int x = 0; x < P.d(); ++x) w.insert(w.end(), std::size_t(P.counts[x]), std::uint8_t(x));
    return w;
}

void shuffle_word(Word& w, RngStream& rng) {
    for (std::size_t i = w.size() - 1; i > 0; --i) {
        const std::size_t j = std::size_t(rng.uniform_below(i + 1));
        std::swap(w[i], w[j]);
    }
}

std::vector<Word> enumerate_type_class(const CompositionType& P) {
    std::vector<Word> out;
    Word w = sorted_base_word(P);
    std::sort(w.begin(), w.end());
    do {
        out.push_back(w);
    } while (std::next_permutation(w.begin(), w.end()));
    return out;
}

double log_pattern_class_size(const std::vector<long long>& pattern, const CompositionType& P) {
    // |T_V(x)| = prod_a multinomial(n_a; row a of the pattern)
    const int d = P.d();
    double ls = 0;
    for (int a = 0; a < d; ++a) {
        ls += std::lgamma(double(P.counts[a]) + 1);
        for (int b = 0; b < d; ++b) ls -= std::lgamma(double(pattern[std::size_t(a) * d + b]) + 1);
    }
    return ls;
}

bool check_packing(const std::vector<Word>& words, const CompositionType& P, double rate_r) {
    const int d = P.d();
    const double slack = -P.n * (P.entropy() - rate_r);
    for (std::size_t i = 0; i < words.size(); ++i) {
        std::map<std::vector<long long>, long long> hits;
        for (std::size_t j = 0; j < words.size(); ++j) {
            if (j == i) continue;
            hits[conditional_pattern(words[i], words[j], d)] += 1;
        }
        for (const auto& [pattern, cnt] : hits) {
            if (std::log(double(cnt)) > log_pattern_class_size(pattern, P) + slack + 1e-12) return false;
        }
    }
    return true;
}

}  // namespace

Codebook build_codebook(const CompositionType& P, double rate_r, double rate_r1, RngStream& rng,
                        const CodebookOptions& opts) {
    Codebook book;
    book.n = P.n;
    book.composition = P;
    book.rate_r = rate_r;
    book.rate_r1 = rate_r1;

    const CodeSize ms = code_size(P.n, rate_r);
    const TypeClassSize tcs = type_class_size(P);
    if (ms.log_m > tcs.log_size + 1e-12) throw std::invalid_argument("build_codebook: message count exceeds |T_P|");
    if (!ms.representable || ms.m > opts.explicit_cap)
        throw std::length_error("build_codebook: message count above the explicit-materialization cap");
    const std::size_t m = std::size_t(ms.m);

    auto draw = [&]() {
        if (tcs.exact && *tcs.exact <= 4 * (unsigned long long)m) {
            // dense regime: sample without replacement from the full class
            auto all = enumerate_type_class(P);
            if (m > all.size()) throw std::invalid_argument("build_codebook: message count exceeds |T_P|");
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t j = i + std::size_t(rng.uniform_below(all.size() - i));
                std::swap(all[i], all[j]);
            }
            all.resize(m);
            return all;
        }
        std::set<Word> seen;
        std::vector<Word> out;
        Word w = sorted_base_word(P);
        while (out.size() < m) {
            shuffle_word(w, rng);
            if (seen.insert(w).second) out.push_back(w);
        }
        return out;
    };

    book.words = draw();
    if (opts.verify) {
        book.packing_checked = true;
        book.packing_verified = check_packing(book.words, P, rate_r);
        for (int attempt = 0; attempt < opts.verify_retry_cap && !book.packing_verified; ++attempt) {
            book.words = draw();
            book.packing_verified = check_packing(book.words, P, rate_r);
        }
    }
    return book;
}

bool packing_property_holds(const Codebook& book) { return check_packing(book.words, book.composition, book.rate_r); }

double group_average_ratio(const std::vector<Word>& words, const Word& ref, const Word& probe) {
    if (ref.size() != probe.size()) throw std::invalid_argument("group_average_ratio: length mismatch");
    int d = 0;
    for (auto s : ref) d = std::max(d, int(s) + 1);
    for (auto s : probe) d = std::max(d, int(s) + 1);
    const CompositionType P = word_composition(ref, d);
    const auto pattern = conditional_pattern(ref, probe, d);
    // orbit of probe under the stabilizer of ref = words sharing its pattern
    long long members = 0;
    for (const auto& w : words) {
        if (w == ref) continue;
        if (conditional_pattern(ref, w, d) == pattern) members++;
    }
    const double n = double(ref.size());
    const double log_lhs = members == 0
                               ? kNegInf
                               : std::log(double(members)) - log_pattern_class_size(pattern, P) - std::log(double(words.size()));
    const double log_rhs = -n * P.entropy() + std::pow(n, 0.25);
    return members == 0 ? 0.0 : std::exp(log_lhs - log_rhs);
}

double group_average_ratio_max(const Codebook& book, const Word& probe) {
    double r = 0;
    for (const auto& w : book.words) {
        if (w == probe) continue;
        r = std::max(r, group_average_ratio(book.words, w, probe));
    }
    return r;
}

void save_codebook(const Codebook& book, std::ostream& os) {
    os << "# n=" << book.n << " d=" << book.composition.d() << " M=" << book.words.size() << " R=" << book.rate_r
       << " R1=" << book.rate_r1 << "\n";
    for (const auto& w : book.words) {
        for (std::size_t i = 0; i < w.size(); ++i) os << (i ? " " : "") << int(w[i]);
        os << "\n";
    }
}

Codebook load_codebook(std::istream& is, int d) {
    Codebook book;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Word w;
        int v;
        while (ls >> v) {
            if (v < 0 || v >= d) throw std::runtime_error("load_codebook: symbol out of range");
            w.push_back(std::uint8_t(v));
        }
        if (!w.empty()) book.words.push_back(std::move(w));
    }
    if (book.words.empty()) throw std::runtime_error("load_codebook: no codewords");
    book.n = int(book.words.front().size());
    book.composition = word_composition(book.words.front(), d);
    for (const auto& w : book.words) {
        if (int(w.size()) != book.n) throw std::runtime_error("load_codebook: ragged codewords");
        if (!(word_composition(w, d) == book.composition))
            throw std::runtime_error("load_codebook: mixed compositions");
    }
    return book;
}

void save_codebook_file(const Codebook& book, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_codebook_file: cannot open " + path);
    save_codebook(book, os);
}

Codebook load_codebook_file(const std::string& path, int d) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_codebook_file: cannot open " + path);
    return load_codebook(is, d);
}

}  // namespace ucc
