#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "ucc/composition.hpp"
#include "ucc/rng.hpp"

namespace ucc {

using Word = std::vector<std::uint8_t>;

// Message-count formula: M = max(2, floor(exp(n R - n^{1/4}))).
struct CodeSize {
    double log_m = 0;                  // log of the real-valued count
    unsigned long long m = 0;          // saturated integer count
    bool representable = true;         // false when the count exceeds 2^62
};
CodeSize code_size(int n, double rate);

struct Codebook {
    int n = 0;
    CompositionType composition;
    double rate_r = 0;
    double rate_r1 = 0;
    std::vector<Word> words;
    bool packing_verified = false;  // verification ran and the bound held
    bool packing_checked = false;   // verification ran at all

    std::size_t size() const { return words.size(); }
};

struct CodebookOptions {
    bool verify = false;          // exhaustive packing verification (tiny n only)
    int verify_retry_cap = 50;    // resampling attempts on violation
    std::size_t explicit_cap = std::size_t(1) << 21;  // largest materializable M
};

// Draw M distinct words uniformly from the type class of P. Deterministic in
// the rng stream. Throws when M exceeds |T_P| or the explicit cap.
Codebook build_codebook(const CompositionType& P, double rate_r, double rate_r1, RngStream& rng,
                        const CodebookOptions& opts = {});

// Exhaustive packing inequality check over all conditional patterns:
// |T_V(x) ∩ (book ∖ {x})| <= |T_V(x)| e^{-n(H(P)-R)} for every codeword x.
bool packing_property_holds(const Codebook& book);

// Stabilizer-average ratio for inequality diagnostics: computes
//   avg_{g in S_ref} P_book(g(probe)) / ( e^{-n H(P)} e^{n^{1/4}} )
// for one reference word, and the max over codewords when ref is not given.
double group_average_ratio(const std::vector<Word>& words, const Word& ref, const Word& probe);
double group_average_ratio_max(const Codebook& book, const Word& probe);

// Line-oriented text round-trip: '#' comments, one codeword per line,
// symbols as space-separated integers.
void save_codebook(const Codebook& book, std::ostream& os);
Codebook load_codebook(std::istream& is, int d);
void save_codebook_file(const Codebook& book, const std::string& path);
Codebook load_codebook_file(const std::string& path, int d);

}  // namespace ucc
