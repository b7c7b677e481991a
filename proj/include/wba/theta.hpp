#pragma once

#include "wba/interval.hpp"
#include "wba/rng.hpp"

#include <gmpxx.h>

#include <string>
#include <vector>

namespace wba {

// theta_i = numerators[i] / denominator, reduced into [0,1).
struct ThetaVector {
    enum class Provenance { UserSupplied, Sampled };

    std::vector<mpz_class> numerators;
    mpz_class denominator = 1;
    // Bits of the dyadic truncation that produced theta; 0 for exact user rationals.
    long precision_bits = 0;
    Provenance provenance = Provenance::UserSupplied;

    int dim() const { return static_cast<int>(numerators.size()); }
    mpq_class coord(int i) const;
    std::vector<mpq_class> coords() const;
    bool is_zero() const;
    std::string str() const;

    // Largest orbit precision this theta can honestly support.
    long orbit_bit_limit() const;

    static ThetaVector from_rationals(const std::vector<mpq_class>& x);
    static ThetaVector zero(int d);
    // Uniform dyadic theta in [0,1)^d with denominator 2^bits.
    static ThetaVector sample(int d, long bits, Rng& rng);
    // floor(x_i 2^bits) / 2^bits for reals given by enclosures.
    static ThetaVector truncate(const std::vector<DyadicInterval>& reals, long bits);
    // Comma-separated tokens: rationals ("2/7", "0.25"), "phi" = (sqrt5-1)/2, "sqrtN" = frac(sqrt N).
    // Irrational tokens are truncated to bits.
    static ThetaVector parse(const std::string& text, long bits = 256);
};

// The golden-ratio conjugate (sqrt5 - 1)/2 as an enclosure.
DyadicInterval golden_conjugate(long bits);

}  // namespace wba
