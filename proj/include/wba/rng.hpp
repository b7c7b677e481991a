#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <random>

namespace wba {

std::uint64_t splitmix64(std::uint64_t x);
// Seed for an independent stream derived from (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// mt19937_64 with distribution code written out so streams match across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64() { return eng_(); }
    // Uniform on [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }
    // Uniform integer in [0, 2^bits).
    mpz_class random_bits(long bits);

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

}  // namespace wba
