#include "wba/rng.hpp"

namespace wba {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

mpz_class Rng::random_bits(long bits) {
    mpz_class r = 0;
    long left = bits;
    while (left > 0) {
        const long take = left >= 64 ? 64 : left;
        std::uint64_t chunk = next_u64();
        if (take < 64) chunk >>= (64 - take);
        mpz_class c;
        mpz_import(c.get_mpz_t(), 1, 1, sizeof chunk, 0, 0, &chunk);
        r <<= take;
        r += c;
        left -= take;
    }
    return r;
}

}  // namespace wba
