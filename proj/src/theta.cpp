#include "wba/theta.hpp"

#include "wba/errors.hpp"
#include "wba/quasinorm.hpp"

#include <climits>
#include <sstream>

namespace wba {

mpq_class ThetaVector::coord(int i) const {
    mpq_class q(numerators[static_cast<size_t>(i)], denominator);
    q.canonicalize();
    return q;
}

std::vector<mpq_class> ThetaVector::coords() const {
    std::vector<mpq_class> r;
    for (int i = 0; i < dim(); ++i) r.push_back(coord(i));
    return r;
}

bool ThetaVector::is_zero() const {
    for (const auto& a : numerators) {
        if (a != 0) return false;
    }
    return true;
}

std::string ThetaVector::str() const {
    std::string s;
    for (int i = 0; i < dim(); ++i) {
        if (i) s += ',';
        s += coord(i).get_str();
    }
    return s;
}

long ThetaVector::orbit_bit_limit() const {
    return precision_bits > 0 ? precision_bits : LONG_MAX;
}

ThetaVector ThetaVector::from_rationals(const std::vector<mpq_class>& x) {
    if (x.empty()) throw ConfigError("theta must have d >= 1");
    ThetaVector t;
    mpz_class l = 1;
    for (auto q : x) {
        q.canonicalize();
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den().get_mpz_t());
    }
    t.denominator = l;
    for (auto q : x) {
        q.canonicalize();
        mpz_class n = q.get_num() * (l / q.get_den());
        mpz_fdiv_r(n.get_mpz_t(), n.get_mpz_t(), l.get_mpz_t());
        t.numerators.push_back(n);
    }
    return t;
}

ThetaVector ThetaVector::zero(int d) {
    return from_rationals(std::vector<mpq_class>(static_cast<size_t>(d), mpq_class(0)));
}

ThetaVector ThetaVector::sample(int d, long bits, Rng& rng) {
    if (bits < 64) throw ConfigError("sampled theta needs at least 64 bits");
    ThetaVector t;
    t.denominator = 1;
    t.denominator <<= bits;
    for (int i = 0; i < d; ++i) t.numerators.push_back(rng.random_bits(bits));
    t.precision_bits = bits;
    t.provenance = Provenance::Sampled;
    return t;
}

ThetaVector ThetaVector::truncate(const std::vector<DyadicInterval>& reals, long bits) {
    if (bits < 64) throw ConfigError("truncated theta needs at least 64 bits");
    ThetaVector t;
    t.denominator = 1;
    t.denominator <<= bits;
    for (const auto& x : reals) {
        mpq_class a = (x.center() - x.radius()) * t.denominator;
        mpq_class b = (x.center() + x.radius()) * t.denominator;
        mpz_class fa, fb;
        mpz_fdiv_q(fa.get_mpz_t(), a.get_num_mpz_t(), a.get_den_mpz_t());
        mpz_fdiv_q(fb.get_mpz_t(), b.get_num_mpz_t(), b.get_den_mpz_t());
        if (fa != fb) throw PrecisionExhausted("enclosure too wide to truncate", bits + 64, x.precision_bits());
        mpz_fdiv_r(fa.get_mpz_t(), fa.get_mpz_t(), t.denominator.get_mpz_t());
        t.numerators.push_back(fa);
    }
    t.precision_bits = bits;
    t.provenance = Provenance::UserSupplied;
    return t;
}

DyadicInterval golden_conjugate(long bits) {
    DyadicInterval five = DyadicInterval::from_integer(5, bits);
    return (sqrt(five) - DyadicInterval::from_integer(1, bits)) / DyadicInterval::from_integer(2, bits);
}

ThetaVector ThetaVector::parse(const std::string& text, long bits) {
    std::vector<std::string> tokens;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::string t;
        for (char c : item) {
            if (c != ' ') t += c;
        }
        tokens.push_back(t);
    }
    if (tokens.empty()) throw ConfigError("empty theta");
    bool irrational = false;
    for (const auto& t : tokens) irrational |= (t == "phi" || t.rfind("sqrt", 0) == 0);
    if (!irrational) {
        std::vector<mpq_class> q;
        for (const auto& t : tokens) q.push_back(parse_rational_text(t));
        return from_rationals(q);
    }
    const long work = bits + 64;
    std::vector<DyadicInterval> reals;
    for (const auto& t : tokens) {
        if (t == "phi") {
            reals.push_back(golden_conjugate(work));
        } else if (t.rfind("sqrt", 0) == 0) {
            long n = std::stol(t.substr(4));
            if (n < 0) throw ConfigError("sqrt of a negative number");
            DyadicInterval r = sqrt(DyadicInterval::from_integer(n, work));
            mpz_class fl;
            mpq_class c = r.center();
            mpz_fdiv_q(fl.get_mpz_t(), c.get_num_mpz_t(), c.get_den_mpz_t());
            reals.push_back(r - DyadicInterval::from_integer(fl, work));
        } else {
            reals.push_back(DyadicInterval::from_rational(parse_rational_text(t), work));
        }
    }
    return truncate(reals, bits);
}

}  // namespace wba
