#include "wba/interval.hpp"
#include "wba/precision.hpp"
#include "wba/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace wba;

TEST_CASE("rational enclosure and radius bound") {
    for (long bits : {64L, 128L, 512L}) {
        const mpq_class q(22, 7);
        auto x = DyadicInterval::from_rational(q, bits);
        CHECK(x.contains(q));
        CHECK(x.precision_bits() == bits);
        // relative radius within 2^{-bits + guard}
        mpq_class bound = mpq_class(1) * 4;
        mpz_class scale = 1;
        scale <<= static_cast<unsigned long>(bits - kGuardBits);
        CHECK(x.radius() * scale <= bound);
    }
    CHECK(DyadicInterval::from_rational(mpq_class(3, 8), 128).is_point());
    CHECK(DyadicInterval::from_integer(5, 128).exact_value() == 5);
}

TEST_CASE("arithmetic encloses the exact result") {
    Rng rng(1);
    for (int k = 0; k < 200; ++k) {
        mpq_class a(static_cast<long>(rng.next_u64() % 2001) - 1000, static_cast<long>(rng.next_u64() % 97) + 1);
        mpq_class b(static_cast<long>(rng.next_u64() % 2001) - 1000, static_cast<long>(rng.next_u64() % 89) + 1);
        a.canonicalize();
        b.canonicalize();
        auto A = DyadicInterval::from_rational(a, 96), B = DyadicInterval::from_rational(b, 96);
        CHECK((A + B).contains(a + b));
        CHECK((A - B).contains(a - b));
        CHECK((A * B).contains(a * b));
        if (b != 0) CHECK((A / B).contains(a / b));
        CHECK(abs(A).contains(abs(a)));
    }
}

TEST_CASE("transcendental functions") {
    const long bits = 200;
    auto two = DyadicInterval::from_integer(2, bits);
    auto l = log(two);
    CHECK(l.overlaps(DyadicInterval::ln2(bits)));
    CHECK(exp(l).contains(mpq_class(2)));
    CHECK(sqrt(DyadicInterval::from_integer(9, bits)).contains(mpq_class(3)));
    auto pi = DyadicInterval::pi(bits);
    CHECK(std::fabs(pi.center_double() - M_PI) < 1e-15);
    CHECK(cos(pi).contains(mpq_class(-1)));
    CHECK(std::fabs(sin(pi / DyadicInterval::from_integer(6, bits)).center_double() - 0.5) < 1e-15);
    CHECK(pow(DyadicInterval::from_integer(8, bits), mpq_class(2, 3)).contains(mpq_class(4)));
    CHECK(pow(DyadicInterval::from_integer(4, bits), mpq_class(-3, 2)).contains(mpq_class(1, 8)));
    CHECK(pow(DyadicInterval::from_integer(0, bits), mpq_class(5, 2)).contains(mpq_class(0)));
    CHECK(mul_2si(DyadicInterval::from_integer(3, bits), -2).exact_value() == mpq_class(3, 4));
}

TEST_CASE("certified comparison") {
    auto a = DyadicInterval::from_rational(mpq_class(1, 3), 128);
    auto b = DyadicInterval::from_rational(mpq_class(1, 3), 128);
    // equal values that are not points stay undecided
    CHECK_FALSE(certified_compare(a, b).has_value());
    auto p = DyadicInterval::from_rational(mpq_class(1, 4), 128);
    CHECK(certified_compare(p, DyadicInterval::from_rational(mpq_class(1, 4), 256)) == Ordering::EQ);
    CHECK(certified_compare(p, a) == Ordering::LT);
    CHECK(certified_compare(a, p) == Ordering::GT);
}

TEST_CASE("log of tiny and huge values") {
    auto tiny = pow(DyadicInterval::from_integer(2, 128), mpq_class(-5000));
    CHECK(std::fabs(tiny.log_center() + 5000 * std::log(2.0)) < 1e-9);
    CHECK(bits_for_time(10.0, 0.5) == static_cast<long>(std::ceil(15.0 / std::log(2.0))) + 128);
}
