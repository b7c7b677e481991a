#include "oracles.hpp"
#include "wba/errors.hpp"
#include "wba/quasinorm.hpp"
#include "wba/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace wba;

namespace {

WVector wv(std::vector<mpq_class> x) { return WVector::from_rationals(x); }

}  // namespace

TEST_CASE("weight vector validation") {
    CHECK_NOTHROW(WeightVector::parse("2/3,1/3"));
    CHECK_THROWS(WeightVector::parse("1/2,1/3"));
    CHECK_THROWS(WeightVector::parse("3/2,-1/2"));
    CHECK_THROWS(WeightVector::parse(""));
    auto w = WeightVector::parse("1/2, 1/4, 1/4");
    CHECK(w.dim() == 3);
    CHECK(w.denominator() == 4);
    CHECK(w.numerator(0) == 2);
    CHECK(WeightVector::equal(3)[1] == mpq_class(1, 3));
}

TEST_CASE("quasi-norm values") {
    auto w2 = WeightVector::parse("1/2,1/2");
    CHECK(quasi_norm(wv({0, 0}), w2).exact_value() == 0);
    CHECK(quasi_norm(wv({0, 0, 0}), WeightVector::equal(3)).exact_value() == 0);
    CHECK(quasi_norm(wv({mpq_class(1, 4), mpq_class(1, 9)}), w2).contains(mpq_class(1, 16)));
    auto v = quasi_norm(wv({mpq_class(1, 2), mpq_class(1, 2)}), WeightVector::parse("2/3,1/3"));
    CHECK(std::fabs(v.center_double() - std::pow(2.0, -1.5)) < 1e-15);
    CHECK(quasi_norm(wv({1, -1}), WeightVector::parse("2/3,1/3")).exact_value() == 1);
    CHECK_THROWS(quasi_norm(wv({1}), w2));
}

TEST_CASE("quasi-norm comparison examples") {
    auto w2 = WeightVector::parse("1/2,1/2");
    CHECK(quasi_norm_compare(wv({0, 0}), wv({1, 0}), w2) == Ordering::LT);
    CHECK(quasi_norm_compare(wv({mpq_class(3, 10), mpq_class(3, 10)}), wv({mpq_class(3, 10), mpq_class(7, 10)}), w2) ==
          Ordering::LT);
    CHECK(quasi_norm_compare(wv({mpq_class(1, 4), mpq_class(1, 9)}), wv({mpq_class(1, 9), mpq_class(1, 4)}), w2) ==
          Ordering::EQ);
}

TEST_CASE("comparison agrees with exact cross-exponentiation") {
    Rng rng(5);
    const std::vector<std::string> ws{"1", "1/2,1/2", "2/3,1/3", "3/4,1/4", "1/2,1/4,1/4", "1/3,1/3,1/3", "3/5,1/5,1/5"};
    int n_eq = 0;
    for (const auto& wt : ws) {
        auto w = WeightVector::parse(wt);
        for (int k = 0; k < 150; ++k) {
            std::vector<mpq_class> x, y;
            for (int i = 0; i < w.dim(); ++i) {
                // small numerators make exact ties common
                x.emplace_back(static_cast<long>(rng.next_u64() % 7) - 3, static_cast<long>(rng.next_u64() % 4) + 1);
                y.emplace_back(static_cast<long>(rng.next_u64() % 7) - 3, static_cast<long>(rng.next_u64() % 4) + 1);
                x.back().canonicalize();
                y.back().canonicalize();
            }
            const int o = oracle::compare_quasi_norms(x, y, w.entries());
            const Ordering got = quasi_norm_compare(wv(x), wv(y), w);
            CHECK(got == (o < 0 ? Ordering::LT : (o > 0 ? Ordering::GT : Ordering::EQ)));
            CHECK(quasi_norm_compare_exact(x, y, w) == got);
            n_eq += got == Ordering::EQ;
        }
    }
    CHECK(n_eq > 20);
}

TEST_CASE("scale_w examples") {
    auto w2 = WeightVector::parse("1/2,1/2");
    auto x = wv({mpq_class(1, 4), mpq_class(1, 9)});
    auto y = scale_w(x, 0.0, w2);
    CHECK(y.coords[0].contains(mpq_class(1, 4)));
    auto s = log(DyadicInterval::from_integer(4, 128));
    auto z = scale_w(x, s, w2);
    CHECK(z.coords[0].contains(mpq_class(1, 2)));
    CHECK(z.coords[1].contains(mpq_class(2, 9)));
    CHECK(quasi_norm(z, w2).contains(mpq_class(1, 4)));
}

TEST_CASE("property: homogeneity, round trip, monotonicity, weak triangle") {
    Rng rng(9);
    for (const auto& wt : {"1", "1/2,1/2", "2/3,1/3", "1/2,1/4,1/4"}) {
        auto w = WeightVector::parse(wt);
        const auto C = weak_triangle_constant(w);
        for (int k = 0; k < 200; ++k) {
            std::vector<double> a, b, big;
            for (int i = 0; i < w.dim(); ++i) {
                a.push_back(rng.uniform(-2, 2));
                b.push_back(rng.uniform(-2, 2));
                big.push_back(a.back() + std::copysign(rng.uniform01(), a.back()));
            }
            auto x = WVector::from_doubles(a), y = WVector::from_doubles(b);
            const double s = rng.uniform(-3, 3);
            auto lhs = quasi_norm(scale_w(x, s, w), w);
            auto rhs = exp(DyadicInterval::from_double(s, 128)) * quasi_norm(x, w);
            CHECK(lhs.overlaps(rhs));
            auto back = scale_w(scale_w(x, 1.0, w), -1.0, w);
            for (int i = 0; i < w.dim(); ++i) CHECK(back.coords[i].contains(mpq_class(a[static_cast<size_t>(i)])));
            CHECK(quasi_norm_compare(x, WVector::from_doubles(big), w) != Ordering::GT);
            WVector sum;
            for (int i = 0; i < w.dim(); ++i) sum.coords.push_back(x.coords[i] + y.coords[i]);
            auto bound = C * (quasi_norm(x, w) + quasi_norm(y, w));
            CHECK(quasi_norm(sum, w).lower_double() <= bound.upper_double());
        }
    }
}

TEST_CASE("weak triangle constant and ball volume") {
    CHECK(weak_triangle_constant(WeightVector::parse("1")).contains(mpq_class(1)));
    CHECK(weak_triangle_constant(WeightVector::parse("2/3,1/3")).contains(mpq_class(4)));
    for (const auto& wt : {"1/2,1/2", "2/3,1/3", "3/4,1/4"}) CHECK(unit_ball_volume(WeightVector::parse(wt)) == 4);
    CHECK(unit_ball_volume(WeightVector::parse("1/2,1/4,1/4")) == 8);
}

TEST_CASE("power products compare exactly") {
    PowerProduct a{{{mpq_class(1, 4), mpq_class(2)}}};          // 1/16
    PowerProduct b{{{mpq_class(1, 2), mpq_class(4)}}};          // 1/16
    PowerProduct c{{{mpq_class(2), mpq_class(1, 3)}, {mpq_class(1, 2), mpq_class(1)}}};
    CHECK(compare_exact(a, b) == Ordering::EQ);
    CHECK(compare_exact(c, a) == Ordering::GT);
    CHECK(c.enclose(128).contains(mpq_class(1, 2)) == false);
    CHECK(std::fabs(c.enclose(128).center_double() - std::cbrt(2.0) / 2) < 1e-15);
}
