#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <optional>
#include <string>

namespace wba {

enum class Ordering { LT, EQ, GT };

const char* to_string(Ordering o);

// Owning wrapper around mpfr_t.
class Mpfr {
public:
    explicit Mpfr(long bits);
    Mpfr(const Mpfr& other);
    Mpfr(Mpfr&& other) noexcept;
    Mpfr& operator=(const Mpfr& other);
    Mpfr& operator=(Mpfr&& other) noexcept;
    ~Mpfr();

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    long bits() const { return static_cast<long>(mpfr_get_prec(v_)); }

private:
    mpfr_t v_;
    bool live_ = true;
};

// Closed interval [lo, hi] with MPFR endpoints, rounded outward.
class DyadicInterval {
public:
    DyadicInterval();
    explicit DyadicInterval(long bits);

    static DyadicInterval from_integer(const mpz_class& z, long bits);
    static DyadicInterval from_rational(const mpq_class& q, long bits);
    static DyadicInterval from_double(double x, long bits);
    static DyadicInterval hull(const DyadicInterval& a, const DyadicInterval& b);
    static DyadicInterval pi(long bits);
    static DyadicInterval ln2(long bits);

    long precision_bits() const { return lo_.bits(); }
    mpfr_srcptr lo() const { return lo_.get(); }
    mpfr_srcptr hi() const { return hi_.get(); }

    bool is_point() const;
    bool contains_zero() const;
    bool is_nonnegative() const;
    bool is_positive() const;
    bool contains(const mpq_class& q) const;
    bool overlaps(const DyadicInterval& o) const;

    // Exact dyadic center and radius.
    mpq_class center() const;
    mpq_class radius() const;
    double center_double() const;
    double radius_double() const;
    double lower_double() const;
    double upper_double() const;
    // log|center|, safe for values far outside double range.
    double log_center() const;
    // Relative width, 0 for points.
    double relative_width() const;

    std::string str() const;

    // Point endpoints as exact rationals; throws unless is_point().
    mpq_class exact_value() const;

    friend DyadicInterval operator+(const DyadicInterval& a, const DyadicInterval& b);
    friend DyadicInterval operator-(const DyadicInterval& a, const DyadicInterval& b);
    friend DyadicInterval operator*(const DyadicInterval& a, const DyadicInterval& b);
    friend DyadicInterval operator/(const DyadicInterval& a, const DyadicInterval& b);
    friend DyadicInterval operator-(const DyadicInterval& a);

    friend DyadicInterval abs(const DyadicInterval& a);
    friend DyadicInterval exp(const DyadicInterval& a);
    friend DyadicInterval log(const DyadicInterval& a);
    friend DyadicInterval sqrt(const DyadicInterval& a);
    friend DyadicInterval cos(const DyadicInterval& a);
    friend DyadicInterval sin(const DyadicInterval& a);
    // a^e for a >= 0 and rational e.
    friend DyadicInterval pow(const DyadicInterval& a, const mpq_class& e);
    friend DyadicInterval max(const DyadicInterval& a, const DyadicInterval& b);
    friend DyadicInterval min(const DyadicInterval& a, const DyadicInterval& b);
    friend DyadicInterval mul_2si(const DyadicInterval& a, long k);

    // Ordering when certified by disjointness or exact equality of points.
    friend std::optional<Ordering> certified_compare(const DyadicInterval& a,
                                                     const DyadicInterval& b);

private:
    static DyadicInterval unit_lipschitz(const DyadicInterval& a, bool use_sin);

    Mpfr lo_;
    Mpfr hi_;
};

}  // namespace wba
