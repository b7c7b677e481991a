#include "wba/interval.hpp"

#include "wba/precision.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace wba {

const char* to_string(Ordering o) {
    switch (o) {
        case Ordering::LT: return "LT";
        case Ordering::EQ: return "EQ";
        case Ordering::GT: return "GT";
    }
    return "?";
}

long default_max_bits() {
    if (const char* env = std::getenv("WBA_LAB_MAX_BITS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 64) return v;
    }
    return kDefaultMaxBits;
}

long bits_for_time(double t, double max_weight) {
    if (t <= 0) return kStartBits;
    return static_cast<long>(std::ceil((1.0 + max_weight) * t / std::log(2.0))) + 128;
}

// ---- Mpfr ----

Mpfr::Mpfr(long bits) { mpfr_init2(v_, std::max<long>(bits, MPFR_PREC_MIN)); mpfr_set_zero(v_, 1); }

Mpfr::Mpfr(const Mpfr& other) {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
}

Mpfr::Mpfr(Mpfr&& other) noexcept {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_swap(v_, other.v_);
}

Mpfr& Mpfr::operator=(const Mpfr& other) {
    if (this != &other) {
        mpfr_set_prec(v_, mpfr_get_prec(other.v_));
        mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
}

Mpfr& Mpfr::operator=(Mpfr&& other) noexcept {
    if (this != &other) mpfr_swap(v_, other.v_);
    return *this;
}

Mpfr::~Mpfr() { mpfr_clear(v_); }

// ---- DyadicInterval ----

DyadicInterval::DyadicInterval() : DyadicInterval(kStartBits) {}

DyadicInterval::DyadicInterval(long bits) : lo_(bits), hi_(bits) {}

DyadicInterval DyadicInterval::from_integer(const mpz_class& z, long bits) {
    DyadicInterval r(bits);
    mpfr_set_z(r.lo_.get(), z.get_mpz_t(), MPFR_RNDD);
    mpfr_set_z(r.hi_.get(), z.get_mpz_t(), MPFR_RNDU);
    return r;
}

DyadicInterval DyadicInterval::from_rational(const mpq_class& q, long bits) {
    DyadicInterval r(bits);
    mpfr_set_q(r.lo_.get(), q.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(r.hi_.get(), q.get_mpq_t(), MPFR_RNDU);
    return r;
}

DyadicInterval DyadicInterval::from_double(double x, long bits) {
    DyadicInterval r(std::max<long>(bits, 53));
    mpfr_set_d(r.lo_.get(), x, MPFR_RNDD);
    mpfr_set_d(r.hi_.get(), x, MPFR_RNDU);
    return r;
}

DyadicInterval DyadicInterval::hull(const DyadicInterval& a, const DyadicInterval& b) {
    DyadicInterval r(std::max(a.precision_bits(), b.precision_bits()));
    mpfr_min(r.lo_.get(), a.lo(), b.lo(), MPFR_RNDD);
    mpfr_max(r.hi_.get(), a.hi(), b.hi(), MPFR_RNDU);
    return r;
}

DyadicInterval DyadicInterval::pi(long bits) {
    DyadicInterval r(bits);
    mpfr_const_pi(r.lo_.get(), MPFR_RNDD);
    mpfr_const_pi(r.hi_.get(), MPFR_RNDU);
    return r;
}

DyadicInterval DyadicInterval::ln2(long bits) {
    DyadicInterval r(bits);
    mpfr_const_log2(r.lo_.get(), MPFR_RNDD);
    mpfr_const_log2(r.hi_.get(), MPFR_RNDU);
    return r;
}

bool DyadicInterval::is_point() const { return mpfr_equal_p(lo(), hi()) != 0; }

bool DyadicInterval::contains_zero() const { return mpfr_sgn(lo()) <= 0 && mpfr_sgn(hi()) >= 0; }

bool DyadicInterval::is_nonnegative() const { return mpfr_sgn(lo()) >= 0; }

bool DyadicInterval::is_positive() const { return mpfr_sgn(lo()) > 0; }

bool DyadicInterval::contains(const mpq_class& q) const {
    return mpfr_cmp_q(lo(), q.get_mpq_t()) <= 0 && mpfr_cmp_q(hi(), q.get_mpq_t()) >= 0;
}

bool DyadicInterval::overlaps(const DyadicInterval& o) const {
    return mpfr_lessequal_p(lo(), o.hi()) && mpfr_lessequal_p(o.lo(), hi());
}

namespace {

mpq_class mpfr_to_q(mpfr_srcptr x) {
    if (mpfr_zero_p(x)) return 0;
    mpz_class m;
    mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), x);
    mpq_class q(m);
    if (e >= 0) {
        mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
    } else {
        mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
    }
    return q;
}

}  // namespace

mpq_class DyadicInterval::center() const {
    mpq_class c = mpfr_to_q(lo()) + mpfr_to_q(hi());
    return c / 2;
}

mpq_class DyadicInterval::radius() const {
    mpq_class r = mpfr_to_q(hi()) - mpfr_to_q(lo());
    return r / 2;
}

double DyadicInterval::center_double() const {
    Mpfr s(precision_bits() + 1);
    mpfr_add(s.get(), lo(), hi(), MPFR_RNDN);
    mpfr_div_2ui(s.get(), s.get(), 1, MPFR_RNDN);
    return mpfr_get_d(s.get(), MPFR_RNDN);
}

double DyadicInterval::radius_double() const {
    Mpfr s(precision_bits() + 1);
    mpfr_sub(s.get(), hi(), lo(), MPFR_RNDU);
    mpfr_div_2ui(s.get(), s.get(), 1, MPFR_RNDU);
    return mpfr_get_d(s.get(), MPFR_RNDU);
}

double DyadicInterval::lower_double() const { return mpfr_get_d(lo(), MPFR_RNDD); }

double DyadicInterval::upper_double() const { return mpfr_get_d(hi(), MPFR_RNDU); }

double DyadicInterval::log_center() const {
    Mpfr s(precision_bits() + 1);
    mpfr_add(s.get(), lo(), hi(), MPFR_RNDN);
    mpfr_div_2ui(s.get(), s.get(), 1, MPFR_RNDN);
    mpfr_abs(s.get(), s.get(), MPFR_RNDN);
    if (mpfr_zero_p(s.get())) return -HUGE_VAL;
    mpfr_log(s.get(), s.get(), MPFR_RNDN);
    return mpfr_get_d(s.get(), MPFR_RNDN);
}

double DyadicInterval::relative_width() const {
    if (is_point()) return 0.0;
    Mpfr w(64), m(64);
    mpfr_sub(w.get(), hi(), lo(), MPFR_RNDU);
    mpfr_abs(m.get(), lo(), MPFR_RNDD);
    Mpfr m2(64);
    mpfr_abs(m2.get(), hi(), MPFR_RNDD);
    mpfr_max(m.get(), m.get(), m2.get(), MPFR_RNDD);
    if (mpfr_zero_p(m.get())) return HUGE_VAL;
    mpfr_div(w.get(), w.get(), m.get(), MPFR_RNDU);
    return mpfr_get_d(w.get(), MPFR_RNDU);
}

std::string DyadicInterval::str() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", center_double());
    return buf;
}

mpq_class DyadicInterval::exact_value() const {
    if (!is_point()) throw std::logic_error("exact_value on a non-point interval");
    return mpfr_to_q(lo());
}

namespace {

long prec2(const DyadicInterval& a, const DyadicInterval& b) {
    return std::max(a.precision_bits(), b.precision_bits());
}

}  // namespace

DyadicInterval operator+(const DyadicInterval& a, const DyadicInterval& b) {
    DyadicInterval r(prec2(a, b));
    mpfr_add(r.lo_.get(), a.lo(), b.lo(), MPFR_RNDD);
    mpfr_add(r.hi_.get(), a.hi(), b.hi(), MPFR_RNDU);
    return r;
}

DyadicInterval operator-(const DyadicInterval& a, const DyadicInterval& b) {
    DyadicInterval r(prec2(a, b));
    mpfr_sub(r.lo_.get(), a.lo(), b.hi(), MPFR_RNDD);
    mpfr_sub(r.hi_.get(), a.hi(), b.lo(), MPFR_RNDU);
    return r;
}

DyadicInterval operator-(const DyadicInterval& a) {
    DyadicInterval r(a.precision_bits());
    mpfr_neg(r.lo_.get(), a.hi(), MPFR_RNDD);
    mpfr_neg(r.hi_.get(), a.lo(), MPFR_RNDU);
    return r;
}

DyadicInterval operator*(const DyadicInterval& a, const DyadicInterval& b) {
    const long p = prec2(a, b);
    DyadicInterval r(p);
    Mpfr t(p);
    mpfr_srcptr as[2] = {a.lo(), a.hi()};
    mpfr_srcptr bs[2] = {b.lo(), b.hi()};
    bool first = true;
    for (auto x : as) {
        for (auto y : bs) {
            mpfr_mul(t.get(), x, y, MPFR_RNDD);
            if (first || mpfr_less_p(t.get(), r.lo_.get())) mpfr_set(r.lo_.get(), t.get(), MPFR_RNDD);
            mpfr_mul(t.get(), x, y, MPFR_RNDU);
            if (first || mpfr_greater_p(t.get(), r.hi_.get())) mpfr_set(r.hi_.get(), t.get(), MPFR_RNDU);
            first = false;
        }
    }
    return r;
}

DyadicInterval operator/(const DyadicInterval& a, const DyadicInterval& b) {
    if (b.contains_zero()) throw std::domain_error("interval division by an interval containing 0");
    const long p = prec2(a, b);
    DyadicInterval r(p);
    Mpfr t(p);
    mpfr_srcptr as[2] = {a.lo(), a.hi()};
    mpfr_srcptr bs[2] = {b.lo(), b.hi()};
    bool first = true;
    for (auto x : as) {
        for (auto y : bs) {
            mpfr_div(t.get(), x, y, MPFR_RNDD);
            if (first || mpfr_less_p(t.get(), r.lo_.get())) mpfr_set(r.lo_.get(), t.get(), MPFR_RNDD);
            mpfr_div(t.get(), x, y, MPFR_RNDU);
            if (first || mpfr_greater_p(t.get(), r.hi_.get())) mpfr_set(r.hi_.get(), t.get(), MPFR_RNDU);
            first = false;
        }
    }
    return r;
}

DyadicInterval abs(const DyadicInterval& a) {
    if (mpfr_sgn(a.lo()) >= 0) return a;
    if (mpfr_sgn(a.hi()) <= 0) return -a;
    DyadicInterval r(a.precision_bits());
    mpfr_set_zero(r.lo_.get(), 1);
    mpfr_neg(r.hi_.get(), a.lo(), MPFR_RNDU);
    mpfr_max(r.hi_.get(), r.hi_.get(), a.hi(), MPFR_RNDU);
    return r;
}

DyadicInterval exp(const DyadicInterval& a) {
    DyadicInterval r(a.precision_bits());
    mpfr_exp(r.lo_.get(), a.lo(), MPFR_RNDD);
    mpfr_exp(r.hi_.get(), a.hi(), MPFR_RNDU);
    return r;
}

DyadicInterval log(const DyadicInterval& a) {
    if (!a.is_positive()) throw std::domain_error("log of an interval not bounded away from 0");
    DyadicInterval r(a.precision_bits());
    mpfr_log(r.lo_.get(), a.lo(), MPFR_RNDD);
    mpfr_log(r.hi_.get(), a.hi(), MPFR_RNDU);
    return r;
}

DyadicInterval sqrt(const DyadicInterval& a) {
    if (mpfr_sgn(a.hi()) < 0) throw std::domain_error("sqrt of a negative interval");
    DyadicInterval r(a.precision_bits());
    if (mpfr_sgn(a.lo()) <= 0) {
        mpfr_set_zero(r.lo_.get(), 1);
    } else {
        mpfr_sqrt(r.lo_.get(), a.lo(), MPFR_RNDD);
    }
    mpfr_sqrt(r.hi_.get(), a.hi(), MPFR_RNDU);
    return r;
}

// cos and sin are 1-Lipschitz: enclose f over [lo, hi] by f(lo) plus the width.
DyadicInterval DyadicInterval::unit_lipschitz(const DyadicInterval& a, bool use_sin) {
    const long p = a.precision_bits();
    DyadicInterval r(p);
    Mpfr w(p);
    mpfr_sub(w.get(), a.hi(), a.lo(), MPFR_RNDU);
    auto f = use_sin ? mpfr_sin : mpfr_cos;
    f(r.lo_.get(), a.lo(), MPFR_RNDD);
    f(r.hi_.get(), a.lo(), MPFR_RNDU);
    mpfr_sub(r.lo_.get(), r.lo_.get(), w.get(), MPFR_RNDD);
    mpfr_add(r.hi_.get(), r.hi_.get(), w.get(), MPFR_RNDU);
    if (mpfr_cmp_si(r.lo_.get(), -1) < 0) mpfr_set_si(r.lo_.get(), -1, MPFR_RNDD);
    if (mpfr_cmp_si(r.hi_.get(), 1) > 0) mpfr_set_si(r.hi_.get(), 1, MPFR_RNDU);
    return r;
}

DyadicInterval cos(const DyadicInterval& a) { return DyadicInterval::unit_lipschitz(a, false); }

DyadicInterval sin(const DyadicInterval& a) { return DyadicInterval::unit_lipschitz(a, true); }

DyadicInterval pow(const DyadicInterval& a, const mpq_class& e) {
    if (mpfr_sgn(a.lo()) < 0) throw std::domain_error("pow of an interval with negative part");
    const long p = a.precision_bits();
    if (e == 0) return DyadicInterval::from_integer(1, p);
    if (e < 0) return DyadicInterval::from_integer(1, p) / pow(a, -e);
    const unsigned long num = e.get_num().get_ui();
    const unsigned long den = e.get_den().get_ui();
    if (!e.get_num().fits_ulong_p() || !e.get_den().fits_ulong_p()) {
        throw std::domain_error("exponent too large");
    }
    DyadicInterval r(p);
    // x^{num/den} = (x^{1/den})^{num}; both steps are monotone on x >= 0.
    mpfr_rootn_ui(r.lo_.get(), a.lo(), den, MPFR_RNDD);
    mpfr_pow_ui(r.lo_.get(), r.lo_.get(), num, MPFR_RNDD);
    mpfr_rootn_ui(r.hi_.get(), a.hi(), den, MPFR_RNDU);
    mpfr_pow_ui(r.hi_.get(), r.hi_.get(), num, MPFR_RNDU);
    return r;
}

DyadicInterval max(const DyadicInterval& a, const DyadicInterval& b) {
    DyadicInterval r(prec2(a, b));
    mpfr_max(r.lo_.get(), a.lo(), b.lo(), MPFR_RNDD);
    mpfr_max(r.hi_.get(), a.hi(), b.hi(), MPFR_RNDU);
    return r;
}

DyadicInterval min(const DyadicInterval& a, const DyadicInterval& b) {
    DyadicInterval r(prec2(a, b));
    mpfr_min(r.lo_.get(), a.lo(), b.lo(), MPFR_RNDD);
    mpfr_min(r.hi_.get(), a.hi(), b.hi(), MPFR_RNDU);
    return r;
}

DyadicInterval mul_2si(const DyadicInterval& a, long k) {
    DyadicInterval r(a.precision_bits());
    mpfr_mul_2si(r.lo_.get(), a.lo(), k, MPFR_RNDD);
    mpfr_mul_2si(r.hi_.get(), a.hi(), k, MPFR_RNDU);
    return r;
}

std::optional<Ordering> certified_compare(const DyadicInterval& a, const DyadicInterval& b) {
    if (mpfr_less_p(a.hi(), b.lo())) return Ordering::LT;
    if (mpfr_greater_p(a.lo(), b.hi())) return Ordering::GT;
    if (a.is_point() && b.is_point() && mpfr_equal_p(a.lo(), b.lo())) return Ordering::EQ;
    return std::nullopt;
}

}  // namespace wba
