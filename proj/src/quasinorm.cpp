#include "wba/quasinorm.hpp"

#include "wba/errors.hpp"

#include <algorithm>
#include <numeric>
#include <cctype>
#include <sstream>

namespace wba {

namespace {

mpq_class parse_rational(const std::string& s) {
    std::string t;
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    }
    if (t.empty()) throw ConfigError("empty rational");
    auto dot = t.find('.');
    if (dot != std::string::npos) {
        bool neg = t[0] == '-';
        std::string ip = t.substr(neg ? 1 : 0, dot - (neg ? 1 : 0));
        std::string fp = t.substr(dot + 1);
        if (fp.find_first_not_of("0123456789") != std::string::npos ||
            ip.find_first_not_of("0123456789") != std::string::npos) {
            throw ConfigError("bad decimal: " + s);
        }
        std::string digits = ip + fp;
        mpz_class num(digits.empty() ? std::string("0") : digits);
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, fp.size());
        mpq_class q(num, den);
        q.canonicalize();
        return neg ? mpq_class(-q) : q;
    }
    mpq_class q;
    if (q.set_str(t, 10) != 0 || q.get_den() == 0) throw ConfigError("bad rational: " + s);
    q.canonicalize();
    return q;
}

}  // namespace

mpq_class parse_rational_text(const std::string& s) { return parse_rational(s); }

WeightVector::WeightVector(std::vector<mpq_class> entries) : w_(std::move(entries)) {
    if (w_.empty()) throw ConfigError("weight vector must have d >= 1");
    mpq_class sum = 0;
    for (auto& x : w_) {
        x.canonicalize();
        if (x <= 0) throw ConfigError("weights must be strictly positive");
        sum += x;
    }
    if (sum != 1) throw ConfigError("weights must sum to 1");
    mpz_class l = 1;
    for (const auto& x : w_) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den().get_mpz_t());
    if (!l.fits_ulong_p()) throw ConfigError("weight denominators too large");
    den_ = l.get_ui();
    for (const auto& x : w_) {
        mpz_class n = x.get_num() * (l / x.get_den());
        num_.push_back(n.get_ui());
    }
}

WeightVector WeightVector::parse(const std::string& text) {
    std::vector<mpq_class> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(parse_rational(item));
    return WeightVector(std::move(v));
}

WeightVector WeightVector::equal(int d) {
    return WeightVector(std::vector<mpq_class>(static_cast<size_t>(d), mpq_class(1, d)));
}

const mpq_class& WeightVector::min_weight() const { return *std::min_element(w_.begin(), w_.end()); }

const mpq_class& WeightVector::max_weight() const { return *std::max_element(w_.begin(), w_.end()); }

std::string WeightVector::str() const {
    std::string s;
    for (size_t i = 0; i < w_.size(); ++i) {
        if (i) s += ',';
        s += w_[i].get_str();
    }
    return s;
}

WVector WVector::from_rationals(const std::vector<mpq_class>& x, long bits) {
    WVector v;
    for (const auto& q : x) v.coords.push_back(DyadicInterval::from_rational(q, bits));
    v.exact = x;
    return v;
}

WVector WVector::from_doubles(const std::vector<double>& x, long bits) {
    WVector v;
    for (double q : x) v.coords.push_back(DyadicInterval::from_double(q, bits));
    return v;
}

long WVector::precision_bits() const {
    long b = kStartBits;
    for (const auto& c : coords) b = std::max(b, c.precision_bits());
    return b;
}

namespace {

void check_dim(const WVector& x, const WeightVector& w) {
    if (x.dim() != w.dim()) throw std::invalid_argument("dimension mismatch between vector and weights");
}

DyadicInterval widen_to(const DyadicInterval& x, long bits) {
    if (x.precision_bits() >= bits) return x;
    DyadicInterval z = DyadicInterval::from_integer(0, bits);
    return x + z;
}

}  // namespace

DyadicInterval quasi_norm(const WVector& x, const WeightVector& w) {
    check_dim(x, w);
    const long bits = x.precision_bits();
    DyadicInterval best = DyadicInterval::from_integer(0, bits);
    for (int i = 0; i < w.dim(); ++i) {
        DyadicInterval a = abs(widen_to(x.coords[static_cast<size_t>(i)], bits));
        mpq_class e = 1 / w[i];
        best = max(best, pow(a, e));
    }
    return best;
}

namespace {

WVector with_bits(const WVector& x, long bits) {
    if (x.exact) return WVector::from_rationals(*x.exact, bits);
    WVector r;
    for (const auto& c : x.coords) r.coords.push_back(widen_to(c, bits));
    return r;
}

bool all_points(const WVector& x) {
    if (x.exact) return true;
    return std::all_of(x.coords.begin(), x.coords.end(), [](const DyadicInterval& c) { return c.is_point(); });
}

std::vector<mpq_class> exact_coords(const WVector& x) {
    if (x.exact) return *x.exact;
    std::vector<mpq_class> r;
    for (const auto& c : x.coords) r.push_back(c.exact_value());
    return r;
}

}  // namespace

Ordering quasi_norm_compare(const WVector& x, const WVector& y, const WeightVector& w, long max_bits) {
    check_dim(x, w);
    check_dim(y, w);
    const bool exact_ok = all_points(x) && all_points(y);
    long bits = std::max({kStartBits, x.precision_bits(), y.precision_bits()});
    for (int level = 0;; ++level) {
        auto o = certified_compare(quasi_norm(with_bits(x, bits), w), quasi_norm(with_bits(y, bits), w));
        if (o) return *o;
        // Point inputs that still overlap are near a tie; settle them exactly.
        if (exact_ok && level >= 1) break;
        if (bits >= max_bits) break;
        bits = std::min(bits * 2, max_bits);
    }
    if (exact_ok) return quasi_norm_compare_exact(exact_coords(x), exact_coords(y), w);
    throw UncertifiableComparison("quasi-norm intervals overlap at max precision");
}

WVector scale_w(const WVector& x, const DyadicInterval& s, const WeightVector& w) {
    check_dim(x, w);
    WVector r;
    for (int i = 0; i < w.dim(); ++i) {
        const auto& c = x.coords[static_cast<size_t>(i)];
        const long bits = std::max(c.precision_bits(), s.precision_bits());
        DyadicInterval f = exp(widen_to(s, bits) * DyadicInterval::from_rational(w[i], bits));
        r.coords.push_back(widen_to(c, bits) * f);
    }
    return r;
}

WVector scale_w(const WVector& x, double s, const WeightVector& w) {
    return scale_w(x, DyadicInterval::from_double(s, x.precision_bits()), w);
}

// ---- exact layer ----

bool PowerProduct::is_zero() const {
    return std::any_of(terms.begin(), terms.end(), [](const Term& t) { return t.base == 0 && t.exponent > 0; });
}

DyadicInterval PowerProduct::enclose(long bits) const {
    DyadicInterval r = DyadicInterval::from_integer(1, bits);
    if (is_zero()) return DyadicInterval::from_integer(0, bits);
    for (const auto& t : terms) {
        if (t.exponent == 0) continue;
        r = r * pow(DyadicInterval::from_rational(t.base, bits), t.exponent);
    }
    return r;
}

namespace {

mpq_class ipow(const mpq_class& b, const mpz_class& k) {
    if (!k.fits_ulong_p() && !mpz_class(-k).fits_ulong_p()) throw std::overflow_error("exponent too large");
    mpq_class r;
    unsigned long e = k >= 0 ? k.get_ui() : mpz_class(-k).get_ui();
    mpz_pow_ui(mpq_numref(r.get_mpq_t()), b.get_num().get_mpz_t(), e);
    mpz_pow_ui(mpq_denref(r.get_mpq_t()), b.get_den().get_mpz_t(), e);
    if (k < 0) r = 1 / r;
    return r;
}

}  // namespace

Ordering compare_exact(const PowerProduct& a, const PowerProduct& b) {
    const bool za = a.is_zero();
    const bool zb = b.is_zero();
    if (za || zb) {
        if (za && zb) return Ordering::EQ;
        return za ? Ordering::LT : Ordering::GT;
    }
    // Raise both sides to the lcm of exponent denominators.
    mpz_class l = 1;
    for (const auto* p : {&a, &b}) {
        for (const auto& t : p->terms) {
            if (t.base <= 0) throw std::domain_error("power product base must be positive");
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), t.exponent.get_den().get_mpz_t());
        }
    }
    auto eval = [&](const PowerProduct& p) {
        mpq_class v = 1;
        for (const auto& t : p.terms) {
            mpz_class k = t.exponent.get_num() * (l / t.exponent.get_den());
            if (k != 0) v *= ipow(t.base, k);
        }
        return v;
    };
    const int c = cmp(eval(a), eval(b));
    return c < 0 ? Ordering::LT : (c > 0 ? Ordering::GT : Ordering::EQ);
}

PowerProduct quasi_norm_exact(const std::vector<mpq_class>& x, const WeightVector& w) {
    if (static_cast<int>(x.size()) != w.dim()) throw std::invalid_argument("dimension mismatch");
    PowerProduct best{{{mpq_class(0), mpq_class(1)}}};
    for (int i = 0; i < w.dim(); ++i) {
        mpq_class a = abs(x[static_cast<size_t>(i)]);
        if (a == 0) continue;
        PowerProduct cand{{{a, 1 / w[i]}}};
        if (compare_exact(cand, best) == Ordering::GT) best = cand;
    }
    return best;
}

Ordering quasi_norm_compare_exact(const std::vector<mpq_class>& x, const std::vector<mpq_class>& y,
                                  const WeightVector& w) {
    return compare_exact(quasi_norm_exact(x, w), quasi_norm_exact(y, w));
}

DyadicInterval weak_triangle_constant(const WeightVector& w, long bits) {
    const mpq_class& wd = w.min_weight();
    return pow(DyadicInterval::from_integer(2, bits), (1 - wd) / wd);
}

mpq_class unit_ball_volume(const WeightVector& w) {
    // Product of the side lengths 2 * 1^{w_i}.
    mpq_class v = 1;
    for (int i = 0; i < w.dim(); ++i) v *= 2;
    return v;
}

}  // namespace wba
