#pragma once

#include "wba/interval.hpp"
#include "wba/precision.hpp"

#include <gmpxx.h>

#include <string>
#include <optional>
#include <vector>

namespace wba {

// "3/7", "-2" or a terminating decimal such as "0.25".
mpq_class parse_rational_text(const std::string& s);

class WeightVector {
public:
    explicit WeightVector(std::vector<mpq_class> entries);
    // "2/3,1/3" or "1".
    static WeightVector parse(const std::string& text);
    static WeightVector equal(int d);

    int dim() const { return static_cast<int>(w_.size()); }
    const mpq_class& operator[](int i) const { return w_[static_cast<size_t>(i)]; }
    double as_double(int i) const { return w_[static_cast<size_t>(i)].get_d(); }
    const std::vector<mpq_class>& entries() const { return w_; }

    // w_i = numerator(i) / denominator() with a common denominator.
    unsigned long denominator() const { return den_; }
    unsigned long numerator(int i) const { return num_[static_cast<size_t>(i)]; }

    const mpq_class& min_weight() const;
    const mpq_class& max_weight() const;
    std::string str() const;

    bool operator==(const WeightVector& o) const { return w_ == o.w_; }

private:
    std::vector<mpq_class> w_;
    std::vector<unsigned long> num_;
    unsigned long den_ = 1;
};

struct WVector {
    std::vector<DyadicInterval> coords;
    // Set by from_rationals; lets ties be settled exactly.
    std::optional<std::vector<mpq_class>> exact;

    WVector() = default;
    explicit WVector(std::vector<DyadicInterval> c) : coords(std::move(c)) {}
    static WVector from_rationals(const std::vector<mpq_class>& x, long bits = kStartBits);
    static WVector from_doubles(const std::vector<double>& x, long bits = kStartBits);

    int dim() const { return static_cast<int>(coords.size()); }
    long precision_bits() const;
};

// max_i |x_i|^{1/w_i}
DyadicInterval quasi_norm(const WVector& x, const WeightVector& w);

// Exact ordering of ||x||_w against ||y||_w. Precision doubles from start_bits up to
// max_bits; exact cross-exponentiation is used once intervals stall on point inputs.
Ordering quasi_norm_compare(const WVector& x, const WVector& y, const WeightVector& w,
                            long max_bits = default_max_bits());

// Coordinate i multiplied by e^{w_i s}.
WVector scale_w(const WVector& x, const DyadicInterval& s, const WeightVector& w);
WVector scale_w(const WVector& x, double s, const WeightVector& w);

// Product of nonnegative rationals raised to rational powers.
struct PowerProduct {
    struct Term {
        mpq_class base;
        mpq_class exponent;
    };
    std::vector<Term> terms;

    bool is_zero() const;
    DyadicInterval enclose(long bits) const;
};

Ordering compare_exact(const PowerProduct& a, const PowerProduct& b);

// ||x||_w for rational x, as the dominating term |x_i|^{1/w_i}.
PowerProduct quasi_norm_exact(const std::vector<mpq_class>& x, const WeightVector& w);
Ordering quasi_norm_compare_exact(const std::vector<mpq_class>& x,
                                  const std::vector<mpq_class>& y, const WeightVector& w);

// Constant of the weak triangle inequality, 2^{(1-w_d)/w_d}.
DyadicInterval weak_triangle_constant(const WeightVector& w, long bits = kStartBits);

// Volume of the closed unit w-ball in R^d. It is the cube [-1,1]^d for every w.
mpq_class unit_ball_volume(const WeightVector& w);

}  // namespace wba
