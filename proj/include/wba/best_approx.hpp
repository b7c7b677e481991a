#pragma once

#include "wba/interval.hpp"
#include "wba/precision.hpp"
#include "wba/quasinorm.hpp"
#include "wba/theta.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <vector>

namespace wba {

struct BestApproxRecord {
    std::vector<mpz_class> p;
    mpz_class q;
    DyadicInterval r;
    bool certified = true;
    // q*theta - p, as numerators over theta.denominator.
    std::vector<mpz_class> residual;

    double log_q() const;
    double log_r() const;
};

struct BestApproxSequence {
    ThetaVector theta;
    std::vector<mpq_class> weights;
    std::vector<BestApproxRecord> records;
    bool terminal = false;
    mpz_class horizon_q = 0;
    long tie_events = 0;

    // beta_n = q_{n+1} r_n for consecutive records (0-based n).
    DyadicInterval beta(std::size_t n) const;
    std::vector<double> betas() const;
    std::vector<mpz_class> qs() const;
};

struct NearestP {
    std::vector<mpz_class> p;
    std::vector<mpz_class> residual;  // numerators of q*theta - p over theta.denominator
    DyadicInterval r;
    bool tie = false;
};

// Coordinatewise nearest integers to q*theta, half-integer ties rounded down.
NearestP nearest_p(const ThetaVector& theta, const mpz_class& q, const WeightVector& w, long bits = kStartBits);

// Literal scan over q = 1..q_max.
BestApproxSequence enumerate_best_approx_bruteforce(const ThetaVector& theta, const WeightVector& w,
                                                    std::uint64_t q_max);

struct EnumOptions {
    long max_bits = default_max_bits();
};

// Records found as lattice vectors entering the unit cylinder along the flow, windows of length 1.
BestApproxSequence enumerate_best_approx_fast(const ThetaVector& theta, const WeightVector& w, std::size_t n_max,
                                              double t_budget, const EnumOptions& opt = {});

// Records of the sup-norm first minimum along the same flow.
BestApproxSequence enumerate_regular_best_approx(const ThetaVector& theta, const WeightVector& w, std::size_t n_max,
                                                 double t_budget, const EnumOptions& opt = {});

struct PrefixAlignment {
    std::size_t k0;  // 1-based start in a
    std::size_t l0;  // 1-based start in b
    std::size_t overlap;
};

// Smallest alignment under which the computed tails agree to the common horizon.
std::optional<PrefixAlignment> prefix_equivalent(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b);

// Exact test q > 2^{1/w_d}.
bool exceeds_weight_threshold(const mpz_class& q, const WeightVector& w);

// floor(e^x), certified from below.
mpz_class floor_exp(double x);

}  // namespace wba
