#pragma once

#include "wba/best_approx.hpp"
#include "wba/interval.hpp"
#include "wba/quasinorm.hpp"
#include "wba/theta.hpp"

#include <optional>
#include <vector>

namespace wba {

struct CrossSectionVisit {
    double t = 0;  // log q
    mpz_class q;
    std::vector<mpz_class> p;
    DyadicInterval r_of_visit;  // ||pi(a_t v)||_w = q ||q theta - p||_w
    bool in_S1_sharp = false;
    bool in_B = false;
    int d1_count = 0;
};

struct CrossSectionOrbit {
    std::vector<CrossSectionVisit> visits;  // lattices in S_1, in time order
    bool divergent = false;
    double t_budget = 0;
    long skipped_ambiguous = 0;

    std::vector<mpz_class> b_qs() const;
    // Largest number of B-visits in a closed time window of length 1.
    int max_b_visits_per_unit_time() const;
};

struct VisitOptions {
    long max_bits = default_max_bits();
};

// Visits of a_t Lambda_theta to S_1 for t in (0, t_budget].
CrossSectionOrbit cross_section_visits(const ThetaVector& theta, const WeightVector& w, double t_budget,
                                       const VisitOptions& opt = {});

struct FirstReturn {
    double t_return = 0;
    CrossSectionVisit next;
    DyadicInterval F;  // e^{t_return} r(Lambda)
};

// Next B-visit after a B-visit.
std::optional<FirstReturn> first_return(const CrossSectionVisit& visit, const ThetaVector& theta,
                                        const WeightVector& w, const VisitOptions& opt = {});

// Returns between consecutive B-visits of a computed orbit.
std::vector<FirstReturn> first_returns(const CrossSectionOrbit& orbit);

}  // namespace wba
