#include "wba/cross_section.hpp"

#include "wba/errors.hpp"
#include "wba/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace wba {

std::vector<mpz_class> CrossSectionOrbit::b_qs() const {
    std::vector<mpz_class> out;
    for (const auto& v : visits) {
        if (v.in_B) out.push_back(v.q);
    }
    return out;
}

int CrossSectionOrbit::max_b_visits_per_unit_time() const {
    std::vector<double> ts;
    for (const auto& v : visits) {
        if (v.in_B) ts.push_back(v.t);
    }
    int best = 0;
    std::size_t hi = 0;
    for (std::size_t lo = 0; lo < ts.size(); ++lo) {
        hi = std::max(hi, lo);
        while (hi < ts.size() && ts[hi] <= ts[lo] + 1.0) ++hi;
        best = std::max(best, static_cast<int>(hi - lo));
    }
    return best;
}

namespace {

double log_mpz(const mpz_class& z) {
    long e = 0;
    const double m = mpz_get_d_2exp(&e, z.get_mpz_t());
    return std::log(std::fabs(m)) + static_cast<double>(e) * M_LN2;
}

}  // namespace

CrossSectionOrbit cross_section_visits(const ThetaVector& theta, const WeightVector& w, double t_budget,
                                       const VisitOptions& opt) {
    if (theta.dim() != w.dim()) throw std::invalid_argument("theta and weights differ in dimension");
    const int d = theta.dim();
    CrossSectionOrbit orbit;
    orbit.t_budget = t_budget;
    OrbitEngine eng(make_theta_lattice(theta), FlowParams::vector_case(w), opt.max_bits);
    const mpz_class qcap = floor_exp(t_budget);
    std::vector<double> half(static_cast<size_t>(d + 1), 1.1);
    half[static_cast<size_t>(d)] = 1.1 * std::exp(1.0);
    mpz_class done = 0;
    std::set<mpz_class> pending;
    bool stop = false;
    for (long k = 0; !stop && static_cast<double>(k) <= t_budget; ++k) {
        eng.advance_to(static_cast<double>(k));
        for (const auto& c : enumerate_box(eng.basis(), half)) {
            auto z = eng.root_vector(c);
            const mpz_class& q = z[static_cast<size_t>(d)];
            if (q > done) pending.insert(q);
        }
        mpz_class horizon = floor_exp(static_cast<double>(k) + 1.0);
        if (horizon > qcap) horizon = qcap;
        while (!stop && !pending.empty() && *pending.begin() <= horizon) {
            const mpz_class q = *pending.begin();
            pending.erase(pending.begin());
            NearestP np = nearest_p(theta, q, w);
            const bool exact_hit = std::all_of(np.residual.begin(), np.residual.end(),
                                               [](const mpz_class& x) { return x == 0; });
            if (q >= 2) {
                // Some p with q ||q theta - p||_w <= 1 is needed for a visit at log q.
                const double lr = np.r.log_center() + log_mpz(q);
                if (exact_hit || lr <= 1e-9) {
                    try {
                        UnimodularLattice L = eng.lattice_at(mpq_class(q));
                        SectionClass sc = classify_section_point(L, w, opt.max_bits);
                        if (sc.kind != SectionClass::Kind::NotInS1) {
                            CrossSectionVisit v;
                            v.t = log_mpz(q);
                            std::vector<mpz_class> zz = eng.root_vector(sc.v);
                            v.q = zz[static_cast<size_t>(d)];
                            zz.pop_back();
                            v.p = std::move(zz);
                            v.r_of_visit = sc.r;
                            v.in_S1_sharp = sc.kind == SectionClass::Kind::S1Sharp;
                            v.in_B = sc.in_B;
                            v.d1_count = sc.d1_count;
                            orbit.visits.push_back(std::move(v));
                        }
                    } catch (const BoundaryAmbiguous&) {
                        ++orbit.skipped_ambiguous;
                    }
                }
            }
            if (exact_hit) {
                orbit.divergent = true;
                stop = true;
            }
        }
        done = horizon;
        if (horizon >= qcap) break;
    }
    return orbit;
}

namespace {

FirstReturn make_return(const CrossSectionVisit& a, const CrossSectionVisit& b) {
    FirstReturn fr;
    fr.t_return = b.t - a.t;
    fr.next = b;
    const long bits = a.r_of_visit.precision_bits();
    mpq_class ratio(b.q, a.q);
    ratio.canonicalize();
    fr.F = DyadicInterval::from_rational(ratio, bits) * a.r_of_visit;
    return fr;
}

}  // namespace

std::optional<FirstReturn> first_return(const CrossSectionVisit& visit, const ThetaVector& theta,
                                        const WeightVector& w, const VisitOptions& opt) {
    if (!visit.in_B) throw std::invalid_argument("first return starts from a B-visit");
    if (visit.r_of_visit.upper_double() <= 0) return std::nullopt;
    // F <= 1 bounds the return time by -log r.
    const double budget = visit.t - visit.r_of_visit.log_center() + 0.5;
    CrossSectionOrbit orbit = cross_section_visits(theta, w, budget, opt);
    for (const auto& v : orbit.visits) {
        if (v.in_B && v.q > visit.q) return make_return(visit, v);
    }
    return std::nullopt;
}

std::vector<FirstReturn> first_returns(const CrossSectionOrbit& orbit) {
    std::vector<FirstReturn> out;
    const CrossSectionVisit* prev = nullptr;
    for (const auto& v : orbit.visits) {
        if (!v.in_B) continue;
        if (prev) out.push_back(make_return(*prev, v));
        prev = &v;
    }
    return out;
}

}  // namespace wba
