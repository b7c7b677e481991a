#include "wba/section_mc.hpp"

#include "wba/errors.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace wba {

void sample_modular_domain(Rng& rng, double& x, double& y) {
    const double y0 = std::sqrt(3.0) / 2.0;
    for (;;) {
        x = rng.uniform01() - 0.5;
        y = y0 / (1.0 - rng.uniform01());
        if (x * x + y * y >= 1.0) return;
    }
}

EParams draw_E_params(int d, Rng& rng) {
    if (d != 1 && d != 2) throw std::invalid_argument("sampling of E_{d+1} is implemented for d = 1, 2");
    EParams e;
    e.d = d;
    if (d == 2) {
        sample_modular_domain(rng, e.x, e.y);
        e.phi = rng.uniform01();
    }
    for (int i = 0; i < d; ++i) e.h.push_back(rng.uniform01());
    return e;
}

UnimodularLattice build_section_lattice(const EParams& e, const std::vector<double>& v) {
    const int d = e.d;
    if (static_cast<int>(v.size()) != d || static_cast<int>(e.h.size()) != d) {
        throw std::invalid_argument("section sample dimension mismatch");
    }
    if (d == 1) {
        const mpq_class h(e.h[0]), vv(v[0]);
        return UnimodularLattice::from_rational_basis({{1 + vv * h, h}, {vv, 1}}, UnimodularLattice::Origin::Sampled);
    }
    auto gen = [e, v](long bits) {
        IntervalMatrix m(3, bits);
        const DyadicInterval two_pi = mul_2si(DyadicInterval::pi(bits), 1);
        const DyadicInterval ang = two_pi * DyadicInterval::from_double(e.phi, bits);
        const DyadicInterval c = cos(ang), s = sin(ang);
        const DyadicInterval sy = sqrt(DyadicInterval::from_double(e.y, bits));
        const DyadicInterval x = DyadicInterval::from_double(e.x, bits);
        // R(phi) * [[1/sqrt y, x/sqrt y], [0, sqrt y]]
        DyadicInterval a[2][2] = {{c / sy, c * x / sy - s * sy}, {s / sy, s * x / sy + c * sy}};
        for (int i = 0; i < 2; ++i) {
            const DyadicInterval vi = DyadicInterval::from_double(v[static_cast<size_t>(i)], bits);
            for (int j = 0; j < 2; ++j) {
                m(i, j) = a[i][j] + vi * DyadicInterval::from_double(e.h[static_cast<size_t>(j)], bits);
            }
            m(i, 2) = vi;
        }
        for (int j = 0; j < 2; ++j) m(2, j) = DyadicInterval::from_double(e.h[static_cast<size_t>(j)], bits);
        m(2, 2) = DyadicInterval::from_integer(1, bits);
        return m;
    };
    return UnimodularLattice::from_generator(3, gen, UnimodularLattice::Origin::Sampled);
}

UnimodularLattice sample_E(int d, Rng& rng) {
    EParams e = draw_E_params(d, rng);
    return build_section_lattice(e, std::vector<double>(static_cast<size_t>(d), 0.0));
}

SectionSample draw_section_sample(int d, const WeightVector& w, Rng& rng) {
    if (w.dim() != d) throw std::invalid_argument("weight dimension must equal d");
    SectionSample s;
    s.base = draw_E_params(d, rng);
    for (int i = 0; i < d; ++i) s.v.push_back(rng.uniform(-1.0, 1.0));
    try {
        s.classification = classify_section_point(build_section_lattice(s.base, s.v), w);
    } catch (const BoundaryAmbiguous&) {
        s.ambiguous = true;
    }
    return s;
}

MCEstimate estimate_B_probability(int d, const WeightVector& w, std::uint64_t n_samples, std::uint64_t seed,
                                  int jobs) {
    if (d != 1 && d != 2) throw std::invalid_argument("estimate_B_probability supports d = 1, 2");
    if (n_samples == 0) throw std::invalid_argument("n_samples must be positive");
    struct Shard {
        std::uint64_t n = 0, hits = 0, ambiguous = 0;
    };
    std::vector<Shard> shards(kMcShards);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int k = next++; k < kMcShards; k = next++) {
            Shard& sh = shards[static_cast<size_t>(k)];
            const std::uint64_t count = n_samples / kMcShards + (static_cast<std::uint64_t>(k) < n_samples % kMcShards);
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
            for (std::uint64_t i = 0; i < count; ++i) {
                SectionSample s = draw_section_sample(d, w, rng);
                if (s.ambiguous) {
                    ++sh.ambiguous;
                    continue;
                }
                ++sh.n;
                if (s.classification.in_B) ++sh.hits;
            }
        }
    };
    jobs = std::max(1, std::min(jobs, kMcShards));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    MCEstimate est;
    est.seed = seed;
    est.d = d;
    est.w = w.entries();
    for (const auto& sh : shards) {
        est.n_samples += sh.n;
        est.hits_B += sh.hits;
        est.n_ambiguous += sh.ambiguous;
    }
    if (static_cast<double>(est.n_ambiguous) > 1e-3 * static_cast<double>(n_samples)) {
        throw AmbiguityBudgetExceeded(std::to_string(est.n_ambiguous) + " ambiguous samples out of " +
                                      std::to_string(n_samples));
    }
    if (est.n_samples > 0) {
        const double n = static_cast<double>(est.n_samples);
        est.p_hat = static_cast<double>(est.hits_B) / n;
        est.stderr_ = std::sqrt(est.p_hat * (1.0 - est.p_hat) / n);
    }
    return est;
}

double section_total_mass(const WeightVector& w) {
    return unit_ball_volume(w).get_d() / std::riemann_zeta(static_cast<double>(w.dim() + 1));
}

double calibration_kappa(const MCEstimate& d1) {
    if (d1.d != 1 || d1.p_hat <= 0) throw std::invalid_argument("calibration needs a d = 1 estimate");
    return std::log(2.0) / d1.p_hat;
}

double mu_B_estimate(const MCEstimate& est, const WeightVector& w, double kappa) {
    return kappa * section_total_mass(w) * est.p_hat;
}

}  // namespace wba
