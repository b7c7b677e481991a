#pragma once

#include "wba/lattice.hpp"
#include "wba/quasinorm.hpp"
#include "wba/rng.hpp"

#include <cstdint>
#include <vector>

namespace wba {

// Coordinates of a point of E_{d+1}: A from (x, y, phi) when d = 2, translation h.
struct EParams {
    int d = 1;
    double x = 0;
    double y = 1;
    double phi = 0;  // rotation angle over 2 pi, in [0,1)
    std::vector<double> h;
};

// Point of the modular domain |x| <= 1/2, x^2 + y^2 >= 1 with density y^{-2}.
void sample_modular_domain(Rng& rng, double& x, double& y);

EParams draw_E_params(int d, Rng& rng);

// u(v) * [[A, 0], [h^t, 1]] as a lattice; v = 0 gives the point of E_{d+1}.
UnimodularLattice build_section_lattice(const EParams& e, const std::vector<double>& v);

UnimodularLattice sample_E(int d, Rng& rng);

struct SectionSample {
    EParams base;
    std::vector<double> v;  // in [-1,1]^d, the closed unit w-ball
    SectionClass classification;
    bool ambiguous = false;
};

SectionSample draw_section_sample(int d, const WeightVector& w, Rng& rng);

struct MCEstimate {
    std::uint64_t n_samples = 0;  // classified samples
    std::uint64_t hits_B = 0;
    std::uint64_t n_ambiguous = 0;
    double p_hat = 0;
    double stderr_ = 0;
    std::uint64_t seed = 0;
    int d = 1;
    std::vector<mpq_class> w;
};

constexpr int kMcShards = 64;

MCEstimate estimate_B_probability(int d, const WeightVector& w, std::uint64_t n_samples, std::uint64_t seed,
                                  int jobs = 1);

// (1/zeta(d+1)) * Vol(unit w-ball); the same for every weight vector.
double section_total_mass(const WeightVector& w);
// kappa such that kappa * mass * p_hat reproduces 1/L_1 = 12 ln 2 / pi^2 at d = 1.
double calibration_kappa(const MCEstimate& d1);
double mu_B_estimate(const MCEstimate& est, const WeightVector& w, double kappa);

}  // namespace wba
