#pragma once

#include "wba/best_approx.hpp"
#include "wba/lattice.hpp"
#include "wba/quasinorm.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wba {

// Best-approximation records of sampled theta, one entry per theta.
struct ThetaRun {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    bool dropped = false;
    std::string drop_reason;
    std::vector<double> log_q;  // log q_1 .. log q_{N+1}
    std::vector<double> log_r;  // log r_1 .. log r_N
    std::vector<double> beta;   // beta_1 .. beta_N
};

struct SampleConfig {
    int d = 1;
    std::vector<mpq_class> w;
    std::size_t n_theta = 0;
    std::size_t n_records = 0;
    std::uint64_t seed = 0;
    long theta_bits = 4096;
    int jobs = 1;
};

// Theta i uses derive_seed(seed, i); results are in index order whatever the job count.
std::vector<ThetaRun> run_theta_sample(const SampleConfig& cfg);

// Ordinary least squares slope of y against x = first_n, first_n + 1, ...
double ols_slope(const std::vector<double>& y, std::size_t first_n = 1);

struct LevyEstimate {
    std::size_t n_records = 0;
    std::size_t n_used = 0;
    std::size_t n_dropped = 0;
    // Pooled means over theta, index n-1.
    std::vector<double> mean_log_q_over_n;
    std::vector<double> mean_log_r_over_n;
    std::vector<double> slope_q;  // per theta, OLS of log q_n on n
    std::vector<double> slope_r;  // per theta, OLS of log r_n on n
    double L_hat = 0;  // mean over theta of log q_N / N
    double L_hat_stderr = 0;
    double L_extrapolated = 0;  // mean over theta of the OLS slope of log q_n, n in [N/4, N]
    double L_extrapolated_stderr = 0;
};

LevyEstimate estimate_levy(const SampleConfig& cfg);
LevyEstimate summarize_levy(const std::vector<ThetaRun>& runs, std::size_t n_records);

struct BetaHistogram {
    std::vector<double> edges;  // bins + 1 edges on [0,1]
    std::vector<std::uint64_t> counts;
    std::uint64_t n_total = 0;
    std::uint64_t out_of_range = 0;  // values outside (0,1]
    std::vector<double> sorted_values;
    double max_ks_theta_vs_pool = 0;

    double cdf(double x) const;
};

BetaHistogram beta_distribution(const SampleConfig& cfg, int bins);
BetaHistogram beta_histogram(const std::vector<ThetaRun>& runs, int bins);
BetaHistogram histogram_of(std::vector<double> values, int bins);

// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(const std::vector<double>& sorted_a, const std::vector<double>& sorted_b);

struct Observable {
    enum class Kind { ChiK, ChiC };
    Kind kind = Kind::ChiK;
    double param = 0.5;  // epsilon for ChiK, z for ChiC

    static Observable chi_K(double eps) { return {Kind::ChiK, eps}; }
    static Observable chi_C(double z) { return {Kind::ChiC, z}; }
    std::string id() const;
};

struct ErgodicAverageCurve {
    std::string observable;
    double dt = 0.01;
    std::vector<double> T;
    std::vector<double> average;
    std::vector<std::uint64_t> uncertain_steps;  // counted as 1/2
    std::vector<double> error;                   // against the longest-T average
};

struct OrbitOptions {
    long max_bits = default_max_bits();
};

// Midpoint-rule averages (1/T) sum f(a_t x0) dt for every T in T_grid (increasing).
ErgodicAverageCurve birkhoff_average(const UnimodularLattice& x0, const FlowParams& fp, const Observable& f,
                                     const std::vector<double>& T_grid, double dt, const OrbitOptions& opt = {});

struct CuspRow {
    double eps = 0;
    double fraction = 0;  // orbit time with lambda_1 < eps, pooled
};

struct CuspTable {
    std::vector<CuspRow> rows;
    double slope = 0;  // log-log fit over rows with positive fraction
    double T = 0;
    double dt = 0;
    std::size_t n_theta = 0;
};

CuspTable cusp_scaling(const FlowParams& fp, const std::vector<ThetaVector>& thetas, const std::vector<double>& eps_grid,
                       double T, double dt = 0.01, const OrbitOptions& opt = {}, int jobs = 1);

// Euclidean and sup-norm first minima of a numeric basis, from a reduced basis and a small search.
struct NumericMinima {
    double sup = 0;
    double euclid = 0;
};
NumericMinima numeric_minima(const DMatrix& basis);

}  // namespace wba
