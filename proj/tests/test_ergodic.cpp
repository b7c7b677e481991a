#include "oracles.hpp"
#include "wba/ergodic.hpp"
#include "wba/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace wba;

namespace {

SampleConfig config(int d, const char* w, std::size_t n_theta, std::size_t n_records, std::uint64_t seed) {
    SampleConfig c;
    c.d = d;
    c.w = WeightVector::parse(w).entries();
    c.n_theta = n_theta;
    c.n_records = n_records;
    c.seed = seed;
    c.theta_bits = 1024;
    return c;
}

}  // namespace

TEST_CASE("ols slope of exact lines") {
    CHECK(ols_slope({1, 3, 5, 7}) == doctest::Approx(2));
    CHECK(ols_slope({4, 4, 4}, 10) == doctest::Approx(0).epsilon(1e-12));
    std::vector<double> y;
    for (int n = 5; n < 40; ++n) y.push_back(-0.5 * n + 3);
    CHECK(ols_slope(y, 5) == doctest::Approx(-0.5));
}

TEST_CASE("histogram bins are (e_k, e_k+1] and n_total counts in-range values") {
    auto h = histogram_of({0.0, 0.1, 0.25, 0.5, 1.0, 1.5, 0.75}, 4);
    REQUIRE(h.counts.size() == 4);
    CHECK(h.edges.front() == 0.0);
    CHECK(h.edges.back() == 1.0);
    CHECK(h.counts[0] == 2);
    CHECK(h.counts[1] == 1);
    CHECK(h.counts[2] == 1);
    CHECK(h.counts[3] == 1);
    CHECK(h.out_of_range == 2);
    std::uint64_t s = 0;
    for (auto c : h.counts) s += c;
    CHECK(s == h.n_total);
}

TEST_CASE("ks distance") {
    std::vector<double> a{0.1, 0.2, 0.3}, b{0.1, 0.2, 0.3}, c{0.6, 0.7, 0.8};
    CHECK(ks_distance(a, b) == 0.0);
    CHECK(ks_distance(a, c) == doctest::Approx(1.0));
    CHECK(ks_distance({0.1, 0.5}, {0.3}) == doctest::Approx(0.5));
}

TEST_CASE("d=1 sampled runs reproduce continued fraction data") {
    auto cfg = config(1, "1", 6, 40, 11);
    auto runs = run_theta_sample(cfg);
    REQUIRE(runs.size() == 6);
    for (const auto& run : runs) {
        REQUIRE_FALSE(run.dropped);
        Rng rng(run.seed);
        auto theta = ThetaVector::sample(1, cfg.theta_bits, rng);
        auto betas = oracle::cf_betas(theta.coord(0), 60);
        auto qs = oracle::cf_denominators(theta.coord(0), mpz_class(1) << 200);
        REQUIRE(qs.size() > 41);
        REQUIRE(betas.size() >= 40);
        for (std::size_t n = 0; n < 41; ++n) CHECK(run.log_q[n] == doctest::Approx(std::log(qs[n].get_d())));
        for (std::size_t n = 0; n < 40; ++n) {
            CHECK(run.beta[n] == doctest::Approx(betas[n]).epsilon(1e-9));
            CHECK(run.beta[n] > 0);
            CHECK(run.beta[n] <= 1);
            CHECK(run.log_r[n] < 0);
        }
    }
}

TEST_CASE("sampling is independent of the job count") {
    auto cfg = config(2, "2/3,1/3", 4, 30, 5);
    auto a = run_theta_sample(cfg);
    cfg.jobs = 3;
    auto b = run_theta_sample(cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].log_q == b[i].log_q);
        CHECK(a[i].beta == b[i].beta);
    }
}

TEST_CASE("levy summary on a small sample") {
    auto cfg = config(1, "1", 20, 100, 3);
    auto est = estimate_levy(cfg);
    CHECK(est.n_used + est.n_dropped == 20);
    CHECK(est.mean_log_q_over_n.size() == 100);
    CHECK(est.L_hat == doctest::Approx(M_PI * M_PI / (12 * std::log(2.0))).epsilon(0.08));
    CHECK(est.L_hat_stderr > 0);
    for (std::size_t i = 0; i < est.slope_q.size(); ++i) {
        CHECK(std::fabs(est.slope_q[i] + est.slope_r[i]) < 0.05 * est.slope_q[i]);
    }
}

TEST_CASE("pooled beta distribution lies in (0,1]") {
    auto cfg = config(2, "1/2,1/2", 5, 60, 8);
    auto h = beta_distribution(cfg, 10);
    CHECK(h.n_total == 5 * 60);
    CHECK(h.out_of_range == 0);
    CHECK(h.cdf(1.0) == doctest::Approx(1.0));
    CHECK(h.cdf(0.0) == 0.0);
    CHECK(h.max_ks_theta_vs_pool >= 0);
}

TEST_CASE("time averages along the orbit of theta = 0 leave every compact set") {
    auto fp = FlowParams::vector_case(WeightVector::parse("1"));
    auto L = make_theta_lattice(ThetaVector::zero(1));
    auto c = birkhoff_average(L, fp, Observable::chi_K(0.5), {10, 100, 400}, 0.01);
    REQUIRE(c.average.size() == 3);
    // lambda_1 = e^{-t} drops below 1/2 at t = ln 2
    CHECK(c.average[0] == doctest::Approx(std::log(2.0) / 10).epsilon(0.01));
    CHECK(c.average[2] == doctest::Approx(std::log(2.0) / 400).epsilon(0.05));
    CHECK(c.error.back() == 0.0);
    CHECK_THROWS(birkhoff_average(L, fp, Observable::chi_K(0.5), {10}, 0.1));
    CHECK_THROWS(birkhoff_average(L, fp, Observable::chi_K(0.5), {10, 5}, 0.01));
}

TEST_CASE("halving dt changes the average only slightly") {
    Rng rng(21);
    auto w = WeightVector::parse("2/3,1/3");
    auto fp = FlowParams::vector_case(w);
    auto L = make_theta_lattice(ThetaVector::sample(2, 1024, rng));
    auto a = birkhoff_average(L, fp, Observable::chi_C(0.5), {200}, 0.02);
    auto b = birkhoff_average(L, fp, Observable::chi_C(0.5), {200}, 0.01);
    CHECK(std::fabs(a.average[0] - b.average[0]) < 0.02);
    CHECK(a.average[0] > 0);
    CHECK(a.average[0] < 1);
}

TEST_CASE("cusp excursion fractions grow with epsilon") {
    Rng rng(4);
    std::vector<ThetaVector> thetas;
    for (int i = 0; i < 3; ++i) thetas.push_back(ThetaVector::sample(1, 1024, rng));
    auto fp = FlowParams::vector_case(WeightVector::parse("1"));
    auto tab = cusp_scaling(fp, thetas, {0.1, 0.2, 0.3, 0.5}, 300, 0.01);
    REQUIRE(tab.rows.size() == 4);
    for (std::size_t k = 1; k < tab.rows.size(); ++k) CHECK(tab.rows[k].fraction >= tab.rows[k - 1].fraction);
    CHECK(tab.rows.back().fraction < 1);
    CHECK_THROWS(cusp_scaling(fp, thetas, {0.6}, 10, 0.01));
}

TEST_CASE("numeric minima agree with a brute force scan") {
    // |c_j| <= sum_i |B^{-1}_{ji}| * sup-min bounds the scan box exactly
    Rng rng(17);
    for (int n : {2, 3, 4}) {
        int done = 0;
        while (done < 40) {
            DMatrix b(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) b(i, j) = rng.uniform(-2.0, 2.0);
            std::vector<std::vector<double>> a(static_cast<size_t>(n), std::vector<double>(2 * static_cast<size_t>(n)));
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) a[i][j] = b(i, j);
                a[i][n + i] = 1;
            }
            bool singular = false;
            for (int c = 0; c < n && !singular; ++c) {
                int p = c;
                for (int r = c + 1; r < n; ++r)
                    if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
                if (std::fabs(a[p][c]) < 1e-3) singular = true;
                std::swap(a[p], a[c]);
                for (int r = 0; r < n && !singular; ++r) {
                    if (r == c) continue;
                    const double f = a[r][c] / a[c][c];
                    for (int k = 0; k < 2 * n; ++k) a[r][k] -= f * a[c][k];
                }
            }
            if (singular) continue;
            double col_sup = 1e300, col_eu = 1e300;
            for (int j = 0; j < n; ++j) {
                double s = 0, e = 0;
                for (int i = 0; i < n; ++i) {
                    s = std::max(s, std::fabs(b(i, j)));
                    e += b(i, j) * b(i, j);
                }
                col_sup = std::min(col_sup, s);
                col_eu = std::min(col_eu, std::sqrt(e));
            }
            double R = 0;
            for (int j = 0; j < n; ++j) {
                double row = 0;
                for (int i = 0; i < n; ++i) row += std::fabs(a[j][n + i] / a[j][j]);
                R = std::max(R, row * std::max(col_sup, col_eu));
            }
            const int box = static_cast<int>(std::ceil(R));
            if (box > (n == 4 ? 6 : 12)) continue;
            double sup = 1e300, eu = 1e300;
            oracle::scan_box(n, box, [&](const std::vector<long long>& c) {
                double s = 0, e = 0;
                for (int i = 0; i < n; ++i) {
                    double x = 0;
                    for (int j = 0; j < n; ++j) x += b(i, j) * static_cast<double>(c[static_cast<size_t>(j)]);
                    s = std::max(s, std::fabs(x));
                    e += x * x;
                }
                sup = std::min(sup, s);
                eu = std::min(eu, std::sqrt(e));
            });
            auto m = numeric_minima(b);
            CHECK(m.sup == doctest::Approx(sup).epsilon(1e-9));
            CHECK(m.euclid == doctest::Approx(eu).epsilon(1e-9));
            ++done;
        }
    }
}
