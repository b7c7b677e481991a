// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "oracles.hpp"
#include "wba/best_approx.hpp"
#include "wba/cli.hpp"
#include "wba/cross_section.hpp"
#include "wba/ergodic.hpp"
#include "wba/lattice.hpp"
#include "wba/section_mc.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace wba;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

const double kLevy1 = M_PI * M_PI / (12 * std::log(2.0));

// Shared between criteria.
std::vector<double> g_betas;
double g_max_b_per_unit = 0;
double g_kappa = 0;
bool g_kappa_ok = false;

void collect_betas(const std::vector<ThetaRun>& runs) {
    for (const auto& r : runs) {
        if (!r.dropped) g_betas.insert(g_betas.end(), r.beta.begin(), r.beta.end());
    }
}

void collect_betas(const BestApproxSequence& s) {
    auto b = s.betas();
    g_betas.insert(g_betas.end(), b.begin(), b.end());
}

std::string fmt(double x, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << x;
    return os.str();
}

std::vector<mpz_class> upto(const std::vector<mpz_class>& qs, const mpz_class& q_max) {
    std::vector<mpz_class> out;
    for (const auto& q : qs) {
        if (q <= q_max) out.push_back(q);
    }
    return out;
}

std::vector<mpz_class> above_threshold(const std::vector<mpz_class>& qs, const WeightVector& w) {
    std::vector<mpz_class> out;
    for (const auto& q : qs) {
        if (exceeds_weight_threshold(q, w)) out.push_back(q);
    }
    return out;
}

SampleConfig sample_config(int d, const char* w, std::size_t n_theta, std::size_t n_records, std::uint64_t seed) {
    SampleConfig c;
    c.d = d;
    c.w = WeightVector::parse(w).entries();
    c.n_theta = n_theta;
    c.n_records = n_records;
    c.seed = seed;
    c.theta_bits = 4096;
    return c;
}

Verdict criterion1() {
    Rng rng(1001);
    auto w = WeightVector::parse("1");
    const mpz_class q_max = 1000000;
    int mismatches = 0;
    std::size_t compared = 0;
    for (int i = 0; i < 200; ++i) {
        auto th = ThetaVector::sample(1, 256, rng);
        auto seq = enumerate_best_approx_fast(th, w, 1000, std::log(1e6) + 1.5);
        collect_betas(seq);
        auto got = upto(seq.qs(), q_max);
        auto want = oracle::cf_denominators(th.coord(0), q_max);
        compared += want.size();
        if (got != want) ++mismatches;
    }
    return {mismatches == 0, "200 theta, " + std::to_string(compared) + " denominators, " +
                                 std::to_string(mismatches) + " mismatching theta"};
}

Verdict criterion2() {
    auto cfg = sample_config(1, "1", 100, 200, 2002);
    auto runs = run_theta_sample(cfg);
    collect_betas(runs);
    auto est = summarize_levy(runs, 200);
    const double rel = std::fabs(est.L_hat - kLevy1) / kLevy1;
    return {rel < 0.01 && est.n_used == 100,
            "L_hat=" + fmt(est.L_hat) + " +- " + fmt(est.L_hat_stderr, 3) + " target=" + fmt(kLevy1) +
                " rel_err=" + fmt(rel, 3) + " (extrapolated slope " + fmt(est.L_extrapolated) + ")"};
}

Verdict criterion4() {
    Rng rng(4004);
    int bad_sets = 0, bad_prefix = 0, ambiguous = 0, instances = 0;
    const double T = 12.0;
    for (const char* wt : {"1/2,1/2", "2/3,1/3", "3/4,1/4"}) {
        auto w = WeightVector::parse(wt);
        for (int i = 0; i < 50; ++i) {
            auto th = ThetaVector::sample(2, 256, rng);
            auto orbit = cross_section_visits(th, w, T);
            auto seq = enumerate_best_approx_bruteforce(th, w, floor_exp(T).get_ui());
            collect_betas(seq);
            ++instances;
            ambiguous += orbit.skipped_ambiguous;
            if (above_threshold(orbit.b_qs(), w) != above_threshold(seq.qs(), w)) ++bad_sets;
            if (!prefix_equivalent(orbit.b_qs(), seq.qs())) ++bad_prefix;
            g_max_b_per_unit = std::max<double>(g_max_b_per_unit, orbit.max_b_visits_per_unit_time());
        }
    }
    return {bad_sets == 0 && bad_prefix == 0,
            std::to_string(instances) + " instances at T=12, set mismatches=" + std::to_string(bad_sets) +
                ", prefix failures=" + std::to_string(bad_prefix) + ", ambiguous visits=" + std::to_string(ambiguous)};
}

Verdict criterion5() {
    Rng rng(5005);
    const std::vector<const char*> weights{"1", "1/2,1/2", "2/3,1/3", "3/4,1/4", "1/3,1/3,1/3", "1/2,1/4,1/4",
                                           "3/5,1/5,1/5"};
    const mpz_class q_max = 100000;
    int bad = 0;
    std::size_t records = 0;
    for (int i = 0; i < 100; ++i) {
        auto w = WeightVector::parse(weights[static_cast<size_t>(i) % weights.size()]);
        auto th = ThetaVector::sample(w.dim(), 256, rng);
        auto brute = enumerate_best_approx_bruteforce(th, w, q_max.get_ui());
        auto fast = enumerate_best_approx_fast(th, w, 100000, std::log(1e5) + 1.5);
        collect_betas(brute);
        auto bq = brute.qs();
        auto fq = upto(fast.qs(), q_max);
        records += bq.size();
        bool same = bq == fq;
        for (std::size_t k = 0; same && k < bq.size(); ++k) same = brute.records[k].p == fast.records[k].p;
        if (!same) ++bad;
    }
    return {bad == 0, "100 instances, d in {1,2,3}, " + std::to_string(records) + " records, " +
                          std::to_string(bad) + " discrepancies"};
}

Verdict criterion6() {
    auto cfg = sample_config(2, "2/3,1/3", 100, 500, 6006);
    auto runs = run_theta_sample(cfg);
    collect_betas(runs);
    auto est = summarize_levy(runs, 500);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < est.slope_q.size(); ++i) {
        if (std::fabs(est.slope_r[i] + est.slope_q[i]) < 0.02 * est.slope_q[i]) ++ok;
    }
    const double frac = est.slope_q.empty() ? 0 : static_cast<double>(ok) / 100.0;
    return {frac >= 0.95, "d=2 w=(2/3,1/3): " + std::to_string(ok) + "/100 theta satisfy the linkage, " +
                              std::to_string(est.n_dropped) + " dropped"};
}

Verdict criterion7() {
    auto est = estimate_B_probability(1, WeightVector::parse("1"), 1000000, 7007);
    const double z = (est.p_hat - std::log(2.0)) / est.stderr_;
    g_kappa = calibration_kappa(est);
    g_kappa_ok = true;
    return {std::fabs(z) <= 3, "p_hat=" + fmt(est.p_hat) + " stderr=" + fmt(est.stderr_, 3) + " z=" + fmt(z, 3) +
                                   " ambiguous=" + std::to_string(est.n_ambiguous) + " kappa=" + fmt(g_kappa)};
}

Verdict criterion8() {
    if (!g_kappa_ok) return {false, "no calibration from criterion 7"};
    auto w = WeightVector::parse("1/2,1/2");
    auto est = estimate_B_probability(2, w, 1000000, 8008);
    const double mu = mu_B_estimate(est, w, g_kappa);
    auto cfg = sample_config(2, "1/2,1/2", 100, 500, 8009);
    auto runs = run_theta_sample(cfg);
    collect_betas(runs);
    auto lev = summarize_levy(runs, 500);
    const double rel = std::fabs(1 / mu - lev.L_hat) / lev.L_hat;
    return {rel < 0.05, "p_hat=" + fmt(est.p_hat) + " mu=" + fmt(mu) + " 1/mu=" + fmt(1 / mu) +
                            " L_hat_2=" + fmt(lev.L_hat) + " (extrapolated " + fmt(lev.L_extrapolated) +
                            ") rel_diff=" + fmt(rel, 3)};
}

Verdict criterion9() {
    Rng rng(9009);
    std::size_t v1 = 0, v2 = 0, total = 0;
    for (const char* wt : {"1", "1/2,1/2", "2/3,1/3", "1/2,1/4,1/4"}) {
        auto w = WeightVector::parse(wt);
        auto fp = FlowParams::vector_case(w);
        const mpq_class w1 = w[0], wd = w[w.dim() - 1];
        for (int k = 0; k < 1000; ++k) {
            auto th = ThetaVector::sample(w.dim(), 512, rng);
            auto L = apply_flow(make_theta_lattice(th), fp, rng.uniform(0, 8));
            auto l = lambda1_sup(L), lw = lambda1_w(L, w);
            ++total;
            if (certified_compare(l, pow(lw, wd)) == Ordering::GT) ++v1;
            if (certified_compare(lw, pow(l, 1 / w1)) == Ordering::GT) ++v2;
        }
    }
    return {v1 == 0 && v2 == 0, std::to_string(total) + " orbit lattices, violations of lambda_1 <= (lambda_1^w)^w_d: " +
                                    std::to_string(v1) + ", of lambda_1^w <= lambda_1^(1/w_1): " + std::to_string(v2)};
}

Verdict criterion10() {
    Rng rng(1010);
    auto w = WeightVector::parse("1");
    for (int i = 0; i < 50; ++i) {
        auto orbit = cross_section_visits(ThetaVector::sample(1, 512, rng), w, 40);
        g_max_b_per_unit = std::max<double>(g_max_b_per_unit, orbit.max_b_visits_per_unit_time());
    }
    return {g_max_b_per_unit <= 10,
            "max B-visits per unit time over d=1 and d=2 orbits: " + fmt(g_max_b_per_unit)};
}

std::vector<ThetaVector> orbit_thetas(int n, double T, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ThetaVector> out;
    for (int i = 0; i < n; ++i) out.push_back(ThetaVector::sample(1, bits_for_time(T, 1.0) + 64, rng));
    return out;
}

Verdict criterion11() {
    const double T = 1e4;
    auto fp = FlowParams::vector_case(WeightVector::parse("1"));
    OrbitOptions opt{bits_for_time(T, 1.0) + 64};
    auto tab = cusp_scaling(fp, orbit_thetas(20, T, 1111), {0.05, 0.07, 0.1, 0.14, 0.2, 0.28, 0.4, 0.5}, T, 0.01, opt);
    std::string rows;
    for (const auto& r : tab.rows) rows += " " + fmt(r.eps, 3) + ":" + fmt(r.fraction, 4);
    return {tab.slope >= 1.5 && tab.slope <= 2.5, "slope=" + fmt(tab.slope, 4) + " target 2, fractions" + rows};
}

Verdict criterion12() {
    const double T = 1e5;
    auto fp = FlowParams::vector_case(WeightVector::parse("1"));
    OrbitOptions opt{bits_for_time(T, 1.0) + 64};
    std::array<double, 3> pooled{0, 0, 0};
    auto thetas = orbit_thetas(20, T, 1212);
    std::uint64_t uncertain = 0;
    for (const auto& th : thetas) {
        auto c = birkhoff_average(make_theta_lattice(th), fp, Observable::chi_K(0.5), {1e2, 1e4, 1e5}, 0.01, opt);
        for (int k = 0; k < 3; ++k) pooled[static_cast<size_t>(k)] += c.average[static_cast<size_t>(k)] / 20;
        uncertain += c.uncertain_steps.back();
    }
    const double num = std::fabs(pooled[0] - pooled[2]), den = std::fabs(pooled[1] - pooled[2]);
    const double ratio = den > 0 ? num / den : INFINITY;
    return {ratio >= 3, "avg(1e2)=" + fmt(pooled[0]) + " avg(1e4)=" + fmt(pooled[1]) + " avg(1e5)=" + fmt(pooled[2]) +
                            " ratio=" + fmt(ratio, 4) + " uncertain_steps=" + std::to_string(uncertain)};
}

std::string run_binary(const std::string& args, int& status) {
    const std::string cmd = std::string("\"") + WBA_LAB_BINARY + "\" " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) {
        status = -1;
        return {};
    }
    std::string text;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) text.append(buf.data(), n);
    status = pclose(p);
    return text;
}

Verdict criterion13() {
    const std::vector<std::string> cmds{
        "best-approx --w 2/3,1/3 --theta sqrt2,sqrt3 --t-budget 10",
        "best-approx --d 1 --theta 2/7 --method brute --q-max 100",
        "best-approx-regular --w 1/2,1/2 --theta sqrt2,sqrt3 --t-budget 8",
        "cross-section --w 2/3,1/3 --theta sqrt2,sqrt3 --t-budget 10",
        "first-return --d 1 --theta phi --t-budget 10",
        "levy --d 2 --seed 13 --n-theta 6 --n-records 40 --jobs 2",
        "beta-dist --d 2 --w 3/4,1/4 --seed 13 --n-theta 6 --n-records 40 --format json",
        "mc-measure --d 2 --seed 13 --n-samples 3000 --jobs 2",
        "equidist --d 1 --seed 13 --n-theta 2 --T 10,100 --observable chi_C --z 0.5",
        "cusp-scaling --d 1 --seed 13 --n-theta 2 --T 200",
        "lattice-min --w 2/3,1/3 --theta sqrt2,sqrt3 --t 3.5",
    };
    int bad = 0;
    std::string failed;
    for (const auto& c : cmds) {
        int s1 = 0, s2 = 0;
        auto a = run_binary(c, s1), b = run_binary(c, s2);
        if (s1 != 0 || s2 != 0 || a.empty() || a != b) {
            ++bad;
            failed += " [" + c.substr(0, c.find(' ')) + "]";
        }
    }
    return {bad == 0, std::to_string(cmds.size()) + " subcommand runs repeated, " + std::to_string(bad) +
                          " differed or failed" + failed};
}

// Runs last: every beta gathered by the other criteria.
Verdict criterion3() {
    std::size_t bad = 0;
    for (double b : g_betas) {
        if (!(b > 0 && b <= 1)) ++bad;
    }
    return {bad == 0 && !g_betas.empty(),
            std::to_string(g_betas.size()) + " betas from criteria 1, 2, 4, 5, 6, 8, " + std::to_string(bad) +
                " outside (0,1]"};
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<Verdict()>>> order{
        {1, criterion1},   {2, criterion2},   {4, criterion4},   {5, criterion5}, {6, criterion6},
        {7, criterion7},   {8, criterion8},   {9, criterion9},   {10, criterion10}, {11, criterion11},
        {12, criterion12}, {13, criterion13}, {3, criterion3},
    };
    int failures = 0;
    for (const auto& [id, fn] : order) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << " " << v.detail << " ("
                  << fmt(secs, 3) << " s)" << std::endl;
        failures += v.pass ? 0 : 1;
    }
    std::cout << failures << " of 13 criteria failed" << std::endl;
    return failures == 0 ? 0 : 1;
}
