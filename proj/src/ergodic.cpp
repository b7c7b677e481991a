#include "wba/ergodic.hpp"

#include "wba/errors.hpp"
#include "wba/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace wba {

namespace {

template <class F>
void parallel_for(std::size_t n, int jobs, F f) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) f(i);
    };
    jobs = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs && static_cast<std::size_t>(j) < n; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

std::vector<ThetaRun> run_theta_sample(const SampleConfig& cfg) {
    const WeightVector w(cfg.w);
    if (w.dim() != cfg.d) throw ConfigError("weight dimension must equal d");
    if (cfg.n_records == 0) throw ConfigError("n_records must be positive");
    const double maxw = w.max_weight().get_d();
    const double t_budget = static_cast<double>(cfg.theta_bits - kStartBits) * std::log(2.0) / (1.0 + maxw) - 1.0;
    EnumOptions opt;
    opt.max_bits = std::max(opt.max_bits, cfg.theta_bits);
    std::vector<ThetaRun> runs(cfg.n_theta);
    parallel_for(cfg.n_theta, cfg.jobs, [&](std::size_t i) {
        ThetaRun& run = runs[i];
        run.index = i;
        run.seed = derive_seed(cfg.seed, i);
        Rng rng(run.seed);
        const ThetaVector theta = ThetaVector::sample(cfg.d, cfg.theta_bits, rng);
        try {
            BestApproxSequence s = enumerate_best_approx_fast(theta, w, cfg.n_records + 1, t_budget, opt);
            if (s.terminal) {
                run.dropped = true;
                run.drop_reason = "terminal";
                return;
            }
            if (s.records.size() < cfg.n_records + 1) {
                run.dropped = true;
                run.drop_reason = "horizon";
                return;
            }
            for (std::size_t k = 0; k <= cfg.n_records; ++k) run.log_q.push_back(s.records[k].log_q());
            for (std::size_t k = 0; k < cfg.n_records; ++k) {
                run.log_r.push_back(s.records[k].log_r());
                run.beta.push_back(s.beta(k).center_double());
            }
        } catch (const std::exception& e) {
            run.dropped = true;
            run.drop_reason = e.what();
        }
    });
    return runs;
}

double ols_slope(const std::vector<double>& y, std::size_t first_n) {
    const std::size_t m = y.size();
    if (m < 2) throw std::invalid_argument("slope needs two points");
    const double xm = static_cast<double>(first_n) + static_cast<double>(m - 1) / 2.0;
    const double ym = mean_of(y);
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double dx = static_cast<double>(first_n + k) - xm;
        sxy += dx * (y[k] - ym);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

LevyEstimate summarize_levy(const std::vector<ThetaRun>& runs, std::size_t n_records) {
    LevyEstimate est;
    est.n_records = n_records;
    const std::size_t N = n_records;
    est.mean_log_q_over_n.assign(N, 0.0);
    est.mean_log_r_over_n.assign(N, 0.0);
    std::vector<double> naive, tail;
    const std::size_t n0 = std::max<std::size_t>(1, N / 4);
    for (const auto& run : runs) {
        if (run.dropped) {
            ++est.n_dropped;
            continue;
        }
        ++est.n_used;
        for (std::size_t n = 1; n <= N; ++n) {
            est.mean_log_q_over_n[n - 1] += run.log_q[n - 1] / static_cast<double>(n);
            est.mean_log_r_over_n[n - 1] += run.log_r[n - 1] / static_cast<double>(n);
        }
        std::vector<double> lq(run.log_q.begin(), run.log_q.begin() + static_cast<long>(N));
        est.slope_q.push_back(ols_slope(lq, 1));
        est.slope_r.push_back(ols_slope(run.log_r, 1));
        naive.push_back(run.log_q[N - 1] / static_cast<double>(N));
        std::vector<double> lt(run.log_q.begin() + static_cast<long>(n0 - 1), run.log_q.begin() + static_cast<long>(N));
        tail.push_back(ols_slope(lt, n0));
    }
    if (est.n_used == 0) return est;
    for (std::size_t n = 0; n < N; ++n) {
        est.mean_log_q_over_n[n] /= static_cast<double>(est.n_used);
        est.mean_log_r_over_n[n] /= static_cast<double>(est.n_used);
    }
    est.L_hat = mean_of(naive);
    est.L_hat_stderr = stderr_of(naive);
    est.L_extrapolated = mean_of(tail);
    est.L_extrapolated_stderr = stderr_of(tail);
    return est;
}

LevyEstimate estimate_levy(const SampleConfig& cfg) { return summarize_levy(run_theta_sample(cfg), cfg.n_records); }

double BetaHistogram::cdf(double x) const {
    auto it = std::upper_bound(sorted_values.begin(), sorted_values.end(), x);
    return sorted_values.empty() ? 0.0
                                 : static_cast<double>(it - sorted_values.begin()) /
                                       static_cast<double>(sorted_values.size());
}

BetaHistogram histogram_of(std::vector<double> values, int bins) {
    if (bins < 1) throw std::invalid_argument("bins must be positive");
    BetaHistogram h;
    for (int k = 0; k <= bins; ++k) h.edges.push_back(static_cast<double>(k) / bins);
    h.counts.assign(static_cast<size_t>(bins), 0);
    std::sort(values.begin(), values.end());
    for (double b : values) {
        if (!(b > 0.0 && b <= 1.0)) {
            ++h.out_of_range;
            continue;
        }
        // bins are (e_k, e_{k+1}]
        int k = static_cast<int>(std::ceil(b * bins)) - 1;
        k = std::clamp(k, 0, bins - 1);
        ++h.counts[static_cast<size_t>(k)];
        ++h.n_total;
    }
    h.sorted_values = std::move(values);
    return h;
}

double ks_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return 0.0;
    std::size_t i = 0, j = 0;
    double d = 0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

BetaHistogram beta_histogram(const std::vector<ThetaRun>& runs, int bins) {
    std::vector<double> all;
    for (const auto& r : runs) {
        if (!r.dropped) all.insert(all.end(), r.beta.begin(), r.beta.end());
    }
    BetaHistogram h = histogram_of(all, bins);
    for (const auto& r : runs) {
        if (r.dropped) continue;
        std::vector<double> s = r.beta;
        std::sort(s.begin(), s.end());
        h.max_ks_theta_vs_pool = std::max(h.max_ks_theta_vs_pool, ks_distance(s, h.sorted_values));
    }
    return h;
}

BetaHistogram beta_distribution(const SampleConfig& cfg, int bins) { return beta_histogram(run_theta_sample(cfg), bins); }

std::string Observable::id() const {
    std::ostringstream os;
    os.precision(17);
    os << (kind == Kind::ChiK ? "chi_K(" : "chi_C(") << param << ")";
    return os.str();
}

NumericMinima numeric_minima(const DMatrix& basis) {
    const int n = basis.n;
    NumericMinima m;
    if (n == 2) {
        double a0 = basis(0, 0), a1 = basis(1, 0), b0 = basis(0, 1), b1 = basis(1, 1);
        for (int it = 0; it < 200; ++it) {
            double na = a0 * a0 + a1 * a1, nb = b0 * b0 + b1 * b1;
            if (nb < na) {
                std::swap(a0, b0);
                std::swap(a1, b1);
                std::swap(na, nb);
            }
            const double mu = std::nearbyint((a0 * b0 + a1 * b1) / na);
            if (mu == 0) break;
            b0 -= mu * a0;
            b1 -= mu * a1;
        }
        m.euclid = std::hypot(a0, a1);
        // For a reduced pair the sup-norm minimum is among a, b, a + b, a - b.
        auto sup = [](double x, double y) { return std::max(std::fabs(x), std::fabs(y)); };
        m.sup = std::min({sup(a0, a1), sup(b0, b1), sup(a0 + b0, a1 + b1), sup(a0 - b0, a1 - b1)});
        return m;
    }
    DMatrix b = basis;
    IMatrix t = IMatrix::identity(n);
    lll_reduce(b, t);
    double rs = HUGE_VAL, re = HUGE_VAL;
    for (int j = 0; j < n; ++j) {
        double s = 0, e = 0;
        for (int i = 0; i < n; ++i) {
            s = std::max(s, std::fabs(b(i, j)));
            e += b(i, j) * b(i, j);
        }
        rs = std::min(rs, s);
        re = std::min(re, std::sqrt(e));
    }
    m.sup = rs;
    std::vector<double> half(static_cast<size_t>(n), rs * (1 + 1e-12));
    for (const auto& c : enumerate_box(b, half)) {
        auto v = wba::apply(b, c);
        double s = 0;
        for (double x : v) s = std::max(s, std::fabs(x));
        m.sup = std::min(m.sup, s);
    }
    m.euclid = re;
    for (const auto& c : enumerate_ball(b, re * (1 + 1e-12))) {
        auto v = wba::apply(b, c);
        double e = 0;
        for (double x : v) e += x * x;
        m.euclid = std::min(m.euclid, std::sqrt(e));
    }
    return m;
}

namespace {

constexpr double kMembershipMargin = 1e-9;

// 1 inside, 0 outside, -1 when too close to the boundary to decide.
int membership(const Observable& f, const NumericMinima& m) {
    double v, thr;
    if (f.kind == Observable::Kind::ChiK) {
        v = m.sup;
        thr = f.param;
    } else {
        v = m.euclid;
        thr = std::exp(-f.param);
    }
    if (std::fabs(v - thr) <= kMembershipMargin * thr) return -1;
    return v >= thr ? 1 : 0;
}

// Calls visit(step, minima) for midpoints (k + 1/2) dt, k < n_steps.
template <class Visit>
void walk_orbit(const UnimodularLattice& x0, const FlowParams& fp, double dt, std::uint64_t n_steps, long max_bits,
                Visit visit) {
    OrbitEngine eng(x0, fp, max_bits, false);
    for (std::uint64_t k = 0; k < n_steps; ++k) {
        const double t = (static_cast<double>(k) + 0.5) * dt;
        const double window = std::floor(t);
        if (window > eng.time()) eng.advance_to(window);
        visit(k, numeric_minima(eng.basis_at(t)));
    }
}

}  // namespace

ErgodicAverageCurve birkhoff_average(const UnimodularLattice& x0, const FlowParams& fp, const Observable& f,
                                     const std::vector<double>& T_grid, double dt, const OrbitOptions& opt) {
    if (!(dt > 0 && dt <= 0.05)) throw std::invalid_argument("dt must lie in (0, 0.05]");
    if (T_grid.empty()) throw std::invalid_argument("empty T grid");
    std::vector<std::uint64_t> marks;
    for (std::size_t i = 0; i < T_grid.size(); ++i) {
        if (!(T_grid[i] > 0) || (i > 0 && T_grid[i] <= T_grid[i - 1])) {
            throw std::invalid_argument("T grid must be positive and increasing");
        }
        marks.push_back(static_cast<std::uint64_t>(std::llround(T_grid[i] / dt)));
    }
    ErgodicAverageCurve curve;
    curve.observable = f.id();
    curve.dt = dt;
    curve.T = T_grid;
    double sum = 0;
    std::uint64_t uncertain = 0;
    std::size_t next = 0;
    walk_orbit(x0, fp, dt, marks.back(), opt.max_bits, [&](std::uint64_t k, const NumericMinima& m) {
        const int in = membership(f, m);
        if (in < 0) {
            sum += 0.5;
            ++uncertain;
        } else {
            sum += in;
        }
        while (next < marks.size() && k + 1 == marks[next]) {
            curve.average.push_back(sum / static_cast<double>(k + 1));
            curve.uncertain_steps.push_back(uncertain);
            ++next;
        }
    });
    for (double a : curve.average) curve.error.push_back(std::fabs(a - curve.average.back()));
    return curve;
}

CuspTable cusp_scaling(const FlowParams& fp, const std::vector<ThetaVector>& thetas, const std::vector<double>& eps_grid,
                       double T, double dt, const OrbitOptions& opt, int jobs) {
    if (eps_grid.empty()) throw std::invalid_argument("empty epsilon grid");
    for (double e : eps_grid) {
        if (!(e > 0 && e <= 0.5)) throw std::invalid_argument("epsilon must lie in (0, 0.5]");
    }
    const auto n_steps = static_cast<std::uint64_t>(std::llround(T / dt));
    std::vector<std::vector<double>> outside(thetas.size(), std::vector<double>(eps_grid.size(), 0.0));
    parallel_for(thetas.size(), jobs, [&](std::size_t i) {
        auto& row = outside[i];
        walk_orbit(make_theta_lattice(thetas[i]), fp, dt, n_steps, opt.max_bits,
                   [&](std::uint64_t, const NumericMinima& m) {
                       for (std::size_t k = 0; k < eps_grid.size(); ++k) {
                           const int in = membership(Observable::chi_K(eps_grid[k]), m);
                           row[k] += in < 0 ? 0.5 : (in == 0 ? 1.0 : 0.0);
                       }
                   });
    });
    CuspTable tab;
    tab.T = T;
    tab.dt = dt;
    tab.n_theta = thetas.size();
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        double s = 0;
        for (const auto& row : outside) s += row[k];
        const double frac = s / (static_cast<double>(n_steps) * static_cast<double>(thetas.size()));
        tab.rows.push_back({eps_grid[k], frac});
        if (frac > 0) {
            lx.push_back(std::log(eps_grid[k]));
            ly.push_back(std::log(frac));
        }
    }
    if (lx.size() >= 2) {
        const double xm = mean_of(lx), ym = mean_of(ly);
        double sxy = 0, sxx = 0;
        for (std::size_t k = 0; k < lx.size(); ++k) {
            sxy += (lx[k] - xm) * (ly[k] - ym);
            sxx += (lx[k] - xm) * (lx[k] - xm);
        }
        tab.slope = sxy / sxx;
    }
    return tab;
}

}  // namespace wba
