#include "wba/best_approx.hpp"

#include "wba/errors.hpp"
#include "wba/lattice.hpp"
#include "wba/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace wba {

double BestApproxRecord::log_q() const {
    long e = 0;
    const double m = mpz_get_d_2exp(&e, q.get_mpz_t());
    return std::log(m) + static_cast<double>(e) * M_LN2;
}

double BestApproxRecord::log_r() const { return r.log_center(); }

DyadicInterval BestApproxSequence::beta(std::size_t n) const {
    const auto& a = records.at(n);
    const auto& b = records.at(n + 1);
    return DyadicInterval::from_integer(b.q, a.r.precision_bits()) * a.r;
}

std::vector<double> BestApproxSequence::betas() const {
    std::vector<double> out;
    for (std::size_t n = 0; n + 1 < records.size(); ++n) out.push_back(beta(n).center_double());
    return out;
}

std::vector<mpz_class> BestApproxSequence::qs() const {
    std::vector<mpz_class> out;
    for (const auto& r : records) out.push_back(r.q);
    return out;
}

namespace {

double log_abs(const mpz_class& z) {
    if (z == 0) return -std::numeric_limits<double>::infinity();
    long e = 0;
    const double m = mpz_get_d_2exp(&e, z.get_mpz_t());
    return std::log(std::fabs(m)) + static_cast<double>(e) * M_LN2;
}

DyadicInterval residual_norm(const std::vector<mpz_class>& res, const mpz_class& den, const WeightVector& w,
                             long bits) {
    std::vector<mpq_class> x;
    for (const auto& r : res) {
        mpq_class v(r, den);
        v.canonicalize();
        x.push_back(v);
    }
    return quasi_norm(WVector::from_rationals(x, bits), w);
}

// Running record state shared by the enumerators: exact comparison behind a log filter.
class RecordTracker {
public:
    RecordTracker(const ThetaVector& theta, const WeightVector& w) : theta_(theta), w_(w) {
        log_den_ = log_abs(theta.denominator);
    }

    // log ||x||_w from residual numerators.
    double log_norm(const std::vector<mpz_class>& res) const {
        double m = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < w_.dim(); ++i) {
            const double l = log_abs(res[static_cast<size_t>(i)]);
            if (std::isinf(l)) continue;
            m = std::max(m, (l - log_den_) / w_.as_double(i));
        }
        return m;
    }

    // Strictly better than the running minimum?
    bool improves(const std::vector<mpz_class>& res) const {
        if (!have_) return true;
        if (best_zero_) return false;
        const double l = log_norm(res);
        if (std::isinf(l)) return true;
        const double margin = 1e-9 * (1.0 + std::fabs(best_log_));
        if (l < best_log_ - margin) return true;
        if (l > best_log_ + margin) return false;
        return compare_exact(exact(res), exact(best_)) == Ordering::LT;
    }

    void accept(const std::vector<mpz_class>& res) {
        have_ = true;
        best_ = res;
        best_log_ = log_norm(res);
        best_zero_ = std::all_of(res.begin(), res.end(), [](const mpz_class& z) { return z == 0; });
    }

    bool have() const { return have_; }
    double best_log() const { return best_log_; }

private:
    PowerProduct exact(const std::vector<mpz_class>& res) const {
        std::vector<mpq_class> x;
        for (const auto& r : res) x.emplace_back(r, theta_.denominator);
        for (auto& v : x) v.canonicalize();
        return quasi_norm_exact(x, w_);
    }

    const ThetaVector& theta_;
    const WeightVector& w_;
    double log_den_ = 0;
    bool have_ = false;
    bool best_zero_ = false;
    double best_log_ = 0;
    std::vector<mpz_class> best_;
};

void push_record(BestApproxSequence& seq, const ThetaVector& theta, const WeightVector& w, const mpz_class& q) {
    NearestP np = nearest_p(theta, q, w);
    if (np.tie) ++seq.tie_events;
    BestApproxRecord rec;
    rec.p = std::move(np.p);
    rec.q = q;
    rec.r = np.r;
    rec.residual = std::move(np.residual);
    seq.records.push_back(std::move(rec));
}

void check_dims(const ThetaVector& theta, const WeightVector& w) {
    if (theta.dim() != w.dim()) throw std::invalid_argument("theta and weights differ in dimension");
}

}  // namespace

NearestP nearest_p(const ThetaVector& theta, const mpz_class& q, const WeightVector& w, long bits) {
    check_dims(theta, w);
    if (q < 1) throw std::invalid_argument("q must be >= 1");
    NearestP out;
    const mpz_class& n = theta.denominator;
    for (int i = 0; i < theta.dim(); ++i) {
        mpz_class prod = q * theta.numerators[static_cast<size_t>(i)];
        mpz_class fl, rem;
        mpz_fdiv_qr(fl.get_mpz_t(), rem.get_mpz_t(), prod.get_mpz_t(), n.get_mpz_t());
        const int c = cmp(mpz_class(2 * rem), n);
        if (c == 0) out.tie = true;
        if (c <= 0) {
            out.p.push_back(fl);
            out.residual.push_back(rem);
        } else {
            out.p.push_back(fl + 1);
            out.residual.push_back(rem - n);
        }
    }
    out.r = residual_norm(out.residual, n, w, bits);
    return out;
}

BestApproxSequence enumerate_best_approx_bruteforce(const ThetaVector& theta, const WeightVector& w,
                                                    std::uint64_t q_max) {
    check_dims(theta, w);
    if (q_max < 1) throw std::invalid_argument("q_max must be >= 1");
    const int d = theta.dim();
    const mpz_class& n = theta.denominator;
    mpz_class half = n / 2;
    BestApproxSequence seq;
    seq.theta = theta;
    seq.weights = w.entries();
    RecordTracker tracker(theta, w);

    std::vector<mpz_class> rem(static_cast<size_t>(d), 0);
    std::vector<mpz_class> res(static_cast<size_t>(d));
    mpz_class m;
    const double log2_den = log_abs(n) / M_LN2;
    // Coordinate i can only beat the record when log2|res_i| < thresh[i].
    std::vector<double> thresh(static_cast<size_t>(d), std::numeric_limits<double>::infinity());

    std::uint64_t q = 0;
    while (q < q_max) {
        ++q;
        for (int i = 0; i < d; ++i) {
            mpz_class& r = rem[static_cast<size_t>(i)];
            r += theta.numerators[static_cast<size_t>(i)];
            if (r >= n) r -= n;
        }
        bool reject = false;
        for (int i = 0; i < d && !reject; ++i) {
            const mpz_class& r = rem[static_cast<size_t>(i)];
            if (r <= half) {
                m = r;
            } else {
                mpz_sub(m.get_mpz_t(), n.get_mpz_t(), r.get_mpz_t());
            }
            if (m != 0 && static_cast<double>(mpz_sizeinbase(m.get_mpz_t(), 2)) - 1.0 > thresh[static_cast<size_t>(i)] + 1e-9) {
                reject = true;
            }
        }
        if (reject) continue;
        for (int i = 0; i < d; ++i) {
            const mpz_class& r = rem[static_cast<size_t>(i)];
            // Ties 2r == n round down: residual +n/2.
            if (2 * r <= n) {
                res[static_cast<size_t>(i)] = r;
            } else {
                res[static_cast<size_t>(i)] = r - n;
            }
        }
        if (!tracker.improves(res)) continue;
        tracker.accept(res);
        push_record(seq, theta, w, mpz_class(static_cast<unsigned long>(q)));
        const double lr = tracker.best_log() / M_LN2;
        for (int i = 0; i < d; ++i) thresh[static_cast<size_t>(i)] = log2_den + w.as_double(i) * lr;
        if (std::all_of(res.begin(), res.end(), [](const mpz_class& z) { return z == 0; })) {
            seq.terminal = true;
            break;
        }
    }
    seq.horizon_q = mpz_class(static_cast<unsigned long>(q));
    return seq;
}

mpz_class floor_exp(double x) {
    if (x <= 0) {
        return x == 0 ? mpz_class(1) : mpz_class(0);
    }
    const long bits = static_cast<long>(x / M_LN2) + 64;
    Mpfr v(bits);
    mpfr_set_d(v.get(), x, MPFR_RNDD);
    mpfr_exp(v.get(), v.get(), MPFR_RNDD);
    mpz_class z;
    mpfr_get_z(z.get_mpz_t(), v.get(), MPFR_RNDD);
    return z;
}

bool exceeds_weight_threshold(const mpz_class& q, const WeightVector& w) {
    // q > 2^{1/w_d}  <=>  q^{num(w_d)} > 2^{den(w_d)}
    const mpq_class& wd = w.min_weight();
    mpz_class lhs, rhs;
    mpz_pow_ui(lhs.get_mpz_t(), q.get_mpz_t(), wd.get_num().get_ui());
    mpz_ui_pow_ui(rhs.get_mpz_t(), 2, wd.get_den().get_ui());
    return lhs > rhs;
}

namespace {

std::vector<double> window_box(int d) {
    std::vector<double> half(static_cast<size_t>(d + 1), 1.1);
    half[static_cast<size_t>(d)] = 1.1 * std::exp(1.0);
    return half;
}

// Candidate denominators q > 0 of vectors in the window box at the engine's time.
std::vector<std::pair<mpz_class, std::vector<mpz_class>>> window_candidates(const OrbitEngine& eng, int d) {
    std::vector<std::pair<mpz_class, std::vector<mpz_class>>> out;
    for (const auto& c : enumerate_box(eng.basis(), window_box(d))) {
        auto z = eng.root_vector(c);
        if (z[static_cast<size_t>(d)] <= 0) continue;
        mpz_class q = z[static_cast<size_t>(d)];
        z.pop_back();
        out.emplace_back(std::move(q), std::move(z));
    }
    return out;
}

}  // namespace

BestApproxSequence enumerate_best_approx_fast(const ThetaVector& theta, const WeightVector& w, std::size_t n_max,
                                              double t_budget, const EnumOptions& opt) {
    check_dims(theta, w);
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    const int d = theta.dim();
    BestApproxSequence seq;
    seq.theta = theta;
    seq.weights = w.entries();
    RecordTracker tracker(theta, w);
    OrbitEngine eng(make_theta_lattice(theta), FlowParams::vector_case(w), opt.max_bits);
    const mpz_class qcap = floor_exp(t_budget);
    mpz_class done = 0;
    std::set<mpz_class> pending;
    bool stop = false;
    for (long k = 0; !stop && static_cast<double>(k) <= t_budget; ++k) {
        eng.advance_to(static_cast<double>(k));
        for (auto& [q, p] : window_candidates(eng, d)) {
            if (q > done) pending.insert(q);
        }
        mpz_class horizon = floor_exp(static_cast<double>(k) + 1.0);
        if (horizon > qcap) horizon = qcap;
        while (!pending.empty() && *pending.begin() <= horizon) {
            const mpz_class q = *pending.begin();
            pending.erase(pending.begin());
            NearestP np = nearest_p(theta, q, w);
            if (!tracker.improves(np.residual)) continue;
            tracker.accept(np.residual);
            push_record(seq, theta, w, q);
            if (seq.records.back().r.contains(0) && seq.records.back().r.is_point()) {
                seq.terminal = true;
                stop = true;
                done = q;
                break;
            }
            if (seq.records.size() >= n_max) {
                stop = true;
                done = q;
                break;
            }
        }
        if (!stop) done = horizon;
        if (horizon >= qcap) break;
    }
    seq.horizon_q = done;
    return seq;
}

namespace {

// log of the sup norm of a_s v for v with horizontal logs lx (at s=0) and log q.
struct Piecewise {
    std::vector<double> slope;
    std::vector<double> icpt;
    double eval(double s) const {
        double m = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < slope.size(); ++i) m = std::max(m, slope[i] * s + icpt[i]);
        return m;
    }
};

}  // namespace

BestApproxSequence enumerate_regular_best_approx(const ThetaVector& theta, const WeightVector& w, std::size_t n_max,
                                                 double t_budget, const EnumOptions& opt) {
    check_dims(theta, w);
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    const int d = theta.dim();
    BestApproxSequence seq;
    seq.theta = theta;
    seq.weights = w.entries();
    OrbitEngine eng(make_theta_lattice(theta), FlowParams::vector_case(w), opt.max_bits);
    const double log_den = log_abs(theta.denominator);
    std::set<mpz_class> found;
    std::set<mpz_class> uncertain;
    bool terminal = false;
    mpz_class terminal_q;
    for (long k = 0; static_cast<double>(k) < t_budget && !terminal; ++k) {
        const double s0 = static_cast<double>(k);
        const double s1 = std::min(s0 + 1.0, t_budget);
        eng.advance_to(s0);
        std::vector<mpz_class> qs;
        std::vector<Piecewise> fs;
        std::vector<bool> exact_hit;
        std::set<mpz_class> seen;
        for (auto& [q, p] : window_candidates(eng, d)) {
            if (!seen.insert(q).second) continue;
            NearestP np = nearest_p(theta, q, w);
            Piecewise f;
            bool zero = true;
            for (int i = 0; i < d; ++i) {
                const double l = log_abs(np.residual[static_cast<size_t>(i)]);
                if (std::isinf(l)) continue;
                zero = false;
                f.slope.push_back(w.as_double(i));
                f.icpt.push_back(l - log_den);
            }
            f.slope.push_back(-1.0);
            f.icpt.push_back(log_abs(q));
            qs.push_back(q);
            fs.push_back(std::move(f));
            exact_hit.push_back(zero);
        }
        // Breakpoints: kinks and pairwise crossings of all linear pieces inside the window.
        std::vector<double> bp{s0, s1};
        std::vector<std::pair<double, double>> lines;
        for (const auto& f : fs) {
            for (size_t i = 0; i < f.slope.size(); ++i) lines.emplace_back(f.slope[i], f.icpt[i]);
        }
        for (size_t i = 0; i < lines.size(); ++i) {
            for (size_t j = i + 1; j < lines.size(); ++j) {
                const double ds = lines[i].first - lines[j].first;
                if (std::fabs(ds) < 1e-15) continue;
                const double s = (lines[j].second - lines[i].second) / ds;
                if (s > s0 && s < s1) bp.push_back(s);
            }
        }
        std::sort(bp.begin(), bp.end());
        for (size_t b = 0; b + 1 < bp.size(); ++b) {
            if (bp[b + 1] - bp[b] < 1e-12) continue;
            const double mid = 0.5 * (bp[b] + bp[b + 1]);
            size_t arg = 0;
            double best = std::numeric_limits<double>::infinity();
            double second = std::numeric_limits<double>::infinity();
            for (size_t z = 0; z < fs.size(); ++z) {
                const double v = fs[z].eval(mid);
                if (v < best) {
                    second = best;
                    best = v;
                    arg = z;
                } else if (v < second) {
                    second = v;
                }
            }
            if (fs.empty()) continue;
            if (second - best < 1e-10 * (1.0 + std::fabs(best))) {
                uncertain.insert(qs[arg]);
                continue;
            }
            found.insert(qs[arg]);
            if (exact_hit[arg]) {
                terminal = true;
                terminal_q = qs[arg];
            }
        }
        if (found.size() >= n_max && !found.empty()) {
            // Later windows can only add larger q.
            break;
        }
    }
    for (const auto& q : found) {
        if (seq.records.size() >= n_max) break;
        push_record(seq, theta, w, q);
        if (terminal && q == terminal_q) break;
    }
    for (auto& r : seq.records) {
        if (uncertain.count(r.q)) r.certified = false;
    }
    seq.terminal = terminal;
    seq.horizon_q = seq.records.empty() ? mpz_class(0) : seq.records.back().q;
    return seq;
}

std::optional<PrefixAlignment> prefix_equivalent(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("prefix_equivalent needs nonempty sequences");
    for (std::size_t k = 0; k < a.size(); ++k) {
        for (std::size_t l = 0; l < b.size(); ++l) {
            bool ok = true;
            std::size_t i = 0;
            for (; k + i < a.size() && l + i < b.size(); ++i) {
                if (a[k + i] != b[l + i]) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            if (i < 3) throw InsufficientHorizon("fewer than 3 overlapping terms after alignment");
            return PrefixAlignment{k + 1, l + 1, i};
        }
    }
    return std::nullopt;
}

}  // namespace wba
