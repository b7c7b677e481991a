#include "wba/lattice.hpp"

#include "wba/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wba {

IntervalMatrix::IntervalMatrix(int dim, long bits)
    : n(dim), a(static_cast<size_t>(dim * dim), DyadicInterval::from_integer(0, bits)) {}

// ---- FlowParams / FlowTime ----

FlowParams FlowParams::vector_case(const WeightVector& w) {
    FlowParams f;
    f.exponents = w.entries();
    f.exponents.push_back(-1);
    f.m = w.dim();
    f.n = 1;
    f.w = w;
    return f;
}

FlowParams FlowParams::matrix_case(const WeightVector& a, const WeightVector& b) {
    FlowParams f;
    f.exponents = a.entries();
    for (const auto& x : b.entries()) f.exponents.push_back(-x);
    f.m = a.dim();
    f.n = b.dim();
    return f;
}

mpq_class FlowParams::trace() const {
    mpq_class s = 0;
    for (const auto& c : exponents) s += c;
    return s;
}

double FlowParams::max_exponent() const {
    double m = 0;
    for (const auto& c : exponents) m = std::max(m, c.get_d());
    return m;
}

namespace {

double log_abs(const mpz_class& z) {
    long e = 0;
    const double m = mpz_get_d_2exp(&e, z.get_mpz_t());
    return std::log(std::fabs(m)) + static_cast<double>(e) * M_LN2;
}

double log_rational(const mpq_class& q) { return log_abs(q.get_num()) - log_abs(q.get_den()); }

constexpr double kSaturation = 300.0;

}  // namespace

double FlowTime::log_value() const { return log_rational(tau) + s; }

mpq_class ExactFrame::exponent(int i) const {
    return exponents.empty() ? mpq_class(0) : exponents[static_cast<size_t>(i)];
}

DMatrix frame_numeric_basis(const ExactFrame& f, const FlowTime& t, bool* saturated) {
    const int n = f.dim();
    DMatrix b(n);
    const double lt = log_rational(t.tau) + t.s;
    const double lden = log_abs(f.den);
    bool sat = false;
    for (int i = 0; i < n; ++i) {
        const double row = f.exponent(i).get_d() * lt - lden;
        for (int j = 0; j < n; ++j) {
            const mpz_class& x = f.xi(i, j);
            if (x == 0) continue;
            double l = log_abs(x) + row;
            if (l > kSaturation || l < -kSaturation) {
                sat = true;
                l = std::clamp(l, -kSaturation, kSaturation);
            }
            b(i, j) = (sgn(x) < 0 ? -1.0 : 1.0) * std::exp(l);
        }
    }
    if (saturated) *saturated = sat;
    return b;
}

namespace {

DyadicInterval row_factor(const ExactFrame& f, int i, long bits) {
    const mpq_class c = f.exponent(i);
    DyadicInterval r = DyadicInterval::from_integer(1, bits);
    if (c == 0) return r;
    if (f.time.tau != 1) {
        if (c.get_den() == 1) {
            mpq_class p = 1;
            const mpz_class& k = c.get_num();
            mpq_class base = k > 0 ? f.time.tau : mpq_class(1 / f.time.tau);
            unsigned long e = mpz_class(abs(k)).get_ui();
            mpz_pow_ui(mpq_numref(p.get_mpq_t()), base.get_num().get_mpz_t(), e);
            mpz_pow_ui(mpq_denref(p.get_mpq_t()), base.get_den().get_mpz_t(), e);
            r = DyadicInterval::from_rational(p, bits);
        } else {
            r = pow(DyadicInterval::from_rational(f.time.tau, bits), c);
        }
    }
    if (f.time.s != 0.0) {
        r = r * exp(DyadicInterval::from_rational(c, bits) * DyadicInterval::from_double(f.time.s, bits));
    }
    return r;
}

// Exact rational row factor when tau^{c} is rational (integer exponent, no real part).
std::optional<mpq_class> rational_row_factor(const ExactFrame& f, int i) {
    const mpq_class c = f.exponent(i);
    if (c == 0) return mpq_class(1);
    if (f.time.s != 0.0 || c.get_den() != 1) {
        if (f.time.tau == 1 && f.time.s == 0.0) return mpq_class(1);
        return std::nullopt;
    }
    mpq_class p;
    const mpz_class& k = c.get_num();
    mpq_class base = k > 0 ? f.time.tau : mpq_class(1 / f.time.tau);
    unsigned long e = mpz_class(abs(k)).get_ui();
    mpz_pow_ui(mpq_numref(p.get_mpq_t()), base.get_num().get_mpz_t(), e);
    mpz_pow_ui(mpq_denref(p.get_mpq_t()), base.get_den().get_mpz_t(), e);
    p.canonicalize();
    return p;
}

void apply_transform(ZMatrix& m, const IMatrix& t) {
    const int n = m.n;
    ZMatrix r(n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            const long long c = t(k, j);
            if (c == 0) continue;
            for (int i = 0; i < n; ++i) {
                if (c > 0) {
                    mpz_addmul_ui(r(i, j).get_mpz_t(), m(i, k).get_mpz_t(), static_cast<unsigned long>(c));
                } else {
                    mpz_submul_ui(r(i, j).get_mpz_t(), m(i, k).get_mpz_t(), static_cast<unsigned long>(-c));
                }
            }
        }
    }
    m = std::move(r);
}

// Reduce an exact frame at its own time by iterated floating LLL on fresh conversions.
void reduce_frame(ExactFrame& f, bool track_u, bool* saturated) {
    for (int pass = 0; pass < 64; ++pass) {
        DMatrix b = frame_numeric_basis(f, f.time, saturated);
        if (saturated && *saturated) return;
        IMatrix t = IMatrix::identity(f.dim());
        lll_reduce(b, t);
        if (t.is_identity()) return;
        apply_transform(f.xi, t);
        if (track_u) apply_transform(f.unimodular, t);
    }
}

void check_budget(double log_time, double max_exp, long ceiling) {
    const long need = bits_for_time(std::fabs(log_time), max_exp);
    if (need > ceiling) {
        throw PrecisionExhausted("flow time " + std::to_string(log_time) + " needs " + std::to_string(need) +
                                     " bits, ceiling is " + std::to_string(ceiling),
                                 need, ceiling);
    }
}

}  // namespace

// ---- UnimodularLattice ----

UnimodularLattice UnimodularLattice::from_frame(ExactFrame frame, Origin origin, double log_time) {
    UnimodularLattice L;
    L.dim_ = frame.dim();
    L.origin_ = origin;
    L.log_time_ = log_time;
    if (frame.unimodular.n != frame.dim()) frame.unimodular = ZMatrix::identity(frame.dim());
    L.frame_ = std::make_shared<const ExactFrame>(std::move(frame));
    L.refresh_numeric();
    return L;
}

UnimodularLattice UnimodularLattice::from_rational_basis(const std::vector<std::vector<mpq_class>>& columns,
                                                         Origin origin) {
    const int n = static_cast<int>(columns.size());
    ExactFrame f;
    f.xi = ZMatrix(n);
    mpz_class l = 1;
    for (const auto& col : columns) {
        if (static_cast<int>(col.size()) != n) throw std::invalid_argument("basis must be square");
        for (auto q : col) {
            q.canonicalize();
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den().get_mpz_t());
        }
    }
    f.den = l;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            mpq_class q = columns[static_cast<size_t>(j)][static_cast<size_t>(i)];
            q.canonicalize();
            f.xi(i, j) = q.get_num() * (l / q.get_den());
        }
    }
    f.unimodular = ZMatrix::identity(n);
    return from_frame(std::move(f), origin);
}

UnimodularLattice UnimodularLattice::from_generator(int dim, IntervalGenerator gen, Origin origin) {
    UnimodularLattice L;
    L.dim_ = dim;
    L.origin_ = origin;
    L.gen_ = std::move(gen);
    L.refresh_numeric();
    return L;
}

void UnimodularLattice::refresh_numeric() {
    if (frame_) {
        numeric_ = frame_numeric_basis(*frame_, frame_->time, &saturated_);
        return;
    }
    const long bits = bits_for_time(std::fabs(log_time_), 1.0);
    IntervalMatrix m = gen_(bits);
    numeric_ = DMatrix(dim_);
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) numeric_(i, j) = m(i, j).center_double();
    }
}

IntervalMatrix UnimodularLattice::interval_basis(long bits) const {
    if (!frame_) return gen_(bits);
    const ExactFrame& f = *frame_;
    IntervalMatrix m(dim_, bits);
    for (int i = 0; i < dim_; ++i) {
        auto rq = rational_row_factor(f, i);
        DyadicInterval rf = rq ? DyadicInterval::from_integer(1, bits) : row_factor(f, i, bits);
        for (int j = 0; j < dim_; ++j) {
            mpq_class e(f.xi(i, j), f.den);
            e.canonicalize();
            if (rq) {
                m(i, j) = DyadicInterval::from_rational(e * *rq, bits);
            } else {
                m(i, j) = DyadicInterval::from_rational(e, bits) * rf;
            }
        }
    }
    return m;
}

std::vector<double> UnimodularLattice::column(int j) const {
    std::vector<double> c(static_cast<size_t>(dim_));
    for (int i = 0; i < dim_; ++i) c[static_cast<size_t>(i)] = numeric_(i, j);
    return c;
}

UnimodularLattice make_theta_lattice(const ThetaVector& theta) {
    const int d = theta.dim();
    const int n = d + 1;
    ExactFrame f;
    f.den = theta.denominator;
    f.xi = ZMatrix(n);
    for (int i = 0; i < n; ++i) f.xi(i, i) = f.den;
    for (int i = 0; i < d; ++i) f.xi(i, d) = -theta.numerators[static_cast<size_t>(i)];
    f.unimodular = ZMatrix::identity(n);
    UnimodularLattice L = UnimodularLattice::from_frame(std::move(f), UnimodularLattice::Origin::Theta);
    L.set_bit_limit(theta.orbit_bit_limit());
    return L;
}

UnimodularLattice apply_flow(const UnimodularLattice& L, const FlowParams& fp, const FlowTime& t, long max_bits) {
    if (fp.dim() != L.dim()) throw std::invalid_argument("flow dimension does not match lattice");
    if (fp.trace() != 0) throw std::invalid_argument("flow exponents must sum to 0");
    const double new_log = L.log_time() + t.log_value();
    check_budget(new_log, fp.max_exponent(), std::min(max_bits, L.bit_limit()));

    if (const ExactFrame* src = L.exact()) {
        ExactFrame f = *src;
        bool compatible = true;
        if (f.exponents.empty() || f.time.is_zero()) {
            f.exponents = fp.exponents;
            f.time = t;
        } else if (f.exponents == fp.exponents) {
            f.time = FlowTime{f.time.tau * t.tau, f.time.s + t.s};
        } else {
            compatible = false;
        }
        if (compatible) {
            bool sat = false;
            reduce_frame(f, true, &sat);
            UnimodularLattice out = UnimodularLattice::from_frame(std::move(f), L.origin(), new_log);
            out.set_bit_limit(L.bit_limit());
            return out;
        }
    }

    // Generic path: rescale the interval basis and reduce numerically.
    auto parent = std::make_shared<UnimodularLattice>(L);
    const std::vector<mpq_class> exps = fp.exponents;
    const FlowTime ft = t;
    auto scaled = [parent, exps, ft](long bits) {
        IntervalMatrix m = parent->interval_basis(bits);
        for (int i = 0; i < m.n; ++i) {
            const mpq_class& c = exps[static_cast<size_t>(i)];
            DyadicInterval f = DyadicInterval::from_integer(1, bits);
            if (ft.tau != 1) f = pow(DyadicInterval::from_rational(ft.tau, bits), c);
            if (ft.s != 0.0) {
                f = f * exp(DyadicInterval::from_rational(c, bits) * DyadicInterval::from_double(ft.s, bits));
            }
            for (int j = 0; j < m.n; ++j) m(i, j) = m(i, j) * f;
        }
        return m;
    };
    const long bits = bits_for_time(std::fabs(new_log), fp.max_exponent());
    IntervalMatrix m = scaled(bits);
    DMatrix b(L.dim());
    for (int i = 0; i < b.n; ++i) {
        for (int j = 0; j < b.n; ++j) b(i, j) = m(i, j).center_double();
    }
    IMatrix tr = IMatrix::identity(L.dim());
    lll_reduce(b, tr);
    auto gen = [scaled, tr](long bb) {
        IntervalMatrix s = scaled(bb);
        IntervalMatrix r(s.n, bb);
        for (int i = 0; i < s.n; ++i) {
            for (int j = 0; j < s.n; ++j) {
                DyadicInterval acc = DyadicInterval::from_integer(0, bb);
                for (int k = 0; k < s.n; ++k) {
                    if (tr(k, j) != 0) acc = acc + s(i, k) * DyadicInterval::from_integer(mpz_class(static_cast<long>(tr(k, j))), bb);
                }
                r(i, j) = acc;
            }
        }
        return r;
    };
    UnimodularLattice out = UnimodularLattice::from_generator(L.dim(), gen, L.origin());
    out.log_time_ = new_log;
    out.set_bit_limit(L.bit_limit());
    out.refresh_numeric();
    return out;
}

UnimodularLattice apply_flow(const UnimodularLattice& L, const FlowParams& fp, double t, long max_bits) {
    return apply_flow(L, fp, FlowTime::real(t), max_bits);
}

std::optional<IMatrix> change_of_basis(const UnimodularLattice& a, const UnimodularLattice& b) {
    const int n = a.dim();
    if (b.dim() != n) return std::nullopt;
    // Solve B1 X = B2 by Gaussian elimination with partial pivoting.
    const DMatrix& A = a.numeric_basis();
    const DMatrix& B = b.numeric_basis();
    std::vector<std::vector<double>> m(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(2 * n)));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m[static_cast<size_t>(i)][static_cast<size_t>(j)] = A(i, j);
            m[static_cast<size_t>(i)][static_cast<size_t>(n + j)] = B(i, j);
        }
    }
    for (int c = 0; c < n; ++c) {
        int p = c;
        for (int r = c + 1; r < n; ++r) {
            if (std::fabs(m[static_cast<size_t>(r)][static_cast<size_t>(c)]) >
                std::fabs(m[static_cast<size_t>(p)][static_cast<size_t>(c)])) {
                p = r;
            }
        }
        std::swap(m[static_cast<size_t>(c)], m[static_cast<size_t>(p)]);
        const double piv = m[static_cast<size_t>(c)][static_cast<size_t>(c)];
        if (piv == 0) return std::nullopt;
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = m[static_cast<size_t>(r)][static_cast<size_t>(c)] / piv;
            for (int k = 0; k < 2 * n; ++k) {
                m[static_cast<size_t>(r)][static_cast<size_t>(k)] -= f * m[static_cast<size_t>(c)][static_cast<size_t>(k)];
            }
        }
    }
    IMatrix x(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = m[static_cast<size_t>(i)][static_cast<size_t>(n + j)] / m[static_cast<size_t>(i)][static_cast<size_t>(i)];
            const double r = std::nearbyint(v);
            if (std::fabs(v - r) > 1e-6) return std::nullopt;
            x(i, j) = static_cast<long long>(r);
        }
    }
    // Integer determinant by fraction-free elimination.
    std::vector<std::vector<mpz_class>> z(static_cast<size_t>(n), std::vector<mpz_class>(static_cast<size_t>(n)));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) z[static_cast<size_t>(i)][static_cast<size_t>(j)] = static_cast<long>(x(i, j));
    }
    mpz_class prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (z[static_cast<size_t>(k)][static_cast<size_t>(k)] == 0) {
            int p = k + 1;
            while (p < n && z[static_cast<size_t>(p)][static_cast<size_t>(k)] == 0) ++p;
            if (p == n) return std::nullopt;
            std::swap(z[static_cast<size_t>(k)], z[static_cast<size_t>(p)]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) {
                z[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                    (z[static_cast<size_t>(i)][static_cast<size_t>(j)] * z[static_cast<size_t>(k)][static_cast<size_t>(k)] -
                     z[static_cast<size_t>(i)][static_cast<size_t>(k)] * z[static_cast<size_t>(k)][static_cast<size_t>(j)]) /
                    prev;
            }
        }
        prev = z[static_cast<size_t>(k)][static_cast<size_t>(k)];
    }
    mpz_class det = z[static_cast<size_t>(n - 1)][static_cast<size_t>(n - 1)] * sign;
    if (abs(det) != 1) return std::nullopt;
    return x;
}

DyadicInterval determinant(const UnimodularLattice& L, long bits) {
    // Interval Gaussian elimination without pivot search beyond nonzero checks.
    IntervalMatrix m = L.interval_basis(bits);
    const int n = m.n;
    DyadicInterval det = DyadicInterval::from_integer(1, bits);
    for (int c = 0; c < n; ++c) {
        int p = -1;
        double best = 0;
        for (int r = c; r < n; ++r) {
            const double v = std::fabs(m(r, c).center_double());
            if (!m(r, c).contains_zero() && v > best) {
                best = v;
                p = r;
            }
        }
        if (p < 0) return DyadicInterval::hull(DyadicInterval::from_integer(-1, bits), DyadicInterval::from_integer(1, bits));
        if (p != c) {
            for (int k = 0; k < n; ++k) std::swap(m(c, k), m(p, k));
            det = -det;
        }
        det = det * m(c, c);
        for (int r = c + 1; r < n; ++r) {
            DyadicInterval f = m(r, c) / m(c, c);
            for (int k = c; k < n; ++k) m(r, k) = m(r, k) - f * m(c, k);
        }
    }
    return det;
}

// ---- VectorSet ----

VectorSet::VectorSet(const UnimodularLattice& L, std::vector<std::vector<long long>> coeffs, const WeightVector* w,
                     long max_bits)
    : L_(L), coeffs_(std::move(coeffs)), w_(w) {
    for (long b = kStartBits; b <= std::max(max_bits, kStartBits); b *= 2) bits_.push_back(b);
    exact_ok_ = L.exact() && L.exact()->time.is_exact();
    frame_cache_.resize(coeffs_.size());
    coord_cache_.assign(bits_.size(), std::vector<std::optional<DyadicInterval>>(coeffs_.size() * static_cast<size_t>(L.dim())));
    basis_cache_.resize(bits_.size());
}

const std::vector<mpz_class>& VectorSet::frame_vector(std::size_t a) {
    if (!frame_cache_[a]) {
        const ExactFrame& f = *L_.exact();
        const int n = f.dim();
        std::vector<mpz_class> y(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const long long c = coeffs_[a][static_cast<size_t>(j)];
                if (c > 0) mpz_addmul_ui(y[static_cast<size_t>(i)].get_mpz_t(), f.xi(i, j).get_mpz_t(), static_cast<unsigned long>(c));
                if (c < 0) mpz_submul_ui(y[static_cast<size_t>(i)].get_mpz_t(), f.xi(i, j).get_mpz_t(), static_cast<unsigned long>(-c));
            }
        }
        frame_cache_[a] = std::move(y);
    }
    return *frame_cache_[a];
}

std::vector<mpz_class> VectorSet::root_coords(std::size_t a) {
    const ExactFrame& f = *L_.exact();
    const int n = f.dim();
    std::vector<mpz_class> z(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) z[static_cast<size_t>(i)] += f.unimodular(i, j) * static_cast<long>(coeffs_[a][static_cast<size_t>(j)]);
    }
    return z;
}

DyadicInterval VectorSet::coord(std::size_t a, int i, long bits) {
    int level = -1;
    for (size_t k = 0; k < bits_.size(); ++k) {
        if (bits_[k] == bits) level = static_cast<int>(k);
    }
    const size_t slot = a * static_cast<size_t>(L_.dim()) + static_cast<size_t>(i);
    if (level >= 0 && coord_cache_[static_cast<size_t>(level)][slot]) return *coord_cache_[static_cast<size_t>(level)][slot];
    DyadicInterval v(bits);
    if (const ExactFrame* f = L_.exact()) {
        const mpz_class& y = frame_vector(a)[static_cast<size_t>(i)];
        mpq_class e(y, f->den);
        e.canonicalize();
        if (auto rq = rational_row_factor(*f, i)) {
            v = DyadicInterval::from_rational(e * *rq, bits);
        } else {
            v = DyadicInterval::from_rational(e, bits) * row_factor(*f, i, bits);
        }
    } else {
        IntervalMatrix* bm = nullptr;
        IntervalMatrix local;
        if (level >= 0) {
            if (!basis_cache_[static_cast<size_t>(level)]) basis_cache_[static_cast<size_t>(level)] = L_.interval_basis(bits);
            bm = &*basis_cache_[static_cast<size_t>(level)];
        } else {
            local = L_.interval_basis(bits);
            bm = &local;
        }
        DyadicInterval acc = DyadicInterval::from_integer(0, bits);
        for (int j = 0; j < L_.dim(); ++j) {
            const long long c = coeffs_[a][static_cast<size_t>(j)];
            if (c != 0) acc = acc + (*bm)(i, j) * DyadicInterval::from_integer(mpz_class(static_cast<long>(c)), bits);
        }
        v = acc;
    }
    if (level >= 0) coord_cache_[static_cast<size_t>(level)][slot] = v;
    return v;
}

DyadicInterval VectorSet::hnorm(std::size_t a, long bits) {
    if (!w_) throw std::logic_error("weights required for the horizontal quasi-norm");
    WVector x;
    for (int i = 0; i < w_->dim(); ++i) x.coords.push_back(coord(a, i, bits));
    return quasi_norm(x, *w_);
}

DyadicInterval VectorSet::sup_norm(std::size_t a, long bits) {
    DyadicInterval m = DyadicInterval::from_integer(0, bits);
    for (int i = 0; i < L_.dim(); ++i) m = max(m, abs(coord(a, i, bits)));
    return m;
}

DyadicInterval VectorSet::w_sup_norm(std::size_t a, long bits) {
    return max(hnorm(a, bits), abs(coord(a, L_.dim() - 1, bits)));
}

DyadicInterval VectorSet::euclid_norm(std::size_t a, long bits) {
    DyadicInterval s = DyadicInterval::from_integer(0, bits);
    for (int i = 0; i < L_.dim(); ++i) {
        DyadicInterval c = coord(a, i, bits);
        s = s + c * c;
    }
    return sqrt(s);
}

PowerProduct VectorSet::hnorm_exact(std::size_t a) {
    const ExactFrame& f = *L_.exact();
    const auto& y = frame_vector(a);
    PowerProduct best{{{mpq_class(0), mpq_class(1)}}};
    for (int i = 0; i < w_->dim(); ++i) {
        if (y[static_cast<size_t>(i)] == 0) continue;
        mpq_class base(abs(y[static_cast<size_t>(i)]), f.den);
        base.canonicalize();
        const mpq_class inv = 1 / (*w_)[i];
        PowerProduct cand{{{base, inv}}};
        const mpq_class c = f.exponent(i);
        if (c != 0 && f.time.tau != 1) cand.terms.push_back({f.time.tau, c * inv});
        if (compare_exact(cand, best) == Ordering::GT) best = cand;
    }
    return best;
}

mpq_class VectorSet::last_exact(std::size_t a) {
    const ExactFrame& f = *L_.exact();
    const int i = L_.dim() - 1;
    auto rq = rational_row_factor(f, i);
    if (!rq) throw std::logic_error("last coordinate is not rational");
    mpq_class e(frame_vector(a)[static_cast<size_t>(i)], f.den);
    e.canonicalize();
    return e * *rq;
}

namespace {

Ordering from_cmp(int c) { return c < 0 ? Ordering::LT : (c > 0 ? Ordering::GT : Ordering::EQ); }

}  // namespace

std::optional<Ordering> VectorSet::hnorm_vs(std::size_t a, const mpq_class& k, int level) {
    if (is_exact_level(level)) {
        PowerProduct rhs{{{k, mpq_class(1)}}};
        return compare_exact(hnorm_exact(a), rhs);
    }
    const long bits = level_bits(level);
    return certified_compare(hnorm(a, bits), DyadicInterval::from_rational(k, bits));
}

std::optional<Ordering> VectorSet::hnorm_vs_vector(std::size_t a, std::size_t b, int level) {
    if (is_exact_level(level)) return compare_exact(hnorm_exact(a), hnorm_exact(b));
    const long bits = level_bits(level);
    return certified_compare(hnorm(a, bits), hnorm(b, bits));
}

std::optional<Ordering> VectorSet::last_abs_vs(std::size_t a, const mpq_class& k, int level) {
    if (const ExactFrame* f = L_.exact()) {
        if (rational_row_factor(*f, L_.dim() - 1)) return from_cmp(cmp(abs(last_exact(a)), k));
    }
    if (is_exact_level(level)) return std::nullopt;
    const long bits = level_bits(level);
    return certified_compare(abs(coord(a, L_.dim() - 1, bits)), DyadicInterval::from_rational(k, bits));
}

// ---- region enumeration ----

bool is_primitive(const std::vector<long long>& c) {
    long long g = 0;
    for (long long x : c) g = std::gcd(g, x < 0 ? -x : x);
    return g == 1;
}

namespace {

std::vector<std::vector<long long>> box_candidates(const UnimodularLattice& L, const std::vector<double>& half) {
    return enumerate_box(L.numeric_basis(), half);
}

template <class F>
auto first_certified(VectorSet& vs, F f) -> decltype(f(0)) {
    for (int level = 0; level < vs.levels(); ++level) {
        auto r = f(level);
        if (r) return r;
    }
    return std::nullopt;
}

}  // namespace

std::vector<LatticePoint> enumerate_in_region(const UnimodularLattice& L, const Region& reg, const WeightVector& w,
                                              long max_bits) {
    const int d = w.dim();
    if (L.dim() != d + 1) throw std::invalid_argument("lattice dimension must be d+1");
    if (reg.r < 0) throw std::invalid_argument("region radius must be nonnegative");
    std::vector<double> half(static_cast<size_t>(d + 1));
    const double r = reg.r.get_d();
    for (int i = 0; i < d; ++i) half[static_cast<size_t>(i)] = std::max(std::pow(r, w.as_double(i)), 1e-12) * 1.1;
    half[static_cast<size_t>(d)] = 1.1 * (reg.kind == Region::Kind::CylinderTall ? reg.e.get_d() : 1.0);
    auto cand = box_candidates(L, half);
    cand.erase(std::remove_if(cand.begin(), cand.end(), [](const auto& c) { return !is_primitive(c); }), cand.end());
    VectorSet vs(L, cand, &w, max_bits);
    std::vector<LatticePoint> out;
    for (std::size_t a = 0; a < vs.size(); ++a) {
        auto inside = first_certified(vs, [&](int level) -> std::optional<bool> {
            if (reg.kind == Region::Kind::Disk) {
                // last coordinate must equal +1 exactly
                auto o = vs.last_abs_vs(a, 1, level);
                if (!o) return std::nullopt;
                if (*o != Ordering::EQ) return false;
                const long bits = vs.is_exact_level(level) ? kStartBits : std::max<long>(kStartBits, 128);
                if (vs.coord(a, d, bits).upper_double() < 0) return false;
            } else {
                auto o = vs.last_abs_vs(a, reg.kind == Region::Kind::CylinderTall ? reg.e : mpq_class(1), level);
                if (!o) return std::nullopt;
                if (*o == Ordering::GT) return false;
            }
            auto h = vs.hnorm_vs(a, reg.r, level);
            if (!h) return std::nullopt;
            return *h != Ordering::GT;
        });
        if (!inside) throw BoundaryAmbiguous("region membership not certifiable");
        if (*inside) {
            LatticePoint p;
            p.coeffs = vs.coeffs(a);
            for (int i = 0; i <= d; ++i) p.coords.push_back(vs.coord(a, i, kStartBits));
            out.push_back(std::move(p));
        }
    }
    return out;
}

namespace {

std::vector<std::vector<long long>> cube_candidates(const UnimodularLattice& L) {
    std::vector<double> half(static_cast<size_t>(L.dim()), 1.0 + 1e-6);
    return box_candidates(L, half);
}

template <class Norm>
DyadicInterval min_enclosure(VectorSet& vs, Norm norm) {
    if (vs.size() == 0) throw std::runtime_error("no lattice vector found in the Minkowski box");
    std::optional<DyadicInterval> best;
    for (std::size_t a = 0; a < vs.size(); ++a) {
        DyadicInterval v = norm(a);
        best = best ? min(*best, v) : v;
    }
    return *best;
}

}  // namespace

DyadicInterval lambda1_sup(const UnimodularLattice& L) {
    VectorSet vs(L, cube_candidates(L), nullptr);
    return min_enclosure(vs, [&](std::size_t a) { return vs.sup_norm(a, kStartBits); });
}

DyadicInterval lambda1_w(const UnimodularLattice& L, const WeightVector& w) {
    if (L.dim() != w.dim() + 1) throw std::invalid_argument("lattice dimension must be d+1");
    VectorSet vs(L, cube_candidates(L), &w);
    return min_enclosure(vs, [&](std::size_t a) { return vs.w_sup_norm(a, kStartBits); });
}

DyadicInterval delta_fn(const UnimodularLattice& L) {
    DMatrix b = L.numeric_basis();
    IMatrix t = IMatrix::identity(b.n);
    lll_reduce(b, t);
    double r = HUGE_VAL;
    for (int j = 0; j < b.n; ++j) {
        double s = 0;
        for (int i = 0; i < b.n; ++i) s += b(i, j) * b(i, j);
        r = std::min(r, std::sqrt(s));
    }
    auto cand = enumerate_ball(L.numeric_basis(), r * (1.0 + 1e-6));
    VectorSet vs(L, cand, nullptr);
    DyadicInterval lam = min_enclosure(vs, [&](std::size_t a) { return vs.euclid_norm(a, kStartBits); });
    return -log(lam);
}

// ---- section classification ----

SectionClass classify_section_point(const UnimodularLattice& L, const WeightVector& w, long max_bits) {
    const int d = w.dim();
    if (L.dim() != d + 1) throw std::invalid_argument("lattice dimension must be d+1");
    std::vector<double> half(static_cast<size_t>(d + 1), 1.1);
    auto cand = box_candidates(L, half);
    std::vector<std::vector<long long>> prim;
    for (auto& c : cand) {
        if (!is_primitive(c)) continue;
        auto it = std::find_if(c.begin(), c.end(), [](long long x) { return x != 0; });
        if (*it > 0) prim.push_back(std::move(c));
    }
    VectorSet vs(L, prim, &w, max_bits);

    struct Outcome {
        std::vector<std::size_t> d1;
        bool in_b = false;
    };
    auto outcome = first_certified(vs, [&](int level) -> std::optional<Outcome> {
        Outcome o;
        for (std::size_t a = 0; a < vs.size(); ++a) {
            auto l = vs.last_abs_vs(a, 1, level);
            if (!l) return std::nullopt;
            if (*l != Ordering::EQ) continue;
            auto h = vs.hnorm_vs(a, mpq_class(1), level);
            if (!h) return std::nullopt;
            if (*h != Ordering::GT) o.d1.push_back(a);
        }
        if (o.d1.size() != 1) return o;
        const std::size_t v = o.d1.front();
        o.in_b = true;
        for (std::size_t u = 0; u < vs.size(); ++u) {
            if (u == v) continue;
            auto l = vs.last_abs_vs(u, 1, level);
            if (!l) return std::nullopt;
            if (*l == Ordering::GT) continue;
            auto h = vs.hnorm_vs_vector(u, v, level);
            if (!h) return std::nullopt;
            if (*h != Ordering::GT) {
                o.in_b = false;
                break;
            }
        }
        return o;
    });
    if (!outcome) throw BoundaryAmbiguous("section membership not certifiable");

    SectionClass sc;
    sc.d1_count = static_cast<int>(outcome->d1.size());
    if (outcome->d1.empty()) {
        sc.kind = SectionClass::Kind::NotInS1;
        return sc;
    }
    std::size_t v = outcome->d1.front();
    sc.v = vs.coeffs(v);
    if (vs.coord(v, d, kStartBits).upper_double() < 0) {
        for (auto& x : sc.v) x = -x;
    }
    sc.r = vs.hnorm(v, kStartBits);
    if (outcome->d1.size() > 1) {
        sc.kind = SectionClass::Kind::S1NotSharp;
        return sc;
    }
    sc.kind = SectionClass::Kind::S1Sharp;
    sc.in_B = outcome->in_b;
    return sc;
}

// ---- OrbitEngine ----

OrbitEngine::OrbitEngine(const UnimodularLattice& start, const FlowParams& fp, long max_bits, bool track_unimodular)
    : fp_(fp), ceiling_(std::min(max_bits, start.bit_limit())), track_u_(track_unimodular), origin_(start.origin()) {
    const ExactFrame* f = start.exact();
    if (!f) throw std::invalid_argument("orbit engine needs an exact starting lattice");
    if (fp.dim() != start.dim()) throw std::invalid_argument("flow dimension does not match lattice");
    frame_ = *f;
    if (frame_.exponents.empty() || frame_.time.is_zero()) {
        frame_.exponents = fp.exponents;
        frame_.time = FlowTime{};
    } else if (frame_.exponents != fp.exponents) {
        throw std::invalid_argument("starting frame carries a different flow");
    }
    if (frame_.unimodular.n != frame_.dim()) frame_.unimodular = ZMatrix::identity(frame_.dim());
    reduce();
}

void OrbitEngine::rebuild_numeric() {
    FlowTime t{frame_.time.tau, frame_.time.s + t_};
    numeric_ = frame_numeric_basis(frame_, t, &saturated_);
}

void OrbitEngine::reduce() {
    for (int pass = 0; pass < 64; ++pass) {
        rebuild_numeric();
        if (saturated_) return;
        DMatrix b = numeric_;
        IMatrix t = IMatrix::identity(b.n);
        lll_reduce(b, t);
        if (t.is_identity()) return;
        apply_transform(frame_.xi, t);
        if (track_u_) apply_transform(frame_.unimodular, t);
    }
}

void OrbitEngine::advance_to(double t) {
    if (t < t_) throw std::invalid_argument("orbit engine only moves forward");
    check_budget(t, fp_.max_exponent(), ceiling_);
    t_ = t;
    reduce();
}

DMatrix OrbitEngine::basis_at(double s) const {
    DMatrix b = numeric_;
    for (int i = 0; i < b.n; ++i) {
        const double f = std::exp(fp_.exponents[static_cast<size_t>(i)].get_d() * (s - t_));
        for (int j = 0; j < b.n; ++j) b(i, j) *= f;
    }
    return b;
}

std::vector<mpz_class> OrbitEngine::root_vector(const std::vector<long long>& c) const {
    if (!track_u_) throw std::logic_error("orbit engine is not tracking the unimodular transform");
    const int n = frame_.dim();
    std::vector<mpz_class> z(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) z[static_cast<size_t>(i)] += frame_.unimodular(i, j) * static_cast<long>(c[static_cast<size_t>(j)]);
    }
    return z;
}

UnimodularLattice OrbitEngine::lattice_at(const mpq_class& tau) const {
    ExactFrame f = frame_;
    f.time = FlowTime{frame_.time.tau * tau, frame_.time.s};
    UnimodularLattice L = UnimodularLattice::from_frame(std::move(f), origin_, FlowTime::exact(tau).log_value());
    L.set_bit_limit(ceiling_);
    return L;
}

UnimodularLattice OrbitEngine::lattice_at(double t) const {
    ExactFrame f = frame_;
    f.time = FlowTime{frame_.time.tau, frame_.time.s + t};
    UnimodularLattice L = UnimodularLattice::from_frame(std::move(f), origin_, t);
    L.set_bit_limit(ceiling_);
    return L;
}

}  // namespace wba
