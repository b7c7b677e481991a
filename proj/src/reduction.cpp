#include "wba/reduction.hpp"

#include "wba/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace wba {

IMatrix operator*(const IMatrix& a, const IMatrix& b) {
    IMatrix r(a.n);
    for (int i = 0; i < a.n; ++i) {
        for (int j = 0; j < a.n; ++j) {
            long long s = 0;
            for (int k = 0; k < a.n; ++k) {
                long long p;
                if (__builtin_mul_overflow(a(i, k), b(k, j), &p) || __builtin_add_overflow(s, p, &s)) {
                    throw std::overflow_error("unimodular transform overflow");
                }
            }
            r(i, j) = s;
        }
    }
    return r;
}

DMatrix operator*(const DMatrix& a, const IMatrix& b) {
    DMatrix r(a.n);
    for (int i = 0; i < a.n; ++i) {
        for (int j = 0; j < a.n; ++j) {
            double s = 0;
            for (int k = 0; k < a.n; ++k) s += a(i, k) * static_cast<double>(b(k, j));
            r(i, j) = s;
        }
    }
    return r;
}

namespace {

double dot_cols(const DMatrix& b, int i, int j) {
    double s = 0;
    for (int r = 0; r < b.n; ++r) s += b(r, i) * b(r, j);
    return s;
}

// Gram-Schmidt: mu (lower, row k col j) and squared norms of b*_j.
void gram_schmidt(const DMatrix& b, std::vector<double>& mu, std::vector<double>& bstar2) {
    const int n = b.n;
    mu.assign(static_cast<size_t>(n * n), 0.0);
    bstar2.assign(static_cast<size_t>(n), 0.0);
    std::vector<double> bs(static_cast<size_t>(n * n));
    for (int k = 0; k < n; ++k) {
        for (int r = 0; r < n; ++r) bs[static_cast<size_t>(k * n + r)] = b(r, k);
        for (int j = 0; j < k; ++j) {
            double num = 0;
            for (int r = 0; r < n; ++r) num += b(r, k) * bs[static_cast<size_t>(j * n + r)];
            const double m = bstar2[static_cast<size_t>(j)] > 0 ? num / bstar2[static_cast<size_t>(j)] : 0.0;
            mu[static_cast<size_t>(k * n + j)] = m;
            for (int r = 0; r < n; ++r) bs[static_cast<size_t>(k * n + r)] -= m * bs[static_cast<size_t>(j * n + r)];
        }
        double s = 0;
        for (int r = 0; r < n; ++r) s += bs[static_cast<size_t>(k * n + r)] * bs[static_cast<size_t>(k * n + r)];
        bstar2[static_cast<size_t>(k)] = s;
    }
}

void col_axpy(DMatrix& b, IMatrix& t, int dst, int src, long long q) {
    for (int r = 0; r < b.n; ++r) b(r, dst) -= static_cast<double>(q) * b(r, src);
    for (int r = 0; r < t.n; ++r) {
        long long p;
        if (__builtin_mul_overflow(q, t(r, src), &p) || __builtin_sub_overflow(t(r, dst), p, &t(r, dst))) {
            throw std::overflow_error("unimodular transform overflow");
        }
    }
}

void col_swap(DMatrix& b, IMatrix& t, int i, int j) {
    for (int r = 0; r < b.n; ++r) std::swap(b(r, i), b(r, j));
    for (int r = 0; r < t.n; ++r) std::swap(t(r, i), t(r, j));
}

}  // namespace

void lll_reduce(DMatrix& basis, IMatrix& transform, double delta) {
    const int n = basis.n;
    std::vector<double> mu, bstar2;
    int k = 1;
    int guard = 0;
    while (k < n) {
        if (++guard > 100000) throw std::runtime_error("LLL failed to converge");
        gram_schmidt(basis, mu, bstar2);
        for (int j = k - 1; j >= 0; --j) {
            const double m = mu[static_cast<size_t>(k * n + j)];
            if (std::fabs(m) > 0.5 + 1e-9) {
                const double qd = std::nearbyint(m);
                if (std::fabs(qd) > 9.0e18) throw std::overflow_error("size reduction coefficient too large");
                col_axpy(basis, transform, k, j, static_cast<long long>(qd));
                gram_schmidt(basis, mu, bstar2);
            }
        }
        const double m = mu[static_cast<size_t>(k * n + k - 1)];
        if (bstar2[static_cast<size_t>(k)] < (delta - m * m) * bstar2[static_cast<size_t>(k - 1)]) {
            col_swap(basis, transform, k, k - 1);
            k = k > 1 ? k - 1 : 1;
        } else {
            ++k;
        }
    }
}

std::vector<double> apply(const DMatrix& basis, const std::vector<long long>& c) {
    std::vector<double> v(static_cast<size_t>(basis.n), 0.0);
    for (int j = 0; j < basis.n; ++j) {
        for (int r = 0; r < basis.n; ++r) v[static_cast<size_t>(r)] += basis(r, j) * static_cast<double>(c[static_cast<size_t>(j)]);
    }
    return v;
}

namespace {

// Fincke-Pohst: all nonzero x with |B x|^2 <= r2, B already reduced.
template <class Visit>
void fincke_pohst(const DMatrix& b, double r2, std::size_t max_points, Visit visit) {
    const int n = b.n;
    std::vector<double> mu, bstar2;
    gram_schmidt(b, mu, bstar2);
    std::vector<long long> x(static_cast<size_t>(n), 0);
    std::vector<double> center(static_cast<size_t>(n), 0.0), partial(static_cast<size_t>(n + 1), 0.0);
    std::size_t count = 0;
    // Recursive descent over levels n-1 .. 0.
    auto rec = [&](auto&& self, int level) -> void {
        double c = 0;
        for (int k = level + 1; k < n; ++k) c -= mu[static_cast<size_t>(k * n + level)] * static_cast<double>(x[static_cast<size_t>(k)]);
        const double rem = r2 - partial[static_cast<size_t>(level + 1)];
        if (rem < 0) return;
        const double bs = bstar2[static_cast<size_t>(level)];
        if (bs <= 0) throw std::runtime_error("degenerate basis in enumeration");
        const double span = std::sqrt(rem / bs);
        const long long lo = static_cast<long long>(std::ceil(c - span - 1e-12));
        const long long hi = static_cast<long long>(std::floor(c + span + 1e-12));
        for (long long v = lo; v <= hi; ++v) {
            const double dlt = static_cast<double>(v) - c;
            partial[static_cast<size_t>(level)] = partial[static_cast<size_t>(level + 1)] + dlt * dlt * bs;
            if (partial[static_cast<size_t>(level)] > r2) continue;
            x[static_cast<size_t>(level)] = v;
            if (level == 0) {
                bool nz = false;
                for (long long e : x) nz |= (e != 0);
                if (nz) {
                    if (++count > max_points) throw EnumerationBudgetExceeded("enumeration budget exceeded");
                    visit(x);
                }
            } else {
                self(self, level - 1);
            }
        }
        x[static_cast<size_t>(level)] = 0;
    };
    rec(rec, n - 1);
}

std::vector<long long> mul_vec(const IMatrix& t, const std::vector<long long>& c) {
    std::vector<long long> r(static_cast<size_t>(t.n), 0);
    for (int i = 0; i < t.n; ++i) {
        long long s = 0;
        for (int j = 0; j < t.n; ++j) s += t(i, j) * c[static_cast<size_t>(j)];
        r[static_cast<size_t>(i)] = s;
    }
    return r;
}

}  // namespace

std::vector<std::vector<long long>> enumerate_box(const DMatrix& basis, const std::vector<double>& half_widths,
                                                  std::size_t max_points) {
    const int n = basis.n;
    DMatrix s(n);
    for (int r = 0; r < n; ++r) {
        if (!(half_widths[static_cast<size_t>(r)] > 0)) throw std::invalid_argument("box half-widths must be positive");
        for (int c = 0; c < n; ++c) s(r, c) = basis(r, c) / half_widths[static_cast<size_t>(r)];
    }
    IMatrix t = IMatrix::identity(n);
    lll_reduce(s, t);
    const double slack = 1.0 + 1e-9;
    std::vector<std::vector<long long>> out;
    fincke_pohst(s, static_cast<double>(n) * slack * slack, max_points, [&](const std::vector<long long>& x) {
        const auto v = apply(s, x);
        for (double e : v) {
            if (std::fabs(e) > slack) return;
        }
        out.push_back(mul_vec(t, x));
    });
    return out;
}

std::vector<std::vector<long long>> enumerate_ball(const DMatrix& basis, double radius, std::size_t max_points) {
    DMatrix s = basis;
    IMatrix t = IMatrix::identity(basis.n);
    lll_reduce(s, t);
    const double r = radius * (1.0 + 1e-9);
    std::vector<std::vector<long long>> out;
    fincke_pohst(s, r * r, max_points, [&](const std::vector<long long>& x) { out.push_back(mul_vec(t, x)); });
    return out;
}

}  // namespace wba
