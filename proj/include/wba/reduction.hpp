#pragma once

#include <cstddef>
#include <vector>

namespace wba {

// Square matrix, column-major; columns are basis vectors.
template <class T>
struct SquareMatrix {
    int n = 0;
    std::vector<T> a;

    SquareMatrix() = default;
    explicit SquareMatrix(int dim) : n(dim), a(static_cast<size_t>(dim) * static_cast<size_t>(dim), T(0)) {}
    static SquareMatrix identity(int dim) {
        SquareMatrix m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = T(1);
        return m;
    }
    T& operator()(int r, int c) { return a[static_cast<size_t>(c) * static_cast<size_t>(n) + static_cast<size_t>(r)]; }
    const T& operator()(int r, int c) const {
        return a[static_cast<size_t>(c) * static_cast<size_t>(n) + static_cast<size_t>(r)];
    }
    bool is_identity() const {
        for (int c = 0; c < n; ++c) {
            for (int r = 0; r < n; ++r) {
                if ((*this)(r, c) != T(r == c ? 1 : 0)) return false;
            }
        }
        return true;
    }
};

using DMatrix = SquareMatrix<double>;
using IMatrix = SquareMatrix<long long>;

IMatrix operator*(const IMatrix& a, const IMatrix& b);
DMatrix operator*(const DMatrix& a, const IMatrix& b);

// LLL in floating point. B <- B * T with T unimodular; T accumulates into `transform`.
void lll_reduce(DMatrix& basis, IMatrix& transform, double delta = 0.99);

// Nonzero integer vectors c with |(B c)_i| <= half_widths[i] (up to a relative slack
// of 1e-9). Both signs are returned. Throws EnumerationBudgetExceeded past max_points.
std::vector<std::vector<long long>> enumerate_box(const DMatrix& basis, const std::vector<double>& half_widths,
                                                  std::size_t max_points = 200000);

// Nonzero integer vectors c with |B c|_2 <= radius (same slack and budget).
std::vector<std::vector<long long>> enumerate_ball(const DMatrix& basis, double radius,
                                                   std::size_t max_points = 200000);

std::vector<double> apply(const DMatrix& basis, const std::vector<long long>& c);

}  // namespace wba
