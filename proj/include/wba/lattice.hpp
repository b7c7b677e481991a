#pragma once

#include "wba/interval.hpp"
#include "wba/precision.hpp"
#include "wba/quasinorm.hpp"
#include "wba/reduction.hpp"
#include "wba/theta.hpp"

#include <gmpxx.h>

#include <climits>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace wba {

struct IntervalMatrix {
    int n = 0;
    std::vector<DyadicInterval> a;

    IntervalMatrix() = default;
    IntervalMatrix(int dim, long bits);
    DyadicInterval& operator()(int r, int c) { return a[static_cast<size_t>(c * n + r)]; }
    const DyadicInterval& operator()(int r, int c) const { return a[static_cast<size_t>(c * n + r)]; }
};

using ZMatrix = SquareMatrix<mpz_class>;

struct FlowParams {
    // Diagonal exponents: (w_1..w_d, -1) or (a_1..a_m, -b_1..-b_n).
    std::vector<mpq_class> exponents;
    int m = 0;
    int n = 0;
    std::optional<WeightVector> w;

    static FlowParams vector_case(const WeightVector& w);
    static FlowParams matrix_case(const WeightVector& a, const WeightVector& b);

    int dim() const { return m + n; }
    bool is_vector_case() const { return w.has_value(); }
    // Sum of exponents; zero means det(a_t) = 1 for every t.
    mpq_class trace() const;
    double max_exponent() const;
};

// e^{t} = tau * e^{s}; exact when s == 0.
struct FlowTime {
    mpq_class tau = 1;
    double s = 0.0;

    bool is_exact() const { return s == 0.0; }
    bool is_zero() const { return tau == 1 && s == 0.0; }
    double log_value() const;
    static FlowTime real(double t) { return FlowTime{1, t}; }
    static FlowTime exact(const mpq_class& tau) { return FlowTime{tau, 0.0}; }
};

// Basis = diag(e^{c_i t}) * xi / den, with xi integral; u * something = xi exactly up to den.
struct ExactFrame {
    ZMatrix xi;
    mpz_class den = 1;
    ZMatrix unimodular;  // accumulated column operations since construction
    std::vector<mpq_class> exponents;  // empty: no flow applied yet
    FlowTime time;

    int dim() const { return xi.n; }
    mpq_class exponent(int i) const;
};

class UnimodularLattice {
public:
    enum class Origin { Theta, Sampled, Explicit };

    using IntervalGenerator = std::function<IntervalMatrix(long bits)>;

    static UnimodularLattice from_frame(ExactFrame frame, Origin origin, double log_time = 0.0);
    static UnimodularLattice from_rational_basis(const std::vector<std::vector<mpq_class>>& columns,
                                                 Origin origin = Origin::Explicit);
    static UnimodularLattice from_generator(int dim, IntervalGenerator gen, Origin origin = Origin::Explicit);

    int dim() const { return dim_; }
    Origin origin() const { return origin_; }
    double log_time() const { return log_time_; }
    long bit_limit() const { return bit_limit_; }
    void set_bit_limit(long b) { bit_limit_ = b; }

    const ExactFrame* exact() const { return frame_ ? frame_.get() : nullptr; }
    IntervalMatrix interval_basis(long bits) const;
    const DMatrix& numeric_basis() const { return numeric_; }
    bool saturated() const { return saturated_; }

    // Columns of the current basis, as doubles.
    std::vector<double> column(int j) const;

private:
    int dim_ = 0;
    Origin origin_ = Origin::Explicit;
    double log_time_ = 0.0;
    long bit_limit_ = LONG_MAX;
    std::shared_ptr<const ExactFrame> frame_;
    IntervalGenerator gen_;
    DMatrix numeric_;
    bool saturated_ = false;

    friend UnimodularLattice apply_flow(const UnimodularLattice&, const FlowParams&, const FlowTime&, long);
    friend class OrbitEngine;
    void refresh_numeric();
};

// u(-theta) Z^{d+1}: identity with -theta in the first d rows of the last column.
UnimodularLattice make_theta_lattice(const ThetaVector& theta);

// a_t L, then reduced by integer column operations.
UnimodularLattice apply_flow(const UnimodularLattice& L, const FlowParams& fp, const FlowTime& t,
                             long max_bits = default_max_bits());
UnimodularLattice apply_flow(const UnimodularLattice& L, const FlowParams& fp, double t,
                             long max_bits = default_max_bits());

// X with B2 = B1 X when X is an integer matrix of determinant +-1.
std::optional<IMatrix> change_of_basis(const UnimodularLattice& a, const UnimodularLattice& b);
DyadicInterval determinant(const UnimodularLattice& L, long bits = kStartBits);

// Certified predicates on a fixed list of lattice vectors (coefficients in the lattice basis).
// Levels run 128, 256, ... bits up to max_bits, then an exact level when the lattice has an
// exact frame at a rational time.
class VectorSet {
public:
    VectorSet(const UnimodularLattice& L, std::vector<std::vector<long long>> coeffs, const WeightVector* w,
              long max_bits = default_max_bits());

    std::size_t size() const { return coeffs_.size(); }
    const std::vector<long long>& coeffs(std::size_t a) const { return coeffs_[a]; }
    int levels() const { return static_cast<int>(bits_.size()) + (exact_ok_ ? 1 : 0); }
    bool is_exact_level(int level) const { return level >= static_cast<int>(bits_.size()); }

    std::optional<Ordering> hnorm_vs(std::size_t a, const mpq_class& k, int level);
    std::optional<Ordering> hnorm_vs_vector(std::size_t a, std::size_t b, int level);
    std::optional<Ordering> last_abs_vs(std::size_t a, const mpq_class& k, int level);

    DyadicInterval coord(std::size_t a, int i, long bits);
    DyadicInterval hnorm(std::size_t a, long bits);
    DyadicInterval sup_norm(std::size_t a, long bits);
    DyadicInterval w_sup_norm(std::size_t a, long bits);
    DyadicInterval euclid_norm(std::size_t a, long bits);

    // Integer vector xi * c over the frame denominator (exact frames only).
    const std::vector<mpz_class>& frame_vector(std::size_t a);
    // Coordinates in the original lattice before any reduction: unimodular * c.
    std::vector<mpz_class> root_coords(std::size_t a);

private:
    const UnimodularLattice& L_;
    std::vector<std::vector<long long>> coeffs_;
    const WeightVector* w_;
    std::vector<long> bits_;
    bool exact_ok_ = false;
    std::vector<std::optional<std::vector<mpz_class>>> frame_cache_;
    std::vector<std::vector<std::optional<DyadicInterval>>> coord_cache_;  // per level
    std::vector<std::optional<IntervalMatrix>> basis_cache_;

    PowerProduct hnorm_exact(std::size_t a);
    mpq_class last_exact(std::size_t a);
    long level_bits(int level) const { return bits_[static_cast<size_t>(level)]; }
};

struct Region {
    enum class Kind { Disk, Cylinder, CylinderTall };
    Kind kind = Kind::Cylinder;
    mpq_class r = 1;
    mpq_class e = 1;

    static Region disk(const mpq_class& r) { return Region{Kind::Disk, r, 1}; }
    static Region cylinder(const mpq_class& r) { return Region{Kind::Cylinder, r, 1}; }
    static Region cylinder_tall(const mpq_class& r, const mpq_class& e) { return Region{Kind::CylinderTall, r, e}; }
};

struct LatticePoint {
    std::vector<long long> coeffs;
    std::vector<DyadicInterval> coords;
};

bool is_primitive(const std::vector<long long>& c);

// All primitive lattice vectors in the region (vector case, dimension d+1).
std::vector<LatticePoint> enumerate_in_region(const UnimodularLattice& L, const Region& reg, const WeightVector& w,
                                              long max_bits = default_max_bits());

DyadicInterval lambda1_sup(const UnimodularLattice& L);
DyadicInterval lambda1_w(const UnimodularLattice& L, const WeightVector& w);
// -log of the Euclidean first minimum.
DyadicInterval delta_fn(const UnimodularLattice& L);

struct SectionClass {
    enum class Kind { NotInS1, S1NotSharp, S1Sharp };
    Kind kind = Kind::NotInS1;
    std::vector<long long> v;  // witness coefficients (sign with last coordinate +1)
    DyadicInterval r;          // r(L) = ||pi(v)||_w
    bool in_B = false;
    int d1_count = 0;
};

SectionClass classify_section_point(const UnimodularLattice& L, const WeightVector& w,
                                    long max_bits = default_max_bits());

// Flow along one orbit with an exactly maintained frame and a reduced numeric basis.
class OrbitEngine {
public:
    OrbitEngine(const UnimodularLattice& start, const FlowParams& fp, long max_bits = default_max_bits(),
                bool track_unimodular = true);

    // Move to flow time t >= time() (measured from the start lattice).
    void advance_to(double t);
    double time() const { return t_; }
    const DMatrix& basis() const { return numeric_; }
    // diag(e^{c_i (s - time())}) * basis().
    DMatrix basis_at(double s) const;
    const ExactFrame& frame() const { return frame_; }
    // unimodular * c.
    std::vector<mpz_class> root_vector(const std::vector<long long>& c) const;
    // The lattice at exact time e^t = tau, sharing the current reduced frame.
    UnimodularLattice lattice_at(const mpq_class& tau) const;
    UnimodularLattice lattice_at(double t) const;
    long bit_ceiling() const { return ceiling_; }
    bool saturated() const { return saturated_; }

private:
    ExactFrame frame_;
    FlowParams fp_;
    double t_ = 0.0;
    long ceiling_;
    bool track_u_;
    DMatrix numeric_;
    bool saturated_ = false;
    UnimodularLattice::Origin origin_;

    void rebuild_numeric();
    void reduce();
};

// Numeric basis of an exact frame at time t (log-domain scaling, no cancellation).
DMatrix frame_numeric_basis(const ExactFrame& f, const FlowTime& t, bool* saturated = nullptr);

}  // namespace wba
