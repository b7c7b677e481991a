#include "oracles.hpp"
#include "wba/errors.hpp"
#include "wba/lattice.hpp"
#include "wba/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace wba;

namespace {

UnimodularLattice identity_lattice(int n) {
    std::vector<std::vector<mpq_class>> cols(static_cast<size_t>(n), std::vector<mpq_class>(static_cast<size_t>(n), 0));
    for (int i = 0; i < n; ++i) cols[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1;
    return UnimodularLattice::from_rational_basis(cols);
}

UnimodularLattice random_orbit_lattice(const WeightVector& w, Rng& rng, double t_max) {
    auto th = ThetaVector::sample(w.dim(), 512, rng);
    return apply_flow(make_theta_lattice(th), FlowParams::vector_case(w), rng.uniform(0, t_max));
}

std::vector<double> image(const DMatrix& b, const std::vector<long long>& c) { return wba::apply(b, c); }

double sup_of(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

double wsup_of(const std::vector<double>& v, const WeightVector& w) {
    double m = std::fabs(v.back());
    for (int i = 0; i < w.dim(); ++i) m = std::max(m, std::pow(std::fabs(v[static_cast<size_t>(i)]), 1.0 / w.as_double(i)));
    return m;
}

}  // namespace

TEST_CASE("theta lattice construction") {
    auto z = make_theta_lattice(ThetaVector::zero(2));
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) CHECK(z.numeric_basis()(i, j) == (i == j ? 1.0 : 0.0));
    }
    auto h = make_theta_lattice(ThetaVector::parse("1/2"));
    CHECK(determinant(h).contains(mpq_class(1)));
    // columns (1,0) and (-1/2,1) up to unimodular change: compare with the explicit basis
    auto e = UnimodularLattice::from_rational_basis({{1, 0}, {mpq_class(-1, 2), 1}});
    CHECK(change_of_basis(h, e).has_value());
    // u(theta) undoes u(-theta)
    auto back = UnimodularLattice::from_rational_basis({{1, 0}, {mpq_class(1, 2), 1}});
    const DMatrix& b = h.numeric_basis();
    const DMatrix& u = back.numeric_basis();
    DMatrix prod(2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) prod(i, j) += u(i, k) * b(k, j);
        }
    }
    CHECK(change_of_basis(UnimodularLattice::from_rational_basis({{prod(0, 0), prod(1, 0)}, {prod(0, 1), prod(1, 1)}}),
                          identity_lattice(2))
              .has_value());
}

TEST_CASE("flow basics") {
    auto w = WeightVector::parse("2/3,1/3");
    auto fp = FlowParams::vector_case(w);
    CHECK(fp.trace() == 0);
    CHECK(FlowParams::matrix_case(WeightVector::parse("1/2,1/2"), WeightVector::parse("1/3,2/3")).trace() == 0);
    auto L0 = make_theta_lattice(ThetaVector::parse("1/3,2/7"));
    auto same = apply_flow(L0, fp, 0.0);
    CHECK(change_of_basis(L0, same).has_value());
    Rng rng(4);
    for (int k = 0; k < 10; ++k) {
        auto th = ThetaVector::sample(2, 256, rng);
        auto a = make_theta_lattice(th);
        const double t = rng.uniform(0.5, 6);
        auto b = apply_flow(apply_flow(a, fp, t), fp, -t);
        CHECK(change_of_basis(a, b).has_value());
        // reduction may flip orientation
        auto det = determinant(apply_flow(a, fp, t));
        CHECK((det.overlaps(DyadicInterval::from_integer(1, 128)) || det.overlaps(DyadicInterval::from_integer(-1, 128))));
    }
}

TEST_CASE("d=1 flow at t = log q scales the last row by 1/q") {
    auto w = WeightVector::parse("1");
    auto L = apply_flow(make_theta_lattice(ThetaVector::parse("3/7")), FlowParams::vector_case(w), FlowTime::exact(7));
    VectorSet vs(L, {{1, 0}, {0, 1}, {1, 1}}, &w);
    const int exact = vs.levels() - 1;
    REQUIRE(vs.is_exact_level(exact));
    for (std::size_t a = 0; a < vs.size(); ++a) {
        auto z = vs.root_coords(a);
        mpq_class expect(abs(z[1]), 7);
        expect.canonicalize();
        CHECK(vs.last_abs_vs(a, expect, exact) == Ordering::EQ);
    }
}

TEST_CASE("flow and norm compatibility along an orbit") {
    auto w = WeightVector::parse("2/3,1/3");
    Rng rng(8);
    auto th = ThetaVector::sample(2, 512, rng);
    OrbitEngine eng(make_theta_lattice(th), FlowParams::vector_case(w));
    eng.advance_to(3.0);
    auto L = eng.lattice_at(3.0);
    auto cand = enumerate_box(L.numeric_basis(), {2, 2, 2});
    VectorSet vs(L, cand, &w);
    for (std::size_t a = 0; a < vs.size(); ++a) {
        auto z = eng.root_vector(vs.coeffs(a));
        std::vector<mpq_class> res;
        for (int i = 0; i < 2; ++i) res.push_back(mpq_class(z[2]) * th.coord(i) - mpq_class(z[static_cast<size_t>(i)]));
        auto hn = exp(DyadicInterval::from_integer(3, 256)) * quasi_norm(WVector::from_rationals(res, 256), w);
        CHECK(vs.hnorm(a, 256).overlaps(hn));
        auto last = exp(DyadicInterval::from_integer(-3, 256)) * DyadicInterval::from_integer(z[2], 256);
        CHECK(vs.coord(a, 2, 256).overlaps(last));
    }
}

TEST_CASE("integer lattice in regions") {
    auto w = WeightVector::parse("1/2,1/2");
    auto Z = identity_lattice(3);
    auto disk = enumerate_in_region(Z, Region::disk(mpq_class(1, 2)), w);
    REQUIRE(disk.size() == 1);
    CHECK(disk[0].coeffs == std::vector<long long>{0, 0, 1});
    CHECK(enumerate_in_region(Z, Region::disk(1), w).size() == 9);
    auto cyl = enumerate_in_region(Z, Region::cylinder(1), w);
    CHECK(cyl.size() == 26);
    for (const auto& p : cyl) {
        for (long long c : p.coeffs) CHECK(std::llabs(c) <= 1);
    }
}

TEST_CASE("region enumeration matches a coefficient scan") {
    auto w = WeightVector::parse("1");
    Rng rng(15);
    for (int k = 0; k < 40; ++k) {
        auto L = random_orbit_lattice(w, rng, 5);
        const DMatrix& b = L.numeric_basis();
        for (const Region& reg : {Region::cylinder(mpq_class(4, 5)), Region::disk(1), Region::cylinder_tall(mpq_class(1, 2), 2)}) {
            std::set<std::vector<long long>> got, want;
            for (const auto& p : enumerate_in_region(L, reg, w)) got.insert(p.coeffs);
            const double r = reg.r.get_d();
            oracle::scan_box(2, 20, [&](const std::vector<long long>& c) {
                if (std::gcd(std::llabs(c[0]), std::llabs(c[1])) != 1) return;
                auto v = image(b, c);
                bool in = std::fabs(v[0]) <= r;
                if (reg.kind == Region::Kind::Disk) in = in && std::fabs(v[1] - 1) < 1e-12;
                else in = in && std::fabs(v[1]) <= (reg.kind == Region::Kind::CylinderTall ? reg.e.get_d() : 1.0);
                if (in) want.insert(c);
            });
            CHECK(got == want);
        }
    }
}

TEST_CASE("first minima examples") {
    auto Z = identity_lattice(3);
    CHECK(lambda1_sup(Z).contains(mpq_class(1)));
    CHECK(lambda1_w(Z, WeightVector::parse("2/3,1/3")).contains(mpq_class(1)));
    auto D = UnimodularLattice::from_rational_basis({{2, 0}, {0, mpq_class(1, 2)}});
    CHECK(lambda1_sup(D).contains(mpq_class(1, 2)));
    CHECK(lambda1_w(D, WeightVector::parse("1")).contains(mpq_class(1, 2)));
    CHECK(std::fabs(delta_fn(Z).center_double()) < 1e-15);
    auto E = apply_flow(identity_lattice(2), FlowParams::vector_case(WeightVector::parse("1")), -1.0);
    CHECK(delta_fn(E).center_double() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("first minima match brute force on orbit lattices") {
    auto w = WeightVector::parse("2/3,1/3");
    Rng rng(16);
    for (int k = 0; k < 100; ++k) {
        auto L = random_orbit_lattice(w, rng, 6);
        const DMatrix& b = L.numeric_basis();
        double s = HUGE_VAL, m = HUGE_VAL, e = HUGE_VAL;
        oracle::scan_box(3, 6, [&](const std::vector<long long>& c) {
            auto v = image(b, c);
            s = std::min(s, sup_of(v));
            m = std::min(m, wsup_of(v, w));
            double q = 0;
            for (double x : v) q += x * x;
            e = std::min(e, std::sqrt(q));
        });
        CHECK(lambda1_sup(L).center_double() == doctest::Approx(s).epsilon(1e-10));
        CHECK(lambda1_w(L, w).center_double() == doctest::Approx(m).epsilon(1e-10));
        CHECK(delta_fn(L).center_double() == doctest::Approx(-std::log(e)).epsilon(1e-10));
    }
}

TEST_CASE("lambda comparisons") {
    Rng rng(21);
    for (const auto& wt : {"1", "1/2,1/2", "2/3,1/3", "1/2,1/4,1/4"}) {
        auto w = WeightVector::parse(wt);
        const mpq_class wd = w[w.dim() - 1];
        for (int k = 0; k < 40; ++k) {
            auto L = random_orbit_lattice(w, rng, 6);
            auto l = lambda1_sup(L), lw = lambda1_w(L, w);
            CHECK(l.upper_double() <= 1.0);
            CHECK(l.lower_double() <= pow(lw, wd).upper_double());
            // the bound that does hold in general
            CHECK(lw.lower_double() <= l.upper_double());
        }
    }
    // diag(b, b, c), b^2 c = 1: lambda_1^w = c exceeds lambda_1^{1/w_1} = c^2
    auto L = UnimodularLattice::from_rational_basis({{2, 0, 0}, {0, 2, 0}, {0, 0, mpq_class(1, 4)}});
    auto w = WeightVector::parse("1/2,1/2");
    CHECK(lambda1_w(L, w).contains(mpq_class(1, 4)));
    CHECK(certified_compare(lambda1_w(L, w), pow(lambda1_sup(L), mpq_class(2))) == Ordering::GT);
}

TEST_CASE("section classification examples") {
    auto w1 = WeightVector::parse("1");
    // Z^2 has (-1,1), (0,1), (1,1) in D_1
    auto z = classify_section_point(identity_lattice(2), w1);
    CHECK(z.kind == SectionClass::Kind::S1NotSharp);
    CHECK(z.d1_count == 3);
    CHECK_FALSE(z.in_B);
    // columns (1, 1/3), (0, 1): (0,1) is the only primitive vector of D_1 and r = 0
    auto e = classify_section_point(UnimodularLattice::from_rational_basis({{1, mpq_class(1, 3)}, {0, 1}}), w1);
    CHECK(e.kind == SectionClass::Kind::S1Sharp);
    CHECK(e.in_B);
    CHECK(e.r.exact_value() == 0);
    CHECK(e.v == std::vector<long long>{0, 1});
    // nothing reaches D_1
    auto far = classify_section_point(UnimodularLattice::from_rational_basis({{2, 0}, {0, mpq_class(1, 2)}}), w1);
    CHECK(far.kind == SectionClass::Kind::NotInS1);
    // (4/5, 1) is the only D_1 vector but (3/5, -1/2) lies in C_{4/5}
    auto nb = classify_section_point(
        UnimodularLattice::from_rational_basis({{mpq_class(3, 5), mpq_class(-1, 2)}, {mpq_class(4, 5), 1}}), w1);
    CHECK(nb.kind == SectionClass::Kind::S1Sharp);
    CHECK_FALSE(nb.in_B);
    CHECK(nb.r.contains(mpq_class(4, 5)));
}

TEST_CASE("lattice input validation") {
    CHECK_THROWS(UnimodularLattice::from_rational_basis({{1, 0}, {0}}));
    auto w = WeightVector::parse("1/2,1/2");
    CHECK_THROWS(enumerate_in_region(identity_lattice(2), Region::cylinder(1), w));
}
