#include "doctest.h"

#include "shellflow/fem.hpp"
#include "shellflow/geometry.hpp"
#include "shellflow/mesh.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace shellflow;

namespace {
constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * pi;
}

TEST_CASE("onion mesh combinatorics") {
    for (auto [r, s] : {std::pair{2, 8}, std::pair{4, 16}, std::pair{6, 20}}) {
        const Mesh m = Mesh::build_onion(r, s);
        CHECK(m.n_vertices() == 1 + r * s);
        CHECK(m.n_triangles() == s * (2 * r - 1));
        for (int t = 0; t < m.n_triangles(); ++t) CHECK(m.triangle_area(t) > 0.0);
    }
}

TEST_CASE("mesh area converges to pi at second order in segments") {
    auto total_area = [](int r, int s) {
        const Mesh m = Mesh::build_onion(r, s);
        double a = 0.0;
        for (int t = 0; t < m.n_triangles(); ++t) a += m.triangle_area(t);
        return a;
    };
    // inscribed-polygon deficit: pi - (m/2) sin(2 pi / m) ~ (2/3) pi^3 / m^2
    const double e1 = pi - total_area(4, 16);
    const double e2 = pi - total_area(8, 32);
    CHECK(e1 > 0.0);
    CHECK(e1 < 21.0 / (16.0 * 16.0));
    CHECK(e2 < e1 / 3.5); // ratio ~ 4 for O(segments^-2)
}

TEST_CASE("boundary structure") {
    const Mesh m = Mesh::build_onion(3, 12);
    const auto& b = m.boundary_p2();
    CHECK(static_cast<int>(b.size()) == 2 * 12);
    for (size_t i = 0; i < b.size(); ++i) {
        CHECK(b[i].second == doctest::Approx(static_cast<double>(i) / 24.0).epsilon(1e-15));
        if (i % 2 == 0) {
            // vertex nodes sit exactly on the circle
            CHECK(m.p2_coord(b[i].first).norm() == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("quadrature integrates degree-4 polynomials exactly") {
    const Mesh m = Mesh::build_onion(2, 8);
    // exactness on barycentric monomials via the closed formula
    // int l1^a l2^b l3^c = 2|T| a! b! c! / (a+b+c+2)!
    const int t = 3;
    const double A = m.triangle_area(t);
    auto fact = [](int n) { double v = 1; for (int i = 2; i <= n; ++i) v *= i; return v; };
    for (auto [a, b, c] : {std::tuple{4, 0, 0}, std::tuple{2, 2, 0}, std::tuple{1, 1, 2},
                           std::tuple{3, 1, 0}}) {
        double q = 0.0;
        for (int lq = 0; lq < Mesh::n_quad_local; ++lq) {
            const auto& qp = m.quadrature()[static_cast<size_t>(t * Mesh::n_quad_local + lq)];
            // reconstruct barycentrics from the vertex P1 shapes
            const double l1 = m.shape_value(qp.local, 0) +
                              0.5 * (m.shape_value(qp.local, 3) + m.shape_value(qp.local, 5));
            const double l2 = m.shape_value(qp.local, 1) +
                              0.5 * (m.shape_value(qp.local, 3) + m.shape_value(qp.local, 4));
            const double l3 = 1.0 - l1 - l2;
            q += qp.w * std::pow(l1, a) * std::pow(l2, b) * std::pow(l3, c);
        }
        const double exact = 2.0 * A * fact(a) * fact(b) * fact(c) / fact(a + b + c + 2);
        CHECK(q == doctest::Approx(exact).epsilon(1e-13));
    }
}

TEST_CASE("trace restriction") {
    const Mesh m = Mesh::build_onion(4, 24);

    SUBCASE("constant field") {
        FEField v = interpolate_vector(m, [](Vec2) { return Vec2(1.0, 0.0); });
        auto [c1, c2] = trace_restrict(v, 8);
        CHECK(c1.mean() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(sobolev_norm(c1 - [] { SpectralField f(1, false); f.set_mean(1.0); return f; }(), 0.0) <
              1e-13);
        CHECK(sobolev_norm(c2, 0.0) < 1e-13);
    }
    SUBCASE("position field gives the first Fourier modes") {
        FEField v = interpolate_vector(m, [](Vec2 x) { return x; });
        auto [c1, c2] = trace_restrict(v, 8);
        // interpolation tolerance: chord midpoints sit slightly inside
        CHECK(c1.cos_coeff(1) == doctest::Approx(1.0).epsilon(5e-3));
        CHECK(c2.sin_coeff(1) == doctest::Approx(1.0).epsilon(5e-3));
        CHECK(std::abs(c1.sin_coeff(1)) < 1e-12);
    }
    SUBCASE("refinement improves interpolation accuracy") {
        // band-limited boundary data (exactly mode 2 on the circle) so only
        // the chord-midpoint interpolation error remains
        auto err = [](int seg) {
            const Mesh mm = Mesh::build_onion(4, seg);
            FEField v = interpolate_vector(
                mm, [](Vec2 x) { return Vec2(x.x() * x.x() - x.y() * x.y(), x.x() * x.y()); });
            auto [c1, c2] = trace_restrict(v, 6);
            double worst = 0.0;
            for (int i = 0; i < 200; ++i) {
                const double y = i / 200.0;
                worst = std::max(worst, std::abs(c1.eval(y) - std::cos(2 * two_pi * y)));
                worst = std::max(worst, std::abs(c2.eval(y) - 0.5 * std::sin(2 * two_pi * y)));
            }
            return worst;
        };
        const double e1 = err(16), e2 = err(32);
        CHECK(e2 < 0.35 * e1);
    }
}

TEST_CASE("mesh text export") {
    const Mesh m = Mesh::build_onion(2, 8);
    std::ostringstream os;
    m.write_text(os);
    std::istringstream is(os.str());
    int nv;
    is >> nv;
    CHECK(nv == 17);
    double x, y;
    for (int i = 0; i < nv; ++i) is >> x >> y;
    int nt;
    is >> nt;
    CHECK(nt == 24);
}

TEST_CASE("divergence-free constraint consistency") {
    // the FemSystem divergence of a linear solenoidal field is weakly zero
    const Mesh m = Mesh::build_onion(3, 12);
    FemSystem fem(m);
    FEField v = interpolate_vector(m, [](Vec2 x) { return Vec2(x.y(), 0.3 * x.x()); });
    VectorXd dofs(2 * m.n_p2());
    for (int i = 0; i < 2 * m.n_p2(); ++i) dofs(i) = v.values[static_cast<size_t>(i)];
    const VectorXd r = fem.divergence() * dofs;
    CHECK(r.lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK(divergence_l2(v) < 1e-13);
}
