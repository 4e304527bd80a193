#include "doctest.h"

#include "shellflow/errors.hpp"
#include "shellflow/geometry.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace shellflow;

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

SpectralField const_field(double c) {
    SpectralField f(1, false);
    f.set_mean(c);
    return f;
}

SpectralField sin_field(double amp, int k = 1) {
    SpectralField f(k, true);
    f.set_sin(k, amp);
    return f;
}

// Independent evaluation of the blend polynomial for the derived example.
double blend_reference(double s, double L, double plateau) {
    if (s >= -plateau * L) return 1.0;
    if (s <= -L) return 0.0;
    const double u = (s + L) / ((1.0 - plateau) * L);
    return 6 * std::pow(u, 5) - 15 * std::pow(u, 4) + 10 * std::pow(u, 3);
}

SpectralField random_admissible(std::mt19937_64& rng, const ReferenceDomain& dom, int modes = 6) {
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    SpectralField eta(modes, true);
    for (int k = 1; k <= modes; ++k) {
        eta.set_cos(k, coeff(rng) / (k * k));
        eta.set_sin(k, coeff(rng) / (k * k));
    }
    const double sup = eta.sup_abs();
    eta *= 0.9 * dom.amplitude_cap() / std::max(sup, 1e-12);
    return eta;
}
} // namespace

TEST_CASE("tubular coordinates on the disk") {
    ReferenceDomain dom = ReferenceDomain::disk();

    SUBCASE("boundary point") {
        const TubularCoords tc = dom.tubular_coords({1.0, 0.0});
        CHECK(tc.y == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(tc.s == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(tc.p.x() == doctest::Approx(1.0));
        CHECK(tc.p.y() == doctest::Approx(0.0));
    }
    SUBCASE("interior point on the axis") {
        const TubularCoords tc = dom.tubular_coords({0.9, 0.0});
        CHECK(tc.y == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(tc.s == doctest::Approx(-0.1).epsilon(1e-13));
        CHECK(tc.p.x() == doctest::Approx(1.0));
    }
    SUBCASE("outside the tube") {
        CHECK_THROWS_AS(dom.tubular_coords({0.3, 0.0}), OutOfTube);
    }
    SUBCASE("reconstruction identity on random tube points") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> rad(0.55, 1.35);
        std::uniform_real_distribution<double> ang(0.0, two_pi);
        for (int i = 0; i < 200; ++i) {
            const double r = rad(rng), th = ang(rng);
            const Vec2 x(r * std::cos(th), r * std::sin(th));
            const TubularCoords tc = dom.tubular_coords(x);
            const Vec2 rec = tc.p + tc.s * dom.curve().normal(tc.y);
            CHECK((rec - x).norm() < 1e-13);
            CHECK(std::abs(std::abs(tc.s) - dom.boundary_distance(x)) < 1e-13);
        }
    }
}

TEST_CASE("tubular coordinates on a general curve (ellipse)") {
    const double a = 1.0, b = 0.8;
    auto curve = BoundaryCurve::parametric(
        [=](double y) { return Vec2(a * std::cos(two_pi * y), b * std::sin(two_pi * y)); },
        [=](double y) {
            return Vec2(-a * two_pi * std::sin(two_pi * y), b * two_pi * std::cos(two_pi * y));
        },
        [=](double y) {
            const double w = two_pi * two_pi;
            return Vec2(-a * w * std::cos(two_pi * y), -b * w * std::sin(two_pi * y));
        },
        [=](double y) {
            const double w = two_pi * two_pi * two_pi;
            return Vec2(a * w * std::sin(two_pi * y), -b * w * std::cos(two_pi * y));
        });
    ReferenceDomain dom = ReferenceDomain::from_curve(curve, 0.3, 0.05);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int i = 0; i < 400 && checked < 100; ++i) {
        const double y0 = u(rng);
        const double s0 = -0.25 * u(rng); // stay inside the tube
        const Vec2 x = curve.position(y0) + s0 * curve.normal(y0);
        TubularCoords tc;
        try {
            tc = dom.tubular_coords(x);
        } catch (const OutOfTube&) {
            continue;
        }
        const Vec2 rec = tc.p + tc.s * curve.normal(tc.y);
        CHECK((rec - x).norm() < 1e-11);
        ++checked;
    }
    CHECK(checked >= 100);
    // mu on the ellipse at y=0: curvature a/b^2 (flipped sign convention puts
    // it positive like the circle)
    CHECK(dom.curve().mu(0.0) == doctest::Approx(a / (b * b)).epsilon(1e-12));
}

TEST_CASE("hanzawa map") {
    ReferenceDomain dom = ReferenceDomain::disk();

    SUBCASE("identity for eta = 0") {
        SpectralField eta(4, true);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> rad(0.0, 0.999);
        std::uniform_real_distribution<double> ang(0.0, two_pi);
        for (int i = 0; i < 50; ++i) {
            const double r = rad(rng), th = ang(rng);
            const Vec2 x(r * std::cos(th), r * std::sin(th));
            CHECK((hanzawa(dom, eta, x) - x).norm() < 1e-14);
        }
    }
    SUBCASE("constant displacement moves the boundary radially") {
        const Vec2 out = hanzawa(dom, const_field(0.05), {1.0, 0.0});
        CHECK(out.x() == doctest::Approx(1.05).epsilon(1e-14));
        CHECK(out.y() == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("blend evaluation inside the tube") {
        const Vec2 out = hanzawa(dom, const_field(0.05), {0.9, 0.0});
        const double expected = 0.9 + 0.05 * blend_reference(-0.1, 0.5, 0.1);
        CHECK(out.x() == doctest::Approx(expected).epsilon(1e-14));
        CHECK(out.y() == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("amplitude guard") {
        CHECK_THROWS_AS(hanzawa(dom, const_field(0.2), {0.9, 0.0}), AmplitudeExceeded);
    }
}

TEST_CASE("hanzawa inverse") {
    ReferenceDomain dom = ReferenceDomain::disk();

    SUBCASE("identity for eta = 0") {
        SpectralField eta(2, true);
        const Vec2 x(0.77, 0.21);
        CHECK((hanzawa_inverse(dom, eta, x) - x).norm() < 1e-13);
    }
    SUBCASE("boundary fiber") {
        const Vec2 x = hanzawa_inverse(dom, const_field(0.05), {1.05, 0.0});
        CHECK(x.x() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(x.y()) < 1e-14);
    }
    SUBCASE("round trip on random tube points") {
        std::mt19937_64 rng(9);
        ReferenceDomain d2 = ReferenceDomain::disk();
        std::uniform_real_distribution<double> rad(0.52, 0.999);
        std::uniform_real_distribution<double> ang(0.0, two_pi);
        const SpectralField eta = random_admissible(rng, d2);
        for (int i = 0; i < 1000; ++i) {
            const double r = rad(rng), th = ang(rng);
            const Vec2 x(r * std::cos(th), r * std::sin(th));
            const Vec2 fwd = hanzawa(d2, eta, x);
            const Vec2 back = hanzawa_inverse(d2, eta, fwd);
            CHECK((back - x).norm() < 1e-10);
        }
    }
}

TEST_CASE("transform fields") {
    ReferenceDomain dom = ReferenceDomain::disk();

    SUBCASE("identity at eta = 0, bit-exact") {
        ShellState shell = ShellState::zero(4);
        const Vec2 x(0.8, 0.33);
        const ChartPoint cp = make_chart_point(dom, x);
        const PointTransform pt = transform_at(dom, shell, cp, x);
        CHECK(pt.J == 1.0);
        CHECK((pt.A - Mat2::Identity()).norm() == 0.0);
        CHECK((pt.B - Mat2::Identity()).norm() == 0.0);
        CHECK(pt.W.norm() == 0.0);
        CHECK(pt.dtJ == 0.0);
    }
    SUBCASE("boundary determinant for constant displacement") {
        for (double c : {0.02, 0.05, -0.04}) {
            ShellState shell = ShellState::zero(1);
            shell.eta = const_field(c);
            // evaluate just inside the blend plateau where beta = 1, beta' = 0
            const Vec2 x(1.0 - 1e-9, 0.0);
            const ChartPoint cp = make_chart_point(dom, x);
            const PointTransform pt = transform_at(dom, shell, cp, x);
            CHECK(pt.J == doctest::Approx(1.0 + c).epsilon(1e-7));
        }
        // exactly on the boundary node: J = 1 + c
        ShellState shell = ShellState::zero(1);
        shell.eta = const_field(0.05);
        const ChartPoint cp = make_chart_point(dom, {1.0, 0.0});
        const PointTransform pt = transform_at(dom, shell, cp, {1.0, 0.0});
        CHECK(pt.J == doctest::Approx(1.05).epsilon(1e-14));
    }
    SUBCASE("boundary determinant ratio is independent of the amplitude") {
        // J|bdry / (1 + c) pointwise equal across two amplitudes
        const double c1 = 0.03, c2 = 0.08;
        for (int i = 0; i < 32; ++i) {
            const double y = static_cast<double>(i) / 32;
            const Vec2 x(std::cos(two_pi * y), std::sin(two_pi * y));
            ShellState s1 = ShellState::zero(1), s2 = ShellState::zero(1);
            s1.eta = const_field(c1);
            s2.eta = const_field(c2);
            const ChartPoint cp = make_chart_point(dom, x);
            const double J1 = transform_at(dom, s1, cp, x).J;
            const double J2 = transform_at(dom, s2, cp, x).J;
            CHECK(std::abs(J1 / (1 + c1) - J2 / (1 + c2)) < 1e-10);
        }
    }
    SUBCASE("A is SPD and J positive for admissible eta") {
        std::mt19937_64 rng(13);
        ShellState shell = ShellState::zero(6);
        shell.eta = random_admissible(rng, dom);
        shell.eta_t = random_admissible(rng, dom);
        std::uniform_real_distribution<double> rad(0.55, 0.999);
        std::uniform_real_distribution<double> ang(0.0, two_pi);
        for (int i = 0; i < 200; ++i) {
            const double r = rad(rng), th = ang(rng);
            const Vec2 x(r * std::cos(th), r * std::sin(th));
            const ChartPoint cp = make_chart_point(dom, x);
            const PointTransform pt = transform_at(dom, shell, cp, x);
            CHECK(pt.J > 0.0);
            CHECK((pt.A - pt.A.transpose()).norm() < 1e-13);
            Eigen::SelfAdjointEigenSolver<Mat2> es(pt.A);
            CHECK(es.eigenvalues()(0) > 0.0);
            // A = J F^{-T} F^{-1} consistency against B^{-T} = F / J:
            const Mat2 F = pt.J * pt.Binvt;
            CHECK((pt.A - pt.J * (F.inverse().transpose() * F.inverse())).norm() < 1e-10);
        }
    }
    SUBCASE("time-derivative fields against finite differences") {
        std::mt19937_64 rng(17);
        SpectralField eta0 = random_admissible(rng, dom);
        SpectralField etat = random_admissible(rng, dom);
        const Vec2 x(0.93, -0.17);
        const ChartPoint cp = make_chart_point(dom, x);
        const double dt = 1e-6;
        auto fields_at = [&](double tau) {
            ShellState s{eta0 + (tau * etat), etat};
            return transform_at(dom, s, cp, x);
        };
        const PointTransform p0 = fields_at(0.0);
        const PointTransform pp = fields_at(dt);
        const PointTransform pm = fields_at(-dt);
        CHECK(std::abs((pp.J - pm.J) / (2 * dt) - p0.dtJ) < 1e-6);
        CHECK(((pp.Binvt - pm.Binvt) / (2 * dt) - p0.dtBinvt).norm() < 1e-6);
    }
    SUBCASE("spatial gradient of Binvt against finite differences") {
        std::mt19937_64 rng(19);
        ShellState shell = ShellState::zero(6);
        shell.eta = random_admissible(rng, dom);
        const Vec2 x(0.0, 0.85);
        const double h = 1e-6;
        auto binvt_at = [&](const Vec2& p) {
            const ChartPoint cp = make_chart_point(dom, p);
            return transform_at(dom, shell, cp, p).Binvt;
        };
        const ChartPoint cp = make_chart_point(dom, x);
        const PointTransform pt = transform_at(dom, shell, cp, x);
        for (int c = 0; c < 2; ++c) {
            Vec2 e = Vec2::Zero();
            e(c) = h;
            const Mat2 fd = (binvt_at(x + e) - binvt_at(x - e)) / (2 * h);
            CHECK((fd - pt.gradBinvt[c]).norm() < 1e-5);
        }
    }
}

TEST_CASE("normal invariance") {
    ReferenceDomain dom = ReferenceDomain::disk();
    SpectralField zero(2, true);
    CHECK(normal_invariance_check(dom, zero) < 1e-12);
    CHECK(normal_invariance_check(dom, const_field(0.05)) < 1e-8);
    CHECK(normal_invariance_check(dom, sin_field(0.05)) < 1e-8);
}

TEST_CASE("blend invariants") {
    Blend b{0.5, 0.1};
    CHECK(b.value(-0.5) == 0.0);
    CHECK(b.value(0.0) == 1.0);
    CHECK(b.deriv(-0.5) == 0.0);
    CHECK(b.deriv(0.0) == 0.0);
    // sup |beta'| attained mid-ramp
    double sup = 0.0;
    for (int i = 0; i <= 1000; ++i) sup = std::max(sup, b.deriv(-0.5 + 0.5 * i / 1000.0));
    CHECK(sup == doctest::Approx(b.sup_deriv()).epsilon(1e-4));
    ReferenceDomain dom = ReferenceDomain::disk();
    CHECK(dom.amplitude_cap() * b.sup_deriv() <= 0.9 + 1e-12);
    CHECK(dom.amplitude_cap() == doctest::Approx(0.108).epsilon(1e-12));
}
