#include "shellflow/geometry.hpp"

#include "shellflow/errors.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>

namespace shellflow {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap_unit(double y) {
    double w = y - std::floor(y);
    if (w >= 1.0) w -= 1.0;
    return w;
}
} // namespace

// ---------------------------------------------------------------- BoundaryCurve

BoundaryCurve BoundaryCurve::unit_circle() {
    BoundaryCurve c;
    c.circle_ = true;
    return c;
}

BoundaryCurve BoundaryCurve::parametric(std::function<Vec2(double)> pos,
                                        std::function<Vec2(double)> d1,
                                        std::function<Vec2(double)> d2,
                                        std::function<Vec2(double)> d3) {
    BoundaryCurve c;
    c.circle_ = false;
    c.pos_ = std::move(pos);
    c.d1_ = std::move(d1);
    c.d2_ = std::move(d2);
    c.d3_ = std::move(d3);
    return c;
}

Vec2 BoundaryCurve::position(double y) const {
    if (circle_) return {std::cos(two_pi * y), std::sin(two_pi * y)};
    return pos_(y);
}

Vec2 BoundaryCurve::d1(double y) const {
    if (circle_) return {-two_pi * std::sin(two_pi * y), two_pi * std::cos(two_pi * y)};
    return d1_(y);
}

Vec2 BoundaryCurve::d2(double y) const {
    if (circle_) {
        const double w = two_pi * two_pi;
        return {-w * std::cos(two_pi * y), -w * std::sin(two_pi * y)};
    }
    return d2_(y);
}

Vec2 BoundaryCurve::d3(double y) const {
    if (circle_) {
        const double w = two_pi * two_pi * two_pi;
        return {w * std::sin(two_pi * y), -w * std::cos(two_pi * y)};
    }
    return d3_(y);
}

Vec2 BoundaryCurve::tangent(double y) const {
    if (circle_) return {-std::sin(two_pi * y), std::cos(two_pi * y)};
    Vec2 v = d1_(y);
    return v / v.norm();
}

Vec2 BoundaryCurve::normal(double y) const {
    // outward normal: tangent rotated by -90 degrees
    Vec2 T = tangent(y);
    return {T.y(), -T.x()};
}

double BoundaryCurve::speed(double y) const {
    if (circle_) return two_pi;
    return d1_(y).norm();
}

double BoundaryCurve::speed_deriv(double y) const {
    if (circle_) return 0.0;
    Vec2 v = d1_(y);
    return v.dot(d2_(y)) / v.norm();
}

double BoundaryCurve::mu(double y) const {
    if (circle_) return 1.0;
    const double g = speed(y);
    return -d2_(y).dot(normal(y)) / (g * g);
}

double BoundaryCurve::mu_deriv(double y) const {
    if (circle_) return 0.0;
    // mu = -(phi''.n)/gamma^2 with n = rot_{-90}(phi'/gamma)
    const Vec2 p1 = d1_(y), p2 = d2_(y), p3 = d3_(y);
    const double g = p1.norm();
    const double gp = p1.dot(p2) / g;
    const Vec2 T = p1 / g;
    const Vec2 n(T.y(), -T.x());
    // n' = -mu * gamma * T
    const double m = -p2.dot(n) / (g * g);
    const Vec2 np = -m * g * T;
    const double num_p = -(p3.dot(n) + p2.dot(np));
    return (num_p * g * g - (-p2.dot(n)) * 2.0 * g * gp) / (g * g * g * g);
}

// ---------------------------------------------------------------------- Blend

double Blend::value(double s) const {
    const double knee = -plateau * L;
    if (s >= knee) return 1.0;
    if (s <= -L) return 0.0;
    const double u = (s + L) / ((1.0 - plateau) * L);
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double Blend::deriv(double s) const {
    const double knee = -plateau * L;
    if (s >= knee || s <= -L) return 0.0;
    const double w = (1.0 - plateau) * L;
    const double u = (s + L) / w;
    return 30.0 * u * u * (1.0 - u) * (1.0 - u) / w;
}

double Blend::deriv2(double s) const {
    const double knee = -plateau * L;
    if (s >= knee || s <= -L) return 0.0;
    const double w = (1.0 - plateau) * L;
    const double u = (s + L) / w;
    return (60.0 * u - 180.0 * u * u + 120.0 * u * u * u) / (w * w);
}

// ------------------------------------------------------------- ReferenceDomain

ReferenceDomain ReferenceDomain::disk(double L, double alpha, double plateau) {
    ReferenceDomain d;
    d.curve_ = BoundaryCurve::unit_circle();
    d.L_ = L;
    d.blend_ = Blend{L, plateau};
    d.alpha_ = alpha > 0.0 ? alpha : 0.5 * 0.9 / d.blend_.sup_deriv();
    d.validate();
    return d;
}

ReferenceDomain ReferenceDomain::from_curve(BoundaryCurve curve, double L, double alpha,
                                            double plateau) {
    ReferenceDomain d;
    d.curve_ = std::move(curve);
    d.L_ = L;
    d.blend_ = Blend{L, plateau};
    d.alpha_ = alpha > 0.0 ? alpha : 0.5 * 0.9 / d.blend_.sup_deriv();
    d.validate();
    return d;
}

void ReferenceDomain::validate() const {
    if (L_ <= 0.0) throw ValidationError("geometry: tube width L must be positive");
    if (!(alpha_ < L_)) throw ValidationError("geometry: amplitude cap alpha must be < L");
    if (alpha_ * blend_.sup_deriv() > 0.9 + 1e-12)
        throw ValidationError("geometry: invertibility margin alpha*sup|beta'| <= 0.9 violated");
    // injectivity of the chart within the tube: 1 + s*mu > 0 for s in (-L, 0]
    for (int i = 0; i < 256; ++i) {
        const double y = static_cast<double>(i) / 256.0;
        if (curve_.speed(y) <= 0.0)
            throw ValidationError("geometry: degenerate boundary parametrization (|phi'| = 0)");
        const double m = curve_.mu(y);
        if (1.0 - L_ * std::max(m, 0.0) <= 0.0)
            throw ValidationError("geometry: tube width exceeds the curvature radius");
    }
}

double ReferenceDomain::boundary_distance(const Vec2& x) const {
    if (curve_.is_unit_circle()) return std::abs(x.norm() - 1.0);
    double best = std::numeric_limits<double>::max();
    for (int i = 0; i < 512; ++i) {
        const double y = static_cast<double>(i) / 512.0;
        best = std::min(best, (x - curve_.position(y)).norm());
    }
    return best;
}

TubularCoords ReferenceDomain::tubular_coords(const Vec2& x) const {
    if (curve_.is_unit_circle()) {
        const double r = x.norm();
        if (std::abs(r - 1.0) >= L_)
            throw OutOfTube("tubular_coords: point at distance " + std::to_string(std::abs(r - 1.0)) +
                            " >= L = " + std::to_string(L_));
        double theta = std::atan2(x.y(), x.x());
        double y = wrap_unit(theta / two_pi);
        TubularCoords tc;
        tc.y = y;
        tc.p = curve_.position(y);
        tc.s = (x - tc.p).dot(curve_.normal(y));
        return tc;
    }

    // general curve: bracketed coarse scan over y, then Newton polish on
    // the stationarity condition (x - phi(y)).phi'(y) = 0
    const int N = 512;
    double best = std::numeric_limits<double>::max();
    int ibest = 0;
    for (int i = 0; i < N; ++i) {
        const double y = static_cast<double>(i) / N;
        const double d2 = (x - curve_.position(y)).squaredNorm();
        if (d2 < best) {
            best = d2;
            ibest = i;
        }
    }
    double y = static_cast<double>(ibest) / N;
    for (int it = 0; it < 60; ++it) {
        const Vec2 p = curve_.position(y), t1 = curve_.d1(y), t2 = curve_.d2(y);
        const Vec2 r = x - p;
        const double g = r.dot(t1);
        const double h = -t1.squaredNorm() + r.dot(t2);
        if (std::abs(h) < 1e-30) break;
        const double step = g / h;
        y = wrap_unit(y - step);
        if (std::abs(step) < 1e-15) break;
    }
    TubularCoords tc;
    tc.y = y;
    tc.p = curve_.position(y);
    tc.s = (x - tc.p).dot(curve_.normal(y));
    if (std::abs(tc.s) >= L_)
        throw OutOfTube("tubular_coords: point outside the tubular neighbourhood");
    return tc;
}

void ReferenceDomain::require_admissible(const SpectralField& eta) const {
    const double sup = eta.sup_abs();
    if (sup > alpha_)
        throw AmplitudeExceeded("shell amplitude " + std::to_string(sup) + " exceeds cap " +
                                std::to_string(alpha_));
}

// ------------------------------------------------------------------ chart data

ChartPoint make_chart_point(const ReferenceDomain& dom, const Vec2& x) {
    ChartPoint cp;
    if (dom.boundary_distance(x) >= dom.tube_width()) {
        cp.in_tube = false;
        return cp;
    }
    const TubularCoords tc = dom.tubular_coords(x);
    const BoundaryCurve& c = dom.curve();
    cp.in_tube = true;
    cp.y = tc.y;
    cp.s = tc.s;
    cp.n = c.normal(tc.y);
    cp.T = c.tangent(tc.y);
    cp.gamma = c.speed(tc.y);
    cp.gamma_p = c.speed_deriv(tc.y);
    cp.mu = c.mu(tc.y);
    cp.mu_p = c.mu_deriv(tc.y);
    cp.beta = dom.blend().value(tc.s);
    cp.beta_p = dom.blend().deriv(tc.s);
    cp.beta_pp = dom.blend().deriv2(tc.s);
    cp.ell = 1.0 + tc.s * cp.mu;
    return cp;
}

ShellSample sample_shell(const ShellState& shell, double y) {
    ShellSample s;
    s.eta = shell.eta.eval(y);
    s.eta_y = shell.eta.eval_deriv(y);
    s.eta_yy = shell.eta.eval_deriv2(y);
    s.eta_t = shell.eta_t.eval(y);
    s.eta_t_y = shell.eta_t.eval_deriv(y);
    return s;
}

// ------------------------------------------------------------ transform fields

namespace {

// Rotate a frame matrix into Cartesian coordinates: R M R^T with R = [n | T].
Mat2 rot(const Vec2& n, const Vec2& T, const Mat2& M) {
    Mat2 R;
    R.col(0) = n;
    R.col(1) = T;
    return R * M * R.transpose();
}

} // namespace

PointTransform transform_at(const ReferenceDomain& dom, const ChartPoint& cp,
                            const ShellSample& sh, const Vec2& x) {
    PointTransform pt;
    pt.moved = x;
    if (!cp.in_tube) return pt;

    const double gamma = cp.gamma, gamma_p = cp.gamma_p;
    const double mu = cp.mu, mu_p = cp.mu_p;
    const double beta = cp.beta, beta_p = cp.beta_p, beta_pp = cp.beta_pp;
    const double ell = cp.ell;
    const double s = cp.s;

    // Frame entries of F = grad Psi in the (n, T) basis. Written so every
    // deviation from the identity carries a factor of eta, which makes the
    // eta == 0 fields exact identities.
    const double f_nn = 1.0 + sh.eta * beta_p;
    const double f_nT = sh.eta_y * beta / (gamma * ell);
    const double dev_TT = sh.eta * beta * mu / ell; // f_TT - 1
    const double f_TT = 1.0 + dev_TT;

    const double J = f_nn * f_TT;
    if (J <= 0.0)
        throw NonInvertible("transform_at: nonpositive Jacobian J = " + std::to_string(J));
    pt.J = J;

    // B = J F^{-T} = cofactor(F); rows are divergence free (Piola).
    {
        Mat2 dev;
        dev << dev_TT, 0.0, -f_nT, sh.eta * beta_p;
        pt.B = Mat2::Identity() + rot(cp.n, cp.T, dev);
    }

    // A = J F^{-T} F^{-1}, assembled from the frame inverse.
    {
        const double a_nn = J / (f_nn * f_nn);
        const double a_nT = -J * f_nT / (f_nn * f_nn * f_TT);
        const double a_TT = J * (f_nT * f_nT + f_nn * f_nn) / (f_nn * f_nn * f_TT * f_TT);
        Mat2 dev;
        dev << a_nn - 1.0, a_nT, a_nT, a_TT - 1.0;
        pt.A = Mat2::Identity() + rot(cp.n, cp.T, dev);
    }

    // Binvt = F / J, upper triangular in the frame.
    const double binvt_nn = 1.0 / f_TT;
    const double binvt_nT = f_nT / J;
    const double binvt_TT = 1.0 / f_nn;
    {
        Mat2 dev;
        dev << binvt_nn - 1.0, binvt_nT, 0.0, binvt_TT - 1.0;
        pt.Binvt = Mat2::Identity() + rot(cp.n, cp.T, dev);
    }

    // W = (dt Psi^{-1}) o Psi = -eta_t beta F^{-1} n = -(eta_t beta / f_nn) n.
    pt.W = -(sh.eta_t * beta / f_nn) * cp.n;

    // Time derivatives of the frame entries.
    const double dt_f_nn = sh.eta_t * beta_p;
    const double dt_f_nT = sh.eta_t_y * beta / (gamma * ell);
    const double dt_f_TT = sh.eta_t * beta * mu / ell;
    pt.dtJ = dt_f_nn * f_TT + f_nn * dt_f_TT;
    {
        Mat2 dtF;
        dtF << dt_f_nn, dt_f_nT, 0.0, dt_f_TT;
        Mat2 Ff;
        Ff << f_nn, f_nT, 0.0, f_TT;
        Mat2 dtBinvt_f = dtF / J - (pt.dtJ / (J * J)) * Ff;
        pt.dtBinvt = rot(cp.n, cp.T, dtBinvt_f);
    }

    // Spatial gradient of Binvt via the chart: grad y = T/(gamma ell),
    // grad s = n, and the frame rotation R(y) with R' = R * Omega,
    // Omega = mu gamma [[0,-1],[1,0]].
    {
        const double ell_y = s * mu_p;
        const double ell_s = mu;
        const double elltil = ell + sh.eta * beta * mu; // 1 + (s + eta beta) mu
        const double stil_y = sh.eta_y * beta;
        const double stil_s = 1.0 + sh.eta * beta_p;

        // y- and s-partials of the frame entries
        const double f_nn_y = sh.eta_y * beta_p;
        const double f_nn_s = sh.eta * beta_pp;
        const double denom = gamma * ell;
        const double f_nT_y =
            sh.eta_yy * beta / denom - sh.eta_y * beta * (gamma_p * ell + gamma * ell_y) / (denom * denom);
        const double f_nT_s = sh.eta_y * beta_p / denom - sh.eta_y * beta * gamma * ell_s / (denom * denom);
        const double elltil_y = stil_y * mu + (s + sh.eta * beta) * mu_p;
        const double elltil_s = stil_s * mu;
        const double f_TT_y = (elltil_y * ell - elltil * ell_y) / (ell * ell);
        const double f_TT_s = (elltil_s * ell - elltil * ell_s) / (ell * ell);

        const double J_y = f_nn_y * f_TT + f_nn * f_TT_y;
        const double J_s = f_nn_s * f_TT + f_nn * f_TT_s;

        auto binvt_partial = [&](double f_nn_q, double f_nT_q, double f_TT_q, double J_q) {
            Mat2 M;
            M << -f_TT_q / (f_TT * f_TT), f_nT_q / J - f_nT * J_q / (J * J), 0.0,
                -f_nn_q / (f_nn * f_nn);
            return M;
        };
        const Mat2 dBinvt_y = binvt_partial(f_nn_y, f_nT_y, f_TT_y, J_y);
        const Mat2 dBinvt_s = binvt_partial(f_nn_s, f_nT_s, f_TT_s, J_s);

        Mat2 Binvt_f;
        Binvt_f << binvt_nn, binvt_nT, 0.0, binvt_TT;
        Mat2 B_f;
        B_f << f_TT, 0.0, -f_nT, f_nn;
        Mat2 dB_y, dB_s;
        dB_y << f_TT_y, 0.0, -f_nT_y, f_nn_y;
        dB_s << f_TT_s, 0.0, -f_nT_s, f_nn_s;

        Mat2 Omega;
        Omega << 0.0, -mu * gamma, mu * gamma, 0.0;
        const Mat2 frame_y = rot(cp.n, cp.T, Omega * Binvt_f - Binvt_f * Omega + dBinvt_y);
        const Mat2 frame_s = rot(cp.n, cp.T, dBinvt_s);
        const Mat2 frameB_y = rot(cp.n, cp.T, Omega * B_f - B_f * Omega + dB_y);
        const Mat2 frameB_s = rot(cp.n, cp.T, dB_s);

        const Vec2 grad_y = cp.T / (gamma * ell);
        const Vec2 grad_s = cp.n;
        for (int c = 0; c < 2; ++c) {
            pt.gradBinvt[c] = frame_y * grad_y(c) + frame_s * grad_s(c);
            pt.gradB[c] = frameB_y * grad_y(c) + frameB_s * grad_s(c);
        }
    }

    pt.moved = dom.curve().position(cp.y) + (cp.s + sh.eta * cp.beta) * cp.n;
    return pt;
}

PointTransform transform_at(const ReferenceDomain& dom, const ShellState& shell,
                            const ChartPoint& cp, const Vec2& x) {
    if (!cp.in_tube) return transform_at(dom, cp, ShellSample{}, x);
    return transform_at(dom, cp, sample_shell(shell, cp.y), x);
}

Vec2 hanzawa(const ReferenceDomain& dom, const SpectralField& eta, const Vec2& x) {
    dom.require_admissible(eta);
    if (dom.boundary_distance(x) >= dom.tube_width()) return x;
    const TubularCoords tc = dom.tubular_coords(x);
    const double b = dom.blend().value(tc.s);
    return tc.p + (tc.s + eta.eval(tc.y) * b) * dom.curve().normal(tc.y);
}

Vec2 hanzawa_inverse(const ReferenceDomain& dom, const SpectralField& eta, const Vec2& xhat,
                     int max_iter) {
    dom.require_admissible(eta);
    // Outside the (closed) tube the map is the identity. Points of Omega_eta
    // beyond the reference boundary still have dist < L by admissibility.
    double d;
    TubularCoords tc;
    try {
        tc = dom.tubular_coords(xhat);
        d = std::abs(tc.s);
    } catch (const OutOfTube&) {
        return xhat;
    }
    (void)d;
    const double e = eta.eval(tc.y);
    const Blend& blend = dom.blend();
    // Solve sigma(s) = s + e*beta(s) = shat on the fiber; sigma is strictly
    // increasing since |e| beta' < 1.
    const double shat = tc.s;
    double lo = -dom.tube_width(), hi = std::max(0.0, shat);
    double s = std::min(std::max(shat - e * blend.value(shat), lo), hi);
    bool done = false;
    for (int it = 0; it < max_iter; ++it) {
        const double g = s + e * blend.value(s) - shat;
        if (std::abs(g) < 1e-14) {
            done = true;
            break;
        }
        if (g > 0)
            hi = s;
        else
            lo = s;
        const double dg = 1.0 + e * blend.deriv(s);
        double snew = s - g / dg;
        if (!(snew > lo && snew < hi)) snew = 0.5 * (lo + hi);
        s = snew;
    }
    if (!done) {
        const double g = s + e * blend.value(s) - shat;
        if (std::abs(g) > 1e-12)
            throw NoConvergence("hanzawa_inverse: fiber root-find did not converge");
    }
    return tc.p + s * dom.curve().normal(tc.y);
}

double normal_invariance_check(const ReferenceDomain& dom, const SpectralField& eta,
                               int n_samples) {
    dom.require_admissible(eta);
    // Second-order one-sided difference of Psi along -n, with the stencil kept
    // inside the blend plateau where Psi is affine along the fiber.
    const double h = 0.25 * dom.blend().plateau * dom.tube_width();
    double worst = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const double y = static_cast<double>(i) / n_samples;
        const Vec2 p = dom.curve().position(y);
        const Vec2 n = dom.curve().normal(y);
        const Vec2 f0 = hanzawa(dom, eta, p);
        const Vec2 f1 = hanzawa(dom, eta, p - h * n);
        const Vec2 f2 = hanzawa(dom, eta, p - 2.0 * h * n);
        const Vec2 dn = (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h);
        worst = std::max(worst, (dn - n).norm());
    }
    return worst;
}

double boundary_jacobian(const ReferenceDomain& dom, const SpectralField& eta, double y) {
    return 1.0 + eta.eval(y) * dom.curve().mu(y);
}

double boundary_jacobian_dt(const ReferenceDomain& dom, const ShellState& shell, double y) {
    return shell.eta_t.eval(y) * dom.curve().mu(y);
}

} // namespace shellflow
