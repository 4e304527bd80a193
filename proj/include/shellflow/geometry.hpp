#pragma once

#include "shellflow/spectral.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>

namespace shellflow {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Shell displacement and velocity as periodic spectral fields on omega.
struct ShellState {
    SpectralField eta;   // displacement
    SpectralField eta_t; // velocity

    static ShellState zero(int max_mode) {
        return ShellState{SpectralField(max_mode, true), SpectralField(max_mode, true)};
    }
};

/// Closed parametrized boundary curve y in [0,1) -> R^2, counterclockwise,
/// with enough derivatives for the chart Jacobians. The unit circle gets an
/// analytic fast path for closest points.
class BoundaryCurve {
  public:
    static BoundaryCurve unit_circle();
    static BoundaryCurve parametric(std::function<Vec2(double)> pos,
                                    std::function<Vec2(double)> d1,
                                    std::function<Vec2(double)> d2,
                                    std::function<Vec2(double)> d3);

    bool is_unit_circle() const { return circle_; }
    Vec2 position(double y) const;
    Vec2 d1(double y) const;
    Vec2 d2(double y) const;
    Vec2 d3(double y) const;

    Vec2 tangent(double y) const;        // unit tangent
    Vec2 normal(double y) const;         // outward unit normal (T rotated -90 deg)
    double speed(double y) const;        // |phi'|
    double speed_deriv(double y) const;  // d|phi'|/dy
    double mu(double y) const;           // -phi''.n / |phi'|^2  (=1 on the unit circle)
    double mu_deriv(double y) const;

  private:
    bool circle_ = true;
    std::function<Vec2(double)> pos_, d1_, d2_, d3_;
};

/// Normal-fiber blend: quintic smoothstep rising on [-L, -plateau*L],
/// identically 1 on [-plateau*L, 0]. beta(-L)=0, beta(0)=1, beta'(0)=beta'(-L)=0.
struct Blend {
    double L = 0.5;
    double plateau = 0.1;

    double value(double s) const;
    double deriv(double s) const;
    double deriv2(double s) const;
    double sup_deriv() const { return 1.875 / ((1.0 - plateau) * L); }
};

struct TubularCoords {
    double y; // closest boundary parameter in [0,1)
    double s; // signed distance, negative inside the domain
    Vec2 p;   // foot point phi(y)
};

/// Reference-domain geometry: the boundary curve, the tubular neighbourhood
/// width L, the admissible displacement amplitude alpha < L, and the blend.
class ReferenceDomain {
  public:
    /// Unit disk with tube width L; alpha defaults to half the invertibility
    /// limit 0.9/sup|beta'|.
    static ReferenceDomain disk(double L = 0.5, double alpha = -1.0, double plateau = 0.1);
    static ReferenceDomain from_curve(BoundaryCurve curve, double L, double alpha,
                                      double plateau = 0.1);

    const BoundaryCurve& curve() const { return curve_; }
    double tube_width() const { return L_; }
    double amplitude_cap() const { return alpha_; }
    const Blend& blend() const { return blend_; }

    /// Closest-point chart. Throws OutOfTube when dist(x, boundary) >= L.
    TubularCoords tubular_coords(const Vec2& x) const;

    /// dist(x, boundary) (unsigned); used for the tube membership test.
    double boundary_distance(const Vec2& x) const;

    void require_admissible(const SpectralField& eta) const; // AmplitudeExceeded

  private:
    BoundaryCurve curve_;
    double L_ = 0.5;
    double alpha_ = 0.108;
    Blend blend_;
    void validate() const;
};

/// Time-independent chart data cached per evaluation point.
struct ChartPoint {
    bool in_tube = false;
    double y = 0.0, s = 0.0;
    Vec2 n = Vec2::Zero(), T = Vec2::Zero();
    double gamma = 0.0, gamma_p = 0.0; // |phi'| and its y-derivative
    double mu = 0.0, mu_p = 0.0;
    double beta = 0.0, beta_p = 0.0, beta_pp = 0.0;
    double ell = 1.0; // 1 + s*mu
};

ChartPoint make_chart_point(const ReferenceDomain& dom, const Vec2& x);

/// Shell data evaluated at one boundary parameter.
struct ShellSample {
    double eta = 0.0, eta_y = 0.0, eta_yy = 0.0;
    double eta_t = 0.0, eta_t_y = 0.0;
};

ShellSample sample_shell(const ShellState& shell, double y);

/// All pointwise fields of the coordinate transform at one point:
/// J = det(grad Psi), A = J F^{-T} F^{-1}, B = J F^{-T} (cofactor),
/// Binvt = B^{-T} = F / J, W = (dt Psi^{-1}) o Psi, their time derivatives,
/// the spatial gradient of Binvt, and the moved point Psi(x).
struct PointTransform {
    double J = 1.0;
    Mat2 A = Mat2::Identity();
    Mat2 B = Mat2::Identity();
    Mat2 Binvt = Mat2::Identity();
    Vec2 W = Vec2::Zero();
    double dtJ = 0.0;
    Mat2 dtBinvt = Mat2::Zero();
    Mat2 gradBinvt[2] = {Mat2::Zero(), Mat2::Zero()}; // gradBinvt[c](a,b) = d_c Binvt(a,b)
    Mat2 gradB[2] = {Mat2::Zero(), Mat2::Zero()};     // gradB[c](a,b) = d_c B(a,b)
    Vec2 moved = Vec2::Zero(); // Psi_eta(x)
};

/// Transform fields at a chart point for the given shell data. The chart
/// point may be outside the tube, in which case identity fields are returned.
/// Throws NonInvertible if J <= 0 (cannot happen under the amplitude guard).
PointTransform transform_at(const ReferenceDomain& dom, const ChartPoint& cp,
                            const ShellSample& sh, const Vec2& x);
PointTransform transform_at(const ReferenceDomain& dom, const ShellState& shell,
                            const ChartPoint& cp, const Vec2& x);

/// The Hanzawa transform Psi_eta. Checks the amplitude guard.
Vec2 hanzawa(const ReferenceDomain& dom, const SpectralField& eta, const Vec2& x);

/// Inverse of the Hanzawa transform by a monotone scalar root-find along the
/// normal fiber. Throws NoConvergence after max_iter.
Vec2 hanzawa_inverse(const ReferenceDomain& dom, const SpectralField& eta, const Vec2& xhat,
                     int max_iter = 100);

/// sup over boundary samples of |d_n Psi_eta - n|, the directional derivative
/// taken by a second-order one-sided difference inside the blend plateau (an
/// oracle independent of the analytic Jacobian formulas).
double normal_invariance_check(const ReferenceDomain& dom, const SpectralField& eta,
                               int n_samples = 256);

/// Boundary restriction of J: J(phi(y)) = 1 + eta(y) mu(y), exact at s = 0.
double boundary_jacobian(const ReferenceDomain& dom, const SpectralField& eta, double y);
double boundary_jacobian_dt(const ReferenceDomain& dom, const ShellState& shell, double y);

} // namespace shellflow
