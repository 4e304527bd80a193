#pragma once

#include "shellflow/basis.hpp"
#include "shellflow/diagnostics.hpp"
#include "shellflow/geometry.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace shellflow {

struct PhysicsParams {
    double rho_s = 1.0;     // shell density
    double rho_f = 1.0;     // fluid density
    double mu = 1.0;        // viscosity
    double stiffness = 1.0; // bending stiffness
};

/// Sampled shell trajectory on [0,T] with cubic Hermite evaluation in time
/// (displacement from the stored values and velocities; velocity from the
/// derivative of the same cubic).
class ShellTrajectory {
  public:
    ShellTrajectory() = default;
    ShellTrajectory(std::vector<double> times, std::vector<ShellState> states);
    static ShellTrajectory constant(const SpectralField& eta, double T);

    double horizon() const { return times_.empty() ? 0.0 : times_.back(); }
    size_t size() const { return times_.size(); }
    double time(size_t i) const { return times_[i]; }
    const ShellState& sample(size_t i) const { return states_[i]; }

    ShellState eval(double t) const;

  private:
    std::vector<double> times_;
    std::vector<ShellState> states_;
};

/// Gaussian mollification in space (spectral multiplier exp(-r^2 (2 pi k)^2 /2))
/// and time (discrete kernel, reflected at the endpoints). radius 0 is the
/// identity.
ShellTrajectory mollify_geometry(const ShellTrajectory& zeta, double radius);
SpectralField mollify_field(const SpectralField& u, double radius);

/// sup-in-time contraction metric |dt(z1-z2)|_{L2} + |Lap(z1-z2)|_{L2} over
/// the common sample grid.
double trajectory_gap(const ShellTrajectory& a, const ShellTrajectory& b);

struct InitialData {
    SpectralField eta0;     // initial displacement
    SpectralField eta_star; // initial shell velocity
    FEField v0;             // initial transformed fluid velocity
};

/// Forcing data; absent derivative callables flag the diagnostics H(t) as
/// finite-difference based.
struct ForcingSpec {
    std::function<Vec2(double, Vec2)> fluid;
    std::function<double(double, double)> shell;
    std::function<Vec2(double, Vec2)> fluid_dt;
    std::function<double(double, double)> shell_dt;
    std::function<Mat2(double, Vec2)> fluid_grad;
    std::function<double(double, double)> shell_dy;
    bool is_zero = false;

    static ForcingSpec zero();
};

struct GalerkinState {
    VectorXd alpha;    // Galerkin coefficients, length n
    SpectralField eta; // shell displacement
    double t = 0.0;

    /// shell velocity dt(eta) = J^{-1}(phi) sum alpha_k Xc_k at the state's
    /// geometry; cached by the stepper
    SpectralField eta_t;
};

struct StepInfo {
    double t_new = 0.0;
    double energy_total = 0.0;   // 1/2 a^T Mass a + 1/2 kappa |Lap eta|^2
    double balance_defect = 0.0; // residual of the discrete power identity
    double power_visc = 0.0;
    double power_eps = 0.0; // >= 0 with the regularization sign
    double power_geom = 0.0;
    double power_force = 0.0;
    double conv_defect = 0.0; // self-contracted symmetrized convection (should vanish)
    double mass_min_eig = 0.0;
    double min_jacobian = 1.0;
    int newton_iters = 0;
};

class Simulator {
  public:
    Simulator(const ReferenceDomain& dom, const GalerkinBasis& basis, PhysicsParams phys,
              ForcingSpec forcing, double eps, int eta_modes = 32);

    const GalerkinBasis& basis() const { return *basis_; }
    const ReferenceDomain& domain() const { return *dom_; }
    const PhysicsParams& physics() const { return phys_; }
    double epsilon() const { return eps_; }

    void set_geometry(const ShellTrajectory& zeta) { zeta_ = &zeta; }

    /// Mass-orthogonal projection of the initial data onto the Galerkin space
    /// at the geometry zeta(0). Throws IncompatibleData when the trace
    /// compatibility v0(phi) = eta_star n fails beyond tolerance.
    GalerkinState init_state(const InitialData& data) const;

    /// Geometry-weighted mass matrix at the prescribed geometry of time t.
    MatrixXd assemble_mass(double t) const; // throws NotSPD
    /// Right-hand side of the reduced system at state (alpha, eta) and time t.
    VectorXd assemble_rhs(double t, const VectorXd& alpha, const SpectralField& eta) const;

    /// One implicit-midpoint step. Throws NoConvergence, SelfIntersection.
    StepInfo step(GalerkinState& state, double dt) const;

    /// Nodal reconstruction v = B^{-T} sum alpha_k X_k at the state's time.
    FEField reconstruct_velocity(const GalerkinState& state) const;
    /// Shell velocity of the ansatz at the state's geometry.
    SpectralField shell_velocity(double t, const VectorXd& alpha) const;

    /// Norm pieces for the diagnostics row.
    double transformed_divergence(const GalerkinState& state) const;
    double coupling_residual(const GalerkinState& state) const;
    double forcing_H(double t) const;
    bool forcing_H_is_fd() const;

  private:
    const ReferenceDomain* dom_;
    const GalerkinBasis* basis_;
    PhysicsParams phys_;
    ForcingSpec forcing_;
    double eps_;
    int eta_modes_;
    const ShellTrajectory* zeta_ = nullptr;

    struct QuadGeom; // per-step geometry data at the quadrature points
    struct ShellOps; // per-step spectral-side matrices
    struct StepMatrices {
        MatrixXd mass;
        MatrixXd linear;  // transport + shell transport + viscous + eps + mass drift
        MatrixXd bendmat; // <Lap(Jinv Xc_k), Lap(Jinv Xc_l)>
        VectorXd force;
        double min_jacobian = 1.0;
    };
    StepMatrices assemble_at(double t) const;
    void quad_transforms(double t, std::vector<PointTransform>& out, double* minJ) const;
    friend struct SimulatorTestAccess;

  public:
    // power integrals recomputed by independent quadrature (used by the
    // energy-balance monitor)
    struct Powers {
        double visc = 0.0, eps = 0.0, geom = 0.0, force = 0.0, conv = 0.0;
    };
    Powers contracted_powers(double t, const VectorXd& alpha_mid, const SpectralField& eta_mid) const;
};

struct RunStatus {
    enum class Code { Success, SelfIntersection, NoConvergence, NoContraction } code =
        Code::Success;
    double stop_time = 0.0;
    double violation = 0.0; // guard margin at the rejected step, if any
    std::string message;
};

struct RunResult {
    ShellTrajectory trajectory; // accepted (eta, dt eta) samples incl. t = 0
    std::vector<GalerkinState> states;
    DiagnosticsRecord diagnostics;
    RunStatus status;
};

/// Galerkin evolution with the geometry frozen to the (mollified) prescribed
/// trajectory.
RunResult run_decoupled(Simulator& sim, const ShellTrajectory& zeta, const InitialData& data,
                        double T, double dt, double mollify_radius);

struct CouplingReport {
    std::vector<double> gaps;    // sup-in-time energy gaps between iterates
    std::vector<double> factors; // successive gap ratios
    int iterations = 0;
    bool converged = false;
    double contraction_factor() const; // max informative ratio
};

/// Outer fixed-point loop zeta -> eta with optional relaxation theta.
RunResult run_coupled(Simulator& sim, const InitialData& data, double T, double dt,
                      double mollify_radius, int max_outer, double tol, double theta,
                      CouplingReport& report);

struct PressureResult {
    FEField pressure; // P1 field including the spatial constant
    double c_pi = 0.0;
    double mean_part_norm = 0.0;
};

/// Pressure recovery from the transformed momentum residual; dt(v) by a
/// second-order backward difference of the reconstructed velocities.
/// `history` must hold >= 3 states at uniform spacing ending at the current
/// time. Throws InsufficientHistory, SingularProjection.
PressureResult pressure_recover(const Simulator& sim, const std::vector<GalerkinState>& history);

/// Spectral regularization of the initial data; the fluid velocity keeps the
/// trace compatibility by swapping the boundary lift.
InitialData regularize_initial_data(const GalerkinBasis& basis, const InitialData& data,
                                    double radius);

} // namespace shellflow
