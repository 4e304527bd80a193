#pragma once

#include "shellflow/basis.hpp"
#include "shellflow/fem.hpp"
#include "shellflow/geometry.hpp"

#include <memory>

namespace shellflow {

/// Shared context for the divergence-correction operators: the reference
/// bump (unit integral, supported outside the tube) and the factorized
/// constrained least-norm system on the mesh.
class CorrectionContext {
  public:
    CorrectionContext(const ReferenceDomain& dom, std::shared_ptr<const Mesh> mesh);

    const ReferenceDomain& domain() const { return *dom_; }
    const Mesh& mesh() const { return *mesh_; }
    const FemSystem& fem() const { return *fem_; }
    const FEField& bump() const { return bump_; }

    /// Last measured operator constant |u|_{W^{1,2}} / |f|_{L^2} (logged).
    double last_bound_constant() const { return last_bound_; }

    /// Right inverse of the divergence with zero boundary trace: returns u
    /// with the weak identity div u = f - b int f against the pressure space
    /// and minimal W^{1,2} seminorm. Throws SingularSolve.
    FEField bogovskij(const FEField& f) const;

    /// Weak divergence residual of div u = target against the pressure space
    /// (an L^2-functional norm; solver-exact for bogovskij outputs).
    double weak_divergence_residual(const FEField& u, const FEField& target) const;

  private:
    const ReferenceDomain* dom_;
    std::shared_ptr<const Mesh> mesh_;
    std::unique_ptr<FemSystem> fem_;
    FEField bump_;
    double bump_integral_ = 1.0;
    struct Solver;
    std::shared_ptr<Solver> solver_;
    mutable double last_bound_ = 0.0;
};

/// Weighted boundary mean K_eta(xi): the weight is the moving-boundary area
/// element factor |phi'| (1 + eta mu), which reduces to 1 + eta on the unit
/// disk; the corrected datum xi - K_eta(xi) has zero net volume flux through
/// the deformed boundary. Throws DegenerateWeight when 1 + eta mu <= 0.
double corrector(const ReferenceDomain& dom, const SpectralField& xi, const SpectralField& eta);

/// Divergence-free extension of the flux-corrected shell datum: trace
/// xi * n on the boundary, zero outside the alpha-tube, transformed-
/// divergence-free at the geometry eta. Throws IncompatibleFlux when the
/// corrector was not applied.
FEField solenoidal_extend(const CorrectionContext& ctx, const SpectralField& xi,
                          const ShellState& eta);

/// Flux of the (pullback-composed) extension through the moving boundary,
/// computed as the transformed-divergence volume integral plus the inner
/// trace (zero by construction); used by the flux-identity check.
double moving_boundary_flux(const CorrectionContext& ctx, const FEField& u, const ShellState& eta);

} // namespace shellflow
