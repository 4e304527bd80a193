#pragma once

#include "shellflow/fem.hpp"
#include "shellflow/geometry.hpp"

#include <memory>
#include <vector>

namespace shellflow {

/// Dirichlet Stokes eigenpair on the reference disk: eigenvalue, velocity
/// eigenfield (divergence free, zero trace, W^{1,2}-normalized), and the
/// recovered pressure.
struct StokesMode {
    double lambda = 0.0;
    FEField velocity;
    FEField pressure;
    double div_l2 = 0.0;
};

/// Shell boundary mode and its interior Stokes lifting: Xc is the
/// L^2(omega)-normalized Fourier mode, lift solves the homogeneous Stokes
/// problem with boundary data Xc * n.
struct ShellMode {
    SpectralField Xc;
    FEField lift;
    FEField pressure;
    double div_l2 = 0.0;
};

/// Two-family interleaved Galerkin basis: odd pair index -> shell-lifted mode,
/// even pair index -> pure Stokes eigenmode.
class GalerkinBasis {
  public:
    /// Builds count pairs (ceil(count/2) shell lifts + floor(count/2)
    /// eigenmodes)  on the given mesh. Throws EigensolveFailure,
    /// InfSupDeficient on rank problems.
    static GalerkinBasis build(std::shared_ptr<const Mesh> mesh, int count);

    const Mesh& mesh() const { return *mesh_; }
    const FemSystem& fem() const { return *fem_; }
    int n_pairs() const { return n_pairs_; }
    int n_stokes() const { return static_cast<int>(stokes_.size()); }
    int n_shell() const { return static_cast<int>(shells_.size()); }

    const StokesMode& stokes(int j) const { return stokes_[static_cast<size_t>(j - 1)]; } // 1-based
    const ShellMode& shell(int j) const { return shells_[static_cast<size_t>(j - 1)]; }   // 1-based

    bool pair_is_shell(int k) const { return k % 2 == 1; } // 1-based pair index
    /// Fluid member of pair k (lift for odd k, eigenfield for even k).
    const FEField& pair_field(int k) const;
    /// Shell member of pair k (zero field for even k).
    const SpectralField* pair_scalar(int k) const;

    /// Max L2 divergence residual over all modes (the basis's divergence tolerance).
    double divergence_tol() const { return div_tol_; }
    /// W^{1,2} gradient Gram matrix over the pair fields (identity block on
    /// eigenmodes by normalization).
    const MatrixXd& gram_w12() const { return gram_w12_; }
    const MatrixXd& gram_l2() const { return gram_l2_; }

    uint64_t hash() const;

    /// Solve the homogeneous Stokes problem with boundary data Xc * n.
    /// Throws IncompatibleFlux when mean(Xc) != 0 beyond tolerance.
    FEField lift_boundary_mode(const SpectralField& Xc, FEField* pressure_out = nullptr,
                               double* div_l2_out = nullptr) const;

    /// Geometry-weighted shell projection: J^{-1}(phi) * sum_k <J(phi) f, Xc_k>_{W^{2,2}}
    /// Xc_k / |Xc_k|^2_{W^{2,2}} over the first shell modes of pairs 1..n.
    SpectralField project_shell(const ReferenceDomain& dom, const SpectralField& zeta,
                                const SpectralField& f, int n) const;

    /// Geometry-weighted fluid projection over pairs 1..n (see module docs).
    FEField project_fluid(const ReferenceDomain& dom, const ShellState& zeta, const FEField& v,
                          int n) const;

  private:
    std::shared_ptr<const Mesh> mesh_;
    std::unique_ptr<FemSystem> fem_;
    int n_pairs_ = 0;
    std::vector<StokesMode> stokes_;
    std::vector<ShellMode> shells_;
    double div_tol_ = 0.0;
    MatrixXd gram_w12_, gram_l2_;

    // cached boundary-value solver (KKT factorization) for lifts
    struct LiftSolver;
    std::shared_ptr<LiftSolver> lift_;
};

/// The shell mode with 1-based index j: frequency ceil(j/2), cosine for odd j.
SpectralField shell_fourier_mode(int j);

} // namespace shellflow
