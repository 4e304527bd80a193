#pragma once

#include "shellflow/fem.hpp"
#include "shellflow/spectral.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace shellflow {

/// One accepted time step of monitored quantities. Column order documented in
/// docs/diagnostics_schema.md and fixed by DiagnosticsRecord::write_csv.
struct DiagnosticsRow {
    double t = 0.0;
    double eta_t_l2sq = 0.0;   // |dt eta|_{L2}^2
    double eta_lap_l2sq = 0.0; // |Lap eta|_{L2}^2
    double v_l2sq = 0.0;       // |v|_{L2}^2
    double energy_total = 0.0; // discrete total energy of the stepper
    double diss_cum = 0.0;     // int_0^t |grad v|^2 (viscosity-weighted)
    double eps_power = 0.0;    // eps |dt grad eta|^2 at this step (>= 0)
    double accel_energy = 0.0; // E(t), 0 until enough history
    double forcing_H = 1.0;    // H(t) >= 1
    double frac_diss_cum = 0.0; // int_0^t |dt eta|^2_{W^{2+s,2}}, s = 1/4
    double div_residual = 0.0;
    double coupling_residual = 0.0;
    double balance_defect = 0.0;
    double guard_margin = 0.0;
    double mass_min_eig = 0.0;
    double min_jacobian = 1.0;
    bool h_flagged_fd = false; // H(t) used one-sided differences
};

class DiagnosticsRecord {
  public:
    void append(const DiagnosticsRow& row); // validates finiteness + monotone t
    const std::vector<DiagnosticsRow>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }
    const DiagnosticsRow& back() const { return rows_.back(); }

    void write_csv(std::ostream& os) const;

  private:
    std::vector<DiagnosticsRow> rows_;
};

struct BaseEnergy {
    double eta_t_l2sq = 0.0;
    double eta_lap_l2sq = 0.0;
    double v_l2sq = 0.0;
    double diss_rate = 0.0;
};

/// The sup-controlled quantities of the basic energy bound; the fluid pieces
/// are passed in by the caller (they need the mesh quadrature).
BaseEnergy base_energy(const SpectralField& eta, const SpectralField& eta_t, double v_l2sq,
                       double diss_rate);

/// History entry for the second-order-in-time energy.
struct AccelSample {
    double t = 0.0;
    SpectralField eta_t;
    VectorXd v_dofs; // reconstructed velocity dofs (may be empty: shell only)
};

/// E(t_i) = |dtt eta|^2 + |dt Lap eta|^2 + |dt v|^2 + |grad v|^2 with centered
/// differences at interior samples and one-sided second-order stencils at the
/// ends. Throws InsufficientHistory with fewer than 3 samples.
double accel_energy(const std::vector<AccelSample>& hist, size_t i, const FemSystem* fem);

/// Admissibility margin alpha - sup|eta| (sampled sup); negative means stop.
double guard_margin(const SpectralField& eta, double amplitude_cap);

struct GronwallReport {
    double T_tilde = 0.0;   // comparison-ODE exit time (or the horizon)
    bool pass = false;      // f(t) <= 2 f(0) + 2 int h on [0, T_tilde]
    double margin = 0.0;    // min slack (negative = worst violation) on [0, T_tilde]
    bool blowup_before_horizon = false;
};

/// Integrates g' = h + c1 g^p, g(0) = c0 with an adaptive embedded RK pair and
/// checks the sampled f against the threshold 2 f(0) + 2 int_0^t h.
GronwallReport gronwall_check(const std::vector<double>& f, const std::vector<double>& h,
                              double dt, double c0, double c1, double p);

} // namespace shellflow
