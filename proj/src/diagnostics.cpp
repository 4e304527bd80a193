#include "shellflow/diagnostics.hpp"

#include "shellflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace shellflow {

void DiagnosticsRecord::append(const DiagnosticsRow& row) {
    const double vals[] = {row.t,          row.eta_t_l2sq,    row.eta_lap_l2sq, row.v_l2sq,
                           row.energy_total, row.diss_cum,    row.eps_power,    row.accel_energy,
                           row.forcing_H,  row.frac_diss_cum, row.div_residual,
                           row.coupling_residual, row.balance_defect, row.guard_margin,
                           row.mass_min_eig, row.min_jacobian};
    for (double v : vals)
        if (!std::isfinite(v)) throw SimError("diagnostics: non-finite monitored value");
    if (row.eta_t_l2sq < 0 || row.eta_lap_l2sq < 0 || row.v_l2sq < 0 || row.diss_cum < 0 ||
        row.eps_power < -1e-15 || row.frac_diss_cum < 0 || row.forcing_H < 1.0 - 1e-12)
        throw SimError("diagnostics: sign-definite quantity went negative");
    if (!rows_.empty() && row.t <= rows_.back().t)
        throw SimError("diagnostics: time must be strictly increasing");
    rows_.push_back(row);
}

void DiagnosticsRecord::write_csv(std::ostream& os) const {
    os << "t,eta_t_l2sq,eta_lap_l2sq,v_l2sq,energy_total,diss_cum,eps_power,accel_energy,"
          "forcing_H,frac_diss_cum,div_residual,coupling_residual,balance_defect,guard_margin,"
          "mass_min_eig,min_jacobian,h_flagged_fd\n";
    os.precision(17);
    for (const auto& r : rows_) {
        os << r.t << ',' << r.eta_t_l2sq << ',' << r.eta_lap_l2sq << ',' << r.v_l2sq << ','
           << r.energy_total << ',' << r.diss_cum << ',' << r.eps_power << ',' << r.accel_energy
           << ',' << r.forcing_H << ',' << r.frac_diss_cum << ',' << r.div_residual << ','
           << r.coupling_residual << ',' << r.balance_defect << ',' << r.guard_margin << ','
           << r.mass_min_eig << ',' << r.min_jacobian << ',' << (r.h_flagged_fd ? 1 : 0) << "\n";
    }
}

BaseEnergy base_energy(const SpectralField& eta, const SpectralField& eta_t, double v_l2sq,
                       double diss_rate) {
    BaseEnergy e;
    const double nt = sobolev_norm(eta_t, 0.0);
    const double nl = sobolev_norm(eta, 2.0);
    e.eta_t_l2sq = nt * nt;
    e.eta_lap_l2sq = nl * nl;
    e.v_l2sq = v_l2sq;
    e.diss_rate = diss_rate;
    return e;
}

double accel_energy(const std::vector<AccelSample>& hist, size_t i, const FemSystem* fem) {
    if (hist.size() < 3) throw InsufficientHistory("accel_energy: need at least 3 samples");
    const size_t n = hist.size();
    const double h = hist[1].t - hist[0].t;

    SpectralField detat;
    if (i == 0) {
        SpectralField s = hist[0].eta_t;
        s *= -3.0;
        SpectralField s1 = hist[1].eta_t;
        s1 *= 4.0;
        s += s1;
        s -= hist[2].eta_t;
        s *= 1.0 / (2.0 * h);
        detat = s;
    } else if (i + 1 == n) {
        SpectralField s = hist[n - 1].eta_t;
        s *= 3.0;
        SpectralField s1 = hist[n - 2].eta_t;
        s1 *= -4.0;
        s += s1;
        s += hist[n - 3].eta_t;
        s *= 1.0 / (2.0 * h);
        detat = s;
    } else {
        detat = hist[i + 1].eta_t - hist[i - 1].eta_t;
        detat *= 1.0 / (2.0 * h);
    }

    const double n_dtt = sobolev_norm(detat, 0.0);
    const double n_dlap = sobolev_norm(hist[i].eta_t, 2.0);
    double out = n_dtt * n_dtt + n_dlap * n_dlap;

    if (fem != nullptr && hist[i].v_dofs.size() > 0) {
        VectorXd dv;
        if (i == 0)
            dv = (-3.0 * hist[0].v_dofs + 4.0 * hist[1].v_dofs - hist[2].v_dofs) / (2.0 * h);
        else if (i + 1 == n)
            dv = (3.0 * hist[n - 1].v_dofs - 4.0 * hist[n - 2].v_dofs + hist[n - 3].v_dofs) /
                 (2.0 * h);
        else
            dv = (hist[i + 1].v_dofs - hist[i - 1].v_dofs) / (2.0 * h);
        out += dv.dot(fem->vector_mass() * dv);
        out += hist[i].v_dofs.dot(fem->vector_stiffness() * hist[i].v_dofs);
    }
    return out;
}

double guard_margin(const SpectralField& eta, double amplitude_cap) {
    return amplitude_cap - eta.sup_abs(4096);
}

namespace {

// Cash-Karp embedded RK45 step for g' = rhs(t, g); returns the error estimate.
template <typename F>
double rk45_step(const F& rhs, double t, double g, double h, double& out) {
    const double k1 = rhs(t, g);
    const double k2 = rhs(t + h / 5, g + h * k1 / 5);
    const double k3 = rhs(t + 3 * h / 10, g + h * (3 * k1 + 9 * k2) / 40);
    const double k4 = rhs(t + 3 * h / 5, g + h * (3 * k1 / 10 - 9 * k2 / 10 + 6 * k3 / 5));
    const double k5 =
        rhs(t + h, g + h * (-11 * k1 / 54 + 5 * k2 / 2 - 70 * k3 / 27 + 35 * k4 / 27));
    const double k6 = rhs(t + 7 * h / 8,
                          g + h * (1631 * k1 / 55296 + 175 * k2 / 512 + 575 * k3 / 13824 +
                                   44275 * k4 / 110592 + 253 * k5 / 4096));
    out = g + h * (37 * k1 / 378 + 250 * k3 / 621 + 125 * k4 / 594 + 512 * k6 / 1771);
    const double low = g + h * (2825 * k1 / 27648 + 18575 * k3 / 48384 + 13525 * k4 / 55296 +
                                277 * k5 / 14336 + k6 / 4);
    return std::abs(out - low);
}

} // namespace

GronwallReport gronwall_check(const std::vector<double>& f, const std::vector<double>& h,
                              double dt, double c0, double c1, double p) {
    GronwallReport rep;
    const size_t n = std::max<size_t>(std::max(f.size(), h.size()), 2);
    if (dt <= 0) throw SimError("gronwall_check: need dt > 0");
    const double T = dt * static_cast<double>(n - 1);
    auto h_sample = [&](size_t i) -> double {
        if (h.empty()) return 0.0;
        return h[std::min(i, h.size() - 1)];
    };
    auto h_at = [&](double t) -> double {
        if (h.empty()) return 0.0;
        const double u = std::clamp(t / dt, 0.0, static_cast<double>(n - 1));
        const size_t i = std::min(static_cast<size_t>(u), n - 2);
        const double w = u - static_cast<double>(i);
        return (1 - w) * h_sample(i) + w * h_sample(i + 1);
    };
    std::vector<double> H(n, 0.0);
    for (size_t i = 1; i < n; ++i)
        H[i] = H[i - 1] + 0.5 * dt * (h_sample(i - 1) + h_sample(i));
    auto H_at = [&](double t) -> double {
        const double u = std::clamp(t / dt, 0.0, static_cast<double>(n - 1));
        const size_t i = std::min(static_cast<size_t>(u), n - 2);
        const double w = u - static_cast<double>(i);
        return (1 - w) * H[i] + w * H[i + 1];
    };

    auto rhs = [&](double t, double g) { return h_at(t) + c1 * std::pow(std::max(g, 0.0), p); };

    double t = 0.0, g = c0, step = std::min(1e-3, T / 16);
    rep.T_tilde = T;
    const double tol = 1e-12;
    int iter_guard = 0;
    while (t < T && ++iter_guard < 2000000) {
        step = std::min(step, T - t);
        double gnew;
        const double err = rk45_step(rhs, t, g, step, gnew);
        const double scale = tol * std::max(1.0, std::abs(g));
        if (err > scale && step > 1e-14) {
            step *= 0.5;
            continue;
        }
        if (gnew > 2 * c0 + 2 * H_at(t + step)) {
            double lo = 0.0, hi = step;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                double gm;
                rk45_step(rhs, t, g, mid, gm);
                if (gm > 2 * c0 + 2 * H_at(t + mid))
                    hi = mid;
                else
                    lo = mid;
            }
            rep.T_tilde = t + 0.5 * (lo + hi);
            rep.blowup_before_horizon = true;
            break;
        }
        t += step;
        g = gnew;
        if (err < 0.1 * scale) step *= 1.9;
        if (!std::isfinite(g) || g > 1e30) {
            rep.T_tilde = t;
            rep.blowup_before_horizon = true;
            break;
        }
    }

    rep.pass = true;
    rep.margin = std::numeric_limits<double>::max();
    const double f0 = f.empty() ? c0 : f[0];
    for (size_t i = 0; i < f.size(); ++i) {
        const double ti = dt * static_cast<double>(i);
        if (ti > rep.T_tilde + 1e-12) break;
        const double slack = 2 * f0 + 2 * H[std::min(i, n - 1)] - f[i];
        rep.margin = std::min(rep.margin, slack);
        if (slack < -1e-9 * std::max(1.0, std::abs(f[i]))) rep.pass = false;
    }
    if (f.empty()) rep.margin = 0.0;
    return rep;
}

} // namespace shellflow
