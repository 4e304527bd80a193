#include "shellflow/basis.hpp"

#include "shellflow/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>

namespace shellflow {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

SpectralField shell_fourier_mode(int j) {
    const int k = (j + 1) / 2;
    SpectralField f(k, true);
    if (j % 2 == 1)
        f.set_cos(k, std::numbers::sqrt2);
    else
        f.set_sin(k, std::numbers::sqrt2);
    return f;
}

// Bordered Stokes KKT with zero-mean pressure, factorized once and reused for
// every boundary datum.
struct GalerkinBasis::LiftSolver {
    const FemSystem* fem = nullptr;
    Eigen::PartialPivLU<MatrixXd> lu;
    VectorXd cvec; // pressure mean weights

    explicit LiftSolver(const FemSystem& f) : fem(&f) {
        const int ni2 = f.n_interior_vel();
        const int np = f.n_pressure();
        MatrixXd K = f.interior_dense(f.vector_stiffness());
        MatrixXd D = f.divergence_interior_dense();
        cvec = f.pressure_mass() * VectorXd::Ones(np);
        MatrixXd A = MatrixXd::Zero(ni2 + np + 1, ni2 + np + 1);
        A.topLeftCorner(ni2, ni2) = K;
        A.block(0, ni2, ni2, np) = -D.transpose();
        A.block(ni2, 0, np, ni2) = D;
        A.block(ni2, ni2 + np, np, 1) = cvec;
        A.block(ni2 + np, ni2, 1, np) = cvec.transpose();
        lu.compute(A);
    }

    // g: full velocity dof vector carrying the boundary nodal values.
    void solve(const VectorXd& g, VectorXd& u_full, VectorXd& pressure) const {
        const int ni2 = fem->n_interior_vel();
        const int np = fem->n_pressure();
        VectorXd rhs = VectorXd::Zero(ni2 + np + 1);
        rhs.head(ni2) = -fem->restrict_interior(fem->vector_stiffness() * g);
        rhs.segment(ni2, np) = -(fem->divergence() * g);
        VectorXd sol = lu.solve(rhs);
        u_full = fem->prolongate_interior(sol.head(ni2)) + g;
        pressure = sol.segment(ni2, np);
    }
};

namespace {

// Dominant angular wavenumber of an interior-ring restriction, used only to
// order modes inside numerically degenerate eigengroups.
int angular_signature(const Mesh& mesh, const FEField& u) {
    const int seg = mesh.segments();
    const int ring = std::max(1, mesh.rings() / 2);
    std::vector<double> pr(static_cast<size_t>(seg)), pt(static_cast<size_t>(seg));
    for (int j = 0; j < seg; ++j) {
        const int v = 1 + (ring - 1) * seg + j;
        const Vec2 x = mesh.vertex(v);
        const double th = std::atan2(x.y(), x.x());
        const Vec2 er(std::cos(th), std::sin(th));
        const Vec2 et(-std::sin(th), std::cos(th));
        const Vec2 val(u.at(v, 0), u.at(v, 1));
        pr[static_cast<size_t>(j)] = val.dot(er);
        pt[static_cast<size_t>(j)] = val.dot(et);
    }
    double best = -1.0;
    int best_m = 0;
    for (int m = 0; m <= seg / 2; ++m) {
        std::complex<double> cr(0, 0), ct(0, 0);
        for (int j = 0; j < seg; ++j) {
            const std::complex<double> w = std::polar(1.0, -two_pi * m * j / seg);
            cr += pr[static_cast<size_t>(j)] * w;
            ct += pt[static_cast<size_t>(j)] * w;
        }
        const double p = std::norm(cr) + std::norm(ct);
        if (p > best * (1.0 + 1e-12)) {
            best = p;
            best_m = m;
        }
    }
    return best_m;
}

} // namespace

GalerkinBasis GalerkinBasis::build(std::shared_ptr<const Mesh> mesh, int count) {
    if (count < 1) throw ValidationError("basis: pair count must be >= 1");
    GalerkinBasis b;
    b.mesh_ = std::move(mesh);
    b.fem_ = std::make_unique<FemSystem>(*b.mesh_);
    b.n_pairs_ = count;
    const FemSystem& fem = *b.fem_;
    const Mesh& m = *b.mesh_;

    const int n_fluid = count / 2;
    const int n_shell = (count + 1) / 2;
    const int max_freq = (n_shell + 1) / 2;
    if (max_freq > m.segments() / 4)
        throw ValidationError("basis: shell mode frequency exceeds boundary resolution");

    // --- Stokes eigenmodes on the discretely divergence-free subspace ---
    if (n_fluid > 0) {
        MatrixXd K = fem.interior_dense(fem.vector_stiffness());
        MatrixXd M = fem.interior_dense(fem.vector_mass());
        MatrixXd D = fem.divergence_interior_dense();

        Eigen::BDCSVD<MatrixXd> svd(D, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double tol = sv(0) * 1e-10;
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv(i) > tol) ++rank;
        if (rank < fem.n_pressure() - 1)
            throw InfSupDeficient("basis: pressure space rank " + std::to_string(rank) +
                                  " below expected " + std::to_string(fem.n_pressure() - 1));
        const int dim = static_cast<int>(D.cols()) - rank;
        if (n_fluid > dim)
            throw ValidationError("basis: requested more eigenmodes than the discrete "
                                  "divergence-free dimension " +
                                  std::to_string(dim));
        MatrixXd Z = svd.matrixV().rightCols(dim);

        MatrixXd Kz = Z.transpose() * K * Z;
        MatrixXd Mz = Z.transpose() * M * Z;
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(Kz, Mz);
        if (ges.info() != Eigen::Success) throw EigensolveFailure("basis: dense eigensolve failed");

        std::vector<VectorXd> vecs;
        std::vector<double> vals;
        for (int j = 0; j < n_fluid; ++j) {
            vals.push_back(ges.eigenvalues()(j));
            vecs.push_back(Z * ges.eigenvectors().col(j));
        }

        // order numerically repeated eigenvalues by angular symmetry class
        std::vector<FEField> fields;
        for (int j = 0; j < n_fluid; ++j) {
            FEField f = FEField::vector(m);
            VectorXd full = fem.prolongate_interior(vecs[static_cast<size_t>(j)]);
            for (int i = 0; i < 2 * m.n_p2(); ++i) f.values[static_cast<size_t>(i)] = full(i);
            fields.push_back(std::move(f));
        }
        int g0 = 0;
        while (g0 < n_fluid) {
            int g1 = g0 + 1;
            while (g1 < n_fluid &&
                   std::abs(vals[static_cast<size_t>(g1)] - vals[static_cast<size_t>(g0)]) <=
                       1e-8 * std::max(1.0, vals[static_cast<size_t>(g0)]))
                ++g1;
            if (g1 - g0 > 1) {
                std::vector<int> idx(static_cast<size_t>(g1 - g0));
                for (int i = 0; i < g1 - g0; ++i) idx[static_cast<size_t>(i)] = g0 + i;
                std::stable_sort(idx.begin(), idx.end(), [&](int a, int bidx) {
                    return angular_signature(m, fields[static_cast<size_t>(a)]) <
                           angular_signature(m, fields[static_cast<size_t>(bidx)]);
                });
                std::vector<VectorXd> vtmp;
                std::vector<FEField> ftmp;
                std::vector<double> ltmp;
                for (int i : idx) {
                    vtmp.push_back(vecs[static_cast<size_t>(i)]);
                    ftmp.push_back(fields[static_cast<size_t>(i)]);
                    ltmp.push_back(vals[static_cast<size_t>(i)]);
                }
                for (int i = 0; i < g1 - g0; ++i) {
                    vecs[static_cast<size_t>(g0 + i)] = vtmp[static_cast<size_t>(i)];
                    fields[static_cast<size_t>(g0 + i)] = ftmp[static_cast<size_t>(i)];
                    vals[static_cast<size_t>(g0 + i)] = ltmp[static_cast<size_t>(i)];
                }
                // Gram-Schmidt in the W^{1,2} product inside the group
                for (int i = 0; i < g1 - g0; ++i) {
                    VectorXd& vi = vecs[static_cast<size_t>(g0 + i)];
                    for (int jj = 0; jj < i; ++jj) {
                        const VectorXd& vj = vecs[static_cast<size_t>(g0 + jj)];
                        const double proj = vi.dot(K * vj) / vj.dot(K * vj);
                        vi -= proj * vj;
                    }
                }
            }
            g0 = g1;
        }

        // normalize in W^{1,2} and recover pressures
        MatrixXd DDt = D * D.transpose();
        VectorXd cvec = fem.pressure_mass() * VectorXd::Ones(fem.n_pressure());
        DDt += cvec * cvec.transpose();
        Eigen::LDLT<MatrixXd> pfac(DDt);
        if (pfac.info() != Eigen::Success)
            throw SingularProjection("basis: pressure normal equations not factorizable");

        for (int j = 0; j < n_fluid; ++j) {
            VectorXd u = vecs[static_cast<size_t>(j)];
            const double kn = std::sqrt(u.dot(K * u));
            u /= kn;
            const double lambda = vals[static_cast<size_t>(j)];
            StokesMode mode;
            mode.lambda = lambda;
            mode.velocity = FEField::vector(m);
            VectorXd full = fem.prolongate_interior(u);
            for (int i = 0; i < 2 * m.n_p2(); ++i)
                mode.velocity.values[static_cast<size_t>(i)] = full(i);
            VectorXd r = K * u - lambda * (M * u);
            VectorXd q = pfac.solve(D * r);
            mode.pressure = FEField::scalar(m, 1);
            for (int i = 0; i < fem.n_pressure(); ++i) mode.pressure.values[static_cast<size_t>(i)] = q(i);
            mode.div_l2 = divergence_l2(mode.velocity);
            b.stokes_.push_back(std::move(mode));
        }
    }

    // --- shell lifts ---
    b.lift_ = std::make_shared<LiftSolver>(fem);
    for (int j = 1; j <= n_shell; ++j) {
        ShellMode sm;
        sm.Xc = shell_fourier_mode(j);
        FEField prs;
        sm.lift = b.lift_boundary_mode(sm.Xc, &prs, &sm.div_l2);
        sm.pressure = std::move(prs);
        b.shells_.push_back(std::move(sm));
    }

    // --- grams and tolerances ---
    b.div_tol_ = 0.0;
    for (const auto& sm : b.stokes_) b.div_tol_ = std::max(b.div_tol_, sm.div_l2);
    for (const auto& sm : b.shells_) b.div_tol_ = std::max(b.div_tol_, sm.div_l2);

    b.gram_w12_ = MatrixXd::Zero(count, count);
    b.gram_l2_ = MatrixXd::Zero(count, count);
    auto dofvec = [&](const FEField& f) {
        VectorXd v(2 * m.n_p2());
        for (int i = 0; i < 2 * m.n_p2(); ++i) v(i) = f.values[static_cast<size_t>(i)];
        return v;
    };
    std::vector<VectorXd> pf;
    for (int k = 1; k <= count; ++k) pf.push_back(dofvec(b.pair_field(k)));
    for (int k = 0; k < count; ++k)
        for (int l = 0; l <= k; ++l) {
            b.gram_w12_(k, l) = b.gram_w12_(l, k) =
                pf[static_cast<size_t>(k)].dot(fem.vector_stiffness() * pf[static_cast<size_t>(l)]);
            b.gram_l2_(k, l) = b.gram_l2_(l, k) =
                pf[static_cast<size_t>(k)].dot(fem.vector_mass() * pf[static_cast<size_t>(l)]);
        }
    return b;
}

const FEField& GalerkinBasis::pair_field(int k) const {
    if (k % 2 == 1) return shells_[static_cast<size_t>((k + 1) / 2 - 1)].lift;
    return stokes_[static_cast<size_t>(k / 2 - 1)].velocity;
}

const SpectralField* GalerkinBasis::pair_scalar(int k) const {
    if (k % 2 == 1) return &shells_[static_cast<size_t>((k + 1) / 2 - 1)].Xc;
    return nullptr;
}

FEField GalerkinBasis::lift_boundary_mode(const SpectralField& Xc, FEField* pressure_out,
                                          double* div_l2_out) const {
    if (std::abs(Xc.mean()) > 1e-12)
        throw IncompatibleFlux("lift: boundary mode must have zero mean on omega");
    const Mesh& m = *mesh_;
    VectorXd g = VectorXd::Zero(2 * m.n_p2());
    for (const auto& [node, y] : m.boundary_p2()) {
        const double v = Xc.eval(y);
        const Vec2 n(std::cos(two_pi * y), std::sin(two_pi * y));
        g(2 * node) = v * n.x();
        g(2 * node + 1) = v * n.y();
    }
    VectorXd u_full, q;
    lift_->solve(g, u_full, q);
    FEField out = FEField::vector(m);
    for (int i = 0; i < 2 * m.n_p2(); ++i) out.values[static_cast<size_t>(i)] = u_full(i);
    if (pressure_out) {
        *pressure_out = FEField::scalar(m, 1);
        for (int i = 0; i < fem_->n_pressure(); ++i)
            pressure_out->values[static_cast<size_t>(i)] = q(i);
    }
    if (div_l2_out) *div_l2_out = divergence_l2(out);
    return out;
}

SpectralField GalerkinBasis::project_shell(const ReferenceDomain& dom, const SpectralField& zeta,
                                           const SpectralField& f, int n) const {
    const int grid = 512;
    std::vector<double> jf(grid), jb(grid);
    for (int i = 0; i < grid; ++i) {
        const double y = static_cast<double>(i) / grid;
        jb[static_cast<size_t>(i)] = boundary_jacobian(dom, zeta, y);
        jf[static_cast<size_t>(i)] = jb[static_cast<size_t>(i)] * f.eval(y);
    }
    const int kbig = grid / 2 - 1;
    const SpectralField weighted = SpectralField::from_samples(jf, kbig);
    SpectralField acc(kbig, true);
    const int n_sh = (n + 1) / 2;
    for (int j = 1; j <= std::min(n_sh, n_shell()); ++j) {
        const SpectralField& Xc = shells_[static_cast<size_t>(j - 1)].Xc;
        const double c = w22_inner(weighted, Xc) / w22_inner(Xc, Xc);
        SpectralField scaled = Xc;
        scaled *= c;
        acc += scaled;
    }
    std::vector<double> out(grid);
    for (int i = 0; i < grid; ++i)
        out[static_cast<size_t>(i)] = acc.eval(static_cast<double>(i) / grid) / jb[static_cast<size_t>(i)];
    return SpectralField::from_samples(out, std::max(f.max_mode(), ((n_sh + 1) / 2) + 2), true);
}

FEField GalerkinBasis::project_fluid(const ReferenceDomain& dom, const ShellState& zeta,
                                     const FEField& v, int n) const {
    const Mesh& m = *mesh_;
    VectorXd coeff = VectorXd::Zero(n);

    // even pairs: <X_k, B^T v>_{W^{1,2}_0} with grad(B^T v) by product rule
    for (const auto& qp : m.quadrature()) {
        const ChartPoint cp = make_chart_point(dom, qp.x);
        const PointTransform pt = transform_at(dom, zeta, cp, qp.x);
        const Vec2 val = vector_at_quad(v, qp);
        const Mat2 gradv = vector_grad_at_quad(v, qp);
        Mat2 gradBtv = pt.B.transpose() * gradv;
        for (int c = 0; c < 2; ++c)
            for (int a = 0; a < 2; ++a)
                for (int b2 = 0; b2 < 2; ++b2)
                    gradBtv(a, c) += pt.gradB[c](b2, a) * val(b2);
        for (int k = 2; k <= n; k += 2) {
            const FEField& Xk = pair_field(k);
            const Mat2 gX = vector_grad_at_quad(Xk, qp);
            coeff(k - 1) += qp.w * (gX.array() * gradBtv.array()).sum();
        }
    }

    // odd pairs: shell datum from the boundary trace of B^T v
    {
        const auto& bnodes = m.boundary_p2();
        std::vector<double> datum(bnodes.size());
        for (size_t i = 0; i < bnodes.size(); ++i) {
            const auto [node, y] = bnodes[i];
            const SpectralField& eta = zeta.eta;
            // B^T at s=0 from the boundary-exact frame entries
            const double mu = dom.curve().mu(y);
            const double gamma = dom.curve().speed(y);
            const double e = eta.eval(y), ey = eta.eval_deriv(y);
            const double f_TT = 1.0 + e * mu;
            const double f_nT = ey / gamma;
            const Vec2 nrm = dom.curve().normal(y);
            const Vec2 tng = dom.curve().tangent(y);
            Mat2 Bf;
            Bf << f_TT, 0.0, -f_nT, 1.0;
            Mat2 R;
            R.col(0) = nrm;
            R.col(1) = tng;
            const Mat2 B = R * Bf * R.transpose();
            const Vec2 val(v.at(node, 0), v.at(node, 1));
            datum[i] = (B.transpose() * val).dot(nrm);
        }
        const int K = static_cast<int>(bnodes.size() - 1) / 2;
        const SpectralField phi = SpectralField::from_samples(datum, K);
        const int grid = 512;
        std::vector<double> jp(grid);
        for (int i = 0; i < grid; ++i) {
            const double y = static_cast<double>(i) / grid;
            jp[static_cast<size_t>(i)] = boundary_jacobian(dom, zeta.eta, y) * phi.eval(y);
        }
        const SpectralField weighted = SpectralField::from_samples(jp, grid / 2 - 1);
        for (int k = 1; k <= n; k += 2) {
            const SpectralField& Xc = shells_[static_cast<size_t>((k + 1) / 2 - 1)].Xc;
            coeff(k - 1) = w22_inner(weighted, Xc) / w22_inner(Xc, Xc);
        }
    }

    // assemble B^{-T} sum_k c_k X_k nodally (boundary nodes use the s = 0
    // boundary-exact transform so the trace identity stays sharp)
    std::map<int, double> boundary_y;
    for (const auto& [bn, by] : m.boundary_p2()) boundary_y.emplace(bn, by);
    FEField out = FEField::vector(m);
    for (int node = 0; node < m.n_p2(); ++node) {
        Vec2 s = Vec2::Zero();
        for (int k = 1; k <= n; ++k) {
            const FEField& Xk = pair_field(k);
            s += coeff(k - 1) * Vec2(Xk.at(node, 0), Xk.at(node, 1));
        }
        const Vec2 x = m.p2_coord(node);
        Vec2 val;
        auto it = boundary_y.find(node);
        if (it != boundary_y.end()) {
            const double y = it->second;
            const double mu = dom.curve().mu(y);
            const double gamma = dom.curve().speed(y);
            const double e = zeta.eta.eval(y), ey = zeta.eta.eval_deriv(y);
            const double J = 1.0 + e * mu;
            Mat2 Ff;
            Ff << 1.0, ey / gamma, 0.0, J;
            Mat2 R;
            R.col(0) = dom.curve().normal(y);
            R.col(1) = dom.curve().tangent(y);
            val = (R * Ff * R.transpose()) * s / J;
        } else {
            const ChartPoint cp = make_chart_point(dom, x);
            const PointTransform pt = transform_at(dom, zeta, cp, x);
            val = pt.Binvt * s;
        }
        out.at(node, 0) = val.x();
        out.at(node, 1) = val.y();
    }
    return out;
}

uint64_t GalerkinBasis::hash() const {
    uint64_t h = mesh_->hash();
    auto mix = [&](const void* data, size_t n) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    mix(&n_pairs_, sizeof n_pairs_);
    for (const auto& s : stokes_) {
        mix(&s.lambda, sizeof s.lambda);
        mix(s.velocity.values.data(), s.velocity.values.size() * sizeof(double));
    }
    for (const auto& s : shells_)
        mix(s.lift.values.data(), s.lift.values.size() * sizeof(double));
    return h;
}

} // namespace shellflow
