#include "shellflow/correction.hpp"

#include "shellflow/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

namespace shellflow {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

// Bordered least-norm saddle system on the zero-trace velocity space:
//   min 1/2 |grad u|^2  s.t.  int q (div u) = r_q  for all pressure modes,
// with the constant pressure direction released through a mean pin.
struct CorrectionContext::Solver {
    const FemSystem* fem;
    Eigen::PartialPivLU<MatrixXd> lu;
    VectorXd cvec;

    explicit Solver(const FemSystem& f) : fem(&f) {
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

    VectorXd solve(const VectorXd& r) const {
        const int ni2 = fem->n_interior_vel();
        const int np = fem->n_pressure();
        VectorXd rhs = VectorXd::Zero(ni2 + np + 1);
        rhs.segment(ni2, np) = r;
        VectorXd sol = lu.solve(rhs);
        if (!sol.allFinite()) throw SingularSolve("bogovskij: saddle solve produced non-finite values");
        return fem->prolongate_interior(sol.head(ni2));
    }
};

CorrectionContext::CorrectionContext(const ReferenceDomain& dom, std::shared_ptr<const Mesh> mesh)
    : dom_(&dom), mesh_(std::move(mesh)) {
    fem_ = std::make_unique<FemSystem>(*mesh_);
    // Reference bump: radial mollifier supported strictly inside Omega \ S_L,
    // normalized so the quadrature integral is exactly 1.
    const double rb = 0.9 * (1.0 - dom.tube_width());
    auto raw = [rb](Vec2 x) {
        const double r2 = x.squaredNorm() / (rb * rb);
        return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
    };
    bump_ = interpolate_scalar(*mesh_, raw, 2);
    double integral = 0.0;
    for (const auto& qp : mesh_->quadrature()) integral += qp.w * scalar_at_quad(bump_, qp);
    for (auto& v : bump_.values) v /= integral;
    bump_integral_ = 1.0;
    solver_ = std::make_shared<Solver>(*fem_);
}

FEField CorrectionContext::bogovskij(const FEField& f) const {
    const Mesh& m = *mesh_;
    double F = 0.0;
    for (const auto& qp : m.quadrature()) F += qp.w * scalar_at_quad(f, qp);
    // pressure loads r_q = int q (f - b F)
    VectorXd r = VectorXd::Zero(fem_->n_pressure());
    for (const auto& qp : m.quadrature()) {
        const double val = scalar_at_quad(f, qp) - F * scalar_at_quad(bump_, qp);
        const auto& tri = m.triangle(qp.tri);
        const double lam[3] = {
            m.shape_value(qp.local, 0) + 0.5 * (m.shape_value(qp.local, 3) + m.shape_value(qp.local, 5)),
            m.shape_value(qp.local, 1) + 0.5 * (m.shape_value(qp.local, 3) + m.shape_value(qp.local, 4)),
            m.shape_value(qp.local, 2) + 0.5 * (m.shape_value(qp.local, 4) + m.shape_value(qp.local, 5))};
        for (int v = 0; v < 3; ++v) r(tri[v]) += qp.w * val * lam[v];
    }
    VectorXd u = solver_->solve(r);
    FEField out = FEField::vector(m);
    for (int i = 0; i < 2 * m.n_p2(); ++i) out.values[static_cast<size_t>(i)] = u(i);
    const double fn = l2_norm(f);
    last_bound_ = fn > 0 ? h1_seminorm(out) / fn : 0.0;
    return out;
}

double CorrectionContext::weak_divergence_residual(const FEField& u, const FEField& target) const {
    const Mesh& m = *mesh_;
    VectorXd rho = VectorXd::Zero(fem_->n_pressure());
    for (const auto& qp : m.quadrature()) {
        const Mat2 g = vector_grad_at_quad(u, qp);
        const double val = g(0, 0) + g(1, 1) - scalar_at_quad(target, qp);
        const auto& tri = m.triangle(qp.tri);
        const double lam[3] = {
            m.shape_value(qp.local, 0) + 0.5 * (m.shape_value(qp.local, 3) + m.shape_value(qp.local, 5)),
            m.shape_value(qp.local, 1) + 0.5 * (m.shape_value(qp.local, 3) + m.shape_value(qp.local, 4)),
            m.shape_value(qp.local, 2) + 0.5 * (m.shape_value(qp.local, 4) + m.shape_value(qp.local, 5))};
        for (int v = 0; v < 3; ++v) rho(tri[v]) += qp.w * val * lam[v];
    }
    // L^2-functional norm sqrt(rho^T Mp^{-1} rho)
    Eigen::SimplicialLDLT<SpMat> mp(fem_->pressure_mass());
    VectorXd z = mp.solve(rho);
    return std::sqrt(std::max(0.0, rho.dot(z)));
}

double corrector(const ReferenceDomain& dom, const SpectralField& xi, const SpectralField& eta) {
    const int grid = 1024;
    double num = 0.0, den = 0.0, wmin = std::numeric_limits<double>::max();
    for (int i = 0; i < grid; ++i) {
        const double y = static_cast<double>(i) / grid;
        const double w = dom.curve().speed(y) * (1.0 + eta.eval(y) * dom.curve().mu(y));
        wmin = std::min(wmin, w);
        num += xi.eval(y) * w;
        den += w;
    }
    if (wmin <= 0.0)
        throw DegenerateWeight("corrector: boundary area element vanished (1 + eta mu <= 0)");
    return num / den;
}

namespace {

// Rescaled blend supported on the alpha-tube: quintic smoothstep on
// [-alpha, -0.1 alpha], one on the plateau.
double alpha_blend(double s, double alpha) {
    Blend b{alpha, 0.1};
    return b.value(s);
}

} // namespace

FEField solenoidal_extend(const CorrectionContext& ctx, const SpectralField& xi,
                          const ShellState& eta) {
    const ReferenceDomain& dom = ctx.domain();
    const Mesh& m = ctx.mesh();
    dom.require_admissible(eta.eta);
    const double kappa = corrector(dom, xi, eta.eta);
    const double scale = std::max(1.0, sobolev_norm(xi, 0.0));
    if (std::abs(kappa) > 1e-10 * scale)
        throw IncompatibleFlux("solenoidal_extend: datum has nonzero corrected flux " +
                               std::to_string(kappa));

    const double alpha = dom.amplitude_cap();

    // tube submesh: triangles with any vertex closer than alpha to the boundary
    std::vector<int> tube_tris;
    std::vector<bool> tri_in(static_cast<size_t>(m.n_triangles()), false);
    for (int t = 0; t < m.n_triangles(); ++t) {
        const auto& tri = m.triangle(t);
        for (int v = 0; v < 3; ++v) {
            if (dom.boundary_distance(m.vertex(tri[v])) < alpha) {
                tube_tris.push_back(t);
                tri_in[static_cast<size_t>(t)] = true;
                break;
            }
        }
    }

    // nodal lift: xi(y) beta_alpha(s) n(y), boundary nodes pinned at s = 0
    FEField u0 = FEField::vector(m);
    std::map<int, double> boundary_y;
    for (const auto& [bn, by] : m.boundary_p2()) boundary_y.emplace(bn, by);
    std::vector<bool> node_in_tube(static_cast<size_t>(m.n_p2()), false);
    for (int t : tube_tris)
        for (int i = 0; i < 6; ++i) node_in_tube[static_cast<size_t>(m.p2_dofs(t)[i])] = true;
    for (int node = 0; node < m.n_p2(); ++node) {
        if (!node_in_tube[static_cast<size_t>(node)]) continue;
        auto it = boundary_y.find(node);
        double y, s;
        if (it != boundary_y.end()) {
            y = it->second;
            s = 0.0;
        } else {
            const Vec2 x = m.p2_coord(node);
            if (dom.boundary_distance(x) >= dom.tube_width()) continue;
            const TubularCoords tc = dom.tubular_coords(x);
            y = tc.y;
            s = tc.s;
        }
        const double val = xi.eval(y) * alpha_blend(s, alpha);
        const Vec2 n = dom.curve().normal(y);
        u0.at(node, 0) = val * n.x();
        u0.at(node, 1) = val * n.y();
    }

    // transformed-divergence correction on the tube submesh: zero trace on
    // the whole submesh boundary, zero-mean tube pressure released through a
    // mean pin (the leftover constant carries the discrete flux mismatch).
    std::vector<int> free_nodes;
    std::vector<int> free_of_node(static_cast<size_t>(m.n_p2()), -1);
    {
        // nodes interior to the tube submesh: in the tube, not on the outer
        // boundary, and not shared with any triangle outside the tube
        std::vector<bool> touched_outside(static_cast<size_t>(m.n_p2()), false);
        for (int t = 0; t < m.n_triangles(); ++t) {
            if (tri_in[static_cast<size_t>(t)]) continue;
            for (int i = 0; i < 6; ++i) touched_outside[static_cast<size_t>(m.p2_dofs(t)[i])] = true;
        }
        for (int node = 0; node < m.n_p2(); ++node) {
            if (!node_in_tube[static_cast<size_t>(node)]) continue;
            if (m.is_boundary_node(node)) continue;
            if (touched_outside[static_cast<size_t>(node)]) continue;
            free_of_node[static_cast<size_t>(node)] = static_cast<int>(free_nodes.size());
            free_nodes.push_back(node);
        }
    }
    std::vector<int> tube_verts;
    std::vector<int> pidx(static_cast<size_t>(m.n_vertices()), -1);
    for (int t : tube_tris)
        for (int v = 0; v < 3; ++v) {
            const int vid = m.triangle(t)[v];
            if (pidx[static_cast<size_t>(vid)] < 0) {
                pidx[static_cast<size_t>(vid)] = static_cast<int>(tube_verts.size());
                tube_verts.push_back(vid);
            }
        }

    const int nu = 2 * static_cast<int>(free_nodes.size());
    const int np = static_cast<int>(tube_verts.size());
    MatrixXd K = MatrixXd::Zero(nu, nu);
    MatrixXd D = MatrixXd::Zero(np, nu);
    VectorXd r = VectorXd::Zero(np);
    VectorXd cvec = VectorXd::Zero(np);

    for (int t : tube_tris) {
        const auto& dofs = m.p2_dofs(t);
        const auto& tri = m.triangle(t);
        for (int q = 0; q < Mesh::n_quad_local; ++q) {
            const auto& qp = m.quadrature()[static_cast<size_t>(t * Mesh::n_quad_local + q)];
            const ChartPoint cp = make_chart_point(dom, qp.x);
            const PointTransform pt = transform_at(dom, eta, cp, qp.x);
            const Mat2 g0 = vector_grad_at_quad(u0, qp);
            const double d0 = (pt.B.array() * g0.array()).sum();
            const double lam[3] = {
                m.shape_value(qp.local, 0) + 0.5 * (m.shape_value(qp.local, 3) + m.shape_value(qp.local, 5)),
                m.shape_value(qp.local, 1) + 0.5 * (m.shape_value(qp.local, 3) + m.shape_value(qp.local, 4)),
                m.shape_value(qp.local, 2) + 0.5 * (m.shape_value(qp.local, 4) + m.shape_value(qp.local, 5))};
            for (int v = 0; v < 3; ++v) {
                const int pi = pidx[static_cast<size_t>(tri[v])];
                r(pi) += qp.w * lam[v] * d0;
                cvec(pi) += qp.w * lam[v];
            }
            Vec2 grads[6];
            for (int i = 0; i < 6; ++i) grads[i] = m.shape_grad(qp.tri, qp.local, i);
            for (int i = 0; i < 6; ++i) {
                const int fi = free_of_node[static_cast<size_t>(dofs[i])];
                if (fi < 0) continue;
                for (int j = 0; j < 6; ++j) {
                    const int fj = free_of_node[static_cast<size_t>(dofs[j])];
                    if (fj < 0) continue;
                    const double kij = qp.w * grads[i].dot(grads[j]);
                    K(2 * fi, 2 * fj) += kij;
                    K(2 * fi + 1, 2 * fj + 1) += kij;
                }
                for (int v = 0; v < 3; ++v) {
                    const int pi = pidx[static_cast<size_t>(tri[v])];
                    // int q B : grad(w) for w = shape i in component c
                    for (int c = 0; c < 2; ++c)
                        D(pi, 2 * fi + c) += qp.w * lam[v] * pt.B.row(c).dot(grads[i]);
                }
            }
        }
    }

    MatrixXd A = MatrixXd::Zero(nu + np + 1, nu + np + 1);
    A.topLeftCorner(nu, nu) = K;
    A.block(0, nu, nu, np) = -D.transpose();
    A.block(nu, 0, np, nu) = D;
    A.block(nu, nu + np, np, 1) = cvec;
    A.block(nu + np, nu, 1, np) = cvec.transpose();
    VectorXd rhs = VectorXd::Zero(nu + np + 1);
    rhs.segment(nu, np) = r;
    Eigen::PartialPivLU<MatrixXd> lu(A);
    VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite()) throw SingularSolve("solenoidal_extend: tube saddle solve failed");

    FEField out = u0;
    for (size_t i = 0; i < free_nodes.size(); ++i) {
        out.at(free_nodes[i], 0) -= sol(2 * static_cast<int>(i));
        out.at(free_nodes[i], 1) -= sol(2 * static_cast<int>(i) + 1);
    }
    return out;
}

double moving_boundary_flux(const CorrectionContext& ctx, const FEField& u, const ShellState& eta) {
    const ReferenceDomain& dom = ctx.domain();
    const Mesh& m = ctx.mesh();
    double flux = 0.0;
    for (const auto& qp : m.quadrature()) {
        const ChartPoint cp = make_chart_point(dom, qp.x);
        const PointTransform pt = transform_at(dom, eta, cp, qp.x);
        const Mat2 g = vector_grad_at_quad(u, qp);
        flux += qp.w * (pt.B.array() * g.array()).sum();
    }
    return flux;
}

} // namespace shellflow
