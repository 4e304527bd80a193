#include "shellflow/fem.hpp"

#include <cmath>
#include <vector>

namespace shellflow {

namespace {

// 4-point Gauss-Legendre on [0,1]
const double gauss4_x[4] = {0.069431844202973712, 0.33000947820757187, 0.66999052179242813,
                            0.93056815579702629};
const double gauss4_w[4] = {0.17392742256872693, 0.32607257743127307, 0.32607257743127307,
                            0.17392742256872693};

// P2 trace on an edge parametrized by u in [0,1]: end a, end b, midpoint m.
double edge_shape_a(double u) { return (1 - u) * (1 - 2 * u); }
double edge_shape_b(double u) { return u * (2 * u - 1); }
double edge_shape_m(double u) { return 4 * u * (1 - u); }

} // namespace

FemSystem::FemSystem(const Mesh& mesh) : mesh_(&mesh) {
    const int np2 = mesh.n_p2();
    interior_of_node_.assign(static_cast<size_t>(np2), -1);
    for (int n = 0; n < np2; ++n) {
        if (!mesh.is_boundary_node(n)) {
            interior_of_node_[static_cast<size_t>(n)] = static_cast<int>(interior_nodes_.size());
            interior_nodes_.push_back(n);
        }
    }

    std::vector<Eigen::Triplet<double>> tm, tk, td, tp;
    for (const auto& qp : mesh.quadrature()) {
        const auto& dofs = mesh.p2_dofs(qp.tri);
        const auto& tri = mesh.triangle(qp.tri);
        double val[6];
        Vec2 grad[6];
        for (int i = 0; i < 6; ++i) {
            val[i] = mesh.shape_value(qp.local, i);
            grad[i] = mesh.shape_grad(qp.tri, qp.local, i);
        }
        // P1 shapes are the barycentric coordinates = vertex P2 shapes' linear parts;
        // evaluate directly from the reference rule through the vertex shapes:
        // lambda_i at this point equals val of the P1 shape; reconstruct from
        // quadratic vertex + adjacent edge values: lambda_0 = val0 + (val3+val5)/2 etc.
        double lam[3] = {val[0] + 0.5 * (val[3] + val[5]), val[1] + 0.5 * (val[3] + val[4]),
                         val[2] + 0.5 * (val[4] + val[5])};
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < 6; ++j) {
                const double mij = qp.w * val[i] * val[j];
                const double kij = qp.w * grad[i].dot(grad[j]);
                for (int c = 0; c < 2; ++c) {
                    tm.emplace_back(2 * dofs[i] + c, 2 * dofs[j] + c, mij);
                    tk.emplace_back(2 * dofs[i] + c, 2 * dofs[j] + c, kij);
                }
            }
            for (int vq = 0; vq < 3; ++vq)
                for (int c = 0; c < 2; ++c)
                    td.emplace_back(tri[vq], 2 * dofs[i] + c, qp.w * lam[vq] * grad[i](c));
        }
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) tp.emplace_back(tri[a], tri[b], qp.w * lam[a] * lam[b]);
    }
    vmass_.resize(2 * np2, 2 * np2);
    vmass_.setFromTriplets(tm.begin(), tm.end());
    vstiff_.resize(2 * np2, 2 * np2);
    vstiff_.setFromTriplets(tk.begin(), tk.end());
    div_.resize(mesh.n_vertices(), 2 * np2);
    div_.setFromTriplets(td.begin(), td.end());
    pmass_.resize(mesh.n_vertices(), mesh.n_vertices());
    pmass_.setFromTriplets(tp.begin(), tp.end());
}

MatrixXd FemSystem::interior_dense(const SpMat& op) const {
    const int ni = n_interior_nodes();
    MatrixXd out = MatrixXd::Zero(2 * ni, 2 * ni);
    for (int k = 0; k < op.outerSize(); ++k) {
        for (SpMat::InnerIterator it(op, k); it; ++it) {
            const int ri = interior_of_node_[static_cast<size_t>(it.row() / 2)];
            const int ci = interior_of_node_[static_cast<size_t>(it.col() / 2)];
            if (ri >= 0 && ci >= 0)
                out(2 * ri + static_cast<int>(it.row() % 2), 2 * ci + static_cast<int>(it.col() % 2)) +=
                    it.value();
        }
    }
    return out;
}

MatrixXd FemSystem::divergence_interior_dense() const {
    const int ni = n_interior_nodes();
    MatrixXd out = MatrixXd::Zero(n_pressure(), 2 * ni);
    for (int k = 0; k < div_.outerSize(); ++k) {
        for (SpMat::InnerIterator it(div_, k); it; ++it) {
            const int ci = interior_of_node_[static_cast<size_t>(it.col() / 2)];
            if (ci >= 0) out(it.row(), 2 * ci + static_cast<int>(it.col() % 2)) += it.value();
        }
    }
    return out;
}

VectorXd FemSystem::restrict_interior(const VectorXd& full) const {
    VectorXd out(n_interior_vel());
    for (size_t i = 0; i < interior_nodes_.size(); ++i) {
        out(2 * static_cast<int>(i)) = full(2 * interior_nodes_[i]);
        out(2 * static_cast<int>(i) + 1) = full(2 * interior_nodes_[i] + 1);
    }
    return out;
}

VectorXd FemSystem::prolongate_interior(const VectorXd& interior) const {
    VectorXd out = VectorXd::Zero(n_velocity());
    for (size_t i = 0; i < interior_nodes_.size(); ++i) {
        out(2 * interior_nodes_[i]) = interior(2 * static_cast<int>(i));
        out(2 * interior_nodes_[i] + 1) = interior(2 * static_cast<int>(i) + 1);
    }
    return out;
}

FEField interpolate_scalar(const Mesh& m, const std::function<double(Vec2)>& f, int degree) {
    FEField out = FEField::scalar(m, degree);
    const int n = degree == 2 ? m.n_p2() : m.n_vertices();
    for (int i = 0; i < n; ++i) out.values[static_cast<size_t>(i)] = f(degree == 2 ? m.p2_coord(i) : m.vertex(i));
    return out;
}

FEField interpolate_vector(const Mesh& m, const std::function<Vec2(Vec2)>& f) {
    FEField out = FEField::vector(m);
    for (int i = 0; i < m.n_p2(); ++i) {
        const Vec2 v = f(m.p2_coord(i));
        out.at(i, 0) = v.x();
        out.at(i, 1) = v.y();
    }
    return out;
}

double scalar_at_quad(const FEField& f, const Mesh::QuadPoint& qp) {
    const Mesh& m = *f.mesh;
    if (f.degree == 2) {
        const auto& dofs = m.p2_dofs(qp.tri);
        double s = 0.0;
        for (int i = 0; i < 6; ++i) s += f.values[static_cast<size_t>(dofs[i])] * m.shape_value(qp.local, i);
        return s;
    }
    const auto& tri = m.triangle(qp.tri);
    double lam[3] = {m.shape_value(qp.local, 0) + 0.5 * (m.shape_value(qp.local, 3) + m.shape_value(qp.local, 5)),
                     m.shape_value(qp.local, 1) + 0.5 * (m.shape_value(qp.local, 3) + m.shape_value(qp.local, 4)),
                     m.shape_value(qp.local, 2) + 0.5 * (m.shape_value(qp.local, 4) + m.shape_value(qp.local, 5))};
    double s = 0.0;
    for (int v = 0; v < 3; ++v) s += f.values[static_cast<size_t>(tri[v])] * lam[v];
    return s;
}

Vec2 vector_at_quad(const FEField& f, const Mesh::QuadPoint& qp) {
    const Mesh& m = *f.mesh;
    const auto& dofs = m.p2_dofs(qp.tri);
    Vec2 s = Vec2::Zero();
    for (int i = 0; i < 6; ++i) {
        const double v = m.shape_value(qp.local, i);
        s.x() += f.at(dofs[i], 0) * v;
        s.y() += f.at(dofs[i], 1) * v;
    }
    return s;
}

Mat2 vector_grad_at_quad(const FEField& f, const Mesh::QuadPoint& qp) {
    const Mesh& m = *f.mesh;
    const auto& dofs = m.p2_dofs(qp.tri);
    Mat2 g = Mat2::Zero();
    for (int i = 0; i < 6; ++i) {
        const Vec2 gr = m.shape_grad(qp.tri, qp.local, i);
        for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) g(c, d) += f.at(dofs[i], c) * gr(d);
    }
    return g;
}

Vec2 scalar_grad_at_quad(const FEField& f, const Mesh::QuadPoint& qp) {
    const Mesh& m = *f.mesh;
    const auto& dofs = m.p2_dofs(qp.tri);
    Vec2 g = Vec2::Zero();
    if (f.degree == 2) {
        for (int i = 0; i < 6; ++i) g += f.values[static_cast<size_t>(dofs[i])] * m.shape_grad(qp.tri, qp.local, i);
        return g;
    }
    const auto& tri = m.triangle(qp.tri);
    // P1 gradient: constant per triangle; reuse the linear parts of vertex shapes
    for (int v = 0; v < 3; ++v) {
        Vec2 gl = m.shape_grad(qp.tri, qp.local, v);
        // lambda_v gradient = vertex gradient + half the adjacent midpoints'
        const int e1 = v == 0 ? 3 : v == 1 ? 3 : 4;
        const int e2 = v == 0 ? 5 : v == 1 ? 4 : 5;
        gl += 0.5 * (m.shape_grad(qp.tri, qp.local, e1) + m.shape_grad(qp.tri, qp.local, e2));
        g += f.values[static_cast<size_t>(tri[v])] * gl;
    }
    return g;
}

double l2_norm(const FEField& f) {
    double s = 0.0;
    for (const auto& qp : f.mesh->quadrature()) {
        if (f.comps == 1) {
            const double v = scalar_at_quad(f, qp);
            s += qp.w * v * v;
        } else {
            s += qp.w * vector_at_quad(f, qp).squaredNorm();
        }
    }
    return std::sqrt(s);
}

double h1_seminorm(const FEField& f) {
    double s = 0.0;
    for (const auto& qp : f.mesh->quadrature()) {
        if (f.comps == 1)
            s += qp.w * scalar_grad_at_quad(f, qp).squaredNorm();
        else
            s += qp.w * vector_grad_at_quad(f, qp).squaredNorm();
    }
    return std::sqrt(s);
}

double divergence_l2(const FEField& f) {
    double s = 0.0;
    for (const auto& qp : f.mesh->quadrature()) {
        const Mat2 g = vector_grad_at_quad(f, qp);
        const double d = g(0, 0) + g(1, 1);
        s += qp.w * d * d;
    }
    return std::sqrt(s);
}

double boundary_flux(const FEField& f) {
    const Mesh& m = *f.mesh;
    double flux = 0.0;
    for (const auto& be : m.boundary_edges()) {
        const Vec2 a = m.vertex(be[0]), b = m.vertex(be[1]);
        const Vec2 t = b - a;
        const Vec2 nu(t.y(), -t.x()); // outward normal times edge length
        for (int q = 0; q < 4; ++q) {
            const double u = gauss4_x[q];
            Vec2 val;
            for (int c = 0; c < 2; ++c)
                val(c) = f.at(be[0], c) * edge_shape_a(u) + f.at(be[1], c) * edge_shape_b(u) +
                         f.at(be[2], c) * edge_shape_m(u);
            flux += gauss4_w[q] * val.dot(nu);
        }
    }
    return flux;
}

double weak_row_divergence_residual(const Mesh& m, const std::function<Mat2(Vec2)>& M) {
    const int np2 = m.n_p2();
    std::vector<double> res(static_cast<size_t>(2 * np2), 0.0);
    for (const auto& qp : m.quadrature()) {
        const Mat2 Mx = M(qp.x);
        const auto& dofs = m.p2_dofs(qp.tri);
        for (int i = 0; i < 6; ++i) {
            const Vec2 g = m.shape_grad(qp.tri, qp.local, i);
            for (int r = 0; r < 2; ++r)
                res[static_cast<size_t>(2 * dofs[i] + r)] += qp.w * Mx.row(r).dot(g);
        }
    }
    for (const auto& be : m.boundary_edges()) {
        const Vec2 a = m.vertex(be[0]), b = m.vertex(be[1]);
        const Vec2 t = b - a;
        const Vec2 nu(t.y(), -t.x());
        for (int q = 0; q < 4; ++q) {
            const double u = gauss4_x[q];
            const Vec2 x = a + u * t;
            const Mat2 Mx = M(x);
            const double sh[3] = {edge_shape_a(u), edge_shape_b(u), edge_shape_m(u)};
            const int nodes[3] = {be[0], be[1], be[2]};
            for (int k = 0; k < 3; ++k)
                for (int r = 0; r < 2; ++r)
                    res[static_cast<size_t>(2 * nodes[k] + r)] -= gauss4_w[q] * sh[k] * Mx.row(r).dot(nu);
        }
    }
    double worst = 0.0;
    for (double v : res) worst = std::max(worst, std::abs(v));
    return worst;
}

} // namespace shellflow
