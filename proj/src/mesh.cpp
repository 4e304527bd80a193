#include "shellflow/mesh.hpp"

#include "shellflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>

namespace shellflow {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

// Dunavant degree-4 rule, 6 points, weights normalized to sum 1.
struct RefRule {
    double w[6];
    double l1[6], l2[6], l3[6];
};

RefRule degree4_rule() {
    RefRule r{};
    const double w1 = 0.223381589678011, a1 = 0.445948490915965;
    const double w2 = 0.109951743655322, a2 = 0.091576213509771;
    int q = 0;
    auto put = [&](double w, double b1, double b2, double b3) {
        r.w[q] = w;
        r.l1[q] = b1;
        r.l2[q] = b2;
        r.l3[q] = b3;
        ++q;
    };
    put(w1, a1, a1, 1 - 2 * a1);
    put(w1, a1, 1 - 2 * a1, a1);
    put(w1, 1 - 2 * a1, a1, a1);
    put(w2, a2, a2, 1 - 2 * a2);
    put(w2, a2, 1 - 2 * a2, a2);
    put(w2, 1 - 2 * a2, a2, a2);
    return r;
}

// P2 shapes in barycentric coordinates; local nodes 0,1,2 = vertices,
// 3,4,5 = midpoints of edges (0,1), (1,2), (2,0).
double p2_shape(int i, double l1, double l2, double l3) {
    switch (i) {
    case 0: return l1 * (2 * l1 - 1);
    case 1: return l2 * (2 * l2 - 1);
    case 2: return l3 * (2 * l3 - 1);
    case 3: return 4 * l1 * l2;
    case 4: return 4 * l2 * l3;
    case 5: return 4 * l3 * l1;
    }
    return 0.0;
}

// Gradient with respect to the reference coordinates (xi, zeta) where
// l1 = 1-xi-zeta, l2 = xi, l3 = zeta.
Vec2 p2_ref_grad(int i, double l1, double l2, double l3) {
    const Vec2 g1(-1.0, -1.0), g2(1.0, 0.0), g3(0.0, 1.0);
    switch (i) {
    case 0: return (4 * l1 - 1) * g1;
    case 1: return (4 * l2 - 1) * g2;
    case 2: return (4 * l3 - 1) * g3;
    case 3: return 4.0 * (l2 * g1 + l1 * g2);
    case 4: return 4.0 * (l3 * g2 + l2 * g3);
    case 5: return 4.0 * (l1 * g3 + l3 * g1);
    }
    return Vec2::Zero();
}

} // namespace

Mesh Mesh::build_onion(int rings, int segments) {
    if (rings < 2) throw ValidationError("mesh: rings must be >= 2");
    if (segments < 8) throw ValidationError("mesh: segments must be >= 8");
    Mesh m;
    m.rings_ = rings;
    m.segments_ = segments;
    m.vertices_.reserve(static_cast<size_t>(1 + rings * segments));
    m.vertices_.emplace_back(0.0, 0.0);
    for (int i = 1; i <= rings; ++i) {
        const double r = static_cast<double>(i) / rings;
        for (int j = 0; j < segments; ++j) {
            const double th = two_pi * j / segments;
            m.vertices_.emplace_back(r * std::cos(th), r * std::sin(th));
        }
    }
    auto vid = [&](int ring, int j) { return 1 + (ring - 1) * segments + (j % segments); };
    for (int j = 0; j < segments; ++j) m.tris_.push_back({0, vid(1, j), vid(1, j + 1)});
    for (int i = 1; i < rings; ++i) {
        for (int j = 0; j < segments; ++j) {
            const int a = vid(i, j), a1 = vid(i, j + 1);
            const int b = vid(i + 1, j), b1 = vid(i + 1, j + 1);
            m.tris_.push_back({a, b, b1});
            m.tris_.push_back({a, b1, a1});
        }
    }
    m.finalize();
    return m;
}

void Mesh::finalize() {
    // edge table
    std::map<std::array<int, 2>, int> edge_ids;
    auto edge_of = [&](int a, int b) {
        std::array<int, 2> key{std::min(a, b), std::max(a, b)};
        auto it = edge_ids.find(key);
        if (it != edge_ids.end()) return it->second;
        const int id = static_cast<int>(edges_.size());
        edges_.push_back(key);
        edge_ids.emplace(key, id);
        return id;
    };
    tri_p2_.resize(tris_.size());
    areas_.resize(tris_.size());
    inv_jac_t_.resize(tris_.size());
    for (size_t t = 0; t < tris_.size(); ++t) {
        const auto& tri = tris_[t];
        const int nv = n_vertices();
        tri_p2_[t] = {tri[0],
                      tri[1],
                      tri[2],
                      nv + edge_of(tri[0], tri[1]),
                      nv + edge_of(tri[1], tri[2]),
                      nv + edge_of(tri[2], tri[0])};
        const Vec2 d1 = vertices_[static_cast<size_t>(tri[1])] - vertices_[static_cast<size_t>(tri[0])];
        const Vec2 d2 = vertices_[static_cast<size_t>(tri[2])] - vertices_[static_cast<size_t>(tri[0])];
        Mat2 J;
        J.col(0) = d1;
        J.col(1) = d2;
        const double det = J.determinant();
        if (det <= 0.0) throw ValidationError("mesh: negatively oriented triangle");
        areas_[t] = 0.5 * det;
        inv_jac_t_[t] = J.inverse().transpose();
    }

    // boundary structures: the outer ring
    boundary_mask_.assign(static_cast<size_t>(n_p2()), false);
    const int nv = n_vertices();
    auto outer_vid = [&](int j) { return 1 + (rings_ - 1) * segments_ + (j % segments_); };
    std::map<std::array<int, 2>, int> edge_lookup;
    for (size_t e = 0; e < edges_.size(); ++e) edge_lookup[edges_[e]] = static_cast<int>(e);
    for (int j = 0; j < segments_; ++j) {
        const int a = outer_vid(j), b = outer_vid(j + 1);
        std::array<int, 2> key{std::min(a, b), std::max(a, b)};
        const int mid = nv + edge_lookup.at(key);
        boundary_edges_.push_back({a, b, mid});
        boundary_p2_.emplace_back(a, static_cast<double>(j) / segments_);
        boundary_p2_.emplace_back(mid, (static_cast<double>(j) + 0.5) / segments_);
        boundary_mask_[static_cast<size_t>(a)] = true;
        boundary_mask_[static_cast<size_t>(mid)] = true;
    }

    // reference tables and the physical quadrature list
    const RefRule rule = degree4_rule();
    for (int q = 0; q < 6; ++q)
        for (int i = 0; i < 6; ++i) {
            shape_[q][i] = p2_shape(i, rule.l1[q], rule.l2[q], rule.l3[q]);
            ref_grad_[q][i] = p2_ref_grad(i, rule.l1[q], rule.l2[q], rule.l3[q]);
        }
    quad_.reserve(tris_.size() * 6);
    for (size_t t = 0; t < tris_.size(); ++t) {
        const auto& tri = tris_[t];
        const Vec2 v0 = vertices_[static_cast<size_t>(tri[0])];
        const Vec2 v1 = vertices_[static_cast<size_t>(tri[1])];
        const Vec2 v2 = vertices_[static_cast<size_t>(tri[2])];
        for (int q = 0; q < 6; ++q) {
            QuadPoint qp;
            qp.x = rule.l1[q] * v0 + rule.l2[q] * v1 + rule.l3[q] * v2;
            qp.w = rule.w[q] * areas_[t];
            qp.tri = static_cast<int>(t);
            qp.local = q;
            quad_.push_back(qp);
        }
    }
}

Vec2 Mesh::p2_coord(int node) const {
    if (node < n_vertices()) return vertices_[static_cast<size_t>(node)];
    const auto& e = edges_[static_cast<size_t>(node - n_vertices())];
    return 0.5 * (vertices_[static_cast<size_t>(e[0])] + vertices_[static_cast<size_t>(e[1])]);
}

Vec2 Mesh::shape_grad(int t, int local_q, int i) const {
    return inv_jac_t_[static_cast<size_t>(t)] * ref_grad_[local_q][i];
}

uint64_t Mesh::hash() const {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* data, size_t n) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    const int dims[2] = {rings_, segments_};
    mix(dims, sizeof dims);
    for (const auto& v : vertices_) {
        const double xy[2] = {v.x(), v.y()};
        mix(xy, sizeof xy);
    }
    return h;
}

void Mesh::write_text(std::ostream& os) const {
    os << n_vertices() << "\n";
    os.precision(17);
    for (const auto& v : vertices_) os << v.x() << " " << v.y() << "\n";
    os << n_triangles() << "\n";
    for (const auto& t : tris_) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    for (int j = 0; j < segments_; ++j) {
        const int v = 1 + (rings_ - 1) * segments_ + j;
        os << v << " " << static_cast<double>(j) / segments_ << "\n";
    }
}

FEField FEField::scalar(const Mesh& m, int degree) {
    FEField f;
    f.mesh = &m;
    f.degree = degree;
    f.comps = 1;
    f.values.assign(static_cast<size_t>(degree == 2 ? m.n_p2() : m.n_vertices()), 0.0);
    return f;
}

FEField FEField::vector(const Mesh& m) {
    FEField f;
    f.mesh = &m;
    f.degree = 2;
    f.comps = 2;
    f.values.assign(static_cast<size_t>(2 * m.n_p2()), 0.0);
    return f;
}

std::pair<SpectralField, SpectralField> trace_restrict(const FEField& v, int max_mode) {
    const Mesh& m = *v.mesh;
    const auto& bnodes = m.boundary_p2();
    std::vector<double> s1(bnodes.size()), s2(bnodes.size());
    for (size_t i = 0; i < bnodes.size(); ++i) {
        s1[i] = v.at(bnodes[i].first, 0);
        s2[i] = v.comps == 2 ? v.at(bnodes[i].first, 1) : 0.0;
    }
    const int K = std::min(max_mode, static_cast<int>(bnodes.size() - 1) / 2);
    return {SpectralField::from_samples(s1, K), SpectralField::from_samples(s2, K)};
}

} // namespace shellflow
