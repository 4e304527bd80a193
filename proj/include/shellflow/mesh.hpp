#pragma once

#include "shellflow/geometry.hpp"
#include "shellflow/spectral.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace shellflow {

/// Concentric-ring ("onion") triangulation of the unit disk with the node
/// tables for a continuous P2 velocity / P1 pressure pairing.
///
/// Vertex count 1 + rings*segments, triangle count segments*(2*rings - 1).
/// Boundary vertices sit exactly on the unit circle, equispaced in the
/// boundary parameter y; edge midpoints stay on the chords (straight
/// elements).
class Mesh {
  public:
    static Mesh build_onion(int rings, int segments);

    int rings() const { return rings_; }
    int segments() const { return segments_; }
    int n_vertices() const { return static_cast<int>(vertices_.size()); }
    int n_triangles() const { return static_cast<int>(tris_.size()); }
    int n_edges() const { return static_cast<int>(edges_.size()); }
    int n_p2() const { return n_vertices() + n_edges(); }

    const Vec2& vertex(int v) const { return vertices_[static_cast<size_t>(v)]; }
    const std::array<int, 3>& triangle(int t) const { return tris_[static_cast<size_t>(t)]; }
    /// Global P2 scalar dofs of triangle t: three vertex dofs then the
    /// midpoint dofs of edges (0,1), (1,2), (2,0).
    const std::array<int, 6>& p2_dofs(int t) const { return tri_p2_[static_cast<size_t>(t)]; }

    Vec2 p2_coord(int node) const;
    double triangle_area(int t) const { return areas_[static_cast<size_t>(t)]; }

    /// Boundary P2 nodes ordered by y: (node index, y), y = j/(2*segments).
    const std::vector<std::pair<int, double>>& boundary_p2() const { return boundary_p2_; }
    /// Boundary edges as (vertex a, vertex b, midpoint p2 node), CCW order.
    const std::vector<std::array<int, 3>>& boundary_edges() const { return boundary_edges_; }
    bool is_boundary_node(int p2_node) const { return boundary_mask_[static_cast<size_t>(p2_node)]; }

    struct QuadPoint {
        Vec2 x;
        double w;  // physical weight (reference weight times triangle area)
        int tri;
        int local; // index into the reference rule
    };
    const std::vector<QuadPoint>& quadrature() const { return quad_; }

    /// Reference-rule tables: value of local P2 shape i at reference point q,
    /// and the physical gradient for a given triangle.
    static constexpr int n_quad_local = 6;
    double shape_value(int local_q, int i) const { return shape_[local_q][i]; }
    Vec2 shape_grad(int t, int local_q, int i) const;

    uint64_t hash() const;

    /// Plain-text export: vertex count, vertex lines, triangle count,
    /// triangle lines, boundary map lines (vertex_index y).
    void write_text(std::ostream& os) const;

  private:
    int rings_ = 0, segments_ = 0;
    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> tris_;
    std::vector<std::array<int, 2>> edges_; // sorted vertex pairs
    std::vector<std::array<int, 6>> tri_p2_;
    std::vector<double> areas_;
    std::vector<Mat2> inv_jac_t_; // inverse-transpose of the affine map per triangle
    std::vector<std::pair<int, double>> boundary_p2_;
    std::vector<std::array<int, 3>> boundary_edges_;
    std::vector<bool> boundary_mask_;
    std::vector<QuadPoint> quad_;
    double shape_[6][6];
    Vec2 ref_grad_[6][6]; // gradient of shape i at reference point q (reference coords)

    void finalize();
};

/// Nodal scalar or 2-vector field on the P2 space of a mesh (pressure fields
/// use degree 1 and the vertex subset).
struct FEField {
    const Mesh* mesh = nullptr;
    int degree = 2; // 2: P2 (n_p2 nodes), 1: P1 (vertex nodes)
    int comps = 1;
    std::vector<double> values;

    static FEField scalar(const Mesh& m, int degree = 2);
    static FEField vector(const Mesh& m);
    double& at(int node, int comp = 0) { return values[static_cast<size_t>(node * comps + comp)]; }
    double at(int node, int comp = 0) const { return values[static_cast<size_t>(node * comps + comp)]; }
};

/// Boundary trace of a vector P2 field, component-wise, as spectral fields of
/// the boundary parameter. Samples the 2*segments boundary nodes.
std::pair<SpectralField, SpectralField> trace_restrict(const FEField& v, int max_mode);

} // namespace shellflow
