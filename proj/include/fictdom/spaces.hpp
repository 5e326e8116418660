#pragma once

// Degree-of-freedom maps for the primal P1 space (zero on the box boundary)
// and the piecewise-constant multiplier space on the fine partition, plus
// the macro-edge fluctuation operator.

#include <array>
#include <stdexcept>
#include <vector>

#include "fictdom/geometry.hpp"

namespace fictdom {

// Multiplier coefficients, one per fine edge, in FinePartition order.
using MultiplierVector = std::vector<double>;

struct DofMap {
    std::vector<int> vertex_to_dof;  // -1 for vertices on the box boundary
    int n_u = 0;                     // primal unknowns
    int n_l = 0;                     // multiplier unknowns (fine edges)

    int n_vertices() const { return static_cast<int>(vertex_to_dof.size()); }
};

inline DofMap build_dof_map(const StructuredMesh& mesh, const FinePartition& fine) {
    DofMap dofs;
    dofs.vertex_to_dof.assign(static_cast<std::size_t>(mesh.n_vertices()), -1);
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (!mesh.on_outer_boundary(v)) {
            dofs.vertex_to_dof[static_cast<std::size_t>(v)] = dofs.n_u++;
        }
    }
    dofs.n_l = fine.n_edges();
    return dofs;
}

// Restriction of the host triangle's three nodal basis functions to a fine
// edge. Each restriction is affine in the arc-length coordinate s of the
// edge's side; the three traces sum to one identically.
struct P1EdgeTrace {
    std::array<int, 3> vertices;      // mesh vertex ids of the host triangle
    std::array<double, 3> at_start;   // basis values at s0
    std::array<double, 3> at_end;     // basis values at s1
    double s0 = 0.0, s1 = 0.0;

    double value(int k, double s) const {
        const double t = (s - s0) / (s1 - s0);
        return at_start[static_cast<std::size_t>(k)] +
               t * (at_end[static_cast<std::size_t>(k)] - at_start[static_cast<std::size_t>(k)]);
    }
};

inline P1EdgeTrace p1_trace_on_edge(const StructuredMesh& mesh, const BoundaryEdge& edge,
                                    double eps = -1.0) {
    if (eps < 0.0) eps = default_geometry_eps(mesh);
    if (edge.host_triangle < 0 || edge.host_triangle >= mesh.n_triangles()) {
        throw std::invalid_argument("p1_trace_on_edge: invalid host triangle");
    }
    const auto l0 = mesh.barycentric(edge.host_triangle, edge.p0);
    const auto l1 = mesh.barycentric(edge.host_triangle, edge.p1);
    const double tol = 2.0 * eps / mesh.cell_width;
    for (int k = 0; k < 3; ++k) {
        if (l0[static_cast<std::size_t>(k)] < -tol || l1[static_cast<std::size_t>(k)] < -tol) {
            throw std::invalid_argument("p1_trace_on_edge: edge leaves its host triangle");
        }
    }
    P1EdgeTrace trace;
    trace.vertices = mesh.triangles[static_cast<std::size_t>(edge.host_triangle)];
    trace.at_start = l0;
    trace.at_end = l1;
    trace.s0 = edge.s0;
    trace.s1 = edge.s1;
    return trace;
}

// Length-weighted mean of mu over one macro edge; this is the L2-orthogonal
// projection onto constants there.
inline double macro_mean(const MacroEdge& m, const FinePartition& fine,
                         const MultiplierVector& mu) {
    double mass = 0.0;
    for (int e = m.first_edge; e < m.first_edge + m.edge_count; ++e) {
        mass += fine.edges[static_cast<std::size_t>(e)].length * mu[static_cast<std::size_t>(e)];
    }
    return mass / m.length;
}

// mu - P~mu: subtract the per-macro-edge projection onto constants.
inline MultiplierVector apply_fluctuation(const MacroPartition& macros,
                                          const FinePartition& fine,
                                          const MultiplierVector& mu) {
    if (mu.size() != fine.edges.size()) {
        throw std::invalid_argument("apply_fluctuation: multiplier size mismatch");
    }
    MultiplierVector out(mu.size(), 0.0);
    for (const MacroEdge& m : macros.macros) {
        const double mean = macro_mean(m, fine, mu);
        for (int e = m.first_edge; e < m.first_edge + m.edge_count; ++e) {
            out[static_cast<std::size_t>(e)] = mu[static_cast<std::size_t>(e)] - mean;
        }
    }
    return out;
}

}  // namespace fictdom
