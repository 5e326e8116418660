#pragma once

// Assembly of the discrete blocks: stiffness A, boundary coupling C,
// fluctuation stabilization S, load F and boundary moments G. The coupling
// matrix holds the unsigned pairings <mu, v> per fine edge; signs are
// applied when the saddle system is built.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fictdom/geometry.hpp"
#include "fictdom/quadrature.hpp"
#include "fictdom/sparse.hpp"
#include "fictdom/spaces.hpp"

namespace fictdom {

enum class MultiplierSpace { fine, macro };

inline std::string to_string(MultiplierSpace s) {
    return s == MultiplierSpace::fine ? "fine" : "macro";
}

// Configuration of one discrete run.
struct ProblemSpec {
    std::string problem_id = "paper";
    double a = 0.5;        // embedding box margin
    int n = 16;            // mesh subdivisions per box side
    double c_s = 0.1;      // stabilization constant
    MultiplierSpace multiplier_space = MultiplierSpace::fine;
    double kmin = 3.0;     // macro aggregation factors
    double kmax = 6.0;

    void validate() const {
        if (!(a > 0.0)) throw std::invalid_argument("ProblemSpec: a must be > 0");
        if (n < 1) throw std::invalid_argument("ProblemSpec: n must be >= 1");
        if (!(c_s >= 0.0)) throw std::invalid_argument("ProblemSpec: c_s must be >= 0");
        if (!(kmin >= 1.0)) throw std::invalid_argument("ProblemSpec: kmin must be >= 1");
        if (!(kmax > kmin)) throw std::invalid_argument("ProblemSpec: kmax must be > kmin");
    }
};

// Element stiffness of a P1 triangle; gradients are constant, so the
// entries area * (grad_i . grad_j) are exact.
inline std::array<std::array<double, 3>, 3> p1_local_stiffness(Point2 a, Point2 b, Point2 c) {
    const double twice_area = cross(b - a, c - a);
    if (twice_area <= 0.0) {
        throw std::invalid_argument("p1_local_stiffness: triangle not positively oriented");
    }
    const std::array<Point2, 3> grads = {
        Point2{(b.y - c.y) / twice_area, (c.x - b.x) / twice_area},
        Point2{(c.y - a.y) / twice_area, (a.x - c.x) / twice_area},
        Point2{(a.y - b.y) / twice_area, (b.x - a.x) / twice_area},
    };
    std::array<std::array<double, 3>, 3> k{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            k[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                0.5 * twice_area * dot(grads[static_cast<std::size_t>(i)],
                                       grads[static_cast<std::size_t>(j)]);
        }
    }
    return k;
}

inline SparseMatrix assemble_stiffness(const StructuredMesh& mesh, const DofMap& dofs) {
    SparseMatrix A(dofs.n_u, dofs.n_u);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        const auto k = p1_local_stiffness(mesh.vertex(tri[0]), mesh.vertex(tri[1]),
                                          mesh.vertex(tri[2]));
        for (int i = 0; i < 3; ++i) {
            const int di = dofs.vertex_to_dof[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])];
            if (di < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const int dj = dofs.vertex_to_dof[static_cast<std::size_t>(tri[static_cast<std::size_t>(j)])];
                if (dj < 0) continue;
                A.add(di, dj, k[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
            }
        }
    }
    A.finalize();
    return A;
}

// C[e, i] = integral over fine edge e of the basis function of interior
// vertex i. Traces are affine along each edge, so the 2-point Gauss rule is
// exact.
inline SparseMatrix assemble_coupling(const StructuredMesh& mesh, const FinePartition& fine,
                                      const DofMap& dofs, double eps = -1.0) {
    const SegmentRule rule = gauss_segment(2);
    SparseMatrix C(fine.n_edges(), dofs.n_u);
    for (int e = 0; e < fine.n_edges(); ++e) {
        const BoundaryEdge& edge = fine.edges[static_cast<std::size_t>(e)];
        const P1EdgeTrace trace = p1_trace_on_edge(mesh, edge, eps);
        for (int k = 0; k < 3; ++k) {
            const int dof =
                dofs.vertex_to_dof[static_cast<std::size_t>(trace.vertices[static_cast<std::size_t>(k)])];
            if (dof < 0) continue;
            double integral = 0.0;
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const double s = edge.s0 + rule.points[q] * edge.length;
                integral += rule.weights[q] * trace.value(k, s);
            }
            C.add(e, dof, integral * edge.length);
        }
    }
    C.finalize();
    return C;
}

// Per macro edge with fine lengths l_i and |e~| = sum l_i, the block is
// c_s * |e~| * (diag(l) - l l^T / |e~|): the Gram matrix of the fluctuation
// pairing on piecewise constants. Symmetric positive semidefinite with the
// constant vector in its kernel.
inline SparseMatrix assemble_stabilization(const FinePartition& fine,
                                           const MacroPartition& macros, double c_s) {
    if (!(c_s >= 0.0)) throw std::invalid_argument("assemble_stabilization: c_s must be >= 0");
    SparseMatrix S(fine.n_edges(), fine.n_edges());
    if (c_s > 0.0) {
        for (const MacroEdge& m : macros.macros) {
            for (int e = m.first_edge; e < m.first_edge + m.edge_count; ++e) {
                const double le = fine.edges[static_cast<std::size_t>(e)].length;
                for (int f = m.first_edge; f < m.first_edge + m.edge_count; ++f) {
                    const double lf = fine.edges[static_cast<std::size_t>(f)].length;
                    double v = -c_s * le * lf;
                    if (e == f) v += c_s * m.length * le;
                    S.add(e, f, v);
                }
            }
        }
    }
    S.finalize();
    return S;
}

// F_i = integral of f * phi_i; the rule must cover deg(f) + 1.
template <class SourceFn>
std::vector<double> assemble_load(const StructuredMesh& mesh, const DofMap& dofs,
                                  SourceFn&& f, int quadrature_degree = 4) {
    const TriangleRule rule = triangle_rule(quadrature_degree);
    std::vector<double> F(static_cast<std::size_t>(dofs.n_u), 0.0);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        const Point2 a = mesh.vertex(tri[0]), b = mesh.vertex(tri[1]), c = mesh.vertex(tri[2]);
        const double area = mesh.triangle_area(t);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto& l = rule.points[q];
            const Point2 p = l[0] * a + (l[1] * b + l[2] * c);
            const double fw = rule.weights[q] * area * f(p);
            for (int k = 0; k < 3; ++k) {
                const int dof =
                    dofs.vertex_to_dof[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
                if (dof >= 0) F[static_cast<std::size_t>(dof)] += fw * l[static_cast<std::size_t>(k)];
            }
        }
    }
    return F;
}

// G_e = integral of g over fine edge e; 3-point Gauss is exact through
// degree 5 in arc length.
template <class BoundaryFn>
std::vector<double> assemble_boundary_moments(const FinePartition& fine, BoundaryFn&& g) {
    const SegmentRule rule = gauss_segment(3);
    std::vector<double> G(static_cast<std::size_t>(fine.n_edges()), 0.0);
    for (int e = 0; e < fine.n_edges(); ++e) {
        const BoundaryEdge& edge = fine.edges[static_cast<std::size_t>(e)];
        double integral = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            integral += rule.weights[q] * g(edge.point_at(rule.points[q]));
        }
        G[static_cast<std::size_t>(e)] = integral * edge.length;
    }
    return G;
}

// Realize the coarse multiplier space: each macro-edge row is the sum of
// its fine-edge rows.
inline SparseMatrix aggregate_rows(const SparseMatrix& fine_rows, const MacroPartition& macros) {
    SparseMatrix out(macros.n_macros(), fine_rows.cols());
    fine_rows.for_each([&](int r, int c, double v) {
        out.add(macros.fine_to_macro[static_cast<std::size_t>(r)], c, v);
    });
    out.finalize();
    return out;
}

inline std::vector<double> aggregate_entries(const std::vector<double>& fine_values,
                                             const MacroPartition& macros) {
    std::vector<double> out(static_cast<std::size_t>(macros.n_macros()), 0.0);
    for (std::size_t e = 0; e < fine_values.size(); ++e) {
        out[static_cast<std::size_t>(macros.fine_to_macro[e])] += fine_values[e];
    }
    return out;
}

// Constant extension of per-macro-edge values back to the fine partition.
inline MultiplierVector expand_to_fine(const MacroPartition& macros,
                                       const std::vector<double>& macro_values) {
    MultiplierVector out(macros.fine_to_macro.size(), 0.0);
    for (std::size_t e = 0; e < out.size(); ++e) {
        out[e] = macro_values[static_cast<std::size_t>(macros.fine_to_macro[e])];
    }
    return out;
}

}  // namespace fictdom
