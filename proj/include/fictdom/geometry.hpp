#pragma once

// Background triangulation of the embedding box, tracing of a polygonal
// boundary through it, and aggregation of the induced fine partition into
// macro edges.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fictdom {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double t, Point2 p) { return {t * p.x, t * p.y}; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

struct BBox {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double diameter() const { return std::hypot(width(), height()); }

    bool is_square(double rel_tol = 1e-12) const {
        const double m = std::max(std::abs(width()), std::abs(height()));
        return m > 0.0 && std::abs(width() - height()) <= rel_tol * m;
    }

    // distance from an interior point to the box boundary (negative outside)
    double boundary_distance(Point2 p) const {
        return std::min(std::min(p.x - x0, x1 - p.x), std::min(p.y - y0, y1 - p.y));
    }
};

// Closed polygonal boundary, counter-clockwise, without a repeated closing
// vertex. Side j runs from vertex j to vertex j+1 (cyclic) and carries its
// own arc-length coordinate s in [0, side_length(j)].
class PolygonBoundary {
public:
    explicit PolygonBoundary(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
        if (vertices_.size() < 3) {
            throw std::invalid_argument("PolygonBoundary: need at least 3 vertices");
        }
        for (const Point2& v : vertices_) {
            if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
                throw std::invalid_argument("PolygonBoundary: non-finite vertex");
            }
        }
        const std::size_t n = vertices_.size();
        side_lengths_.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            side_lengths_[j] = norm(vertices_[(j + 1) % n] - vertices_[j]);
            if (side_lengths_[j] == 0.0) {
                throw std::invalid_argument("PolygonBoundary: consecutive vertices coincide");
            }
        }
        if (signed_area() <= 0.0) {
            throw std::invalid_argument("PolygonBoundary: vertices must be counter-clockwise");
        }
        if (!is_simple()) {
            throw std::invalid_argument("PolygonBoundary: polygon is self-intersecting");
        }
    }

    int n_sides() const { return static_cast<int>(vertices_.size()); }
    const std::vector<Point2>& vertices() const { return vertices_; }

    Point2 side_start(int j) const { return vertices_[static_cast<std::size_t>(j)]; }
    Point2 side_end(int j) const {
        return vertices_[(static_cast<std::size_t>(j) + 1) % vertices_.size()];
    }
    double side_length(int j) const { return side_lengths_[static_cast<std::size_t>(j)]; }

    // point on side j at arc length s from its start
    Point2 side_point(int j, double s) const {
        const Point2 p = side_start(j);
        const Point2 d = side_end(j) - p;
        return p + (s / side_length(j)) * d;
    }

    double perimeter() const {
        double sum = 0.0;
        for (double l : side_lengths_) sum += l;
        return sum;
    }

    double signed_area() const {
        double twice = 0.0;
        const std::size_t n = vertices_.size();
        for (std::size_t j = 0; j < n; ++j) {
            twice += cross(vertices_[j], vertices_[(j + 1) % n]);
        }
        return 0.5 * twice;
    }

private:
    static int orientation(Point2 a, Point2 b, Point2 c) {
        const double v = cross(b - a, c - a);
        return (v > 0.0) - (v < 0.0);
    }

    static bool on_segment(Point2 a, Point2 b, Point2 p) {
        return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
               std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
    }

    static bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
        const int o1 = orientation(a, b, c);
        const int o2 = orientation(a, b, d);
        const int o3 = orientation(c, d, a);
        const int o4 = orientation(c, d, b);
        if (o1 != o2 && o3 != o4) return true;
        if (o1 == 0 && on_segment(a, b, c)) return true;
        if (o2 == 0 && on_segment(a, b, d)) return true;
        if (o3 == 0 && on_segment(c, d, a)) return true;
        if (o4 == 0 && on_segment(c, d, b)) return true;
        return false;
    }

    bool is_simple() const {
        const int n = n_sides();
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
                if (adjacent) continue;
                if (segments_intersect(side_start(i), side_end(i), side_start(j), side_end(j))) {
                    return false;
                }
            }
        }
        return true;
    }

    std::vector<Point2> vertices_;
    std::vector<double> side_lengths_;
};

// Uniform triangulation of a square box: n*n cells, each split by the
// lower-left to upper-right diagonal. Cell (i,j) owns triangles
// 2*(j*n+i) = (A,B,C) and 2*(j*n+i)+1 = (A,C,D) with A the lower-left
// corner, all counter-clockwise.
struct StructuredMesh {
    BBox bbox;
    int n = 0;
    double cell_width = 0.0;
    double h = 0.0;  // max triangle diameter = sqrt(2) * cell_width
    std::vector<Point2> vertices;
    std::vector<std::array<int, 3>> triangles;

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }

    int vertex_id(int i, int j) const { return j * (n + 1) + i; }
    Point2 vertex(int v) const { return vertices[static_cast<std::size_t>(v)]; }

    bool on_outer_boundary(int v) const {
        const int i = v % (n + 1);
        const int j = v / (n + 1);
        return i == 0 || i == n || j == 0 || j == n;
    }

    double triangle_area(int t) const {
        const auto& tri = triangles[static_cast<std::size_t>(t)];
        return 0.5 * cross(vertex(tri[1]) - vertex(tri[0]), vertex(tri[2]) - vertex(tri[0]));
    }

    std::array<double, 3> barycentric(int t, Point2 p) const {
        const auto& tri = triangles[static_cast<std::size_t>(t)];
        const Point2 a = vertex(tri[0]), b = vertex(tri[1]), c = vertex(tri[2]);
        const double denom = cross(b - a, c - a);
        return {cross(b - p, c - p) / denom, cross(c - p, a - p) / denom,
                cross(a - p, b - p) / denom};
    }

    // Smallest triangle index whose closed hull contains p (within eps),
    // or -1. Points on shared mesh edges resolve to the lower index.
    int locate(Point2 p, double eps) const {
        const double tol = eps / cell_width;
        const int i0 = static_cast<int>(std::floor((p.x - bbox.x0) / cell_width));
        const int j0 = static_cast<int>(std::floor((p.y - bbox.y0) / cell_width));
        int best = -1;
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                const int ci = i0 + di, cj = j0 + dj;
                if (ci < 0 || ci >= n || cj < 0 || cj >= n) continue;
                for (int k = 0; k < 2; ++k) {
                    const int t = 2 * (cj * n + ci) + k;
                    const auto l = barycentric(t, p);
                    if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol) {
                        if (best < 0 || t < best) best = t;
                    }
                }
            }
        }
        return best;
    }
};

inline StructuredMesh build_structured_mesh(const BBox& bbox, int n) {
    if (n < 1) {
        throw std::invalid_argument("build_structured_mesh: n must be >= 1");
    }
    if (bbox.width() <= 0.0 || bbox.height() <= 0.0 || !bbox.is_square()) {
        throw std::invalid_argument("build_structured_mesh: bbox must be a non-degenerate square");
    }
    StructuredMesh mesh;
    mesh.bbox = bbox;
    mesh.n = n;
    mesh.cell_width = bbox.width() / n;
    mesh.h = std::sqrt(2.0) * mesh.cell_width;
    mesh.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            mesh.vertices.push_back({bbox.x0 + i * mesh.cell_width, bbox.y0 + j * mesh.cell_width});
        }
    }
    mesh.triangles.reserve(static_cast<std::size_t>(2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int a = mesh.vertex_id(i, j);
            const int b = mesh.vertex_id(i + 1, j);
            const int c = mesh.vertex_id(i + 1, j + 1);
            const int d = mesh.vertex_id(i, j + 1);
            mesh.triangles.push_back({a, b, c});
            mesh.triangles.push_back({a, c, d});
        }
    }
    return mesh;
}

inline double default_geometry_eps(const StructuredMesh& mesh) {
    return 1e-12 * mesh.bbox.diameter();
}

// One segment of the induced boundary partition: a maximal piece of side
// `side` of gamma that crosses no mesh line, together with the triangle
// whose closure contains it.
struct BoundaryEdge {
    int side = 0;
    double s0 = 0.0, s1 = 0.0;  // arc-length interval along the side
    Point2 p0, p1;
    int host_triangle = -1;
    double length = 0.0;

    Point2 midpoint() const { return 0.5 * (p0 + p1); }
    Point2 point_at(double xi) const { return p0 + xi * (p1 - p0); }  // xi in [0,1]
};

struct FinePartition {
    std::vector<BoundaryEdge> edges;   // ordered along gamma, side by side
    std::vector<int> side_offsets;     // edge index range of side j: [off[j], off[j+1])
    double h_gamma = 0.0;              // max fine edge length

    int n_edges() const { return static_cast<int>(edges.size()); }
};

namespace detail {

// Arc-length crossings of a side with one family of parallel mesh lines.
// The family is described by a linear functional: coord_p is its value at
// the side's start, coord_dir its derivative along the unit direction, and
// the line levels are first + k*step.
inline void collect_line_crossings(double len, double coord_p, double coord_dir, double first,
                                   double step, int count, double eps,
                                   std::vector<double>& out) {
    if (std::abs(coord_dir) * len <= eps) return;  // parallel or collinear side
    for (int k = 0; k < count; ++k) {
        const double target = first + k * step;
        const double s = (target - coord_p) / coord_dir;
        if (s >= -eps && s <= len + eps) out.push_back(s);
    }
}

}  // namespace detail

// Partition of gamma induced by the mesh: cut every side of gamma at its
// intersections with the vertical, horizontal and diagonal mesh lines,
// dedupe points closer than eps, and keep the side's corners. A side lying
// on a mesh line is cut at the mesh vertices it passes through (the two
// transversal families supply exactly those points).
inline FinePartition trace_boundary(const StructuredMesh& mesh, const PolygonBoundary& gamma,
                                    double eps = -1.0) {
    if (eps < 0.0) eps = default_geometry_eps(mesh);
    if (eps <= 0.0) throw std::invalid_argument("trace_boundary: eps must be positive");

    const double w = mesh.cell_width;
    for (const Point2& v : gamma.vertices()) {
        if (mesh.bbox.boundary_distance(v) < w - eps) {
            throw std::invalid_argument(
                "trace_boundary: gamma must stay at least one cell width away from the box "
                "boundary");
        }
    }

    FinePartition fine;
    fine.side_offsets.assign(1, 0);
    for (int j = 0; j < gamma.n_sides(); ++j) {
        const Point2 p = gamma.side_start(j);
        const Point2 q = gamma.side_end(j);
        const double len = gamma.side_length(j);
        const Point2 u = (1.0 / len) * (q - p);  // unit direction; s in [0, len]

        std::vector<double> cuts;
        cuts.push_back(0.0);
        cuts.push_back(len);
        // vertical lines x = x0 + i*w
        detail::collect_line_crossings(len, p.x, u.x, mesh.bbox.x0, w, mesh.n + 1, eps, cuts);
        // horizontal lines y = y0 + j*w
        detail::collect_line_crossings(len, p.y, u.y, mesh.bbox.y0, w, mesh.n + 1, eps, cuts);
        // diagonal lines y - x = (y0 - x0) + k*w, k = -(n-1) .. n-1
        detail::collect_line_crossings(len, p.y - p.x, u.y - u.x,
                                       (mesh.bbox.y0 - mesh.bbox.x0) - (mesh.n - 1) * w, w,
                                       2 * mesh.n - 1, eps, cuts);

        std::sort(cuts.begin(), cuts.end());
        std::vector<double> s_values;
        s_values.push_back(0.0);
        for (double s : cuts) {
            if (s - s_values.back() > eps && s < len - eps) s_values.push_back(s);
        }
        s_values.push_back(len);

        for (std::size_t k = 0; k + 1 < s_values.size(); ++k) {
            BoundaryEdge e;
            e.side = j;
            e.s0 = s_values[k];
            e.s1 = s_values[k + 1];
            e.p0 = gamma.side_point(j, e.s0);
            e.p1 = gamma.side_point(j, e.s1);
            e.length = e.s1 - e.s0;
            e.host_triangle = mesh.locate(e.midpoint(), eps);
            if (e.host_triangle < 0) {
                throw std::runtime_error("trace_boundary: fine edge midpoint not located in any "
                                         "triangle");
            }
            fine.edges.push_back(e);
        }
        fine.side_offsets.push_back(static_cast<int>(fine.edges.size()));
    }

    fine.h_gamma = 0.0;
    for (const BoundaryEdge& e : fine.edges) fine.h_gamma = std::max(fine.h_gamma, e.length);
    return fine;
}

// Contiguous run of fine edges on a single side of gamma.
struct MacroEdge {
    int side = 0;
    int first_edge = 0;  // index into FinePartition::edges
    int edge_count = 0;
    double length = 0.0;
    bool degenerate = false;    // whole side shorter than kmin * h_ref
    bool exceeds_kmax = false;  // remainder merge pushed it past kmax * h_ref
};

struct MacroPartition {
    std::vector<MacroEdge> macros;
    std::vector<int> fine_to_macro;  // macro index of each fine edge
    double kmin = 3.0, kmax = 6.0;
    double h_ref = 0.0;

    int n_macros() const { return static_cast<int>(macros.size()); }
};

// Greedy aggregation per side: close a macro edge once it reaches
// kmin*h_ref, merge a short trailing remainder into the previous macro
// edge. Macro edges never cross corners of gamma.
inline MacroPartition build_macro_partition(const FinePartition& fine, double h_ref,
                                            double kmin = 3.0, double kmax = 6.0) {
    if (!(h_ref > 0.0)) throw std::invalid_argument("build_macro_partition: h_ref must be > 0");
    if (!(kmin >= 1.0)) throw std::invalid_argument("build_macro_partition: kmin must be >= 1");
    if (!(kmax > kmin)) throw std::invalid_argument("build_macro_partition: kmax must be > kmin");

    MacroPartition mp;
    mp.kmin = kmin;
    mp.kmax = kmax;
    mp.h_ref = h_ref;
    mp.fine_to_macro.assign(fine.edges.size(), -1);

    const double close_at = kmin * h_ref * (1.0 - 1e-12);
    for (std::size_t j = 0; j + 1 < fine.side_offsets.size(); ++j) {
        const int begin = fine.side_offsets[j];
        const int end = fine.side_offsets[j + 1];
        const int first_macro_of_side = mp.n_macros();

        MacroEdge cur;
        cur.side = static_cast<int>(j);
        cur.first_edge = begin;
        for (int e = begin; e < end; ++e) {
            cur.edge_count += 1;
            cur.length += fine.edges[static_cast<std::size_t>(e)].length;
            if (cur.length >= close_at) {
                mp.macros.push_back(cur);
                cur = MacroEdge{};
                cur.side = static_cast<int>(j);
                cur.first_edge = e + 1;
            }
        }
        if (cur.edge_count > 0) {
            if (mp.n_macros() > first_macro_of_side) {
                MacroEdge& last = mp.macros.back();
                last.edge_count += cur.edge_count;
                last.length += cur.length;
            } else {
                cur.degenerate = true;  // the whole side is shorter than kmin*h_ref
                mp.macros.push_back(cur);
            }
        }
    }

    for (int i = 0; i < mp.n_macros(); ++i) {
        MacroEdge& m = mp.macros[static_cast<std::size_t>(i)];
        if (!m.degenerate && m.length > kmax * h_ref * (1.0 + 1e-12)) m.exceeds_kmax = true;
        for (int e = m.first_edge; e < m.first_edge + m.edge_count; ++e) {
            mp.fine_to_macro[static_cast<std::size_t>(e)] = i;
        }
    }
    return mp;
}

}  // namespace fictdom
