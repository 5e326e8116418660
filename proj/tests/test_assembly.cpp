#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "fictdom/assembly.hpp"
#include "fictdom/problem.hpp"
#include "fictdom/quadrature.hpp"

using namespace fictdom;

namespace {

PolygonBoundary unit_square() {
    return PolygonBoundary({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}});
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

FinePartition synthetic_partition(const std::vector<double>& lengths) {
    FinePartition fine;
    double s = 0.0;
    for (double l : lengths) {
        BoundaryEdge e;
        e.side = 0;
        e.s0 = s;
        e.s1 = s + l;
        e.length = l;
        s += l;
        fine.edges.push_back(e);
    }
    fine.side_offsets = {0, static_cast<int>(lengths.size())};
    fine.h_gamma = *std::max_element(lengths.begin(), lengths.end());
    return fine;
}

}  // namespace

TEST_CASE("quadrature rules integrate monomials exactly", "[assembly]") {
    SECTION("segment rules") {
        for (int npts : {1, 2, 3, 10}) {
            const SegmentRule rule = gauss_segment(npts);
            for (int p = 0; p <= rule.exactness_degree; ++p) {
                double sum = 0.0;
                for (std::size_t q = 0; q < rule.points.size(); ++q) {
                    sum += rule.weights[q] * std::pow(rule.points[q], p);
                }
                CHECK(std::abs(sum - 1.0 / (p + 1)) <= 1e-14);
            }
        }
        CHECK_THROWS_AS(gauss_segment(7), std::invalid_argument);
    }
    SECTION("triangle rules") {
        for (int degree : {1, 2, 4, 6}) {
            const TriangleRule rule = triangle_rule(degree);
            for (int p = 0; p + 0 <= rule.exactness_degree; ++p) {
                for (int q = 0; p + q <= rule.exactness_degree; ++q) {
                    // reference triangle (0,0)-(1,0)-(0,1), area 1/2
                    double sum = 0.0;
                    for (std::size_t i = 0; i < rule.points.size(); ++i) {
                        const double x = rule.points[i][1];
                        const double y = rule.points[i][2];
                        sum += rule.weights[i] * std::pow(x, p) * std::pow(y, q);
                    }
                    const double exact =
                        factorial(p) * factorial(q) / factorial(p + q + 2);
                    CHECK(std::abs(0.5 * sum - exact) <= 1e-14);
                }
            }
        }
        CHECK_THROWS_AS(triangle_rule(9), std::invalid_argument);
    }
}

TEST_CASE("local stiffness of the unit right triangle", "[assembly]") {
    const auto k = p1_local_stiffness({0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0});
    const double expected[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK(k[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
                  expected[i][j]);
        }
    }
    CHECK_THROWS_AS(p1_local_stiffness({0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}),
                    std::invalid_argument);
}

TEST_CASE("local stiffness rows sum to zero for random triangles", "[assembly]") {
    std::mt19937 rng(2718);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int it = 0; it < 50; ++it) {
        Point2 a{dist(rng), dist(rng)}, b{dist(rng), dist(rng)}, c{dist(rng), dist(rng)};
        if (cross(b - a, c - a) < 0.05) continue;  // skip slivers and flipped triangles
        const auto k = p1_local_stiffness(a, b, c);
        for (int i = 0; i < 3; ++i) {
            const double row = k[static_cast<std::size_t>(i)][0] +
                               k[static_cast<std::size_t>(i)][1] +
                               k[static_cast<std::size_t>(i)][2];
            CHECK(std::abs(row) <= 1e-13);
        }
    }
}

TEST_CASE("global stiffness", "[assembly]") {
    SECTION("no interior dofs on a single cell gives an empty matrix") {
        const StructuredMesh mesh = build_structured_mesh({0.0, 0.0, 1.0, 1.0}, 1);
        const DofMap dofs = build_dof_map(mesh, FinePartition{});
        const SparseMatrix A = assemble_stiffness(mesh, dofs);
        CHECK(A.rows() == 0);
        CHECK(A.nnz() == 0);
    }
    SECTION("interior rows carry the five-point stencil") {
        // on this split the two diagonal-neighbor contributions cancel
        const StructuredMesh mesh = build_structured_mesh({-0.5, -0.5, 1.5, 1.5}, 8);
        const DofMap dofs = build_dof_map(mesh, FinePartition{});
        const SparseMatrix A = assemble_stiffness(mesh, dofs);
        const int v = mesh.vertex_id(4, 4);
        const int d = dofs.vertex_to_dof[static_cast<std::size_t>(v)];
        CHECK(A.coeff(d, d) == Catch::Approx(4.0).margin(1e-13));
        for (int other : {mesh.vertex_id(3, 4), mesh.vertex_id(5, 4), mesh.vertex_id(4, 3),
                          mesh.vertex_id(4, 5)}) {
            CHECK(A.coeff(d, dofs.vertex_to_dof[static_cast<std::size_t>(other)]) ==
                  Catch::Approx(-1.0).margin(1e-13));
        }
        for (int other : {mesh.vertex_id(5, 5), mesh.vertex_id(3, 3)}) {
            CHECK(std::abs(A.coeff(d, dofs.vertex_to_dof[static_cast<std::size_t>(other)])) <=
                  1e-13);
        }
        // symmetry
        A.for_each([&](int r, int c, double val) {
            CHECK(A.coeff(c, r) == Catch::Approx(val).margin(1e-13));
        });
    }
}

TEST_CASE("coupling matrix", "[assembly]") {
    const StructuredMesh mesh = build_structured_mesh({-0.5, -0.5, 1.5, 1.5}, 8);
    const PolygonBoundary gamma = unit_square();
    const FinePartition fine = trace_boundary(mesh, gamma);
    const DofMap dofs = build_dof_map(mesh, fine);
    const SparseMatrix C = assemble_coupling(mesh, fine, dofs);

    SECTION("entries equal l*(a+b)/2 and match 10-point Gauss") {
        const SegmentRule ref = gauss_segment(10);
        for (int e = 0; e < fine.n_edges(); ++e) {
            const BoundaryEdge& edge = fine.edges[static_cast<std::size_t>(e)];
            const P1EdgeTrace trace = p1_trace_on_edge(mesh, edge);
            for (int k = 0; k < 3; ++k) {
                const int dof = dofs.vertex_to_dof[static_cast<std::size_t>(
                    trace.vertices[static_cast<std::size_t>(k)])];
                if (dof < 0) continue;
                const double closed =
                    edge.length * 0.5 *
                    (trace.at_start[static_cast<std::size_t>(k)] +
                     trace.at_end[static_cast<std::size_t>(k)]);
                double gauss = 0.0;
                for (std::size_t q = 0; q < ref.points.size(); ++q) {
                    gauss += ref.weights[q] *
                             trace.value(k, edge.s0 + ref.points[q] * edge.length);
                }
                gauss *= edge.length;
                CHECK(std::abs(C.coeff(e, dof) - closed) <= 1e-14);
                CHECK(std::abs(C.coeff(e, dof) - gauss) <= 1e-14);
            }
        }
    }

    SECTION("total mass is the perimeter when gamma clears the box boundary") {
        double total = 0.0;
        C.for_each([&](int, int, double v) { total += v; });
        CHECK(total == Catch::Approx(4.0).epsilon(1e-13));

        const StructuredMesh mesh2 = build_structured_mesh({-0.3, -0.3, 1.3, 1.3}, 8);
        const FinePartition fine2 = trace_boundary(mesh2, gamma);
        const DofMap dofs2 = build_dof_map(mesh2, fine2);
        const SparseMatrix C2 = assemble_coupling(mesh2, fine2, dofs2);
        double total2 = 0.0;
        C2.for_each([&](int, int, double v) { total2 += v; });
        CHECK(total2 == Catch::Approx(4.0).epsilon(1e-13));
    }

    SECTION("vertices away from gamma give zero columns") {
        for (int v : {mesh.vertex_id(4, 4), mesh.vertex_id(1, 1), mesh.vertex_id(7, 7)}) {
            const int dof = dofs.vertex_to_dof[static_cast<std::size_t>(v)];
            REQUIRE(dof >= 0);
            for (int e = 0; e < fine.n_edges(); ++e) {
                CHECK(C.coeff(e, dof) == 0.0);
            }
        }
    }

    SECTION("rows touch at most three dofs") {
        std::vector<int> count(static_cast<std::size_t>(fine.n_edges()), 0);
        C.for_each([&](int r, int, double) { count[static_cast<std::size_t>(r)] += 1; });
        for (int c : count) CHECK(c <= 3);
    }
}

TEST_CASE("stabilization matrix", "[assembly]") {
    SECTION("closed form for two equal fine edges") {
        const double l = 0.17;
        const double c_s = 0.35;
        const FinePartition fine = synthetic_partition({l, l});
        const MacroPartition mp = build_macro_partition(fine, l, 1.5, 3.0);
        REQUIRE(mp.n_macros() == 1);
        const SparseMatrix S = assemble_stabilization(fine, mp, c_s);
        const double expected = c_s * l * l;
        CHECK(std::abs(S.coeff(0, 0) - expected) <= 1e-14);
        CHECK(std::abs(S.coeff(1, 1) - expected) <= 1e-14);
        CHECK(std::abs(S.coeff(0, 1) + expected) <= 1e-14);
        CHECK(std::abs(S.coeff(1, 0) + expected) <= 1e-14);
    }

    SECTION("general closed form c_s*|e~|*(diag(l) - l l^T/|e~|)") {
        const std::vector<double> lengths = {0.11, 0.23, 0.08, 0.19};
        const FinePartition fine = synthetic_partition(lengths);
        const MacroPartition mp = build_macro_partition(fine, 0.25, 2.0, 5.0);
        REQUIRE(mp.n_macros() == 1);
        const double c_s = 1.7;
        const SparseMatrix S = assemble_stabilization(fine, mp, c_s);
        double total = 0.0;
        for (double l : lengths) total += l;
        for (std::size_t i = 0; i < lengths.size(); ++i) {
            for (std::size_t j = 0; j < lengths.size(); ++j) {
                double expected = -c_s * lengths[i] * lengths[j];
                if (i == j) expected += c_s * total * lengths[i];
                CHECK(std::abs(S.coeff(static_cast<int>(i), static_cast<int>(j)) - expected) <=
                      1e-14);
            }
        }
    }

    SECTION("single-edge macro gives a zero block") {
        const FinePartition fine = synthetic_partition({0.2});
        const MacroPartition mp = build_macro_partition(fine, 0.25, 3.0, 6.0);
        const SparseMatrix S = assemble_stabilization(fine, mp, 0.5);
        CHECK(std::abs(S.coeff(0, 0)) <= 1e-16);
    }

    SECTION("constants lie in the kernel and the form is PSD") {
        std::mt19937 rng(1123);
        std::uniform_real_distribution<double> len_dist(0.02, 0.3);
        std::uniform_real_distribution<double> val_dist(-1.0, 1.0);
        for (int it = 0; it < 20; ++it) {
            std::vector<double> lengths;
            for (int e = 0; e < 14; ++e) lengths.push_back(len_dist(rng));
            const FinePartition fine = synthetic_partition(lengths);
            const MacroPartition mp = build_macro_partition(fine, fine.h_gamma, 2.0, 5.0);
            const SparseMatrix S = assemble_stabilization(fine, mp, 0.1);

            std::vector<double> ones(lengths.size(), 1.0);
            std::vector<double> out(lengths.size(), 0.0);
            S.multiply(ones, out);
            for (double v : out) CHECK(std::abs(v) <= 1e-14);

            std::vector<double> x(lengths.size());
            double nrm2 = 0.0;
            for (double& v : x) {
                v = val_dist(rng);
                nrm2 += v * v;
            }
            S.multiply(x, out);
            double quad = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) quad += x[i] * out[i];
            CHECK(quad >= -1e-14 * nrm2);
        }
    }

    SECTION("quadratic form agrees with the fluctuation route") {
        std::mt19937 rng(5151);
        std::uniform_real_distribution<double> len_dist(0.02, 0.3);
        std::uniform_real_distribution<double> val_dist(-1.0, 1.0);
        const double c_s = 0.7;
        for (int it = 0; it < 20; ++it) {
            std::vector<double> lengths;
            for (int e = 0; e < 11; ++e) lengths.push_back(len_dist(rng));
            const FinePartition fine = synthetic_partition(lengths);
            const MacroPartition mp = build_macro_partition(fine, fine.h_gamma, 2.0, 5.0);
            const SparseMatrix S = assemble_stabilization(fine, mp, c_s);

            MultiplierVector x(lengths.size()), y(lengths.size());
            for (double& v : x) v = val_dist(rng);
            for (double& v : y) v = val_dist(rng);

            std::vector<double> sy(lengths.size(), 0.0);
            S.multiply(y, sy);
            double via_matrix = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) via_matrix += x[i] * sy[i];

            const MultiplierVector fx = apply_fluctuation(mp, fine, x);
            const MultiplierVector fy = apply_fluctuation(mp, fine, y);
            double via_fluct = 0.0;
            for (const MacroEdge& m : mp.macros) {
                double block = 0.0;
                for (int e = m.first_edge; e < m.first_edge + m.edge_count; ++e) {
                    block += fine.edges[static_cast<std::size_t>(e)].length *
                             fx[static_cast<std::size_t>(e)] * fy[static_cast<std::size_t>(e)];
                }
                via_fluct += c_s * m.length * block;
            }
            CHECK(std::abs(via_matrix - via_fluct) <=
                  1e-13 * std::max(1.0, std::abs(via_fluct)));
        }
    }

    SECTION("c_s = 0 yields an empty matrix") {
        const FinePartition fine = synthetic_partition({0.1, 0.1, 0.1});
        const MacroPartition mp = build_macro_partition(fine, 0.1, 2.0, 5.0);
        const SparseMatrix S = assemble_stabilization(fine, mp, 0.0);
        CHECK(S.nnz() == 0);
        CHECK_THROWS_AS(assemble_stabilization(fine, mp, -1.0), std::invalid_argument);
    }
}

TEST_CASE("load vector", "[assembly]") {
    const StructuredMesh mesh = build_structured_mesh({-0.5, -0.5, 1.5, 1.5}, 8);
    const DofMap dofs = build_dof_map(mesh, FinePartition{});

    SECTION("zero source gives the zero vector") {
        const auto F = assemble_load(mesh, dofs, [](Point2) { return 0.0; });
        for (double v : F) CHECK(v == 0.0);
    }

    SECTION("unit source at a full-support interior vertex gives w^2") {
        const auto F = assemble_load(mesh, dofs, [](Point2) { return 1.0; });
        const double w = mesh.cell_width;
        const int d = dofs.vertex_to_dof[static_cast<std::size_t>(mesh.vertex_id(4, 4))];
        CHECK(F[static_cast<std::size_t>(d)] == Catch::Approx(w * w).epsilon(1e-13));
    }
}

TEST_CASE("boundary moments", "[assembly]") {
    const StructuredMesh mesh = build_structured_mesh({-0.5, -0.5, 1.5, 1.5}, 8);
    const FinePartition fine = trace_boundary(mesh, unit_square());

    SECTION("constants integrate to edge lengths") {
        const auto G1 = assemble_boundary_moments(fine, [](Point2) { return 1.0; });
        for (int e = 0; e < fine.n_edges(); ++e) {
            CHECK(G1[static_cast<std::size_t>(e)] ==
                  Catch::Approx(fine.edges[static_cast<std::size_t>(e)].length).epsilon(1e-14));
        }
        const auto G0 = assemble_boundary_moments(fine, [](Point2) { return 0.0; });
        for (double v : G0) CHECK(v == 0.0);
    }

    SECTION("manufactured boundary datum on the first edge of side y=0") {
        const ManufacturedProblem prob = make_problem("paper", 0.5);
        const auto G = assemble_boundary_moments(fine, prob.dirichlet);
        // integral of (x+1/2)(3/2-x)*3/4 over [0, 1/4] = 41/256
        CHECK(G[0] == Catch::Approx(41.0 / 256.0).epsilon(1e-14));

        // independent check with a composite 10-point rule
        const SegmentRule ref = gauss_segment(10);
        double oracle = 0.0;
        const BoundaryEdge& edge = fine.edges[0];
        for (int piece = 0; piece < 4; ++piece) {
            for (std::size_t q = 0; q < ref.points.size(); ++q) {
                const double xi = (piece + ref.points[q]) / 4.0;
                oracle += 0.25 * ref.weights[q] * prob.dirichlet(edge.point_at(xi));
            }
        }
        oracle *= edge.length;
        CHECK(G[0] == Catch::Approx(oracle).epsilon(1e-14));
    }
}

TEST_CASE("manufactured problem registry", "[assembly]") {
    const ManufacturedProblem prob = make_problem("paper", 0.5);
    CHECK(prob.source({0.5, 0.5}) == Catch::Approx(4.0).epsilon(1e-15));
    CHECK(prob.exact_u({-0.5, 0.25}) == 0.0);          // vanishes on the box boundary
    CHECK(prob.exact_lambda({0.3, 0.0}) == 0.0);
    // g is the trace of the exact solution
    CHECK(prob.dirichlet({0.25, 0.0}) == prob.exact_u({0.25, 0.0}));
    CHECK_THROWS_AS(make_problem("unknown", 0.5), std::invalid_argument);
    CHECK_THROWS_AS(make_problem("paper", 0.0), std::invalid_argument);
}

TEST_CASE("macro-row aggregation", "[assembly]") {
    const std::vector<double> lengths = {0.1, 0.1, 0.1, 0.1};
    const FinePartition fine = synthetic_partition(lengths);
    const MacroPartition mp = build_macro_partition(fine, 0.1, 2.0, 5.0);
    REQUIRE(mp.n_macros() == 2);

    SparseMatrix C(4, 3);
    C.add(0, 0, 1.0);
    C.add(1, 0, 2.0);
    C.add(1, 2, 5.0);
    C.add(2, 1, 3.0);
    C.add(3, 1, 4.0);
    C.finalize();
    const SparseMatrix Cm = aggregate_rows(C, mp);
    CHECK(Cm.rows() == 2);
    CHECK(Cm.coeff(0, 0) == 3.0);
    CHECK(Cm.coeff(0, 2) == 5.0);
    CHECK(Cm.coeff(1, 1) == 7.0);

    const std::vector<double> gm = aggregate_entries({1.0, 2.0, 3.0, 4.0}, mp);
    CHECK(gm == std::vector<double>{3.0, 7.0});

    const MultiplierVector fine_vals = expand_to_fine(mp, {0.5, -1.5});
    CHECK(fine_vals == MultiplierVector{0.5, 0.5, -1.5, -1.5});
}
