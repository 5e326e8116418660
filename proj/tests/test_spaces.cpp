#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fictdom/geometry.hpp"
#include "fictdom/spaces.hpp"

using namespace fictdom;

namespace {

PolygonBoundary unit_square() {
    return PolygonBoundary({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}});
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

TEST_CASE("dof map counts", "[spaces]") {
    SECTION("no interior vertices on a single cell") {
        const StructuredMesh mesh = build_structured_mesh({0.0, 0.0, 1.0, 1.0}, 1);
        const DofMap dofs = build_dof_map(mesh, FinePartition{});
        CHECK(dofs.n_u == 0);
        CHECK(dofs.n_l == 0);
    }
    SECTION("interior count is (n-1)^2 and n_l counts fine edges") {
        const StructuredMesh mesh = build_structured_mesh({-0.5, -0.5, 1.5, 1.5}, 8);
        const FinePartition fine = trace_boundary(mesh, unit_square());
        const DofMap dofs = build_dof_map(mesh, fine);
        CHECK(dofs.n_u == 49);
        CHECK(dofs.n_l == 16);
        // boundary vertices carry no index, interior indices are contiguous
        int next = 0;
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            if (mesh.on_outer_boundary(v)) {
                CHECK(dofs.vertex_to_dof[static_cast<std::size_t>(v)] == -1);
            } else {
                CHECK(dofs.vertex_to_dof[static_cast<std::size_t>(v)] == next++);
            }
        }
    }
}

TEST_CASE("P1 traces on boundary edges", "[spaces]") {
    const StructuredMesh mesh = build_structured_mesh({-0.5, -0.5, 1.5, 1.5}, 8);
    const FinePartition fine = trace_boundary(mesh, unit_square());

    SECTION("an edge lying on a full triangle side has traces (1-t, t, 0)") {
        // aligned configuration: every fine edge is a complete mesh edge
        const BoundaryEdge& e = fine.edges[0];
        const P1EdgeTrace trace = p1_trace_on_edge(mesh, e);
        int nonzero = 0;
        for (int k = 0; k < 3; ++k) {
            const double v0 = trace.at_start[static_cast<std::size_t>(k)];
            const double v1 = trace.at_end[static_cast<std::size_t>(k)];
            if (std::abs(v0) > 1e-13 || std::abs(v1) > 1e-13) {
                ++nonzero;
                CHECK(((v0 == Catch::Approx(1.0).margin(1e-13) &&
                        v1 == Catch::Approx(0.0).margin(1e-13)) ||
                       (v0 == Catch::Approx(0.0).margin(1e-13) &&
                        v1 == Catch::Approx(1.0).margin(1e-13))));
            }
        }
        CHECK(nonzero == 2);
    }

    SECTION("traces sum to one along every edge") {
        std::mt19937 rng(777);
        std::uniform_real_distribution<double> t_dist(0.0, 1.0);
        for (const BoundaryEdge& e : fine.edges) {
            const P1EdgeTrace trace = p1_trace_on_edge(mesh, e);
            for (int q = 0; q < 10; ++q) {
                const double s = e.s0 + t_dist(rng) * e.length;
                const double sum =
                    trace.value(0, s) + trace.value(1, s) + trace.value(2, s);
                CHECK(std::abs(sum - 1.0) <= 1e-13);
            }
        }
    }

    SECTION("endpoint trace values are the barycentric coordinates") {
        // offset configuration: edges lie strictly inside triangles
        const StructuredMesh mesh2 = build_structured_mesh({-0.3, -0.3, 1.3, 1.3}, 8);
        const FinePartition fine2 = trace_boundary(mesh2, unit_square());
        for (const BoundaryEdge& e : fine2.edges) {
            const P1EdgeTrace trace = p1_trace_on_edge(mesh2, e);
            const auto l0 = mesh2.barycentric(e.host_triangle, e.p0);
            const auto l1 = mesh2.barycentric(e.host_triangle, e.p1);
            for (int k = 0; k < 3; ++k) {
                CHECK(trace.at_start[static_cast<std::size_t>(k)] ==
                      Catch::Approx(l0[static_cast<std::size_t>(k)]).margin(1e-13));
                CHECK(trace.at_end[static_cast<std::size_t>(k)] ==
                      Catch::Approx(l1[static_cast<std::size_t>(k)]).margin(1e-13));
            }
        }
    }

    SECTION("an edge leaving its claimed host triangle is rejected") {
        BoundaryEdge bad = fine.edges[0];
        bad.host_triangle = mesh.n_triangles() - 1;  // far corner of the box
        CHECK_THROWS_AS(p1_trace_on_edge(mesh, bad), std::invalid_argument);
    }
}

TEST_CASE("fluctuation operator", "[spaces]") {
    SECTION("examples with two fine edges") {
        const FinePartition equal = synthetic_partition({0.2, 0.2});
        const MacroPartition mp = build_macro_partition(equal, 0.2, 1.5, 3.0);
        REQUIRE(mp.n_macros() == 1);

        const MultiplierVector constant = apply_fluctuation(mp, equal, {3.5, 3.5});
        CHECK(std::abs(constant[0]) <= 1e-14);
        CHECK(std::abs(constant[1]) <= 1e-14);

        const MultiplierVector ab = apply_fluctuation(mp, equal, {1.0, 0.0});
        CHECK(ab[0] == Catch::Approx(0.5).margin(1e-15));
        CHECK(ab[1] == Catch::Approx(-0.5).margin(1e-15));

        const FinePartition weighted = synthetic_partition({0.1, 0.3});
        const MacroPartition mpw = build_macro_partition(weighted, 0.3, 1.0, 3.0);
        REQUIRE(mpw.n_macros() == 1);
        const MultiplierVector w = apply_fluctuation(mpw, weighted, {1.0, 0.0});
        CHECK(w[0] == Catch::Approx(0.75).margin(1e-15));   // 1 - 0.1/0.4
        CHECK(w[1] == Catch::Approx(-0.25).margin(1e-15));  // 0 - 0.1/0.4
    }

    SECTION("idempotence, weighted orthogonality, locality") {
        std::mt19937 rng(31415);
        std::uniform_real_distribution<double> len_dist(0.05, 0.3);
        std::uniform_real_distribution<double> val_dist(-2.0, 2.0);
        for (int it = 0; it < 25; ++it) {
            std::vector<double> lengths;
            for (int e = 0; e < 12; ++e) lengths.push_back(len_dist(rng));
            const FinePartition fine = synthetic_partition(lengths);
            const MacroPartition mp = build_macro_partition(fine, fine.h_gamma, 2.0, 5.0);

            MultiplierVector mu(lengths.size());
            for (double& v : mu) v = val_dist(rng);

            const MultiplierVector once = apply_fluctuation(mp, fine, mu);
            const MultiplierVector twice = apply_fluctuation(mp, fine, once);
            for (std::size_t e = 0; e < mu.size(); ++e) {
                CHECK(std::abs(twice[e] - once[e]) <= 1e-13);
            }

            for (const MacroEdge& m : mp.macros) {
                double mass = 0.0;
                for (int e = m.first_edge; e < m.first_edge + m.edge_count; ++e) {
                    mass += fine.edges[static_cast<std::size_t>(e)].length *
                            once[static_cast<std::size_t>(e)];
                }
                CHECK(std::abs(mass) <= 1e-13);
            }

            // changing mu on one macro edge leaves the rest untouched
            MultiplierVector mu2 = mu;
            const MacroEdge& target = mp.macros.front();
            for (int e = target.first_edge; e < target.first_edge + target.edge_count; ++e) {
                mu2[static_cast<std::size_t>(e)] += 1.0;
            }
            const MultiplierVector shifted = apply_fluctuation(mp, fine, mu2);
            for (std::size_t e = static_cast<std::size_t>(target.first_edge + target.edge_count);
                 e < mu.size(); ++e) {
                CHECK(shifted[e] == once[e]);
            }
        }
    }

    SECTION("size mismatch is rejected") {
        const FinePartition fine = synthetic_partition({0.1, 0.1});
        const MacroPartition mp = build_macro_partition(fine, 0.1, 1.5, 3.0);
        CHECK_THROWS_AS(apply_fluctuation(mp, fine, MultiplierVector{1.0}),
                        std::invalid_argument);
    }
}
