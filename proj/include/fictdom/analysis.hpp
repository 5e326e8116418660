#pragma once

// Error measurement against manufactured solutions, the mesh-dependent norm
// diagnostic, and the refinement study harness.

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fictdom/assembly.hpp"
#include "fictdom/geometry.hpp"
#include "fictdom/problem.hpp"
#include "fictdom/quadrature.hpp"
#include "fictdom/solver.hpp"
#include "fictdom/spaces.hpp"

namespace fictdom {

struct AnalysisConfig {
    double beta = 1.0;           // weight of the multiplier term in the diagnostic norm
    bool dual_surrogate = true;  // use the computable surrogate for the dual-norm term

    void validate() const {
        if (!(beta > 0.0)) throw std::invalid_argument("AnalysisConfig: beta must be > 0");
    }
};

// | u_exact - u_h |_{1,Omega} over the whole box; u_h is the P1 field given
// by nodal values on all mesh vertices. Degree-6 quadrature is exact for
// polynomial gradients up to degree 3.
inline double h1_seminorm_error(const StructuredMesh& mesh, const std::vector<double>& u_h,
                                const std::function<Point2(Point2)>& grad_exact,
                                int quadrature_degree = 6) {
    if (u_h.size() != static_cast<std::size_t>(mesh.n_vertices())) {
        throw std::invalid_argument("h1_seminorm_error: nodal vector size mismatch");
    }
    const TriangleRule rule = triangle_rule(quadrature_degree);
    double total = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        const Point2 a = mesh.vertex(tri[0]), b = mesh.vertex(tri[1]), c = mesh.vertex(tri[2]);
        const double twice_area = cross(b - a, c - a);
        const Point2 grad_h =
            (u_h[static_cast<std::size_t>(tri[0])] * Point2{(b.y - c.y), (c.x - b.x)}) +
            ((u_h[static_cast<std::size_t>(tri[1])] * Point2{(c.y - a.y), (a.x - c.x)}) +
             (u_h[static_cast<std::size_t>(tri[2])] * Point2{(a.y - b.y), (b.x - a.x)}));
        const Point2 gh = (1.0 / twice_area) * grad_h;
        double local = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto& l = rule.points[q];
            const Point2 p = l[0] * a + (l[1] * b + l[2] * c);
            const Point2 d = grad_exact(p) - gh;
            local += rule.weights[q] * dot(d, d);
        }
        total += local * 0.5 * twice_area;
    }
    return std::sqrt(total);
}

// || lambda_exact - lambda_h ||_{0,gamma} with lambda_h constant per fine
// edge; 3-point Gauss per edge.
inline double l2_boundary_error(const FinePartition& fine, const MultiplierVector& lambda_h,
                                const std::function<double(Point2)>& lambda_exact) {
    if (lambda_h.size() != fine.edges.size()) {
        throw std::invalid_argument("l2_boundary_error: multiplier size mismatch");
    }
    const SegmentRule rule = gauss_segment(3);
    double total = 0.0;
    for (int e = 0; e < fine.n_edges(); ++e) {
        const BoundaryEdge& edge = fine.edges[static_cast<std::size_t>(e)];
        double local = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double d = lambda_exact(edge.point_at(rule.points[q])) -
                             lambda_h[static_cast<std::size_t>(e)];
            local += rule.weights[q] * d * d;
        }
        total += local * edge.length;
    }
    return std::sqrt(total);
}

// Computable stand-in for the dual boundary norm: (sum_e |e| ||mu||^2_{0,e})^{1/2}.
inline double multiplier_l2_surrogate(const FinePartition& fine, const MultiplierVector& mu) {
    double total = 0.0;
    for (int e = 0; e < fine.n_edges(); ++e) {
        const double l = fine.edges[static_cast<std::size_t>(e)].length;
        total += l * l * mu[static_cast<std::size_t>(e)] * mu[static_cast<std::size_t>(e)];
    }
    return std::sqrt(total);
}

// (sum over macro edges of c_s |e~| ||mu - P~mu||^2_{0,e~})^{1/2}
inline double fluctuation_norm(const FinePartition& fine, const MacroPartition& macros,
                               const MultiplierVector& mu, double c_s) {
    const MultiplierVector fluct = apply_fluctuation(macros, fine, mu);
    double total = 0.0;
    for (const MacroEdge& m : macros.macros) {
        double block = 0.0;
        for (int e = m.first_edge; e < m.first_edge + m.edge_count; ++e) {
            block += fine.edges[static_cast<std::size_t>(e)].length *
                     fluct[static_cast<std::size_t>(e)] * fluct[static_cast<std::size_t>(e)];
        }
        total += c_s * m.length * block;
    }
    return std::sqrt(total);
}

// Diagnostic version of the mesh-dependent norm: the dual-norm term is
// replaced by the length-weighted L2 surrogate, scaled by beta.
inline double discrete_norm(const StructuredMesh& mesh, const FinePartition& fine,
                            const MacroPartition& macros, const std::vector<double>& v_h,
                            const MultiplierVector& mu_h, double c_s,
                            const AnalysisConfig& config = {}) {
    config.validate();
    if (!config.dual_surrogate) {
        throw std::invalid_argument(
            "discrete_norm: only the surrogate dual norm is available");
    }
    const auto zero_grad = [](Point2) { return Point2{0.0, 0.0}; };
    const double h1 = h1_seminorm_error(mesh, v_h, zero_grad);
    const double sur = multiplier_l2_surrogate(fine, mu_h);
    const double fl = fluctuation_norm(fine, macros, mu_h, c_s);
    return std::sqrt(h1 * h1 + config.beta * config.beta * sur * sur + fl * fl);
}

// Least-squares slope of log(err) against log(h).
inline double fit_rate(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 2) throw std::invalid_argument("fit_rate: need at least 2 pairs");
    double sx = 0.0, sy = 0.0;
    for (const auto& [h, err] : pairs) {
        if (!(h > 0.0) || !(err > 0.0)) {
            throw std::invalid_argument("fit_rate: values must be positive");
        }
        sx += std::log(h);
        sy += std::log(err);
    }
    const double mx = sx / static_cast<double>(pairs.size());
    const double my = sy / static_cast<double>(pairs.size());
    double num = 0.0, den = 0.0;
    for (const auto& [h, err] : pairs) {
        const double dx = std::log(h) - mx;
        num += dx * (std::log(err) - my);
        den += dx * dx;
    }
    if (den == 0.0) throw std::invalid_argument("fit_rate: all h values coincide");
    return num / den;
}

// One fully assembled and solved configuration.
struct DiscreteRun {
    ManufacturedProblem problem;
    StructuredMesh mesh;
    FinePartition fine;
    MacroPartition macros;
    DofMap dofs;
    SaddleSystem system;
    Solution solution;
    MultiplierVector lambda_fine;  // multiplier expanded to fine edges
};

inline DiscreteRun run_single(const ProblemSpec& spec) {
    spec.validate();
    ManufacturedProblem problem = make_problem(spec.problem_id, spec.a);
    StructuredMesh mesh = build_structured_mesh(problem.box, spec.n);
    FinePartition fine = trace_boundary(mesh, problem.boundary);
    // boundary-local reference length: the coarsest fine edge
    MacroPartition macros = build_macro_partition(fine, fine.h_gamma, spec.kmin, spec.kmax);
    DofMap dofs = build_dof_map(mesh, fine);

    SparseMatrix A = assemble_stiffness(mesh, dofs);
    SparseMatrix C = assemble_coupling(mesh, fine, dofs);
    std::vector<double> F = assemble_load(mesh, dofs, problem.source);
    std::vector<double> G = assemble_boundary_moments(fine, problem.dirichlet);

    SaddleSystem system;
    if (spec.multiplier_space == MultiplierSpace::fine) {
        SparseMatrix S = assemble_stabilization(fine, macros, spec.c_s);
        system = build_saddle_system(std::move(A), std::move(C), std::move(S), std::move(F),
                                     std::move(G));
    } else {
        // coarse pair: one constant per macro edge, no fluctuation term
        SparseMatrix Cm = aggregate_rows(C, macros);
        std::vector<double> Gm = aggregate_entries(G, macros);
        SparseMatrix Sm(macros.n_macros(), macros.n_macros());
        Sm.finalize();
        system = build_saddle_system(std::move(A), std::move(Cm), std::move(Sm), std::move(F),
                                     std::move(Gm));
    }

    Solution solution = solve_saddle(system, dofs);
    MultiplierVector lambda_fine = spec.multiplier_space == MultiplierSpace::fine
                                       ? solution.lambda
                                       : expand_to_fine(macros, solution.lambda);

    return DiscreteRun{std::move(problem), std::move(mesh),     std::move(fine),
                       std::move(macros),  std::move(dofs),     std::move(system),
                       std::move(solution), std::move(lambda_fine)};
}

// Largest relative defect of the identity B[(V,M),(V,M)] = V^T A V + M^T S M
// over randomly drawn coefficient vectors.
inline double energy_identity_residual(const SaddleSystem& sys, int n_vectors,
                                       unsigned long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double worst = 0.0;
    std::vector<double> v(static_cast<std::size_t>(sys.n_u()));
    std::vector<double> m(static_cast<std::size_t>(sys.n_l()));
    std::vector<double> av(v.size());
    std::vector<double> sm(m.size());
    for (int k = 0; k < n_vectors; ++k) {
        for (double& x : v) x = dist(rng);
        for (double& x : m) x = dist(rng);
        const double q = sys.quadratic_form(v, m);
        sys.A.multiply(v, av);
        sys.S.multiply(m, sm);
        double vav = 0.0, msm = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) vav += v[i] * av[i];
        for (std::size_t i = 0; i < m.size(); ++i) msm += m[i] * sm[i];
        const double rel = std::abs(q - (vav + msm)) / (1.0 + std::abs(vav));
        worst = std::max(worst, rel);
    }
    return worst;
}

struct ConvergenceRow {
    int n = 0;
    double h = 0.0;
    double h_gamma = 0.0;
    double err_h1 = 0.0;
    double err_l2_gamma = 0.0;
    double fluct_norm = 0.0;
    double energy_residual = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;  // ordered by decreasing h
    double slope_h1 = 0.0;
    double slope_l2_gamma = 0.0;
    ProblemSpec config;

    // consecutive-level rates, one per refinement step
    std::vector<double> pairwise_rates_h1() const { return pairwise(&ConvergenceRow::err_h1); }
    std::vector<double> pairwise_rates_l2_gamma() const {
        return pairwise(&ConvergenceRow::err_l2_gamma);
    }

private:
    std::vector<double> pairwise(double ConvergenceRow::*field) const {
        std::vector<double> rates;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double num = std::log(rows[i].*field / rows[i - 1].*field);
            const double den = std::log(rows[i].h / rows[i - 1].h);
            rates.push_back(num / den);
        }
        return rates;
    }
};

inline ConvergenceRow measure_run(const DiscreteRun& run, const ProblemSpec& spec) {
    ConvergenceRow row;
    row.n = spec.n;
    row.h = run.mesh.h;
    row.h_gamma = run.fine.h_gamma;
    row.err_h1 = h1_seminorm_error(run.mesh, run.solution.u, run.problem.exact_grad_u);
    row.err_l2_gamma = l2_boundary_error(run.fine, run.lambda_fine, run.problem.exact_lambda);
    row.fluct_norm = fluctuation_norm(run.fine, run.macros, run.lambda_fine, spec.c_s);
    row.energy_residual =
        energy_identity_residual(run.system, 10, 9001UL + static_cast<unsigned long>(spec.n));
    return row;
}

inline ConvergenceReport run_convergence_study(const ProblemSpec& spec,
                                               const std::vector<int>& n_list) {
    if (n_list.size() < 3) {
        throw std::invalid_argument("run_convergence_study: need at least 3 levels");
    }
    for (std::size_t i = 1; i < n_list.size(); ++i) {
        if (n_list[i] <= n_list[i - 1]) {
            throw std::invalid_argument("run_convergence_study: n_list must be strictly "
                                        "increasing");
        }
    }

    ConvergenceReport report;
    report.config = spec;
    for (int n : n_list) {
        ProblemSpec level = spec;
        level.n = n;
        try {
            const DiscreteRun run = run_single(level);
            report.rows.push_back(measure_run(run, level));
        } catch (const SingularMatrixError& e) {
            throw SingularMatrixError(std::string(e.what()) + " (at level n=" +
                                          std::to_string(n) + ")",
                                      e.pivot(), e.scale(), n);
        }
    }

    std::vector<std::pair<double, double>> h1_pairs, l2_pairs;
    for (const ConvergenceRow& row : report.rows) {
        h1_pairs.emplace_back(row.h, row.err_h1);
        l2_pairs.emplace_back(row.h, row.err_l2_gamma);
    }
    report.slope_h1 = fit_rate(h1_pairs);
    report.slope_l2_gamma = fit_rate(l2_pairs);
    return report;
}

}  // namespace fictdom
