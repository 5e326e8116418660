#pragma once

// Direct solution of the saddle system
//
//   [ A  -C^T ] [U]   [F]
//   [ C    S  ] [L] = [G]
//
// by block LDL^T of the symmetrized form [[A, -C^T], [-C, -S]]: a banded
// Cholesky factorization of the positive definite stiffness block followed
// by a diagonally pivoted LDL^T of the Schur complement C A^{-1} C^T + S.
// The saddle matrix is singular exactly when the Schur complement is, so
// rank deficiency of an unstable multiplier space shows up as a vanishing
// Schur pivot.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fictdom/sparse.hpp"
#include "fictdom/spaces.hpp"

namespace fictdom {

// Pivot below kSingularPivotRel * (max initial diagonal) means rank
// deficiency; pivots in the band up to kNearSingularRel are reported but
// not fatal.
inline constexpr double kSingularPivotRel = 1e-12;
inline constexpr double kNearSingularRel = 1e-9;
inline constexpr double kResidualTarget = 1e-11;
inline constexpr int kMaxRefinementSteps = 2;

class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(const std::string& msg, double pivot, double scale, int level_n = -1)
        : std::runtime_error(msg), pivot_(pivot), scale_(scale), level_n_(level_n) {}

    double pivot() const { return pivot_; }
    double scale() const { return scale_; }
    int level_n() const { return level_n_; }  // mesh level attached by studies, -1 otherwise

private:
    double pivot_;
    double scale_;
    int level_n_;
};

struct SaddleSystem {
    SparseMatrix A;  // n_u x n_u
    SparseMatrix C;  // n_l x n_u
    SparseMatrix S;  // n_l x n_l
    std::vector<double> F;
    std::vector<double> G;

    int n_u() const { return A.rows(); }
    int n_l() const { return C.rows(); }

    // r1 = A v - C^T m,  r2 = C v + S m
    void apply(std::span<const double> v, std::span<const double> m, std::span<double> r1,
               std::span<double> r2) const {
        std::vector<double> tmp_u(static_cast<std::size_t>(n_u()), 0.0);
        std::vector<double> tmp_l(static_cast<std::size_t>(n_l()), 0.0);
        A.multiply(v, r1);
        C.multiply_transpose(m, tmp_u);
        for (std::size_t i = 0; i < r1.size(); ++i) r1[i] -= tmp_u[i];
        C.multiply(v, r2);
        S.multiply(m, tmp_l);
        for (std::size_t i = 0; i < r2.size(); ++i) r2[i] += tmp_l[i];
    }

    // (v,m)^T applied to the block operator; the coupling contributions
    // cancel, leaving v^T A v + m^T S m up to roundoff.
    double quadratic_form(std::span<const double> v, std::span<const double> m) const {
        std::vector<double> r1(static_cast<std::size_t>(n_u()), 0.0);
        std::vector<double> r2(static_cast<std::size_t>(n_l()), 0.0);
        apply(v, m, r1, r2);
        double q = 0.0;
        for (std::size_t i = 0; i < r1.size(); ++i) q += v[i] * r1[i];
        for (std::size_t i = 0; i < r2.size(); ++i) q += m[i] * r2[i];
        return q;
    }

    // Symmetric-indefinite form [[A, -C^T], [-C, -S]] with right side (F, -G).
    void apply_symmetrized(std::span<const double> v, std::span<const double> m,
                           std::span<double> r1, std::span<double> r2) const {
        apply(v, m, r1, r2);
        for (std::size_t i = 0; i < r2.size(); ++i) r2[i] = -r2[i];
    }
};

inline SaddleSystem build_saddle_system(SparseMatrix A, SparseMatrix C, SparseMatrix S,
                                        std::vector<double> F, std::vector<double> G) {
    if (A.rows() != A.cols()) throw std::invalid_argument("build_saddle_system: A not square");
    if (S.rows() != S.cols()) throw std::invalid_argument("build_saddle_system: S not square");
    if (C.cols() != A.rows() || C.rows() != S.rows()) {
        throw std::invalid_argument("build_saddle_system: coupling block dimension mismatch");
    }
    if (F.size() != static_cast<std::size_t>(A.rows()) ||
        G.size() != static_cast<std::size_t>(C.rows())) {
        throw std::invalid_argument("build_saddle_system: right-hand side dimension mismatch");
    }
    return SaddleSystem{std::move(A), std::move(C), std::move(S), std::move(F), std::move(G)};
}

// Cholesky factorization of a banded symmetric positive definite matrix.
// Row i stores L(i, i-d) for d = 0..bw.
class BandedCholesky {
public:
    void factor(const SparseMatrix& A) {
        n_ = A.rows();
        bw_ = 0;
        A.for_each([&](int r, int c, double) { bw_ = std::max(bw_, std::abs(r - c)); });
        band_.assign(static_cast<std::size_t>(n_) * (static_cast<std::size_t>(bw_) + 1), 0.0);
        double max_diag = 0.0;
        A.for_each([&](int r, int c, double v) {
            if (c <= r) at(r, r - c) = v;
            if (r == c) max_diag = std::max(max_diag, std::abs(v));
        });
        for (int i = 0; i < n_; ++i) {
            const int j_lo = std::max(0, i - bw_);
            for (int j = j_lo; j <= i; ++j) {
                double sum = at(i, i - j);
                const int k_lo = std::max(j_lo, j - bw_);
                for (int k = k_lo; k < j; ++k) sum -= at(i, i - k) * at(j, j - k);
                if (j < i) {
                    at(i, i - j) = sum / at(j, 0);
                } else {
                    if (!(sum > 0.0) || sum < max_diag * kSingularPivotRel) {
                        throw SingularMatrixError(
                            "stiffness block is not positive definite", sum, max_diag);
                    }
                    at(i, 0) = std::sqrt(sum);
                }
            }
        }
    }

    void solve_in_place(std::span<double> x) const {
        for (int i = 0; i < n_; ++i) {
            double sum = x[static_cast<std::size_t>(i)];
            const int k_lo = std::max(0, i - bw_);
            for (int k = k_lo; k < i; ++k) sum -= at(i, i - k) * x[static_cast<std::size_t>(k)];
            x[static_cast<std::size_t>(i)] = sum / at(i, 0);
        }
        for (int i = n_ - 1; i >= 0; --i) {
            double sum = x[static_cast<std::size_t>(i)];
            const int k_hi = std::min(n_ - 1, i + bw_);
            for (int k = i + 1; k <= k_hi; ++k) sum -= at(k, k - i) * x[static_cast<std::size_t>(k)];
            x[static_cast<std::size_t>(i)] = sum / at(i, 0);
        }
    }

    int size() const { return n_; }
    int bandwidth() const { return bw_; }

private:
    double& at(int i, int d) { return band_[static_cast<std::size_t>(i) * (static_cast<std::size_t>(bw_) + 1) + static_cast<std::size_t>(d)]; }
    double at(int i, int d) const { return band_[static_cast<std::size_t>(i) * (static_cast<std::size_t>(bw_) + 1) + static_cast<std::size_t>(d)]; }

    int n_ = 0;
    int bw_ = 0;
    std::vector<double> band_;
};

// Dense LDL^T with symmetric diagonal pivoting, for the positive
// semidefinite Schur complement. Pivoting by the largest remaining
// diagonal makes rank deficiency show up as trailing near-zero pivots.
class PivotedLdlt {
public:
    // Returns normally for full rank; throws SingularMatrixError otherwise.
    void factor(std::vector<double> dense, int n) {
        m_ = std::move(dense);
        n_ = n;
        perm_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) perm_[static_cast<std::size_t>(i)] = i;

        scale_ = 0.0;
        for (int i = 0; i < n; ++i) scale_ = std::max(scale_, std::abs(at(i, i)));
        min_pivot_ = scale_;

        for (int k = 0; k < n; ++k) {
            int p = k;
            for (int i = k + 1; i < n; ++i) {
                if (std::abs(at(i, i)) > std::abs(at(p, p))) p = i;
            }
            if (p != k) swap_symmetric(k, p);
            const double d = at(k, k);
            min_pivot_ = std::min(min_pivot_, std::abs(d));
            if (std::abs(d) < scale_ * kSingularPivotRel || scale_ == 0.0) {
                throw SingularMatrixError(
                    "saddle system is singular: multiplier space has a kernel (Schur pivot " +
                        std::to_string(std::abs(d)) + " below " +
                        std::to_string(scale_ * kSingularPivotRel) + ")",
                    std::abs(d), scale_);
            }
            col_.assign(static_cast<std::size_t>(n), 0.0);
            for (int i = k + 1; i < n; ++i) col_[static_cast<std::size_t>(i)] = at(i, k);
            for (int i = k + 1; i < n; ++i) {
                const double lik = col_[static_cast<std::size_t>(i)] / d;
                for (int j = k + 1; j <= i; ++j) {
                    const double upd = lik * col_[static_cast<std::size_t>(j)];
                    at(i, j) -= upd;
                    if (j < i) at(j, i) -= upd;  // keep the trailing block symmetric for pivoting
                }
                at(i, k) = lik;
            }
        }
    }

    void solve_in_place(std::span<double> x) const {
        std::vector<double> y(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(perm_[static_cast<std::size_t>(i)])];
        for (int i = 0; i < n_; ++i) {
            double sum = y[static_cast<std::size_t>(i)];
            for (int k = 0; k < i; ++k) sum -= at(i, k) * y[static_cast<std::size_t>(k)];
            y[static_cast<std::size_t>(i)] = sum;
        }
        for (int i = 0; i < n_; ++i) y[static_cast<std::size_t>(i)] /= at(i, i);
        for (int i = n_ - 1; i >= 0; --i) {
            double sum = y[static_cast<std::size_t>(i)];
            for (int k = i + 1; k < n_; ++k) sum -= at(k, i) * y[static_cast<std::size_t>(k)];
            y[static_cast<std::size_t>(i)] = sum;
        }
        for (int i = 0; i < n_; ++i) x[static_cast<std::size_t>(perm_[static_cast<std::size_t>(i)])] = y[static_cast<std::size_t>(i)];
    }

    double min_pivot() const { return min_pivot_; }
    double diagonal_scale() const { return scale_; }
    bool near_singular() const { return scale_ > 0.0 && min_pivot_ < kNearSingularRel * scale_; }

private:
    double& at(int i, int j) { return m_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)]; }
    double at(int i, int j) const { return m_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)]; }

    void swap_symmetric(int a, int b) {
        for (int j = 0; j < n_; ++j) std::swap(at(a, j), at(b, j));
        for (int i = 0; i < n_; ++i) std::swap(at(i, a), at(i, b));
        std::swap(perm_[static_cast<std::size_t>(a)], perm_[static_cast<std::size_t>(b)]);
    }

    int n_ = 0;
    std::vector<double> m_;
    std::vector<double> col_;
    std::vector<int> perm_;
    double scale_ = 0.0;
    double min_pivot_ = 0.0;
};

struct SolveReport {
    int n_u = 0;
    int n_l = 0;
    double schur_min_pivot = 0.0;
    double schur_diag_scale = 0.0;
    bool near_singular = false;
    int refinement_steps = 0;
};

struct Solution {
    std::vector<double> u;       // nodal values on all mesh vertices, zero on the box boundary
    MultiplierVector lambda;     // one value per multiplier unknown
    double residual_norm = 0.0;  // relative block residual
    SolveReport report;
};

namespace detail {

inline double data_scale(const SaddleSystem& sys) {
    double nf = 0.0, ng = 0.0;
    for (double v : sys.F) nf += v * v;
    for (double v : sys.G) ng += v * v;
    return std::sqrt(nf) + std::sqrt(ng) + 1.0;
}

}  // namespace detail

// Block elimination: (C A^{-1} C^T + S) L = G - C A^{-1} F, then
// U = A^{-1}(F + C^T L). Iterative refinement sweeps push the block
// residual down to the contract.
inline Solution solve_saddle(const SaddleSystem& sys, const DofMap& dofs) {
    const int nu = sys.n_u();
    const int nl = sys.n_l();

    BandedCholesky chol;
    if (nu > 0) chol.factor(sys.A);

    // dense Schur complement C A^{-1} C^T + S, column by column
    std::vector<double> schur(static_cast<std::size_t>(nl) * static_cast<std::size_t>(nl), 0.0);
    std::vector<double> unit(static_cast<std::size_t>(nl), 0.0);
    std::vector<double> tu(static_cast<std::size_t>(nu), 0.0);
    std::vector<double> tl(static_cast<std::size_t>(nl), 0.0);
    if (nu > 0) {
        for (int e = 0; e < nl; ++e) {
            unit[static_cast<std::size_t>(e)] = 1.0;
            sys.C.multiply_transpose(unit, tu);
            unit[static_cast<std::size_t>(e)] = 0.0;
            chol.solve_in_place(tu);
            sys.C.multiply(tu, tl);
            for (int i = 0; i < nl; ++i) {
                schur[static_cast<std::size_t>(i) * static_cast<std::size_t>(nl) + static_cast<std::size_t>(e)] = tl[static_cast<std::size_t>(i)];
            }
        }
    }
    sys.S.for_each([&](int r, int c, double v) {
        schur[static_cast<std::size_t>(r) * static_cast<std::size_t>(nl) + static_cast<std::size_t>(c)] += v;
    });
    // exact symmetry up to solver roundoff; enforce it before pivoting
    for (int i = 0; i < nl; ++i) {
        for (int j = 0; j < i; ++j) {
            const double v = 0.5 * (schur[static_cast<std::size_t>(i) * static_cast<std::size_t>(nl) + static_cast<std::size_t>(j)] +
                                    schur[static_cast<std::size_t>(j) * static_cast<std::size_t>(nl) + static_cast<std::size_t>(i)]);
            schur[static_cast<std::size_t>(i) * static_cast<std::size_t>(nl) + static_cast<std::size_t>(j)] = v;
            schur[static_cast<std::size_t>(j) * static_cast<std::size_t>(nl) + static_cast<std::size_t>(i)] = v;
        }
    }

    PivotedLdlt ldlt;
    if (nl > 0) ldlt.factor(std::move(schur), nl);

    // one block-elimination sweep for right-hand side (f1, f2)
    std::vector<double> U(static_cast<std::size_t>(nu), 0.0);
    std::vector<double> L(static_cast<std::size_t>(nl), 0.0);
    const auto eliminate = [&](std::span<const double> f1, std::span<const double> f2,
                               std::span<double> du, std::span<double> dl) {
        std::vector<double> af(f1.begin(), f1.end());
        if (nu > 0) chol.solve_in_place(af);
        std::vector<double> rhs_l(f2.begin(), f2.end());
        if (nu > 0 && nl > 0) {
            sys.C.multiply(af, tl);
            for (int i = 0; i < nl; ++i) rhs_l[static_cast<std::size_t>(i)] -= tl[static_cast<std::size_t>(i)];
        }
        if (nl > 0) {
            // (C A^{-1} C^T + S) dl = f2 - C A^{-1} f1
            ldlt.solve_in_place(rhs_l);
            for (int i = 0; i < nl; ++i) dl[static_cast<std::size_t>(i)] = rhs_l[static_cast<std::size_t>(i)];
        }
        if (nu > 0) {
            std::vector<double> rhs_u(f1.begin(), f1.end());
            if (nl > 0) {
                sys.C.multiply_transpose(dl, tu);
                for (int i = 0; i < nu; ++i) rhs_u[static_cast<std::size_t>(i)] += tu[static_cast<std::size_t>(i)];
            }
            chol.solve_in_place(rhs_u);
            for (int i = 0; i < nu; ++i) du[static_cast<std::size_t>(i)] = rhs_u[static_cast<std::size_t>(i)];
        }
    };

    eliminate(sys.F, sys.G, U, L);

    std::vector<double> r1, r2;
    const double scale = detail::data_scale(sys);
    double resid = 0.0;
    int steps = 0;
    for (;;) {
        r1.assign(static_cast<std::size_t>(nu), 0.0);
        r2.assign(static_cast<std::size_t>(nl), 0.0);
        sys.apply(U, L, r1, r2);
        double nrm2 = 0.0;
        for (int i = 0; i < nu; ++i) {
            r1[static_cast<std::size_t>(i)] = sys.F[static_cast<std::size_t>(i)] - r1[static_cast<std::size_t>(i)];
            nrm2 += r1[static_cast<std::size_t>(i)] * r1[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < nl; ++i) {
            r2[static_cast<std::size_t>(i)] = sys.G[static_cast<std::size_t>(i)] - r2[static_cast<std::size_t>(i)];
            nrm2 += r2[static_cast<std::size_t>(i)] * r2[static_cast<std::size_t>(i)];
        }
        resid = std::sqrt(nrm2) / scale;
        if (resid <= kResidualTarget || steps >= kMaxRefinementSteps) break;
        std::vector<double> du(static_cast<std::size_t>(nu), 0.0);
        std::vector<double> dl(static_cast<std::size_t>(nl), 0.0);
        eliminate(r1, r2, du, dl);
        for (int i = 0; i < nu; ++i) U[static_cast<std::size_t>(i)] += du[static_cast<std::size_t>(i)];
        for (int i = 0; i < nl; ++i) L[static_cast<std::size_t>(i)] += dl[static_cast<std::size_t>(i)];
        ++steps;
    }

    Solution sol;
    sol.u.assign(dofs.vertex_to_dof.size(), 0.0);
    for (std::size_t v = 0; v < dofs.vertex_to_dof.size(); ++v) {
        if (dofs.vertex_to_dof[v] >= 0) sol.u[v] = U[static_cast<std::size_t>(dofs.vertex_to_dof[v])];
    }
    sol.lambda = std::move(L);
    sol.residual_norm = resid;
    sol.report.n_u = nu;
    sol.report.n_l = nl;
    sol.report.schur_min_pivot = nl > 0 ? ldlt.min_pivot() : 0.0;
    sol.report.schur_diag_scale = nl > 0 ? ldlt.diagonal_scale() : 0.0;
    sol.report.near_singular = nl > 0 && ldlt.near_singular();
    sol.report.refinement_steps = steps;
    return sol;
}

}  // namespace fictdom
