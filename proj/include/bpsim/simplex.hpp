#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bpsim {

// Small dense two-phase simplex, templated on the scalar so the slackness LP
// can run in exact rational arithmetic. Problems here have at most a few
// dozen rows, so a full tableau is plenty.
//
//   min c'x   s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0
//
// Duals follow the Lagrangian L = c'x + dual_ub'(A_ub x - b_ub)
//                                      + dual_eq'(A_eq x - b_eq)
// with dual_ub >= 0; at the optimum c'x* = -dual_ub'b_ub - dual_eq'b_eq.

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <typename T>
struct LpProblem {
    std::vector<std::vector<T>> a_ub, a_eq;
    std::vector<T> b_ub, b_eq, c;
};

template <typename T>
struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<T> x;
    T objective{};
    std::vector<T> dual_ub, dual_eq;
};

template <typename T>
class SimplexSolver {
public:
    explicit SimplexSolver(const LpProblem<T>& p) : prob_(p) {}

    LpResult<T> solve() {
        build();
        LpResult<T> res;
        if (!phase(true)) {
            res.status = LpStatus::Infeasible;
            return res;
        }
        if (!phase(false)) {
            res.status = LpStatus::Unbounded;
            return res;
        }
        extract(res);
        return res;
    }

private:
    const LpProblem<T>& prob_;
    std::size_t n_orig_ = 0, m_ub_ = 0, m_eq_ = 0, m_ = 0;
    std::size_t slack0_ = 0, art0_ = 0, n_total_ = 0;
    std::vector<std::vector<T>> tab_;  // m_ rows x (n_total_ + 1), last col = rhs
    std::vector<int> basis_;
    std::vector<T> flip_;  // +-1 per row (rows negated so rhs >= 0)

    static bool is_neg(const T& v) { return v < T(0); }

    static T entering_tol() {
        if constexpr (std::is_floating_point_v<T>)
            return T(1e-9);
        else
            return T(0);
    }
    static T pivot_tol() {
        if constexpr (std::is_floating_point_v<T>)
            return T(1e-11);
        else
            return T(0);
    }

    void build() {
        n_orig_ = prob_.c.size();
        m_ub_ = prob_.a_ub.size();
        m_eq_ = prob_.a_eq.size();
        m_ = m_ub_ + m_eq_;
        slack0_ = n_orig_;
        art0_ = n_orig_ + m_ub_;
        n_total_ = art0_ + m_;
        tab_.assign(m_, std::vector<T>(n_total_ + 1, T(0)));
        basis_.assign(m_, 0);
        flip_.assign(m_, T(1));

        for (std::size_t i = 0; i < m_; ++i) {
            const bool ub = i < m_ub_;
            const auto& arow = ub ? prob_.a_ub[i] : prob_.a_eq[i - m_ub_];
            const T& b = ub ? prob_.b_ub[i] : prob_.b_eq[i - m_ub_];
            for (std::size_t j = 0; j < n_orig_; ++j) tab_[i][j] = arow[j];
            if (ub) tab_[i][slack0_ + i] = T(1);
            tab_[i][n_total_] = b;
            if (is_neg(b)) {
                flip_[i] = T(-1);
                for (auto& v : tab_[i]) v = -v;
            }
            tab_[i][art0_ + i] = T(1);
            basis_[i] = static_cast<int>(art0_ + i);
        }
    }

    // cost of column j under the given phase
    T col_cost(bool phase1, std::size_t j) const {
        if (phase1) return j >= art0_ ? T(1) : T(0);
        if (j >= art0_) return T(0);
        return j < n_orig_ ? prob_.c[j] : T(0);
    }

    void pivot(std::size_t row, std::size_t col) {
        auto& pr = tab_[row];
        const T piv = pr[col];
        for (auto& v : pr) v /= piv;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row) continue;
            const T factor = tab_[i][col];
            if (factor == T(0)) continue;
            auto& ri = tab_[i];
            for (std::size_t j = 0; j <= n_total_; ++j) ri[j] -= factor * pr[j];
        }
        basis_[row] = static_cast<int>(col);
    }

    // returns false on unbounded (phase 2) — phase 1 is always bounded below
    bool phase(bool phase1) {
        const std::size_t bland_after = 20 * (m_ + n_total_);
        std::vector<T> cb(m_);
        for (std::size_t iter = 0;; ++iter) {
            for (std::size_t i = 0; i < m_; ++i)
                cb[i] = col_cost(phase1, static_cast<std::size_t>(basis_[i]));
            // entering column: most negative reduced cost (Bland after a while)
            std::ptrdiff_t enter = -1;
            T best_r(0);
            for (std::size_t j = 0; j < n_total_; ++j) {
                if (!phase1 && j >= art0_) break;  // artificials barred in phase 2
                // reduced cost r_j = c_j - c_B' (B^-1 A_j); the tableau column
                // already holds B^-1 A_j
                T r = col_cost(phase1, j);
                for (std::size_t i = 0; i < m_; ++i)
                    if (cb[i] != T(0) && tab_[i][j] != T(0)) r -= cb[i] * tab_[i][j];
                if (r < -entering_tol()) {
                    if (iter >= bland_after) {
                        enter = static_cast<std::ptrdiff_t>(j);
                        break;
                    }
                    if (enter < 0 || r < best_r) {
                        enter = static_cast<std::ptrdiff_t>(j);
                        best_r = r;
                    }
                }
            }
            if (enter < 0) break;  // optimal for this phase

            // ratio test
            std::ptrdiff_t leave = -1;
            T best_ratio(0);
            for (std::size_t i = 0; i < m_; ++i) {
                const T& a = tab_[i][static_cast<std::size_t>(enter)];
                if (!(a > pivot_tol())) continue;
                const T ratio = tab_[i][n_total_] / a;
                if (leave < 0 || ratio < best_ratio ||
                    (ratio == best_ratio && basis_[i] < basis_[leave])) {
                    leave = static_cast<std::ptrdiff_t>(i);
                    best_ratio = ratio;
                }
            }
            if (leave < 0) return phase1 ? true : false;  // unbounded
            pivot(static_cast<std::size_t>(leave), static_cast<std::size_t>(enter));
        }
        if (phase1) {
            // infeasible if artificials still carry value
            T art_sum(0);
            for (std::size_t i = 0; i < m_; ++i)
                if (basis_[i] >= static_cast<int>(art0_)) art_sum += tab_[i][n_total_];
            if (art_sum > feas_tol()) return false;
            // drive basic artificials out where possible
            for (std::size_t i = 0; i < m_; ++i) {
                if (basis_[i] < static_cast<int>(art0_)) continue;
                for (std::size_t j = 0; j < art0_; ++j) {
                    const T mag = tab_[i][j] < T(0) ? T(-tab_[i][j]) : tab_[i][j];
                    if (mag > pivot_tol()) {
                        pivot(i, j);
                        break;
                    }
                }
            }
        }
        return true;
    }

    T feas_tol() const {
        if constexpr (std::is_floating_point_v<T>)
            return T(1e-9);
        else
            return T(0);
    }

    void extract(LpResult<T>& res) {
        res.status = LpStatus::Optimal;
        res.x.assign(n_orig_, T(0));
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= 0 && basis_[i] < static_cast<int>(n_orig_))
                res.x[static_cast<std::size_t>(basis_[i])] = tab_[i][n_total_];
        res.objective = T(0);
        for (std::size_t j = 0; j < n_orig_; ++j) res.objective += prob_.c[j] * res.x[j];

        // y = c_B' B^-1 from the artificial columns, then unflip
        std::vector<T> y(m_, T(0));
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t k = 0; k < m_; ++k) {
                const T cb = col_cost(false, static_cast<std::size_t>(basis_[k]));
                if (cb != T(0)) y[i] += cb * tab_[k][art0_ + i];
            }
        res.dual_ub.assign(m_ub_, T(0));
        res.dual_eq.assign(m_eq_, T(0));
        for (std::size_t i = 0; i < m_; ++i) {
            const T lam = -flip_[i] * y[i];
            if (i < m_ub_)
                res.dual_ub[i] = lam;
            else
                res.dual_eq[i - m_ub_] = lam;
        }
        // numerical guard: complementary ub duals must be nonnegative
        for (auto& l : res.dual_ub)
            if (is_neg(l) && l > -feas_tol() - feas_tol()) l = T(0);
    }
};

template <typename T>
LpResult<T> solve_lp(const LpProblem<T>& p) {
    SimplexSolver<T> solver(p);
    return solver.solve();
}

}  // namespace bpsim
