#include "bpsim/dualopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bpsim/errors.hpp"
#include "bpsim/rng.hpp"
#include "bpsim/simplex.hpp"

namespace bpsim {

DualValue dual_value(const ScenarioSpec& spec, std::span<const double> gamma, double v_param) {
    const int m = spec.chain.state_count();
    const int r = spec.queue_count;
    DualValue out;
    out.subgradient.assign(r, 0.0);
    out.minimizers.assign(m, 0);
    for (int s = 0; s < m; ++s) {
        const auto& rows = spec.actions[s];
        double best = std::numeric_limits<double>::infinity();
        int best_k = 0;
        for (int k = 0; k < static_cast<int>(rows.size()); ++k) {
            double v = v_param * rows[k].cost;
            for (int j = 0; j < r; ++j)
                v += gamma[j] * (rows[k].arrivals[j] - rows[k].services[j]);
            if (v < best) {
                best = v;
                best_k = k;
            }
        }
        out.minimizers[s] = best_k;
        out.g += spec.pi[s] * best;
        const auto& row = rows[best_k];
        for (int j = 0; j < r; ++j)
            out.subgradient[j] += spec.pi[s] * (row.arrivals[j] - row.services[j]);
    }
    return out;
}

std::optional<std::vector<Rational>> exact_stationary(const MarkovChain& chain) {
    const int m = chain.state_count();
    // rows of (P' - I), last row replaced by the normalization sum = 1
    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m + 1, Rational(0)));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const auto r = reconstruct_rational(chain.transition[j][i]);
            if (!r) return std::nullopt;
            a[i][j] += *r;
            if (i == j) a[i][j] -= 1;
        }
    for (int j = 0; j < m; ++j) a[m - 1][j] = 1;
    a[m - 1][m] = 1;

    // exact Gaussian elimination with partial (first nonzero) pivoting
    for (int col = 0; col < m; ++col) {
        int piv = -1;
        for (int row = col; row < m; ++row)
            if (a[row][col] != 0) {
                piv = row;
                break;
            }
        if (piv < 0) return std::nullopt;
        std::swap(a[col], a[piv]);
        for (int row = 0; row < m; ++row) {
            if (row == col || a[row][col] == 0) continue;
            const Rational f = a[row][col] / a[col][col];
            for (int j = col; j <= m; ++j) a[row][j] -= f * a[col][j];
        }
    }
    std::vector<Rational> pi(m);
    for (int i = 0; i < m; ++i) pi[i] = a[i][m] / a[i][i];
    return pi;
}

namespace {

// LP behind the deterministic problem: minimize the pi-weighted V-scaled cost
// over per-state action distributions subject to nonpositive drift. Its ub
// duals are gamma*, its optimum is g(gamma*). `conv` maps table doubles into
// the LP scalar (identity for double, exact reconstruction for Rational).
template <typename T, typename Conv>
LpProblem<T> build_primal_lp(const ScenarioSpec& spec, const std::vector<T>& pi, T v_param,
                             Conv conv) {
    const int m = spec.chain.state_count();
    const int r = spec.queue_count;
    int n = 0;
    for (int s = 0; s < m; ++s) n += spec.action_count(s);

    LpProblem<T> lp;
    lp.c.assign(n, T(0));
    lp.a_ub.assign(r, std::vector<T>(n, T(0)));
    lp.b_ub.assign(r, T(0));
    lp.a_eq.assign(m, std::vector<T>(n, T(0)));
    lp.b_eq.assign(m, T(1));
    int col = 0;
    for (int s = 0; s < m; ++s) {
        for (int k = 0; k < spec.action_count(s); ++k, ++col) {
            const auto& row = spec.actions[s][k];
            lp.c[col] = pi[s] * v_param * conv(row.cost);
            for (int j = 0; j < r; ++j)
                lp.a_ub[j][col] = pi[s] * (conv(row.arrivals[j]) - conv(row.services[j]));
            lp.a_eq[s][col] = T(1);
        }
    }
    return lp;
}

// Max-eta slackness LP: variables (theta..., eta).
template <typename T, typename Conv>
LpProblem<T> build_slackness_lp(const ScenarioSpec& spec, const std::vector<T>& pi, Conv conv) {
    LpProblem<T> lp = build_primal_lp(spec, pi, T(0), conv);
    for (auto& c : lp.c) c = T(0);
    lp.c.push_back(T(-1));  // maximize eta
    for (auto& row : lp.a_ub) row.push_back(T(1));  // drift_j + eta <= 0
    for (auto& row : lp.a_eq) row.push_back(T(0));
    return lp;
}

double conv_identity(double x) { return x; }
Rational conv_exact(double x) { return *reconstruct_rational(x); }

bool exact_tables(const ScenarioSpec& spec) {
    for (const auto& state_rows : spec.actions)
        for (const auto& row : state_rows) {
            if (!reconstruct_rational(row.cost)) return false;
            for (double a : row.arrivals)
                if (!reconstruct_rational(a)) return false;
            for (double u : row.services)
                if (!reconstruct_rational(u)) return false;
        }
    return true;
}

}  // namespace

DualSolution solve_dual(const ScenarioSpec& spec, double v_param, StepSchedule schedule,
                        int max_iters, double tol, std::span<const double> init) {
    if (!spec.validated) throw ValidationError("solve_dual requires a validated spec");
    const int r = spec.queue_count;
    const double c = schedule.c > 0 ? schedule.c : spec.delta_max;

    std::vector<double> gamma(r, 0.0);
    if (!init.empty()) {
        for (int j = 0; j < r; ++j) gamma[j] = std::max(0.0, init[j]);
    }

    DualSolution sol;
    sol.gamma_star = gamma;
    sol.g_value = -std::numeric_limits<double>::infinity();

    int since_improvement = 0;
    bool plateaued = false;
    int k = 1;
    for (; k <= max_iters; ++k) {
        const DualValue dv = dual_value(spec, gamma, v_param);
        if (dv.g > sol.g_value) {
            sol.residual = dv.g - (std::isfinite(sol.g_value) ? sol.g_value : dv.g);
            sol.g_value = dv.g;
            sol.gamma_star = gamma;
            since_improvement = 0;
        } else if (++since_improvement >= 500) {
            plateaued = true;
            break;
        }
        const double alpha = c / std::sqrt(static_cast<double>(k));
        for (int j = 0; j < r; ++j) gamma[j] = std::max(0.0, gamma[j] + alpha * dv.subgradient[j]);
    }
    sol.iterations = std::min(k, max_iters);

    // Exact refinement: the dual optimum is the drift-row multiplier vector of
    // the deterministic problem's LP. The subgradient phase localizes; the LP
    // pins the vertex so restarts agree to solver precision.
    {
        LpProblem<double> lp = build_primal_lp<double>(spec, spec.pi, v_param, conv_identity);
        LpResult<double> res = solve_lp(lp);
        if (res.status == LpStatus::Optimal) {
            std::vector<double> candidate(r);
            for (int j = 0; j < r; ++j) candidate[j] = std::max(0.0, res.dual_ub[j]);
            const DualValue dv = dual_value(spec, candidate, v_param);
            if (dv.g >= sol.g_value - 1e-9 * std::max(1.0, std::abs(sol.g_value))) {
                if (dv.g > sol.g_value) sol.residual = dv.g - sol.g_value;
                sol.gamma_star = candidate;
                sol.g_value = dv.g;
                sol.converged = true;
            }
        }
    }
    if (!sol.converged) sol.converged = plateaued;

    const DualValue at_star = dual_value(spec, sol.gamma_star, v_param);
    sol.per_state_minimizers = at_star.minimizers;

    // empirical sharpness diagnostic for the L-condition
    Rng rng(0xB5D0A1u);
    double span = std::max(v_param, 1.0);
    for (double g : sol.gamma_star) span = std::max(span, g);
    double l_hat = std::numeric_limits<double>::infinity();
    std::vector<double> probe(r);
    for (int p = 0; p < 256; ++p) {
        double dist2 = 0.0;
        for (int j = 0; j < r; ++j) {
            probe[j] = uniform_range(rng, 0.0, 2.0 * span);
            dist2 += (probe[j] - sol.gamma_star[j]) * (probe[j] - sol.gamma_star[j]);
        }
        const double dist = std::sqrt(dist2);
        if (dist < 1e-9) continue;
        const double g = dual_value(spec, probe, v_param).g;
        l_hat = std::min(l_hat, (sol.g_value - g) / dist);
    }
    sol.l_hat = l_hat;
    (void)tol;
    return sol;
}

SlacknessCertificate check_slackness(const ScenarioSpec& spec) {
    if (!spec.validated) throw ValidationError("check_slackness requires a validated spec");
    const int m = spec.chain.state_count();

    SlacknessCertificate cert;
    const auto pi_exact = exact_stationary(spec.chain);
    const bool exact = pi_exact.has_value() && exact_tables(spec);

    auto unpack_policy = [&](const auto& x) {
        std::vector<std::vector<double>> policy(m);
        int col = 0;
        for (int s = 0; s < m; ++s) {
            policy[s].resize(spec.action_count(s));
            for (int k = 0; k < spec.action_count(s); ++k, ++col)
                policy[s][k] = static_cast<double>(x[col]);
        }
        return policy;
    };

    if (exact) {
        LpProblem<Rational> lp = build_slackness_lp<Rational>(spec, *pi_exact, conv_exact);
        LpResult<Rational> res = solve_lp(lp);
        if (res.status != LpStatus::Optimal)
            throw InfeasibleError("slackness LP did not solve to optimality");
        cert.exact = true;
        cert.eta_exact = -res.objective;
        cert.eta = to_double(cert.eta_exact);
        cert.policy = unpack_policy(res.x);
        if (cert.eta_exact <= 0)
            throw InfeasibleError("scenario infeasible for stability: max eta = " +
                                  std::to_string(cert.eta));
        return cert;
    }

    LpProblem<double> lp = build_slackness_lp<double>(spec, spec.pi, conv_identity);
    LpResult<double> res = solve_lp(lp);
    if (res.status != LpStatus::Optimal)
        throw InfeasibleError("slackness LP did not solve to optimality");
    cert.eta = -res.objective;
    cert.policy = unpack_policy(res.x);
    if (cert.eta <= 1e-9)
        throw InfeasibleError("scenario infeasible for stability: max eta = " +
                              std::to_string(cert.eta));
    return cert;
}

}  // namespace bpsim
