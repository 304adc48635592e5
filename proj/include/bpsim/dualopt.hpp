#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bpsim/model.hpp"
#include "bpsim/rational.hpp"

namespace bpsim {

struct DualValue {
    double g = 0.0;
    std::vector<double> subgradient;  // pi-weighted E[A - mu] at the minimizers
    std::vector<int> minimizers;      // per-state minimizing action (lowest index)
};

/// Dual function of the deterministic problem: for each state pick the action
/// minimizing V f + sum_j gamma_j (A_j - mu_j); g is the pi-weighted sum.
DualValue dual_value(const ScenarioSpec& spec, std::span<const double> gamma, double v_param);

struct StepSchedule {
    double c = 0.0;  // alpha_k = c / sqrt(k); c <= 0 means use delta_max
};

struct DualSolution {
    std::vector<double> gamma_star;
    double g_value = 0.0;
    int iterations = 0;
    double residual = 0.0;  // last improvement accepted by the ascent
    std::vector<int> per_state_minimizers;
    bool converged = false;
    double l_hat = 0.0;     // empirical sharpness min (g* - g)/||gamma* - gamma||
};

/// Projected subgradient ascent gamma <- [gamma + alpha_k sg]+ from `init`
/// (zeros when empty), followed by an exact LP refinement of the best
/// iterate. Returns the best iterate found.
DualSolution solve_dual(const ScenarioSpec& spec, double v_param, StepSchedule schedule = {},
                        int max_iters = 4000, double tol = 1e-9,
                        std::span<const double> init = {});

struct SlacknessCertificate {
    std::vector<std::vector<double>> policy;  // per-state action distribution
    double eta = 0.0;
    bool exact = false;       // solved in rational arithmetic
    Rational eta_exact{0};    // valid when exact
};

/// Max-eta feasibility LP over stationary randomized policies. Runs in exact
/// rational arithmetic whenever pi and all tables reconstruct as rationals.
/// Throws InfeasibleError when the optimum is not strictly positive.
SlacknessCertificate check_slackness(const ScenarioSpec& spec);

/// Exact stationary distribution (Gaussian elimination over rationals);
/// nullopt when the transition entries do not reconstruct as rationals.
std::optional<std::vector<Rational>> exact_stationary(const MarkovChain& chain);

}  // namespace bpsim
