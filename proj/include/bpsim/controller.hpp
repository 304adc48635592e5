#pragma once

#include <span>

#include "bpsim/model.hpp"

namespace bpsim {

struct Decision {
    int action_index = 0;
    double objective_value = 0.0;  // the realized backpressure maximand
    double runner_up_gap = 0.0;    // best minus second best (0 if single action)
};

/// Backpressure rule: maximize -V f + sum_j q_j (mu_j - A_j) over the state's
/// action table by exact enumeration; ties break to the lowest action index.
/// Arithmetic is exact (int64) whenever the tables, V and the backlog are all
/// integer-valued; otherwise double.
Decision bp_decide(const ScenarioSpec& spec, int state, std::span<const double> backlog,
                   double v_param);

/// Same decision via the declared per-node factorization, in time linear in
/// the sum (not product) of per-factor choice counts. Requires a validated
/// separable spec; throws otherwise.
Decision bp_decide_decomposed(const ScenarioSpec& spec, int state, std::span<const double> backlog,
                              double v_param);

}  // namespace bpsim
