#include "bpsim/controller.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "bpsim/errors.hpp"
#include "bpsim/rational.hpp"

namespace bpsim {

namespace {

bool exact_path_ok(const ScenarioSpec& spec, std::span<const double> backlog, double v_param) {
    if (!spec.integer_tables || !is_integer_value(v_param)) return false;
    if (std::abs(v_param) > 1e9) return false;
    for (double q : backlog)
        if (!is_integer_value(q) || std::abs(q) > 1e12) return false;
    return true;
}

template <typename Scalar, typename ObjFn>
Decision argmax_over(int count, ObjFn&& objective) {
    Decision d;
    Scalar best = std::numeric_limits<Scalar>::lowest();
    Scalar second = std::numeric_limits<Scalar>::lowest();
    for (int k = 0; k < count; ++k) {
        const Scalar v = objective(k);
        if (v > best) {
            second = best;
            best = v;
            d.action_index = k;
        } else if (v > second) {
            second = v;
        }
    }
    d.objective_value = static_cast<double>(best);
    d.runner_up_gap = count > 1 ? static_cast<double>(best - second) : 0.0;
    return d;
}

}  // namespace

Decision bp_decide(const ScenarioSpec& spec, int state, std::span<const double> backlog,
                   double v_param) {
    if (!spec.validated) throw ValidationError("bp_decide requires a validated spec");
    const auto& rows = spec.actions[state];
    if (rows.empty()) throw std::logic_error("empty action list");
    const int r = spec.queue_count;

    if (exact_path_ok(spec, backlog, v_param)) {
        const auto v = static_cast<std::int64_t>(v_param);
        return argmax_over<std::int64_t>(static_cast<int>(rows.size()), [&](int k) {
            const auto& row = rows[k];
            std::int64_t obj = -v * static_cast<std::int64_t>(row.cost);
            for (int j = 0; j < r; ++j)
                obj += static_cast<std::int64_t>(backlog[j]) *
                       static_cast<std::int64_t>(row.services[j] - row.arrivals[j]);
            return obj;
        });
    }
    return argmax_over<double>(static_cast<int>(rows.size()), [&](int k) {
        const auto& row = rows[k];
        double obj = -v_param * row.cost;
        for (int j = 0; j < r; ++j) obj += backlog[j] * (row.services[j] - row.arrivals[j]);
        return obj;
    });
}

namespace {

// Per-factor argmax over the cached deltas. Combining each factor's lowest
// maximizing digit yields the lexicographically (= numerically, row-major)
// smallest global index of the separable objective's argmax set, matching
// the flat rule's tie-break.
template <typename Scalar, typename CostCast, typename QTerm>
Decision decide_factored(const ScenarioSpec& spec, int state, int nf, CostCast cost_cast,
                         QTerm q_term, Scalar base_obj) {
    const auto& ft = spec.factor_tables;
    Decision d;
    std::int64_t index = 0;
    Scalar total = base_obj;
    Scalar min_local_gap = std::numeric_limits<Scalar>::max();
    bool any_gap = false;
    for (int f = 0; f < nf; ++f) {
        const auto& deltas = ft.delta[state][f];
        Scalar best = 0;  // digit 0 has zero delta
        Scalar second = std::numeric_limits<Scalar>::lowest();
        int best_digit = 0;
        for (int dgt = 1; dgt < static_cast<int>(deltas.size()); ++dgt) {
            Scalar v = cost_cast(deltas[dgt].cost);
            for (const auto& [queue, net] : deltas[dgt].net) v += q_term(queue, net);
            if (v > best) {
                second = best;
                best = v;
                best_digit = dgt;
            } else if (v > second) {
                second = v;
            }
        }
        if (deltas.size() > 1) {
            min_local_gap = std::min(min_local_gap, static_cast<Scalar>(best - second));
            any_gap = true;
        }
        total += best;
        index += best_digit * ft.radix_weight[f];
    }
    d.action_index = static_cast<int>(index);
    d.objective_value = static_cast<double>(total);
    d.runner_up_gap = any_gap ? static_cast<double>(min_local_gap) : 0.0;
    return d;
}

}  // namespace

Decision bp_decide_decomposed(const ScenarioSpec& spec, int state, std::span<const double> backlog,
                              double v_param) {
    if (!spec.validated) throw ValidationError("bp_decide_decomposed requires a validated spec");
    if (spec.factors.empty() || !spec.separable)
        throw ValidationError("not separable: no verified per-node factorization");
    const int nf = static_cast<int>(spec.factors.size());
    const int r = spec.queue_count;
    const auto& ft = spec.factor_tables;

    if (exact_path_ok(spec, backlog, v_param)) {
        const auto v = static_cast<std::int64_t>(v_param);
        std::int64_t base = -v * static_cast<std::int64_t>(ft.base_cost[state]);
        for (int j = 0; j < r; ++j)
            base += static_cast<std::int64_t>(backlog[j]) *
                    static_cast<std::int64_t>(ft.base_net[state][j]);
        return decide_factored<std::int64_t>(
            spec, state, nf,
            [v](double c) { return -v * static_cast<std::int64_t>(c); },
            [&backlog](int queue, double net) {
                return static_cast<std::int64_t>(backlog[queue]) * static_cast<std::int64_t>(net);
            },
            base);
    }

    double base = -v_param * ft.base_cost[state];
    for (int j = 0; j < r; ++j) base += backlog[j] * ft.base_net[state][j];
    return decide_factored<double>(
        spec, state, nf, [v_param](double c) { return -v_param * c; },
        [&backlog](int queue, double net) { return backlog[queue] * net; }, base);
}

}  // namespace bpsim
