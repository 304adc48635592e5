#pragma once

#include <span>
#include <string>
#include <vector>

#include "bpsim/controller.hpp"
#include "bpsim/engine.hpp"
#include "bpsim/model.hpp"

namespace bpsim {

// Closed objective catalog: the per-slot auxiliary minimization must be exact,
// so only shapes with closed-form coordinate minimizers are supported.
enum class AuxObjectiveKind { Linear, QuadraticDiagonal, LogSum };

struct AuxObjective {
    AuxObjectiveKind kind = AuxObjectiveKind::Linear;
    std::vector<double> c;       // linear coefficients / quadratic scales
    std::vector<double> center;  // quadratic centers
    std::vector<double> a;       // log weights

    double eval(std::span<const double> z) const;
};

/// Attribute tables and objective for the function-of-time-averages variant.
struct AuxSpec {
    int attribute_dim = 0;  // K
    // attributes[state][action] is the length-K vector y(s, x)
    std::vector<std::vector<std::vector<double>>> attributes;
    AuxObjective objective;
    double delta_max = 0.0;  // shared bound; every |y_k| <= delta_max
};

void validate_aux(const AuxSpec& aux, const ScenarioSpec& spec);

/// Exact minimizer of V Cost(z) + sum_k h_k z_k over [0, delta_max]^K.
std::vector<double> choose_aux(const AuxSpec& aux, std::span<const double> h, double v_param);

/// Action rule for the variant: maximize sum_k h_k y_k(x) + sum_j q_j (mu - A)
/// (the V-scaled penalty lives entirely in choose_aux). Lowest-index ties.
Decision aux_bp_decide(const ScenarioSpec& spec, const AuxSpec& aux, int state,
                       std::span<const double> backlog, std::span<const double> h, double v_param);

struct AuxReport {
    std::vector<double> h_avg;  // time-average virtual backlog
    std::vector<double> z_bar;  // time-average auxiliary vector
    std::vector<double> y_bar;  // time-average attribute vector
    double objective_at_z_bar = 0.0;
    double avg_cost = 0.0;      // table cost of the chosen actions
    double avg_backlog = 0.0;
    double h_max = 0.0;
    // per-slot traces, retained when the config asks for traces
    std::vector<std::vector<double>> h_trace, z_trace, y_trace;
};

/// Scalar-queue simulation of the variant: per slot choose z, pick the
/// action, update the virtual queues by their max[.,0] recursion and the
/// real queues by the backlog recursion.
AuxReport aux_run(const RunConfig& config, const AuxSpec& aux);

}  // namespace bpsim
