#include "bpsim/auxctrl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bpsim/errors.hpp"
#include "bpsim/rng.hpp"

namespace bpsim {

double AuxObjective::eval(std::span<const double> z) const {
    double v = 0.0;
    switch (kind) {
        case AuxObjectiveKind::Linear:
            for (std::size_t k = 0; k < z.size(); ++k) v += c[k] * z[k];
            break;
        case AuxObjectiveKind::QuadraticDiagonal:
            for (std::size_t k = 0; k < z.size(); ++k)
                v += 0.5 * c[k] * (z[k] - center[k]) * (z[k] - center[k]);
            break;
        case AuxObjectiveKind::LogSum:
            for (std::size_t k = 0; k < z.size(); ++k) v += -a[k] * std::log1p(z[k]);
            break;
    }
    return v;
}

void validate_aux(const AuxSpec& aux, const ScenarioSpec& spec) {
    const int m = spec.chain.state_count();
    if (aux.attribute_dim <= 0) throw ValidationError("attribute_dim must be positive");
    if (static_cast<int>(aux.attributes.size()) != m)
        throw ValidationError("attribute table must cover every state");
    for (int s = 0; s < m; ++s) {
        if (static_cast<int>(aux.attributes[s].size()) != spec.action_count(s))
            throw ValidationError("attribute table must cover every action");
        for (const auto& y : aux.attributes[s]) {
            if (static_cast<int>(y.size()) != aux.attribute_dim)
                throw ValidationError("attribute vector length != attribute_dim");
            for (double v : y)
                if (std::abs(v) > aux.delta_max)
                    throw ValidationError("attribute magnitude exceeds delta_max");
        }
    }
    const auto k = static_cast<std::size_t>(aux.attribute_dim);
    switch (aux.objective.kind) {
        case AuxObjectiveKind::Linear:
            if (aux.objective.c.size() != k) throw ValidationError("linear objective needs K coefficients");
            break;
        case AuxObjectiveKind::QuadraticDiagonal:
            if (aux.objective.c.size() != k || aux.objective.center.size() != k)
                throw ValidationError("quadratic objective needs K scales and centers");
            for (double s : aux.objective.c)
                if (s < 0) throw ValidationError("quadratic scales must be nonnegative");
            break;
        case AuxObjectiveKind::LogSum:
            if (aux.objective.a.size() != k) throw ValidationError("log objective needs K weights");
            for (double w : aux.objective.a)
                if (w < 0) throw ValidationError("log weights must be nonnegative");
            break;
    }
}

std::vector<double> choose_aux(const AuxSpec& aux, std::span<const double> h, double v_param) {
    const auto K = static_cast<std::size_t>(aux.attribute_dim);
    std::vector<double> z(K, 0.0);
    const double hi = aux.delta_max;
    for (std::size_t k = 0; k < K; ++k) {
        switch (aux.objective.kind) {
            case AuxObjectiveKind::Linear: {
                // coordinate cost (V c_k + h_k) z_k: bang-bang on the sign
                z[k] = v_param * aux.objective.c[k] + h[k] < 0 ? hi : 0.0;
                break;
            }
            case AuxObjectiveKind::QuadraticDiagonal: {
                const double scale = aux.objective.c[k];
                if (scale == 0.0) {
                    z[k] = h[k] < 0 ? hi : 0.0;
                } else {
                    z[k] = std::clamp(aux.objective.center[k] - h[k] / (v_param * scale), 0.0, hi);
                }
                break;
            }
            case AuxObjectiveKind::LogSum: {
                const double w = aux.objective.a[k];
                if (w == 0.0) {
                    z[k] = h[k] < 0 ? hi : 0.0;
                } else if (h[k] <= 0.0) {
                    z[k] = hi;  // objective strictly decreasing in z_k
                } else {
                    z[k] = std::clamp(v_param * w / h[k] - 1.0, 0.0, hi);
                }
                break;
            }
        }
    }
    return z;
}

Decision aux_bp_decide(const ScenarioSpec& spec, const AuxSpec& aux, int state,
                       std::span<const double> backlog, std::span<const double> h,
                       double v_param) {
    (void)v_param;  // the V-scaled term lives in choose_aux for this variant
    if (!spec.validated) throw ValidationError("aux_bp_decide requires a validated spec");
    const auto& rows = spec.actions[state];
    const int r = spec.queue_count;
    const auto K = static_cast<std::size_t>(aux.attribute_dim);

    Decision d;
    double best = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < static_cast<int>(rows.size()); ++k) {
        double obj = 0.0;
        const auto& y = aux.attributes[state][k];
        for (std::size_t i = 0; i < K; ++i) obj += h[i] * y[i];
        for (int j = 0; j < r; ++j)
            obj += backlog[j] * (rows[k].services[j] - rows[k].arrivals[j]);
        if (obj > best) {
            second = best;
            best = obj;
            d.action_index = k;
        } else if (obj > second) {
            second = obj;
        }
    }
    d.objective_value = best;
    d.runner_up_gap = rows.size() > 1 ? best - second : 0.0;
    return d;
}

AuxReport aux_run(const RunConfig& config, const AuxSpec& aux) {
    const ScenarioSpec& spec = *config.spec;
    if (!spec.validated) throw ValidationError("aux_run requires a validated spec");
    validate_aux(aux, spec);
    if (config.horizon <= 0) throw ValidationError("horizon must be positive");

    const int r = spec.queue_count;
    const auto K = static_cast<std::size_t>(aux.attribute_dim);
    const double ceiling = config.effective_ceiling();

    Rng rng(config.seed);
    int state = 0;
    std::vector<double> q(r, 0.0), h(K, 0.0);
    std::vector<double> h_sum(K, 0.0), z_sum(K, 0.0), y_sum(K, 0.0);
    double cost_sum = 0.0, backlog_sum = 0.0, h_max = 0.0;
    AuxReport rep;

    for (std::int64_t t = 0; t < config.horizon; ++t) {
        if (t > 0) state = sample_next_state(spec.chain, state, rng);

        const std::vector<double> z = choose_aux(aux, h, config.v_param);
        const Decision d = aux_bp_decide(spec, aux, state, q, h, config.v_param);
        const ActionRow& row = spec.actions[state][d.action_index];
        const auto& y = aux.attributes[state][d.action_index];

        if (config.retain_backlog_trace) {
            rep.h_trace.push_back(h);
            rep.z_trace.push_back(z);
            rep.y_trace.push_back(std::vector<double>(y.begin(), y.end()));
        }
        cost_sum += row.cost;
        for (int j = 0; j < r; ++j) backlog_sum += q[j];
        double h_total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            h_sum[k] += h[k];
            z_sum[k] += z[k];
            y_sum[k] += y[k];
            h_total += h[k];
        }
        h_max = std::max(h_max, h_total);
        if (h_total > ceiling)
            throw RunAbortError("virtual queue divergence at slot " + std::to_string(t));
        double q_total = 0.0;
        for (int j = 0; j < r; ++j) q_total += q[j];
        if (q_total > ceiling)
            throw RunAbortError("instability suspected at slot " + std::to_string(t));

        // recursions: queues then virtual queues
        for (int j = 0; j < r; ++j)
            q[j] = std::max(q[j] - row.services[j], 0.0) + row.arrivals[j];
        for (std::size_t k = 0; k < K; ++k) h[k] = std::max(h[k] - y[k], 0.0) + z[k];
    }

    const auto T = static_cast<double>(config.horizon);
    rep.h_avg.resize(K);
    rep.z_bar.resize(K);
    rep.y_bar.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        rep.h_avg[k] = h_sum[k] / T;
        rep.z_bar[k] = z_sum[k] / T;
        rep.y_bar[k] = y_sum[k] / T;
    }
    rep.objective_at_z_bar = aux.objective.eval(rep.z_bar);
    rep.avg_cost = cost_sum / T;
    rep.avg_backlog = backlog_sum / T;
    rep.h_max = h_max;
    return rep;
}

}  // namespace bpsim
