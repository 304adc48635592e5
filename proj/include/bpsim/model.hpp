#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bpsim/rng.hpp"

namespace bpsim {

/// Exogenous network-condition process: finite, irreducible, aperiodic.
struct MarkovChain {
    std::vector<std::string> state_labels;
    std::vector<std::vector<double>> transition;  // row-stochastic, M x M

    int state_count() const { return static_cast<int>(transition.size()); }
};

/// One feasible action's tabulated cost / traffic / service values.
struct ActionRow {
    double cost = 0.0;
    std::vector<double> arrivals;  // packets per queue, includes forwarded traffic
    std::vector<double> services;  // packets per queue
};

/// Packet-level forwarding edge: `count` departures of `src` handed to `dst`.
struct Transfer {
    int src = 0;
    int dst = 0;
    double count = 0.0;
};

/// External arrivals injected at `queue` under an action.
struct ExogenousEntry {
    int queue = 0;
    double count = 0.0;
};

// Per-factor objective deltas for the decomposed controller; built during
// validation when `factors` is declared and the tables prove separable.
struct FactorTables {
    // base[s]: cost and per-queue (mu - A) of action 0 in state s
    std::vector<double> base_cost;
    std::vector<std::vector<double>> base_net;
    // delta[s][f][d]: change vs base when factor f picks digit d (others 0)
    struct Delta {
        double cost = 0.0;
        std::vector<std::pair<int, double>> net;  // sparse (queue, d(mu-A))
    };
    std::vector<std::vector<std::vector<Delta>>> delta;
    std::vector<std::int64_t> radix_weight;  // global index = sum digit*weight
};

/// Full network description: state chain, per-state action tables, topology.
struct ScenarioSpec {
    std::string name;
    MarkovChain chain;
    int queue_count = 0;      // r
    double delta_max = 0.0;   // uniform magnitude bound on all table entries
    std::vector<std::vector<ActionRow>> actions;                 // [state][k]
    std::vector<std::vector<std::vector<Transfer>>> routing;     // [state][k]
    std::vector<std::vector<std::vector<ExogenousEntry>>> exogenous;  // [state][k]
    std::vector<int> sink_queues;   // departures leave the network
    std::vector<int> factors;       // optional per-node factorization (radices)

    // Caches filled by validate(); the spec is immutable afterwards.
    bool validated = false;
    std::vector<double> pi;         // stationary distribution (power iteration)
    bool integer_tables = false;    // every table entry is an exact integer
    bool separable = false;         // factors declared and verified
    FactorTables factor_tables;

    bool is_sink(int queue) const {
        for (int s : sink_queues)
            if (s == queue) return true;
        return false;
    }
    int action_count(int state) const { return static_cast<int>(actions[state].size()); }
};

struct ValidationIssue {
    std::string check;
    bool passed = true;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> checks;
    std::vector<std::string> warnings;

    bool ok() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    std::string first_failure() const {
        for (const auto& c : checks)
            if (!c.passed) return c.check + ": " + c.detail;
        return {};
    }
};

/// Checks every model invariant and fills the spec caches (pi, integer flag,
/// factor tables). Reducibility/periodicity/row-sum failures name offenders.
ValidationReport validate(ScenarioSpec& spec);

/// Throwing wrapper used by loaders.
void validate_or_throw(ScenarioSpec& spec);

/// Stationary distribution by power iteration (fixed-point residual <= tol).
std::vector<double> stationary_distribution(const MarkovChain& chain, double tol = 1e-12,
                                            int max_iters = 200000);

/// One Markov step; identical seeds yield identical trajectories.
int sample_next_state(const MarkovChain& chain, int current, Rng& rng);

struct PolicyExpectation {
    double avg_cost = 0.0;
    std::vector<double> drift;  // E[A_j - mu_j] per queue
};

/// pi-weighted cost and drift of a stationary randomized policy
/// (policy[s][k] = probability of action k in state s).
PolicyExpectation stationary_expectation(const ScenarioSpec& spec,
                                         const std::vector<std::vector<double>>& policy);

}  // namespace bpsim
