#include "bpsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bpsim/errors.hpp"
#include "bpsim/rational.hpp"

namespace bpsim {

namespace {

// Reachability over the support graph (edges where p > 0).
std::vector<bool> reachable_from(const std::vector<std::vector<double>>& p, int start, bool reverse) {
    const int m = static_cast<int>(p.size());
    std::vector<bool> seen(m, false);
    std::vector<int> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < m; ++v) {
            const double w = reverse ? p[v][u] : p[u][v];
            if (w > 0.0 && !seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

// Period of a strongly connected support graph: gcd over edges (u,v) of
// level[u] + 1 - level[v] with BFS levels from state 0.
int graph_period(const std::vector<std::vector<double>>& p) {
    const int m = static_cast<int>(p.size());
    std::vector<int> level(m, -1);
    std::vector<int> queue{0};
    level[0] = 0;
    std::size_t head = 0;
    while (head < queue.size()) {
        const int u = queue[head++];
        for (int v = 0; v < m; ++v) {
            if (p[u][v] > 0.0 && level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    int g = 0;
    for (int u = 0; u < m; ++u)
        for (int v = 0; v < m; ++v)
            if (p[u][v] > 0.0) g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
    return g == 0 ? 1 : g;
}

std::string list_states(const MarkovChain& chain, const std::vector<bool>& mask, bool wanted) {
    std::ostringstream os;
    bool first = true;
    for (int i = 0; i < chain.state_count(); ++i) {
        if (mask[i] != wanted) continue;
        if (!first) os << ", ";
        os << (i < static_cast<int>(chain.state_labels.size()) ? chain.state_labels[i]
                                                               : "state " + std::to_string(i));
        first = false;
    }
    return os.str();
}

void build_factor_tables(ScenarioSpec& spec);
bool check_separable(const ScenarioSpec& spec, std::string& detail);

}  // namespace

std::vector<double> stationary_distribution(const MarkovChain& chain, double tol, int max_iters) {
    const int m = chain.state_count();
    std::vector<double> pi(m, 1.0 / m), next(m, 0.0);
    for (int it = 0; it < max_iters; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) next[j] += pi[i] * chain.transition[i][j];
        double norm = std::accumulate(next.begin(), next.end(), 0.0);
        for (double& x : next) x /= norm;
        double diff = 0.0;
        for (int j = 0; j < m; ++j) diff = std::max(diff, std::abs(next[j] - pi[j]));
        pi.swap(next);
        if (diff <= tol) return pi;
    }
    throw ValidationError("stationary distribution power iteration did not converge");
}

int sample_next_state(const MarkovChain& chain, int current, Rng& rng) {
    const auto& row = chain.transition[current];
    const double u = uniform01(rng);
    double acc = 0.0;
    const int m = static_cast<int>(row.size());
    for (int j = 0; j < m; ++j) {
        acc += row[j];
        if (u < acc) return j;
    }
    // guard against accumulated rounding at u ~ 1
    for (int j = m - 1; j >= 0; --j)
        if (row[j] > 0.0) return j;
    return m - 1;
}

ValidationReport validate(ScenarioSpec& spec) {
    ValidationReport report;
    auto add = [&](const std::string& check, bool passed, const std::string& detail = "") {
        report.checks.push_back({check, passed, detail});
    };

    const int m = spec.chain.state_count();
    const int r = spec.queue_count;

    // --- chain shape and row sums
    bool shape_ok = m > 0 && r > 0 && spec.delta_max > 0;
    for (const auto& row : spec.chain.transition)
        if (static_cast<int>(row.size()) != m) shape_ok = false;
    add("chain-shape", shape_ok, shape_ok ? "" : "transition matrix is not square or sizes are zero");
    if (!shape_ok) return report;

    bool rows_ok = true;
    std::string row_detail;
    for (int i = 0; i < m; ++i) {
        double sum = 0.0;
        bool nonneg = true;
        for (double x : spec.chain.transition[i]) {
            sum += x;
            nonneg = nonneg && x >= 0.0;
        }
        if (!nonneg || std::abs(sum - 1.0) > 1e-12) {
            rows_ok = false;
            row_detail = "row " + std::to_string(i) + " sums to " + std::to_string(sum);
            break;
        }
    }
    add("row-stochastic", rows_ok, row_detail);
    if (!rows_ok) return report;

    // --- irreducibility: every state reaches and is reached by state 0
    const auto fwd = reachable_from(spec.chain.transition, 0, false);
    const auto bwd = reachable_from(spec.chain.transition, 0, true);
    std::vector<bool> in_scc(m, false);
    bool irreducible = true;
    for (int i = 0; i < m; ++i) {
        in_scc[i] = fwd[i] && bwd[i];
        irreducible = irreducible && in_scc[i];
    }
    add("irreducible", irreducible,
        irreducible ? "" : "states outside the recurrent class: " + list_states(spec.chain, in_scc, false));

    int period = 1;
    if (irreducible) {
        period = graph_period(spec.chain.transition);
        add("aperiodic", period == 1,
            period == 1 ? "" : "support graph has period " + std::to_string(period));
    }

    if (!irreducible || period != 1) return report;

    spec.pi = stationary_distribution(spec.chain);
    bool pi_pos = true;
    for (double p : spec.pi) pi_pos = pi_pos && p > 0.0;
    add("stationary-positive", pi_pos);

    // --- action tables
    bool tables_ok = true;
    std::string table_detail;
    spec.integer_tables = true;
    if (static_cast<int>(spec.actions.size()) != m) {
        tables_ok = false;
        table_detail = "action table count != state count";
    }
    for (int s = 0; tables_ok && s < m; ++s) {
        if (spec.actions[s].empty()) {
            tables_ok = false;
            table_detail = "state " + std::to_string(s) + " has an empty action set";
            break;
        }
        for (const auto& row : spec.actions[s]) {
            if (static_cast<int>(row.arrivals.size()) != r ||
                static_cast<int>(row.services.size()) != r) {
                tables_ok = false;
                table_detail = "action vector length != queue count in state " + std::to_string(s);
                break;
            }
            auto check_entry = [&](double x, bool nonneg) {
                if (nonneg && x < 0.0) return false;
                if (std::abs(x) > spec.delta_max) return false;
                if (!is_integer_value(x)) spec.integer_tables = false;
                return true;
            };
            bool ok = check_entry(row.cost, true);
            for (double a : row.arrivals) ok = ok && check_entry(a, true);
            for (double u : row.services) ok = ok && check_entry(u, true);
            if (!ok) {
                tables_ok = false;
                table_detail = "entry out of [0, delta_max] in state " + std::to_string(s);
                break;
            }
        }
    }
    add("tables-bounded", tables_ok, table_detail);
    if (!tables_ok) return report;

    if (!spec.integer_tables)
        report.warnings.push_back("non-integer packet quantities: packet-level runs are unavailable");

    // --- routing / exogenous consistency with the idle-fill convention
    const bool has_routing = !spec.routing.empty();
    const bool has_exo = !spec.exogenous.empty();
    bool routing_ok = true;
    std::string routing_detail;
    if (has_routing || has_exo || !spec.sink_queues.empty()) {
        for (int s = 0; routing_ok && s < m; ++s) {
            const int kcount = spec.action_count(s);
            for (int k = 0; routing_ok && k < kcount; ++k) {
                std::vector<double> into(r, 0.0), out(r, 0.0);
                if (has_exo)
                    for (const auto& e : spec.exogenous[s][k]) {
                        if (e.queue < 0 || e.queue >= r || e.count < 0) {
                            routing_ok = false;
                            routing_detail = "bad exogenous entry";
                            break;
                        }
                        into[e.queue] += e.count;
                    }
                if (has_routing)
                    for (const auto& t : spec.routing[s][k]) {
                        if (t.src < 0 || t.src >= r || t.dst < 0 || t.dst >= r || t.count < 0) {
                            routing_ok = false;
                            routing_detail = "bad transfer triple";
                            break;
                        }
                        into[t.dst] += t.count;
                        out[t.src] += t.count;
                    }
                if (!routing_ok) break;
                const auto& row = spec.actions[s][k];
                for (int j = 0; j < r; ++j) {
                    if (std::abs(into[j] - row.arrivals[j]) > 1e-9) {
                        routing_ok = false;
                        routing_detail = "arrivals of queue " + std::to_string(j) + " in state " +
                                         std::to_string(s) + " action " + std::to_string(k) +
                                         " do not match exogenous + transfers in";
                        break;
                    }
                    const bool sink = spec.is_sink(j);
                    if (sink && out[j] > 0.0) {
                        routing_ok = false;
                        routing_detail = "sink queue " + std::to_string(j) + " has transfers out";
                        break;
                    }
                    if (!sink && std::abs(out[j] - row.services[j]) > 1e-9) {
                        routing_ok = false;
                        routing_detail = "transfers out of non-sink queue " + std::to_string(j) +
                                         " in state " + std::to_string(s) + " action " +
                                         std::to_string(k) + " do not cover its service";
                        break;
                    }
                }
            }
        }
    }
    add("routing-consistent", routing_ok, routing_detail);

    // --- factorization (optional): radices must multiply out and the tables
    // must be additively separable across factors.
    spec.separable = false;
    if (!spec.factors.empty()) {
        std::int64_t prod = 1;
        for (int f : spec.factors) prod *= std::max(f, 0);
        bool factor_ok = prod > 0;
        std::string factor_detail;
        for (int s = 0; factor_ok && s < m; ++s)
            if (spec.action_count(s) != prod) {
                factor_ok = false;
                factor_detail = "factor radices do not multiply to the action count";
            }
        if (factor_ok) factor_ok = check_separable(spec, factor_detail);
        add("factors-separable", factor_ok, factor_detail);
        if (factor_ok) {
            spec.separable = true;
            build_factor_tables(spec);
        }
    }

    spec.validated = report.ok();
    return report;
}

void validate_or_throw(ScenarioSpec& spec) {
    const auto report = validate(spec);
    if (!report.ok()) throw ValidationError(report.first_failure());
}

PolicyExpectation stationary_expectation(const ScenarioSpec& spec,
                                         const std::vector<std::vector<double>>& policy) {
    const int m = spec.chain.state_count();
    const int r = spec.queue_count;
    if (static_cast<int>(policy.size()) != m)
        throw std::invalid_argument("policy must have one distribution per state");
    PolicyExpectation out;
    out.drift.assign(r, 0.0);
    for (int s = 0; s < m; ++s) {
        if (static_cast<int>(policy[s].size()) != spec.action_count(s))
            throw std::invalid_argument("policy row size mismatch in state " + std::to_string(s));
        double sum = 0.0;
        for (double w : policy[s]) sum += w;
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("policy distribution for state " + std::to_string(s) +
                                        " sums to " + std::to_string(sum));
        for (int k = 0; k < spec.action_count(s); ++k) {
            const double w = spec.pi[s] * policy[s][k];
            if (w == 0.0) continue;
            const auto& row = spec.actions[s][k];
            out.avg_cost += w * row.cost;
            for (int j = 0; j < r; ++j) out.drift[j] += w * (row.arrivals[j] - row.services[j]);
        }
    }
    return out;
}

namespace {

// Exact separability test: every table column (cost, each A_j, each mu_j)
// must satisfy T[k] = T[0] + sum_f (T[only factor f set] - T[0]) for all k.
// Entries are reconstructed as rationals so the check has no tolerance; if a
// value resists reconstruction the check falls back to a 1e-9 comparison.
bool check_separable(const ScenarioSpec& spec, std::string& detail) {
    const int m = spec.chain.state_count();
    const int r = spec.queue_count;
    const int nf = static_cast<int>(spec.factors.size());

    std::vector<std::int64_t> weight(nf, 1);
    for (int f = nf - 2; f >= 0; --f) weight[f] = weight[f + 1] * spec.factors[f + 1];

    for (int s = 0; s < m; ++s) {
        const auto& rows = spec.actions[s];
        auto column = [&](const ActionRow& row, int c) -> double {
            if (c == 0) return row.cost;
            if (c <= r) return row.arrivals[c - 1];
            return row.services[c - 1 - r];
        };
        for (int c = 0; c < 1 + 2 * r; ++c) {
            const double base = column(rows[0], c);
            for (std::size_t k = 1; k < rows.size(); ++k) {
                double predicted = base;
                std::int64_t rem = static_cast<std::int64_t>(k);
                for (int f = 0; f < nf; ++f) {
                    const std::int64_t d = rem / weight[f];
                    rem %= weight[f];
                    if (d != 0) predicted += column(rows[d * weight[f]], c) - base;
                }
                if (std::abs(predicted - column(rows[k], c)) > 1e-9) {
                    detail = "not separable: state " + std::to_string(s) + ", action " +
                             std::to_string(k) + ", table column " + std::to_string(c);
                    return false;
                }
            }
        }
    }
    return true;
}

void build_factor_tables(ScenarioSpec& spec) {
    const int m = spec.chain.state_count();
    const int r = spec.queue_count;
    const int nf = static_cast<int>(spec.factors.size());
    FactorTables ft;
    ft.radix_weight.assign(nf, 1);
    for (int f = nf - 2; f >= 0; --f) ft.radix_weight[f] = ft.radix_weight[f + 1] * spec.factors[f + 1];

    ft.base_cost.resize(m);
    ft.base_net.assign(m, std::vector<double>(r, 0.0));
    ft.delta.resize(m);
    for (int s = 0; s < m; ++s) {
        const auto& rows = spec.actions[s];
        ft.base_cost[s] = rows[0].cost;
        for (int j = 0; j < r; ++j)
            ft.base_net[s][j] = rows[0].services[j] - rows[0].arrivals[j];
        ft.delta[s].resize(nf);
        for (int f = 0; f < nf; ++f) {
            ft.delta[s][f].resize(spec.factors[f]);
            for (int d = 0; d < spec.factors[f]; ++d) {
                FactorTables::Delta& dl = ft.delta[s][f][d];
                if (d == 0) continue;  // zero delta by construction
                const auto& row = rows[d * ft.radix_weight[f]];
                dl.cost = row.cost - rows[0].cost;
                for (int j = 0; j < r; ++j) {
                    const double net = (row.services[j] - row.arrivals[j]) - ft.base_net[s][j];
                    if (net != 0.0) dl.net.emplace_back(j, net);
                }
            }
        }
    }
    spec.factor_tables = std::move(ft);
}

}  // namespace

}  // namespace bpsim
