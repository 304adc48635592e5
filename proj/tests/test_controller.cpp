#include <doctest.h>

#include "bpsim/controller.hpp"
#include "bpsim/errors.hpp"
#include "test_util.hpp"

using namespace bpsim;
using namespace bpsim::testutil;

TEST_CASE("tandem worked example: x1 on iff 2(q1-q2) > V, x2 on iff 2q2 > V") {
    auto loaded = load("tandem");
    const std::vector<double> q{10, 2};
    const auto d = bp_decide(loaded.spec, 1, q, 10.0);  // state s2 = (1,1,G,G)
    // action index = 2*x1 + x2; expect (1, 0)
    CHECK(d.action_index == 2);
    // objective = x1(2q1 - 2q2 - V) + x2(2q2 - V) - q1 - q2 = 6 - 12
    CHECK(d.objective_value == doctest::Approx(-6.0));
}

TEST_CASE("zero backlog picks the cheapest action independent of V") {
    for (const char* name : {"tandem", "multihop7"}) {
        auto loaded = load(name);
        const std::vector<double> q(loaded.spec.queue_count, 0.0);
        for (int s = 0; s < loaded.spec.chain.state_count(); ++s) {
            const int at_v1 = bp_decide(loaded.spec, s, q, 1.0).action_index;
            // idle costs 0 and nothing else can beat it at zero backlog
            CHECK(loaded.spec.actions[s][at_v1].cost == 0.0);
            for (double v : {10.0, 100.0, 1000.0})
                CHECK(bp_decide(loaded.spec, s, q, v).action_index == at_v1);
        }
    }
}

TEST_CASE("bp_decide matches naive enumeration on random probes") {
    Rng rng(314);
    for (const char* name : {"tandem", "multihop7"}) {
        auto loaded = load(name);
        const auto& spec = loaded.spec;
        for (int probe = 0; probe < 200; ++probe) {
            const int s = static_cast<int>(uniform_below(rng, spec.chain.state_count()));
            std::vector<double> q(spec.queue_count);
            for (auto& x : q) x = static_cast<double>(uniform_below(rng, 2000));
            const double v = static_cast<double>(1 + uniform_below(rng, 600));
            CHECK(bp_decide(spec, s, q, v).action_index == naive_bp_argmax(spec, s, q, v));
        }
    }
}

TEST_CASE("decomposed decision equals the flat rule on the tandem grid") {
    auto loaded = load("tandem");
    const auto& spec = loaded.spec;
    for (int s = 0; s < 3; ++s)
        for (int q1 = 0; q1 <= 50; ++q1)
            for (int q2 = 0; q2 <= 50; q2 += 5) {
                const std::vector<double> q{static_cast<double>(q1), static_cast<double>(q2)};
                const auto flat = bp_decide(spec, s, q, 10.0);
                const auto fast = bp_decide_decomposed(spec, s, q, 10.0);
                REQUIRE(flat.action_index == fast.action_index);
                REQUIRE(flat.objective_value == fast.objective_value);
            }
}

TEST_CASE("decomposed decision equals the flat rule on multihop7 probes") {
    auto loaded = load("multihop7");
    const auto& spec = loaded.spec;
    Rng rng(2718);
    for (int probe = 0; probe < 1000; ++probe) {
        const int s = static_cast<int>(uniform_below(rng, spec.chain.state_count()));
        std::vector<double> q(spec.queue_count);
        for (auto& x : q) x = static_cast<double>(uniform_below(rng, 3000));
        const double v = static_cast<double>(1 + uniform_below(rng, 600));
        const auto flat = bp_decide(spec, s, q, v);
        const auto fast = bp_decide_decomposed(spec, s, q, v);
        REQUIRE(flat.action_index == fast.action_index);
        REQUIRE(flat.objective_value == fast.objective_value);
        REQUIRE(flat.runner_up_gap == fast.runner_up_gap);
    }
}

TEST_CASE("decomposed = flat on randomly generated separable scenarios") {
    Rng rng(555);
    for (int trial = 0; trial < 25; ++trial) {
        const int r = 2 + static_cast<int>(uniform_below(rng, 3));
        const std::vector<int> factors{2 + static_cast<int>(uniform_below(rng, 2)),
                                       2 + static_cast<int>(uniform_below(rng, 3))};
        const int n_actions = factors[0] * factors[1];
        ScenarioSpec spec;
        spec.queue_count = r;
        spec.delta_max = 60.0;
        spec.chain.transition = {{1.0}};
        spec.factors = factors;
        // additive per-factor contributions guarantee separability
        std::vector<std::vector<double>> cost(2), svc(2), arr(2);
        for (int f = 0; f < 2; ++f) {
            cost[f].resize(factors[f]);
            svc[f].resize(factors[f] * r);
            arr[f].resize(factors[f] * r);
            for (int d = 0; d < factors[f]; ++d) {
                cost[f][d] = d == 0 ? 0.0 : static_cast<double>(uniform_below(rng, 10));
                for (int j = 0; j < r; ++j) {
                    svc[f][d * r + j] = d == 0 ? 0.0 : static_cast<double>(uniform_below(rng, 5));
                    arr[f][d * r + j] = d == 0 ? 0.0 : static_cast<double>(uniform_below(rng, 5));
                }
            }
        }
        std::vector<ActionRow> rows;
        for (int k = 0; k < n_actions; ++k) {
            const int d0 = k / factors[1], d1 = k % factors[1];
            ActionRow row;
            row.cost = cost[0][d0] + cost[1][d1];
            row.arrivals.assign(r, 0.0);
            row.services.assign(r, 0.0);
            for (int j = 0; j < r; ++j) {
                row.services[j] = svc[0][d0 * r + j] + svc[1][d1 * r + j];
                row.arrivals[j] = arr[0][d0 * r + j] + arr[1][d1 * r + j];
            }
            rows.push_back(std::move(row));
        }
        spec.actions = {rows};
        REQUIRE(validate(spec).ok());
        REQUIRE(spec.separable);
        for (int probe = 0; probe < 40; ++probe) {
            std::vector<double> q(r);
            for (auto& x : q) x = static_cast<double>(uniform_below(rng, 500));
            const double v = static_cast<double>(1 + uniform_below(rng, 50));
            const auto flat = bp_decide(spec, 0, q, v);
            const auto fast = bp_decide_decomposed(spec, 0, q, v);
            REQUIRE(flat.action_index == fast.action_index);
            REQUIRE(flat.objective_value == fast.objective_value);
        }
    }
}

TEST_CASE("decomposed rule requires a declared factorization") {
    auto spec = single_queue_spec(1.0, 2.0);
    const std::vector<double> q{5.0};
    CHECK_THROWS_AS(bp_decide_decomposed(spec, 0, q, 10.0), ValidationError);
}

TEST_CASE("runner-up gap is nonnegative and zero only at ties") {
    auto loaded = load("tandem");
    Rng rng(99);
    for (int probe = 0; probe < 200; ++probe) {
        const int s = static_cast<int>(uniform_below(rng, 3));
        std::vector<double> q{static_cast<double>(uniform_below(rng, 100)),
                              static_cast<double>(uniform_below(rng, 100))};
        const auto d = bp_decide(loaded.spec, s, q, 10.0);
        CHECK(d.runner_up_gap >= 0.0);
    }
}
