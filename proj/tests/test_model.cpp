#include <doctest.h>

#include <cmath>

#include "bpsim/errors.hpp"
#include "bpsim/model.hpp"
#include "test_util.hpp"

using namespace bpsim;
using namespace bpsim::testutil;

namespace {

ScenarioSpec chain_only_spec(std::vector<std::vector<double>> transition) {
    ScenarioSpec spec;
    spec.name = "chain_only";
    spec.queue_count = 1;
    spec.delta_max = 1.0;
    spec.chain.transition = std::move(transition);
    const int m = spec.chain.state_count();
    ActionRow idle{0.0, {0.0}, {0.0}};
    spec.actions.assign(m, {idle});
    return spec;
}

}  // namespace

TEST_CASE("validate accepts the shipped tandem spec") {
    auto loaded = load("tandem");
    CHECK(loaded.spec.validated);
    CHECK(loaded.spec.chain.state_count() == 3);
    CHECK(loaded.spec.action_count(0) == 4);
    CHECK(loaded.spec.integer_tables);
    CHECK(loaded.spec.separable);
    // doubly stochastic choice makes pi uniform
    for (double p : loaded.spec.pi) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-10));
}

TEST_CASE("validate accepts the degenerate one-state chain") {
    auto spec = chain_only_spec({{1.0}});
    CHECK(validate(spec).ok());
    CHECK(spec.pi[0] == doctest::Approx(1.0));
}

TEST_CASE("validate rejects a reducible chain and names the states") {
    auto spec = chain_only_spec({{1.0, 0.0}, {0.0, 1.0}});
    const auto report = validate(spec);
    CHECK_FALSE(report.ok());
    CHECK(report.first_failure().find("irreducible") != std::string::npos);
}

TEST_CASE("validate rejects a periodic chain") {
    auto spec = chain_only_spec({{0.0, 1.0}, {1.0, 0.0}});
    const auto report = validate(spec);
    CHECK_FALSE(report.ok());
    CHECK(report.first_failure().find("period") != std::string::npos);
}

TEST_CASE("validate rejects a bad row sum with the row index") {
    auto spec = chain_only_spec({{0.5, 0.4}, {0.5, 0.5}});
    const auto report = validate(spec);
    CHECK_FALSE(report.ok());
    CHECK(report.first_failure().find("row 0") != std::string::npos);
}

TEST_CASE("power iteration satisfies pi P = pi on random chains") {
    Rng rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        const int m = 2 + static_cast<int>(uniform_below(rng, 6));
        std::vector<std::vector<double>> p(m, std::vector<double>(m));
        for (int i = 0; i < m; ++i) {
            double sum = 0.0;
            for (int j = 0; j < m; ++j) {
                p[i][j] = 0.05 + uniform01(rng);
                sum += p[i][j];
            }
            for (int j = 0; j < m; ++j) p[i][j] /= sum;
        }
        MarkovChain chain{{}, p};
        const auto pi = stationary_distribution(chain);
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) acc += pi[i] * p[i][j];
            CHECK(std::abs(acc - pi[j]) <= 1e-10);
        }
    }
}

TEST_CASE("sample_next_state follows a deterministic row") {
    MarkovChain chain{{}, {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}}};
    Rng rng(7);
    for (int i = 0; i < 50; ++i) CHECK(sample_next_state(chain, 0, rng) == 1);
}

TEST_CASE("sample_next_state matches a fair row over many draws") {
    MarkovChain chain{{}, {{0.5, 0.5}, {0.5, 0.5}}};
    Rng rng(42);
    std::int64_t zeros = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i)
        if (sample_next_state(chain, 0, rng) == 0) ++zeros;
    CHECK(std::abs(static_cast<double>(zeros) / n - 0.5) < 0.002);
}

TEST_CASE("long-run state frequencies match the stationary distribution") {
    auto loaded = load("tandem");
    const auto& chain = loaded.spec.chain;
    Rng rng(11);
    std::vector<std::int64_t> counts(3, 0);
    int state = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        state = sample_next_state(chain, state, rng);
        ++counts[state];
    }
    for (int s = 0; s < 3; ++s)
        CHECK(std::abs(static_cast<double>(counts[s]) / n - loaded.spec.pi[s]) < 0.005);
}

TEST_CASE("stationary_expectation of the all-idle tandem policy") {
    auto loaded = load("tandem");
    std::vector<std::vector<double>> policy(3, {1.0, 0.0, 0.0, 0.0});
    const auto exp = stationary_expectation(loaded.spec, policy);
    CHECK(exp.avg_cost == doctest::Approx(0.0));
    // E[A_1] = (1 + 1 + 0) / 3, E[A_2] = R_2 only since x1 = 0
    CHECK(exp.drift[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(exp.drift[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("stationary_expectation matches a direct weighted sum for point policies") {
    auto loaded = load("tandem");
    const auto& spec = loaded.spec;
    std::vector<std::vector<double>> policy = {
        {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}};
    const auto exp = stationary_expectation(spec, policy);
    double cost = 0.0;
    std::vector<double> drift(2, 0.0);
    const int picks[3] = {2, 3, 0};
    for (int s = 0; s < 3; ++s) {
        const auto& row = spec.actions[s][picks[s]];
        cost += spec.pi[s] * row.cost;
        for (int j = 0; j < 2; ++j)
            drift[j] += spec.pi[s] * (row.arrivals[j] - row.services[j]);
    }
    CHECK(exp.avg_cost == doctest::Approx(cost).epsilon(1e-12));
    CHECK(exp.drift[0] == doctest::Approx(drift[0]).epsilon(1e-12));
    CHECK(exp.drift[1] == doctest::Approx(drift[1]).epsilon(1e-12));
}

TEST_CASE("stationary_expectation rejects an unnormalized policy") {
    auto loaded = load("tandem");
    std::vector<std::vector<double>> policy(3, {0.5, 0.0, 0.0, 0.0});
    CHECK_THROWS_AS(stationary_expectation(loaded.spec, policy), std::invalid_argument);
}

TEST_CASE("table bound and routing consistency hold for every shipped scenario") {
    for (const char* name : {"tandem", "multihop7", "auxdemo"}) {
        auto loaded = load(name);
        const auto& spec = loaded.spec;
        for (int s = 0; s < spec.chain.state_count(); ++s)
            for (int k = 0; k < spec.action_count(s); ++k) {
                const auto& row = spec.actions[s][k];
                CHECK(row.cost <= spec.delta_max);
                std::vector<double> into(spec.queue_count, 0.0), out(spec.queue_count, 0.0);
                for (const auto& e : spec.exogenous[s][k]) into[e.queue] += e.count;
                for (const auto& t : spec.routing[s][k]) {
                    into[t.dst] += t.count;
                    out[t.src] += t.count;
                }
                for (int j = 0; j < spec.queue_count; ++j) {
                    CHECK(row.arrivals[j] <= spec.delta_max);
                    CHECK(row.services[j] <= spec.delta_max);
                    CHECK(row.arrivals[j] == doctest::Approx(into[j]));
                    if (!spec.is_sink(j)) CHECK(out[j] == doctest::Approx(row.services[j]));
                }
            }
    }
}

TEST_CASE("non-integer packet quantities trigger a warning") {
    auto spec = single_queue_spec(0.5, 1.0);
    spec.validated = false;
    const auto report = validate(spec);
    CHECK(report.ok());
    REQUIRE_FALSE(report.warnings.empty());
    CHECK(report.warnings[0].find("non-integer") != std::string::npos);
    CHECK_FALSE(spec.integer_tables);
}

TEST_CASE("cross-term tables fail the separability check") {
    ScenarioSpec spec;
    spec.name = "crossed";
    spec.queue_count = 1;
    spec.delta_max = 4.0;
    spec.chain.transition = {{1.0}};
    // service = x1 * x2: a product term cannot split across factors
    auto row = [](double mu) { return ActionRow{0.0, {0.0}, {mu}}; };
    spec.actions = {{row(0), row(0), row(0), row(1)}};
    spec.factors = {2, 2};
    const auto report = validate(spec);
    CHECK_FALSE(report.ok());
    CHECK(report.first_failure().find("not separable") != std::string::npos);
}
