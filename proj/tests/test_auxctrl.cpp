#include <doctest.h>

#include <cmath>

#include "bpsim/auxctrl.hpp"
#include "bpsim/errors.hpp"
#include "test_util.hpp"

using namespace bpsim;
using namespace bpsim::testutil;

namespace {

// 1e-3 grid oracle for the auxiliary minimization (K <= 2)
std::vector<double> grid_minimizer(const AuxObjective& obj, std::span<const double> h,
                                   double v_param, double delta_max, int dim) {
    const int steps = static_cast<int>(delta_max / 1e-3);
    auto value = [&](const std::vector<double>& z) {
        double val = v_param * obj.eval(z);
        for (int k = 0; k < dim; ++k) val += h[k] * z[k];
        return val;
    };
    std::vector<double> best;
    double best_val = 1e300;
    std::vector<double> z(dim, 0.0);
    if (dim == 1) {
        for (int i = 0; i <= steps; ++i) {
            z[0] = i * 1e-3;
            const double val = value(z);
            if (val < best_val) {
                best_val = val;
                best = z;
            }
        }
    } else {
        for (int i = 0; i <= steps; i += 4)
            for (int j = 0; j <= steps; j += 4) {
                z[0] = i * 1e-3;
                z[1] = j * 1e-3;
                const double val = value(z);
                if (val < best_val) {
                    best_val = val;
                    best = z;
                }
            }
    }
    return best;
}

double objective_with_h(const AuxSpec& aux, std::span<const double> h, double v,
                        const std::vector<double>& z) {
    double val = v * aux.objective.eval(z);
    for (int k = 0; k < aux.attribute_dim; ++k) val += h[k] * z[k];
    return val;
}

AuxSpec make_aux(AuxObjectiveKind kind, int dim, double delta_max,
                 const ScenarioSpec& spec) {
    AuxSpec aux;
    aux.attribute_dim = dim;
    aux.delta_max = delta_max;
    aux.objective.kind = kind;
    aux.objective.c.assign(dim, 1.0);
    aux.objective.center.assign(dim, 1.0);
    aux.objective.a.assign(dim, 1.0);
    for (int s = 0; s < spec.chain.state_count(); ++s) {
        std::vector<std::vector<double>> rows;
        for (int k = 0; k < spec.action_count(s); ++k)
            rows.push_back(std::vector<double>(dim, 0.0));
        aux.attributes.push_back(std::move(rows));
    }
    return aux;
}

}  // namespace

TEST_CASE("linear objective with nonnegative coefficients never activates z") {
    auto spec = single_queue_spec(1.0, 2.0);
    auto aux = make_aux(AuxObjectiveKind::Linear, 2, 3.0, spec);
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> h{uniform_range(rng, 0.0, 20.0), uniform_range(rng, 0.0, 20.0)};
        const auto z = choose_aux(aux, h, uniform_range(rng, 1.0, 100.0));
        CHECK(z[0] == 0.0);
        CHECK(z[1] == 0.0);
    }
}

TEST_CASE("quadratic objective hits its stationary point when unconstrained") {
    auto spec = single_queue_spec(1.0, 2.0);
    auto aux = make_aux(AuxObjectiveKind::QuadraticDiagonal, 1, 2.0, spec);
    const std::vector<double> h{0.0};
    const auto z = choose_aux(aux, h, 1.0);  // min 1/2 (z-1)^2 on [0, 2]
    CHECK(z[0] == doctest::Approx(1.0));
}

TEST_CASE("log objective saturates when the virtual queue is empty") {
    auto spec = single_queue_spec(1.0, 2.0);
    auto aux = make_aux(AuxObjectiveKind::LogSum, 1, 2.0, spec);
    const std::vector<double> h{0.0};
    CHECK(choose_aux(aux, h, 10.0)[0] == doctest::Approx(2.0));
}

TEST_CASE("choose_aux dominates the 1e-3 grid oracle for every catalog entry") {
    auto spec = single_queue_spec(1.0, 2.0);
    Rng rng(404);
    for (auto kind : {AuxObjectiveKind::Linear, AuxObjectiveKind::QuadraticDiagonal,
                      AuxObjectiveKind::LogSum}) {
        for (int dim : {1, 2}) {
            auto aux = make_aux(kind, dim, 2.0, spec);
            if (kind == AuxObjectiveKind::Linear)
                for (auto& c : aux.objective.c) c = uniform_range(rng, -2.0, 2.0);
            for (int probe = 0; probe < 34; ++probe) {
                std::vector<double> h(dim);
                for (auto& x : h) x = uniform_range(rng, 0.0, 30.0);
                const double v = uniform_range(rng, 1.0, 50.0);
                const auto exact = choose_aux(aux, h, v);
                const auto grid = grid_minimizer(aux.objective, h, v, 2.0, dim);
                const double exact_val = objective_with_h(aux, h, v, exact);
                const double grid_val = objective_with_h(aux, h, v, grid);
                CHECK(exact_val <= grid_val + 1e-9);
                CHECK(grid_val <= exact_val + 0.05);  // grid resolution slack
            }
        }
    }
}

TEST_CASE("zero virtual queues reduce the action rule to pure max-weight") {
    auto loaded = load("auxdemo");
    REQUIRE(loaded.aux.has_value());
    const auto& spec = loaded.spec;
    const std::vector<double> h{0.0};
    Rng rng(2);
    for (int probe = 0; probe < 100; ++probe) {
        const int s = static_cast<int>(uniform_below(rng, spec.chain.state_count()));
        const std::vector<double> q{static_cast<double>(uniform_below(rng, 50))};
        const auto d = aux_bp_decide(spec, *loaded.aux, s, q, h, 30.0);
        // max-weight on backlogs alone
        int best = 0;
        double best_val = -1e300;
        for (int k = 0; k < spec.action_count(s); ++k) {
            const auto& row = spec.actions[s][k];
            const double val = q[0] * (row.services[0] - row.arrivals[0]);
            if (val > best_val) {
                best_val = val;
                best = k;
            }
        }
        CHECK(d.action_index == best);
    }
}

TEST_CASE("a large virtual queue flips the decision past the computed threshold") {
    auto loaded = load("auxdemo");
    const auto& spec = loaded.spec;
    const auto& aux = *loaded.aux;
    // state L (no arrivals): serve gains h*y - q*mu... idle is 0.
    // serve beats idle iff 2h + q(2 - 0) - ... threshold from the two rows:
    const std::vector<double> q{0.0};
    for (double h0 : {0.0, 0.4, 0.6, 2.0}) {
        const std::vector<double> h{h0};
        const auto d = aux_bp_decide(spec, aux, 1, q, h, 30.0);
        CHECK(d.action_index == (2.0 * h0 > 0.0 ? 1 : 0));
    }
}

TEST_CASE("aux action rule matches naive enumeration") {
    Rng rng(606);
    for (const char* name : {"tandem", "multihop7"}) {
        auto loaded = load(name);
        const auto& spec = loaded.spec;
        auto aux = make_aux(AuxObjectiveKind::LogSum, 2, spec.delta_max, spec);
        for (auto& per_state : aux.attributes)
            for (auto& y : per_state)
                for (auto& v : y)
                    v = static_cast<double>(uniform_below(rng, 7)) - 3.0;
        for (int probe = 0; probe < 1000; ++probe) {
            const int s = static_cast<int>(uniform_below(rng, spec.chain.state_count()));
            std::vector<double> q(spec.queue_count), h(2);
            for (auto& x : q) x = static_cast<double>(uniform_below(rng, 1000));
            for (auto& x : h) x = static_cast<double>(uniform_below(rng, 500));
            CHECK(aux_bp_decide(spec, aux, s, q, h, 100.0).action_index ==
                  naive_aux_argmax(spec, aux, s, q, h));
        }
    }
}

TEST_CASE("auxdemo run keeps the virtual queue bounded and z below y on average") {
    auto loaded = load("auxdemo");
    RunConfig config;
    config.spec = &loaded.spec;
    config.v_param = 20.0;
    config.horizon = 100000;
    config.seed = 17;
    const auto rep = aux_run(config, *loaded.aux);
    CHECK(rep.h_avg[0] < 10.0 * loaded.aux->delta_max);
    CHECK(rep.z_bar[0] <= rep.y_bar[0] + 0.01);
    CHECK(std::isfinite(rep.objective_at_z_bar));
}

TEST_CASE("virtual queues replay their recursion exactly") {
    auto loaded = load("auxdemo");
    RunConfig config;
    config.spec = &loaded.spec;
    config.v_param = 20.0;
    config.horizon = 5000;
    config.seed = 3;
    config.retain_backlog_trace = true;
    const auto rep = aux_run(config, *loaded.aux);
    REQUIRE(rep.h_trace.size() == 5000);
    for (std::size_t t = 0; t + 1 < rep.h_trace.size(); ++t) {
        const double expect =
            std::max(rep.h_trace[t][0] - rep.y_trace[t][0], 0.0) + rep.z_trace[t][0];
        REQUIRE(rep.h_trace[t + 1][0] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("zero attributes with a positive linear cost freeze the aux layer") {
    auto spec = single_queue_spec(0.0, 1.0);
    auto aux = make_aux(AuxObjectiveKind::Linear, 1, 2.0, spec);  // c = 1 > 0, y = 0
    RunConfig config;
    config.spec = &spec;
    config.v_param = 10.0;
    config.horizon = 20000;
    config.seed = 1;
    const auto rep = aux_run(config, aux);
    CHECK(rep.z_bar[0] == 0.0);
    CHECK(rep.h_avg[0] == 0.0);
}

TEST_CASE("attributes matching the forced aux vector keep h at the bound") {
    // cost favors z = delta_max every slot; y = delta_max for every action
    auto spec = single_queue_spec(0.0, 1.0);
    auto aux = make_aux(AuxObjectiveKind::Linear, 1, 2.0, spec);
    aux.objective.c = {-1.0};
    for (auto& per_state : aux.attributes)
        for (auto& y : per_state) y = {2.0};
    RunConfig config;
    config.spec = &spec;
    config.v_param = 10.0;
    config.horizon = 20000;
    config.seed = 1;
    const auto rep = aux_run(config, aux);
    CHECK(rep.h_max <= 2.0 + 1e-9);
    CHECK(rep.z_bar[0] == doctest::Approx(2.0));
}
