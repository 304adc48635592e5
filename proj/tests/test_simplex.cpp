#include <doctest.h>

#include "bpsim/rational.hpp"
#include "bpsim/rng.hpp"
#include "bpsim/simplex.hpp"

using namespace bpsim;

TEST_CASE("simple bounded lp with duals") {
    // min -x - y  s.t.  x + y <= 1, x >= 0, y >= 0  ->  obj -1, dual 1
    LpProblem<double> p;
    p.c = {-1, -1};
    p.a_ub = {{1, 1}};
    p.b_ub = {1};
    const auto res = solve_lp(p);
    REQUIRE(res.status == LpStatus::Optimal);
    CHECK(res.objective == doctest::Approx(-1.0));
    CHECK(res.dual_ub[0] == doctest::Approx(1.0));
    // strong duality: c'x = -dual_ub' b_ub
    CHECK(res.objective == doctest::Approx(-res.dual_ub[0] * p.b_ub[0]));
}

TEST_CASE("equality constraints and negative rhs") {
    // min x1 + 2 x2  s.t.  x1 + x2 = 1,  -x1 <= -0.25  ->  x = (1, 0)... x1 >= 0.25
    LpProblem<double> p;
    p.c = {1, 2};
    p.a_eq = {{1, 1}};
    p.b_eq = {1};
    p.a_ub = {{-1, 0}};
    p.b_ub = {-0.25};
    const auto res = solve_lp(p);
    REQUIRE(res.status == LpStatus::Optimal);
    CHECK(res.x[0] == doctest::Approx(1.0));
    CHECK(res.x[1] == doctest::Approx(0.0));
    CHECK(res.objective == doctest::Approx(1.0));
    // duals satisfy c + A_ub' lam + A_eq' nu >= 0 with complementary slackness
    const double lam = res.dual_ub[0], nu = res.dual_eq[0];
    CHECK(lam >= -1e-9);
    CHECK(p.c[0] - lam + nu >= -1e-9);
    CHECK(p.c[1] + nu >= -1e-9);
    CHECK(res.objective == doctest::Approx(-lam * p.b_ub[0] - nu * p.b_eq[0]));
}

TEST_CASE("infeasible system is detected") {
    LpProblem<double> p;
    p.c = {1};
    p.a_eq = {{1}, {1}};
    p.b_eq = {1, 2};
    CHECK(solve_lp(p).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded objective is detected") {
    LpProblem<double> p;
    p.c = {-1};
    p.a_ub = {{-1}};
    p.b_ub = {0};
    CHECK(solve_lp(p).status == LpStatus::Unbounded);
}

TEST_CASE("rational arithmetic gives exact optima") {
    // min -(x + y)  s.t.  2x + y <= 3/2,  x + 3y <= 7/5
    LpProblem<Rational> p;
    p.c = {Rational(-1), Rational(-1)};
    p.a_ub = {{Rational(2), Rational(1)}, {Rational(1), Rational(3)}};
    p.b_ub = {Rational(3, 2), Rational(7, 5)};
    const auto res = solve_lp(p);
    REQUIRE(res.status == LpStatus::Optimal);
    // intersection: x = (31/50, 13/50)
    CHECK(res.x[0] == Rational(31, 50));
    CHECK(res.x[1] == Rational(13, 50));
    CHECK(res.objective == Rational(-44, 50));
}

TEST_CASE("random bounded LPs satisfy duality and match across scalar types") {
    Rng rng(808);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(uniform_below(rng, 3));
        const int m = 1 + static_cast<int>(uniform_below(rng, 3));
        LpProblem<double> p;
        p.c.resize(n);
        for (auto& c : p.c) c = static_cast<double>(uniform_below(rng, 11)) - 5.0;
        p.a_ub.assign(m, std::vector<double>(n));
        p.b_ub.resize(m);
        for (int i = 0; i < m; ++i) {
            for (auto& a : p.a_ub[i]) a = static_cast<double>(uniform_below(rng, 7)) - 3.0;
            p.b_ub[i] = static_cast<double>(uniform_below(rng, 8));
        }
        // box rows keep it bounded; x = 0 keeps it feasible
        for (int j = 0; j < n; ++j) {
            std::vector<double> row(n, 0.0);
            row[j] = 1.0;
            p.a_ub.push_back(row);
            p.b_ub.push_back(10.0);
        }
        const auto res = solve_lp(p);
        REQUIRE(res.status == LpStatus::Optimal);

        // duals: feasibility of reduced costs and strong duality
        double dual_obj = 0.0;
        for (std::size_t i = 0; i < p.b_ub.size(); ++i) {
            CHECK(res.dual_ub[i] >= -1e-9);
            dual_obj -= res.dual_ub[i] * p.b_ub[i];
        }
        for (int j = 0; j < n; ++j) {
            double reduced = p.c[j];
            for (std::size_t i = 0; i < p.b_ub.size(); ++i)
                reduced += res.dual_ub[i] * p.a_ub[i][j];
            CHECK(reduced >= -1e-9);
        }
        CHECK(res.objective == doctest::Approx(dual_obj).epsilon(1e-9));

        // exact rational solve agrees
        LpProblem<Rational> q;
        q.c.assign(p.c.begin(), p.c.end());
        q.b_ub.assign(p.b_ub.begin(), p.b_ub.end());
        for (const auto& row : p.a_ub) q.a_ub.emplace_back(row.begin(), row.end());
        const auto exact = solve_lp(q);
        REQUIRE(exact.status == LpStatus::Optimal);
        CHECK(res.objective == doctest::Approx(to_double(exact.objective)).epsilon(1e-9));
    }
}
