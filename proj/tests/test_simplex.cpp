#include <doctest.h>

#include "p2pmc/milp.hpp"
#include "p2pmc/simplex.hpp"
#include "support/oracles.hpp"

#include <limits>
#include <random>

using namespace p2pmc;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

MilpInstance random_bounded_lp(std::mt19937_64& rng, int max_vars = 6, int max_rows = 6) {
    std::uniform_real_distribution<double> u(-3, 3);
    std::uniform_int_distribution<int> nv(1, max_vars), nr(0, max_rows), sense3(0, 2);
    MilpInstance inst;
    int n = nv(rng);
    for (int j = 0; j < n; ++j) {
        double lo = -std::fabs(u(rng)) - 0.2;
        double hi = std::fabs(u(rng)) + 0.2;
        inst.add_variable("x" + std::to_string(j), lo, hi, u(rng), false);
    }
    int m = nr(rng);
    for (int i = 0; i < m; ++i) {
        RowSense s = sense3(rng) == 0 ? RowSense::le : sense3(rng) == 0 ? RowSense::eq : RowSense::ge;
        inst.begin_row("r" + std::to_string(i), s, u(rng));
        int nnz = 0;
        for (int j = 0; j < n; ++j)
            if ((rng() & 3) != 0) {
                inst.add_coef(j, u(rng));
                ++nnz;
            }
        if (nnz == 0) inst.add_coef(0, 1.0);
    }
    return inst;
}
} // namespace

TEST_CASE("simplex: bound-tight one variable LP") {
    MilpInstance inst;
    inst.add_variable("x", 0, kInf, 1, false);
    inst.begin_row("c", RowSense::ge, 2);
    inst.add_coef(0, 1);
    LpSolution s = simplex_solve(lp_from_instance(inst));
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.x[0] == doctest::Approx(2.0));
}

TEST_CASE("simplex: two-variable vertex optimum") {
    MilpInstance inst;
    inst.add_variable("x", 0, kInf, -1, false);
    inst.add_variable("y", 0, kInf, -1, false);
    inst.begin_row("cap", RowSense::le, 1);
    inst.add_coef(0, 1);
    inst.add_coef(1, 1);
    LpSolution s = simplex_solve(lp_from_instance(inst));
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.objective == doctest::Approx(-1.0).epsilon(1e-12));
    // vertex oracle over the 3 corners agrees
    MilpInstance bounded = inst;
    bounded.set_bounds(0, 0, 2);
    bounded.set_bounds(1, 0, 2);
    auto oracle = p2pmc_tests::enumerate_vertices(bounded);
    REQUIRE(oracle.feasible);
    CHECK(oracle.objective == doctest::Approx(-1.0));
}

TEST_CASE("simplex: empty feasible region") {
    MilpInstance inst;
    inst.add_variable("x", 0, kInf, 1, false);
    inst.begin_row("c", RowSense::le, -1);
    inst.add_coef(0, 1);
    LpSolution s = simplex_solve(lp_from_instance(inst));
    CHECK(s.status == LpStatus::infeasible);
}

TEST_CASE("simplex: unbounded ray detected") {
    MilpInstance inst;
    inst.add_variable("x", 0, kInf, -1, false);
    LpSolution s = simplex_solve(lp_from_instance(inst));
    CHECK(s.status == LpStatus::unbounded);
}

TEST_CASE("simplex: equality row with free variable") {
    MilpInstance inst;
    inst.add_variable("x", -kInf, kInf, 1, false);
    inst.add_variable("y", 0, 4, 0.5, false);
    inst.begin_row("eq", RowSense::eq, 3);
    inst.add_coef(0, 1);
    inst.add_coef(1, 1);
    LpSolution s = simplex_solve(lp_from_instance(inst));
    REQUIRE(s.status == LpStatus::optimal);
    // x = 3 - y; cost = 3 - y + 0.5 y = 3 - 0.5 y minimized at y = 4
    CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s.x[1] == doctest::Approx(4.0));
}

TEST_CASE("simplex: 50 random bounded LPs match vertex enumeration") {
    std::mt19937_64 rng(20240517);
    int solved = 0;
    for (int iter = 0; iter < 50; ++iter) {
        MilpInstance inst = random_bounded_lp(rng);
        auto oracle = p2pmc_tests::enumerate_vertices(inst);
        LpSolution s = simplex_solve(lp_from_instance(inst));
        if (oracle.feasible) {
            REQUIRE(s.status == LpStatus::optimal);
            CHECK(std::fabs(s.objective - oracle.objective) <=
                  1e-8 * std::max(1.0, std::fabs(oracle.objective)));
            ++solved;
        } else {
            CHECK(s.status == LpStatus::infeasible);
        }
    }
    CHECK(solved >= 20); // the generator must exercise plenty of feasible cases
}

TEST_CASE("simplex: deterministic resolve") {
    std::mt19937_64 rng(99);
    MilpInstance inst = random_bounded_lp(rng, 6, 5);
    LpSolution a = simplex_solve(lp_from_instance(inst));
    LpSolution b = simplex_solve(lp_from_instance(inst));
    REQUIRE(a.status == b.status);
    CHECK(a.objective == b.objective);
    CHECK(a.x == b.x);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("simplex: warm start reaches the same optimum after a bound change") {
    MilpInstance inst;
    inst.add_variable("x", 0, 10, 1, false);
    inst.add_variable("y", 0, 10, 2, false);
    inst.begin_row("c1", RowSense::ge, 4);
    inst.add_coef(0, 1);
    inst.add_coef(1, 1);
    Lp lp = lp_from_instance(inst);
    LpSolution cold = simplex_solve(lp);
    REQUIRE(cold.status == LpStatus::optimal);
    CHECK(cold.objective == doctest::Approx(4.0));

    // tighten x and re-solve warm; optimum moves to x=2,y=2
    std::vector<double> xl = lp.xl, xu = lp.xu;
    xu[0] = 2;
    SimplexOptions so;
    so.xl_override = &xl;
    so.xu_override = &xu;
    so.warm = &cold.basis;
    LpSolution warm = simplex_solve(lp, so);
    REQUIRE(warm.status == LpStatus::optimal);
    CHECK(warm.objective == doctest::Approx(6.0));

    SimplexOptions cold2;
    cold2.xl_override = &xl;
    cold2.xu_override = &xu;
    LpSolution ref = simplex_solve(lp, cold2);
    CHECK(ref.objective == doctest::Approx(warm.objective));
}

TEST_CASE("simplex: optimality certificates on mid-size random LPs") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int iter = 0; iter < 8; ++iter) {
        MilpInstance inst;
        int n = 120, m = 90;
        for (int j = 0; j < n; ++j)
            inst.add_variable("x" + std::to_string(j), -2 - std::fabs(u(rng)),
                              2 + std::fabs(u(rng)), u(rng), false);
        for (int i = 0; i < m; ++i) {
            RowSense s = i % 4 == 0 ? RowSense::eq : (i % 2 ? RowSense::le : RowSense::ge);
            inst.begin_row("r" + std::to_string(i), s, u(rng));
            for (int k = 0; k < 6; ++k)
                inst.add_coef(static_cast<int>(rng() % n), u(rng));
        }
        LpSolution s = simplex_solve(lp_from_instance(inst));
        if (s.status != LpStatus::optimal) continue; // infeasible randoms are fine
        Assignment a(n);
        for (int j = 0; j < n; ++j) a[j] = s.x[j];
        Evaluation ev = evaluate(inst, a);
        CHECK(ev.max_row_violation <= 1e-7);
        CHECK(ev.max_bound_violation <= 1e-7);
        CHECK(ev.objective == doctest::Approx(s.objective).epsilon(1e-9));
        // reduced-cost sign conditions certify optimality
        std::vector<double> d(n);
        for (int j = 0; j < n; ++j) d[j] = inst.obj(j);
        for (int i = 0; i < m; ++i) {
            auto vars = inst.row_vars(i);
            auto vals = inst.row_values(i);
            for (size_t k = 0; k < vars.size(); ++k) d[vars[k]] -= s.y[i] * vals[k];
        }
        for (int j = 0; j < n; ++j) {
            bool at_lo = std::fabs(s.x[j] - inst.lb(j)) < 1e-7;
            bool at_hi = std::fabs(s.x[j] - inst.ub(j)) < 1e-7;
            if (at_lo && !at_hi) CHECK(d[j] >= -1e-6);
            else if (at_hi && !at_lo) CHECK(d[j] <= 1e-6);
            else if (!at_lo && !at_hi) CHECK(std::fabs(d[j]) <= 1e-6);
        }
    }
}

TEST_CASE("simplex: duals predict rhs sensitivity") {
    // min 2a + 3b  s.t. a + b >= 5, a <= 3
    MilpInstance inst;
    inst.add_variable("a", 0, 3, 2, false);
    inst.add_variable("b", 0, kInf, 3, false);
    inst.begin_row("demand", RowSense::ge, 5);
    inst.add_coef(0, 1);
    inst.add_coef(1, 1);
    LpSolution s = simplex_solve(lp_from_instance(inst));
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.objective == doctest::Approx(12.0));
    REQUIRE(s.y.size() == 1);
    CHECK(s.y[0] == doctest::Approx(3.0)); // marginal unit comes from b

    MilpInstance inst2;
    inst2.add_variable("a", 0, 3, 2, false);
    inst2.add_variable("b", 0, kInf, 3, false);
    inst2.begin_row("demand", RowSense::ge, 6);
    inst2.add_coef(0, 1);
    inst2.add_coef(1, 1);
    LpSolution s2 = simplex_solve(lp_from_instance(inst2));
    CHECK(s2.objective - s.objective == doctest::Approx(s.y[0]).epsilon(1e-9));
}
