#include <doctest.h>

#include "p2pmc/milp.hpp"
#include "p2pmc/presolve.hpp"
#include "p2pmc/simplex.hpp"

#include <limits>
#include <random>

using namespace p2pmc;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double solve_reduced_and_check(const MilpInstance& inst, double direct_obj) {
    Reduced red = presolve_reduce(inst);
    REQUIRE(!red.infeasible);
    LpSolution s = simplex_solve(red.lp);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.objective == doctest::Approx(direct_obj).epsilon(1e-9));
    Assignment full = postsolve_assignment(red, s.x);
    Evaluation ev = evaluate(inst, full);
    CHECK(ev.max_row_violation <= 1e-9);
    CHECK(ev.max_bound_violation <= 1e-9);
    CHECK(ev.objective <= direct_obj + 1e-9); // cancellation can only improve
    return ev.objective;
}
} // namespace

TEST_CASE("presolve: fixed variables are substituted out") {
    MilpInstance inst;
    inst.add_variable("x", 3, 3, 1, false);
    inst.add_variable("y", 0, kInf, 2, false);
    inst.begin_row("r", RowSense::ge, 5);
    inst.add_coef(0, 1);
    inst.add_coef(1, 1);
    Reduced red = presolve_reduce(inst);
    CHECK(red.n_fixed == 1);
    CHECK(red.lp.n == 1);
    LpSolution s = simplex_solve(red.lp);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.objective == doctest::Approx(7.0)); // 3*1 + 2*2
    Assignment full = postsolve_assignment(red, s.x);
    CHECK(full.value(inst, "x") == doctest::Approx(3.0));
    CHECK(full.value(inst, "y") == doctest::Approx(2.0));
}

TEST_CASE("presolve: alias chains merge bounds and objectives") {
    MilpInstance inst;
    inst.add_variable("a", 1, 10, 1, false);
    inst.add_variable("b", 0, 5, 1, false);
    inst.add_variable("c", 2, 8, 1, false);
    inst.begin_row("ab", RowSense::eq, 0);
    inst.add_coef(0, 1);
    inst.add_coef(1, -1);
    inst.begin_row("bc", RowSense::eq, 0);
    inst.add_coef(1, 1);
    inst.add_coef(2, -1);
    Reduced red = presolve_reduce(inst);
    CHECK(red.n_aliased == 2);
    CHECK(red.lp.n == 1);
    CHECK(red.lp.xl[0] == 2);
    CHECK(red.lp.xu[0] == 5);
    LpSolution s = simplex_solve(red.lp);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.objective == doctest::Approx(6.0));
    Assignment full = postsolve_assignment(red, s.x);
    CHECK(full[0] == full[1]);
    CHECK(full[1] == full[2]);
    CHECK(evaluate(inst, full).max_row_violation <= 1e-12);
}

TEST_CASE("presolve: infeasible alias detected") {
    MilpInstance inst;
    inst.add_variable("a", 0, 1, 0, false);
    inst.add_variable("b", 3, 4, 0, false);
    inst.begin_row("ab", RowSense::eq, 0);
    inst.add_coef(0, 1);
    inst.add_coef(1, -1);
    Reduced red = presolve_reduce(inst);
    CHECK(red.infeasible);
}

TEST_CASE("presolve: complete trade graph collapses to a hub") {
    // five nodes, every ordered pair has an arc at uniform cost, plus an
    // expensive external source/sink per node
    const int N = 5;
    const double fee = 0.1;
    std::vector<double> demand = {2, -1, -1, 3, -3};
    MilpInstance inst;
    std::vector<std::vector<int>> arc(N, std::vector<int>(N, -1));
    std::vector<int> ext_in(N), ext_out(N);
    for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q)
            if (p != q)
                arc[p][q] = inst.add_variable("f" + std::to_string(p) + "_" + std::to_string(q),
                                              0, kInf, fee, false);
    for (int p = 0; p < N; ++p) {
        ext_in[p] = inst.add_variable("ein" + std::to_string(p), 0, kInf, 1.0, false);
        ext_out[p] = inst.add_variable("eout" + std::to_string(p), 0, kInf, 0.9, false);
    }
    for (int p = 0; p < N; ++p) {
        inst.begin_row("bal" + std::to_string(p), RowSense::eq, demand[p]);
        for (int q = 0; q < N; ++q) {
            if (q == p) continue;
            inst.add_coef(arc[q][p], 1.0);  // received by p
            inst.add_coef(arc[p][q], -1.0); // sent by p
        }
        inst.add_coef(ext_in[p], 1.0);
        inst.add_coef(ext_out[p], -1.0);
    }
    LpSolution direct = simplex_solve(lp_from_instance(inst));
    REQUIRE(direct.status == LpStatus::optimal);

    Reduced red = presolve_reduce(inst);
    CHECK(red.hubs.size() == 1);
    CHECK(red.n_arc_vars == N * (N - 1));
    CHECK(red.lp.n == 2 * N + 2 * N); // ext columns + in/out per node
    solve_reduced_and_check(inst, direct.objective);
}

TEST_CASE("presolve: reciprocity pairs then hub, exact pairwise expansion") {
    // buy[p][q] with reciprocity rows buy[p][q] == sell[q][p], a fee on buys
    const int N = 4;
    const double fee = 0.05;
    std::vector<double> demand = {1.5, -0.5, -2.0, 1.0};
    MilpInstance inst;
    std::vector<std::vector<int>> buy(N, std::vector<int>(N, -1)), sell(N, std::vector<int>(N, -1));
    std::vector<int> ein(N), eout(N);
    for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q)
            if (p != q) {
                buy[p][q] = inst.add_variable("b" + std::to_string(p) + "_" + std::to_string(q),
                                              0, kInf, fee, false);
                sell[p][q] = inst.add_variable("s" + std::to_string(p) + "_" + std::to_string(q),
                                               0, kInf, 0, false);
            }
    for (int p = 0; p < N; ++p) {
        ein[p] = inst.add_variable("ein" + std::to_string(p), 0, kInf, 1.0, false);
        eout[p] = inst.add_variable("eout" + std::to_string(p), 0, kInf, 0.8, false);
    }
    for (int p = 0; p < N; ++p) {
        inst.begin_row("bal" + std::to_string(p), RowSense::eq, demand[p]);
        for (int q = 0; q < N; ++q) {
            if (q == p) continue;
            inst.add_coef(buy[p][q], 1.0);
            inst.add_coef(sell[p][q], -1.0);
        }
        inst.add_coef(ein[p], 1.0);
        inst.add_coef(eout[p], -1.0);
    }
    for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q) {
            if (p == q) continue;
            inst.begin_row("rec" + std::to_string(p) + "_" + std::to_string(q), RowSense::eq, 0);
            inst.add_coef(buy[p][q], 1.0);
            inst.add_coef(sell[q][p], -1.0);
        }
    LpSolution direct = simplex_solve(lp_from_instance(inst));
    REQUIRE(direct.status == LpStatus::optimal);

    Reduced red = presolve_reduce(inst);
    CHECK(red.n_aliased == N * (N - 1));
    CHECK(red.hubs.size() == 1);
    LpSolution s = simplex_solve(red.lp);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.objective == doctest::Approx(direct.objective).epsilon(1e-9));
    Assignment full = postsolve_assignment(red, s.x);
    Evaluation ev = evaluate(inst, full);
    CHECK(ev.max_row_violation <= 1e-9);
    // reciprocity is exact because both sides share one representative
    for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q)
            if (p != q) CHECK(full[buy[p][q]] == full[sell[q][p]]);
}

TEST_CASE("presolve: random LPs with planted structure round-trip") {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int iter = 0; iter < 30; ++iter) {
        MilpInstance inst;
        int n = 6 + static_cast<int>(rng() % 5);
        for (int j = 0; j < n; ++j) {
            double lo = -1 - std::fabs(u(rng)), hi = 1 + std::fabs(u(rng));
            if (rng() % 5 == 0) lo = hi; // planted fixed var
            inst.add_variable("x" + std::to_string(j), lo, hi, u(rng), false);
        }
        int m = 2 + static_cast<int>(rng() % 4);
        for (int i = 0; i < m; ++i) {
            inst.begin_row("r" + std::to_string(i), i % 2 ? RowSense::le : RowSense::ge, u(rng));
            for (int j = 0; j < n; ++j)
                if (rng() % 3 == 0) inst.add_coef(j, u(rng));
        }
        // planted alias pair on the first two non-fixed vars
        int a = -1, b = -1;
        for (int j = 0; j < n && b < 0; ++j)
            if (inst.lb(j) != inst.ub(j)) (a < 0 ? a : b) = j;
        if (b >= 0) {
            inst.begin_row("alias", RowSense::eq, 0);
            inst.add_coef(a, 1.0);
            inst.add_coef(b, -1.0);
        }
        LpSolution direct = simplex_solve(lp_from_instance(inst));
        Reduced red = presolve_reduce(inst);
        if (direct.status == LpStatus::infeasible) {
            if (!red.infeasible) {
                LpSolution rs = simplex_solve(red.lp);
                CHECK(rs.status == LpStatus::infeasible);
            }
            continue;
        }
        REQUIRE(direct.status == LpStatus::optimal);
        REQUIRE(!red.infeasible);
        solve_reduced_and_check(inst, direct.objective);
    }
}
