#include <doctest.h>

#include "p2pmc/milp.hpp"
#include "p2pmc/solver.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace p2pmc;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

MilpInstance random_small_milp(std::mt19937_64& rng, int max_bins = 8) {
    std::uniform_real_distribution<double> u(-3, 3);
    std::uniform_int_distribution<int> nbin(1, max_bins), ncont(0, 3), nrow(1, 6);
    MilpInstance inst;
    int nb = nbin(rng), nc = ncont(rng);
    for (int j = 0; j < nb; ++j)
        inst.add_variable("b" + std::to_string(j), 0, 1, u(rng), true);
    for (int j = 0; j < nc; ++j)
        inst.add_variable("c" + std::to_string(j), 0, 2 + std::fabs(u(rng)), u(rng), false);
    int m = nrow(rng);
    for (int i = 0; i < m; ++i) {
        RowSense s = i % 3 == 0 ? RowSense::ge : RowSense::le;
        inst.begin_row("r" + std::to_string(i), s, u(rng));
        for (int j = 0; j < nb + nc; ++j)
            if ((rng() & 1) != 0) inst.add_coef(j, u(rng));
    }
    return inst;
}

// block-structured capacity/recourse instance for the staged path:
//   min c_u u + sum_b 3 y_b   s.t.  u <= 5,  y_b + u >= d_b
MilpInstance staged_demo(bool integer_u, bool integer_y, SolverHints& hints) {
    MilpInstance inst;
    const int B = 6;
    std::vector<double> d = {1, 2, 3, 4, 5, 6};
    int u = inst.add_variable("u", 0, kInf, 1.0, integer_u);
    std::vector<int> y(B);
    for (int b = 0; b < B; ++b)
        y[b] = inst.add_variable("y" + std::to_string(b), 0, kInf, 3.0, integer_y);
    inst.begin_row("cap", RowSense::le, 5);
    inst.add_coef(u, 1.0);
    for (int b = 0; b < B; ++b) {
        inst.begin_row("dem" + std::to_string(b), RowSense::ge, d[b]);
        inst.add_coef(y[b], 1.0);
        inst.add_coef(u, 1.0);
    }
    hints.blocks.var_block = {0, 1, 2, 3, 4, 5, 6};
    hints.blocks.row_block = {0, 1, 2, 3, 4, 5, 6};
    hints.blocks.num_blocks = B;
    hints.cut_group_of_block = {0, 0, 0, 1, 1, 1};
    hints.num_cut_groups = 2;
    hints.int_fix_group.assign(7, -1);
    if (integer_u) hints.int_fix_group[0] = 0;
    return inst;
}
} // namespace

TEST_CASE("solve_milp: forced rounding of a single binary") {
    MilpInstance inst;
    inst.add_variable("b", 0, 1, 1, true);
    inst.begin_row("r", RowSense::ge, 0.3);
    inst.add_coef(0, 1);
    MilpSolution s = solve_milp(inst);
    REQUIRE(s.status == SolveStatus::optimal);
    CHECK(s.objective == doctest::Approx(1.0));
    CHECK(s.assignment[0] == 1.0);
    CHECK(s.gap <= 1e-9);
}

TEST_CASE("solve_milp: 20 random MILPs match exhaustive enumeration") {
    std::mt19937_64 rng(31337);
    int feasible_count = 0;
    for (int iter = 0; iter < 20; ++iter) {
        MilpInstance inst = random_small_milp(rng);
        auto oracle = p2pmc_tests::enumerate_milp(inst);
        SolveOptions opts;
        MilpSolution s = solve_milp(inst, opts);
        if (oracle.feasible) {
            REQUIRE(s.status == SolveStatus::optimal);
            CHECK(std::fabs(s.objective - oracle.objective) <=
                  1e-8 * std::max(1.0, std::fabs(oracle.objective)));
            CHECK(check_solution(inst, s, opts).ok);
            CHECK(s.bound <= s.objective + 1e-9); // weak duality
            ++feasible_count;
        } else {
            CHECK(s.status == SolveStatus::infeasible);
        }
    }
    CHECK(feasible_count >= 10);
}

TEST_CASE("solve_milp: identical results at 1 and 4 workers") {
    std::mt19937_64 rng(2024);
    for (int iter = 0; iter < 6; ++iter) {
        MilpInstance inst = random_small_milp(rng, 10);
        SolveOptions o1;
        o1.workers = 1;
        SolveOptions o4;
        o4.workers = 4;
        MilpSolution s1 = solve_milp(inst, o1);
        MilpSolution s4 = solve_milp(inst, o4);
        REQUIRE(s1.status == s4.status);
        if (s1.status == SolveStatus::optimal) {
            CHECK(s1.objective == s4.objective);
            CHECK(s1.assignment.values() == s4.assignment.values());
            CHECK(s1.nodes == s4.nodes);
        }
    }
}

TEST_CASE("relax-and-fix: feasible with a valid gap on random MILPs") {
    std::mt19937_64 rng(555);
    for (int iter = 0; iter < 10; ++iter) {
        MilpInstance inst = random_small_milp(rng);
        SolveOptions exact;
        MilpSolution best = solve_milp(inst, exact);
        if (best.status != SolveStatus::optimal) continue;
        SolveOptions rnf;
        rnf.mode = SolveMode::relax_and_fix;
        MilpSolution h = solve_milp(inst, rnf);
        if (h.status != SolveStatus::feasible) continue; // flip retry may give up
        CHECK(check_solution(inst, h, rnf).ok);
        CHECK(h.objective >= best.objective - 1e-9);
        CHECK(h.bound <= best.objective + 1e-9);
        CHECK(h.gap >= -1e-12);
    }
}

TEST_CASE("check_solution: perturbation and fractional binary are flagged") {
    MilpInstance inst;
    inst.add_variable("b", 0, 1, 1, true);
    inst.add_variable("x", 0, 10, 1, false);
    inst.begin_row("r", RowSense::eq, 3);
    inst.add_coef(0, 1);
    inst.add_coef(1, 1);
    MilpSolution sol;
    sol.assignment = Assignment(2);
    sol.assignment[0] = 1;
    sol.assignment[1] = 2;
    CHECK(check_solution(inst, sol).ok);

    sol.assignment[1] = 3; // row now violated by 1
    CheckReport rep = check_solution(inst, sol);
    CHECK(!rep.ok);
    CHECK(rep.max_row_violation == doctest::Approx(1.0));

    sol.assignment[0] = 0.5;
    sol.assignment[1] = 2.5;
    rep = check_solution(inst, sol);
    CHECK(rep.max_integrality_violation == doctest::Approx(0.5));
}

TEST_CASE("solve_lp ignores integrality") {
    MilpInstance inst;
    inst.add_variable("b", 0, 1, 1, true);
    inst.begin_row("r", RowSense::ge, 0.3);
    inst.add_coef(0, 1);
    MilpSolution s = solve_lp(inst);
    REQUIRE(s.status == SolveStatus::optimal);
    CHECK(s.objective == doctest::Approx(0.3));
}

TEST_CASE("staged: LP decomposition matches the direct solve") {
    SolverHints hints;
    MilpInstance inst = staged_demo(false, false, hints);
    MilpSolution direct = solve_lp(inst);
    REQUIRE(direct.status == SolveStatus::optimal);

    SolveOptions opts;
    opts.mode = SolveMode::lp_only;
    opts.direct_rows_threshold = 0; // force the staged path
    opts.workers = 2;
    MilpSolution staged = solve_milp(inst, opts, &hints);
    REQUIRE(staged.status == SolveStatus::optimal);
    CHECK(staged.objective == doctest::Approx(direct.objective).epsilon(1e-7));
    CHECK(staged.bound == doctest::Approx(direct.objective).epsilon(1e-7));
    CHECK(check_solution(inst, staged).ok);
}

TEST_CASE("staged: relax-and-fix with master integers and block integers") {
    SolverHints hints;
    MilpInstance inst = staged_demo(true, true, hints);
    SolveOptions exact;
    MilpSolution best = solve_milp(inst, exact);
    REQUIRE(best.status == SolveStatus::optimal);

    SolveOptions opts;
    opts.mode = SolveMode::relax_and_fix;
    opts.direct_rows_threshold = 0;
    opts.workers = 2;
    MilpSolution staged = solve_milp(inst, opts, &hints);
    REQUIRE(staged.status == SolveStatus::feasible);
    CHECK(check_solution(inst, staged).ok);
    CHECK(staged.objective >= best.objective - 1e-9);
    CHECK(staged.bound <= best.objective + 1e-7);
    CHECK(staged.gap >= -1e-12);
    // this instance is easy enough that relax-and-fix lands on the optimum
    CHECK(staged.objective == doctest::Approx(best.objective).epsilon(1e-6));

    // determinism across worker counts
    SolveOptions o1 = opts;
    o1.workers = 1;
    MilpSolution s1 = solve_milp(inst, o1, &hints);
    CHECK(s1.objective == staged.objective);
    CHECK(s1.assignment.values() == staged.assignment.values());
}
