#include <doctest.h>

#include "p2pmc/milp.hpp"
#include "support/mps_reader.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

using namespace p2pmc;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

MilpInstance one_var_lp() {
    MilpInstance inst("GOLDEN1");
    int x = inst.add_variable("x", 0, kInf, 1.0, false);
    inst.begin_row("lo", RowSense::ge, 2.0);
    inst.add_coef(x, 1.0);
    return inst;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return std::string(std::istreambuf_iterator<char>(f), {});
}

bool same_instance(const MilpInstance& a, const MilpInstance& b) {
    if (a.num_vars() != b.num_vars() || a.num_rows() != b.num_rows()) return false;
    for (int j = 0; j < a.num_vars(); ++j) {
        if (a.var_name(j) != b.var_name(j)) return false;
        if (a.lb(j) != b.lb(j) || a.ub(j) != b.ub(j) || a.obj(j) != b.obj(j)) return false;
        if (a.is_integer(j) != b.is_integer(j)) return false;
    }
    for (int i = 0; i < a.num_rows(); ++i) {
        if (a.row_name(i) != b.row_name(i)) return false;
        if (a.sense(i) != b.sense(i) || a.rhs(i) != b.rhs(i)) return false;
        auto av = a.row_vars(i), bv = b.row_vars(i);
        auto ax = a.row_values(i), bx = b.row_values(i);
        std::vector<std::pair<int, double>> ap, bp;
        for (size_t k = 0; k < av.size(); ++k) ap.emplace_back(av[k], ax[k]);
        for (size_t k = 0; k < bv.size(); ++k) bp.emplace_back(bv[k], bx[k]);
        std::sort(ap.begin(), ap.end());
        std::sort(bp.begin(), bp.end());
        if (ap != bp) return false;
    }
    return true;
}
} // namespace

TEST_CASE("evaluate: empty instance and point") {
    MilpInstance inst;
    Assignment a;
    Evaluation ev = evaluate(inst, a);
    CHECK(ev.objective == 0.0);
    CHECK(ev.max_bound_violation == 0.0);
    CHECK(ev.max_row_violation == 0.0);
    CHECK(ev.max_integrality_violation == 0.0);
}

TEST_CASE("evaluate: tight bound LP") {
    MilpInstance inst = one_var_lp();
    Assignment a(1);
    a[0] = 2.0;
    Evaluation ev = evaluate(inst, a);
    CHECK(ev.objective == doctest::Approx(2.0));
    CHECK(ev.max_row_violation == 0.0);
    CHECK(ev.max_bound_violation == 0.0);
}

TEST_CASE("evaluate: fractional binary reports distance to nearest integer") {
    MilpInstance inst;
    inst.add_variable("b", 0, 1, 0, true);
    Assignment a(1);
    a[0] = 0.4;
    CHECK(evaluate(inst, a).max_integrality_violation == doctest::Approx(0.4));
}

TEST_CASE("evaluate: missing variable in named point errors") {
    MilpInstance inst = one_var_lp();
    CHECK_THROWS_WITH_AS(Assignment::from_named(inst, {}, true, nullptr),
                         "assignment missing variable 'x'", P2pmcError);
}

TEST_CASE("evaluate is linear in the point") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3, 3);
    MilpInstance inst;
    for (int j = 0; j < 5; ++j)
        inst.add_variable("v" + std::to_string(j), -10, 10, u(rng), false);
    for (int i = 0; i < 3; ++i) {
        inst.begin_row("r" + std::to_string(i), RowSense::le, u(rng));
        for (int j = 0; j < 5; ++j) inst.add_coef(j, u(rng));
    }
    Assignment p(5), q(5);
    for (int j = 0; j < 5; ++j) {
        p[j] = u(rng);
        q[j] = u(rng);
    }
    for (double alpha : {0.0, 0.25, 0.5, 1.0}) {
        Assignment m(5);
        for (int j = 0; j < 5; ++j) m[j] = alpha * p[j] + (1 - alpha) * q[j];
        double expect = alpha * evaluate(inst, p).objective + (1 - alpha) * evaluate(inst, q).objective;
        CHECK(evaluate(inst, m).objective == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("export_mps: empty instance is the minimal skeleton") {
    MilpInstance inst("EMPTY");
    CHECK(export_mps(inst) == "NAME          EMPTY\nROWS\n N  COST\nENDATA\n");
}

TEST_CASE("export_mps: golden one-variable LP") {
    MangledInstance m = mangle_names(one_var_lp());
    std::string mps = export_mps(m.instance);
    std::string golden = read_file(std::string(P2PMC_SOURCE_DIR) + "/tests/fixtures/golden_lp1.mps");
    CHECK(mps == golden);
}

TEST_CASE("export_mps: binary column is wrapped in INTORG/INTEND") {
    MilpInstance inst;
    inst.add_variable("c", 0, kInf, 1, false);
    inst.add_variable("b", 0, 1, 2, true);
    inst.begin_row("r1", RowSense::ge, 1);
    inst.add_coef(0, 1);
    inst.add_coef(1, 1);
    std::string mps = export_mps(inst);
    size_t org = mps.find("'INTORG'");
    size_t bcol = mps.find("\n    b ");
    size_t end = mps.find("'INTEND'");
    REQUIRE(org != std::string::npos);
    REQUIRE(bcol != std::string::npos);
    REQUIRE(end != std::string::npos);
    CHECK(org < bcol);
    CHECK(bcol < end);
}

TEST_CASE("export_mps: long names are rejected") {
    MilpInstance inst;
    inst.add_variable("averylongvariablename", 0, 1, 1, false);
    CHECK_THROWS_AS((void)export_mps(inst), P2pmcError);
    MangledInstance m = mangle_names(inst);
    CHECK(m.instance.var_name(0) == "C0000001");
    CHECK(m.dictionary.at(0).second == "averylongvariablename");
    CHECK_NOTHROW((void)export_mps(m.instance));
}

TEST_CASE("mps round trip preserves everything exactly") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-5, 5);
    std::uniform_int_distribution<int> nv(1, 8), nr(0, 6), pick(0, 3);
    for (int iter = 0; iter < 25; ++iter) {
        MilpInstance inst("RT" + std::to_string(iter));
        int n = nv(rng);
        for (int j = 0; j < n; ++j) {
            double lo = u(rng), hi = lo + std::fabs(u(rng));
            int kind = pick(rng);
            bool integer = kind == 3;
            if (kind == 1) lo = -kInf;
            if (kind == 2) hi = kInf;
            if (integer) {
                lo = 0;
                hi = 1;
            }
            inst.add_variable("V" + std::to_string(j), lo, hi, u(rng) / 3.0, integer);
        }
        int m = nr(rng);
        for (int i = 0; i < m; ++i) {
            RowSense s = i % 3 == 0 ? RowSense::le : (i % 3 == 1 ? RowSense::eq : RowSense::ge);
            inst.begin_row("ROW" + std::to_string(i), s, u(rng));
            for (int j = 0; j < n; ++j)
                if ((rng() & 3) != 0) inst.add_coef(j, u(rng));
        }
        MangledInstance mg = mangle_names(inst);
        MilpInstance back = p2pmc_tests::read_mps(export_mps(mg.instance));
        CHECK(same_instance(mg.instance, back));
    }
}

TEST_CASE("import_solution: basic, empty, unknown") {
    MilpInstance inst = one_var_lp();

    ImportedSolution s1 = import_solution(inst, "x 2.0\n");
    CHECK(s1.assignment.value(inst, "x") == doctest::Approx(2.0));
    CHECK(s1.warnings.empty());

    ImportedSolution s2 = import_solution(inst, "");
    CHECK(s2.assignment[0] == 0.0);
    REQUIRE(s2.warnings.size() == 1);
    CHECK(s2.warnings[0].find("'x'") != std::string::npos);

    ImportedSolution s3 = import_solution(inst, "# comment line\nx 1.5\nbogus 7\n");
    CHECK(s3.assignment[0] == doctest::Approx(1.5));
    REQUIRE(s3.warnings.size() == 1);
    CHECK(s3.warnings[0].find("bogus") != std::string::npos);
}

TEST_CASE("import_solution: unparseable line reports its number") {
    MilpInstance inst = one_var_lp();
    CHECK_THROWS_WITH_AS((void)import_solution(inst, "x 2.0\nx nonsense\n"),
                         "solution line 2: bad value 'nonsense'", P2pmcError);
}

TEST_CASE("content_hash is order-sensitive and stable") {
    MilpInstance a = one_var_lp();
    MilpInstance b = one_var_lp();
    CHECK(a.content_hash() == b.content_hash());
    b.set_obj(0, 2.0);
    CHECK(a.content_hash() != b.content_hash());
}

TEST_CASE("verify flags broken instances") {
    MilpInstance inst;
    inst.add_variable("x", 1, 0, 0, false); // inverted bounds
    inst.add_variable("x", 0, 1, 0, false); // duplicate name
    auto problems = inst.verify();
    CHECK(problems.size() >= 2);
    CHECK(one_var_lp().verify().empty());
}
