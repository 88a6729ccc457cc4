#ifndef P2PMC_MODEL_HPP
#define P2PMC_MODEL_HPP

#include "p2pmc/solver.hpp"
#include "p2pmc/types.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace p2pmc {

// Index arithmetic for every decision variable of the deterministic
// equivalent. First-stage variables carry no scenario index; reserve and
// third-stage families exist for battery peers only. All offsets follow
// declaration order in the built instance.
class VariableCatalog {
public:
    int P = 0, B = 0, H = 0, M = 0, L = 0, A = 0;
    std::vector<int32_t> battery_peer; // battery index -> peer index
    std::vector<int32_t> peer_battery; // peer index -> battery index or -1

    int64_t n_vars = 0;

    // first stage
    int64_t buy(int p, int t) const { return buy0 + int64_t(p) * H + t; }
    int64_t sell(int p, int t) const { return sell0 + int64_t(p) * H + t; }
    int64_t rup(int b, int t) const { return rup0 + int64_t(b) * H + t; }
    int64_t rdn(int b, int t) const { return rdn0 + int64_t(b) * H + t; }
    // second stage
    int64_t ch2(int b, int t, int l) const { return ch20 + (int64_t(b) * H + t) * L + l; }
    int64_t dis2(int b, int t, int l) const { return dis20 + (int64_t(b) * H + t) * L + l; }
    int64_t d2(int b, int t, int l) const { return d20 + (int64_t(b) * H + t) * L + l; }
    int64_t soc2(int b, int t, int l) const { return soc20 + (int64_t(b) * (H + 1) + t) * L + l; }
    int64_t eidb(int p, int t, int l) const { return eidb0 + (int64_t(p) * H + t) * L + l; }
    int64_t eids(int p, int t, int l) const { return eids0 + (int64_t(p) * H + t) * L + l; }
    int64_t iib(int p, int q, int t, int l) const {
        return iib0 + (pair_p(p, q) * H + t) * L + l;
    }
    int64_t iis(int p, int q, int t, int l) const {
        return iis0 + (pair_p(p, q) * H + t) * L + l;
    }
    // third stage (battery indices)
    int64_t ch3(int b, int t, int m, int l, int a) const {
        return ch30 + ((((int64_t(b) * H + t) * M + m) * L + l)) * A + a;
    }
    int64_t dis3(int b, int t, int m, int l, int a) const {
        return dis30 + ((((int64_t(b) * H + t) * M + m) * L + l)) * A + a;
    }
    int64_t d3(int b, int t, int m, int l, int a) const {
        return d30 + ((((int64_t(b) * H + t) * M + m) * L + l)) * A + a;
    }
    int64_t soc3(int b, int t, int m, int l, int a) const {
        return soc30 + ((((int64_t(b) * H + t) * (M + 1) + m) * L + l)) * A + a;
    }
    int64_t ertb(int b, int t, int m, int l, int a) const {
        return ertb0 + ((((int64_t(b) * H + t) * M + m) * L + l)) * A + a;
    }
    int64_t erts(int b, int t, int m, int l, int a) const {
        return erts0 + ((((int64_t(b) * H + t) * M + m) * L + l)) * A + a;
    }
    int64_t irb(int b, int q, int t, int m, int l, int a) const {
        return irb0 + (((pair_b(b, q) * H + t) * M + m) * L + l) * A + a;
    }
    int64_t irs(int b, int q, int t, int m, int l, int a) const {
        return irs0 + (((pair_b(b, q) * H + t) * M + m) * L + l) * A + a;
    }

    int64_t pair_p(int p, int q) const { return int64_t(p) * (P - 1) + (q < p ? q : q - 1); }
    int64_t pair_b(int b, int q) const { return int64_t(b) * (B - 1) + (q < b ? q : q - 1); }

    int64_t buy0 = 0, sell0 = 0, rup0 = 0, rdn0 = 0;
    int64_t ch20 = 0, dis20 = 0, d20 = 0, soc20 = 0, eidb0 = 0, eids0 = 0, iib0 = 0, iis0 = 0;
    int64_t ch30 = 0, dis30 = 0, d30 = 0, soc30 = 0, ertb0 = 0, erts0 = 0, irb0 = 0, irs0 = 0;
};

struct BuildReport {
    std::map<std::string, int64_t> var_counts;
    std::map<std::string, int64_t> row_counts;
    int64_t total_vars = 0;
    int64_t total_rows = 0;
    int64_t nonzeros = 0;
    double wall_ms = 0;
};

struct BuildResult {
    MilpInstance instance;
    VariableCatalog catalog;
    BuildReport report;
    SolverHints hints;
};

// Deterministic-equivalent MILP of the three-stage market clearing problem.
// Throws when validate_config reports violations. Variant switches fix P2P
// trade variables to zero bounds instead of removing them.
BuildResult build_model(const CommunityConfig& config, const ScenarioSet& scenarios);

// closed-form size formulas (documented in docs/counts.md)
int64_t expected_var_count(int P, int B, int H, int M, int L, int A);
int64_t expected_row_count(int P, int B, int H, int M, int L, int A);

} // namespace p2pmc

#endif
