#ifndef P2PMC_SOLVER_HPP
#define P2PMC_SOLVER_HPP

#include "p2pmc/milp.hpp"
#include "p2pmc/presolve.hpp"
#include "p2pmc/simplex.hpp"

#include <cstdint>
#include <string>

namespace p2pmc {

enum class SolveMode : uint8_t { exact_bnb, relax_and_fix, lp_only, external };
enum class SolveStatus : uint8_t { optimal, feasible, infeasible, unbounded, limit };

std::string to_string(SolveMode m);
std::string to_string(SolveStatus s);

struct SolveOptions {
    SolveMode mode = SolveMode::exact_bnb;
    double feas_tol = 1e-9;
    double int_tol = 1e-6;
    double mip_gap = 1e-6;
    int64_t node_limit = 200000;
    int workers = 1;

    // deterministic search shape: a round always drains up to `round_width`
    // best-bound nodes, whatever the worker count
    int round_width = 8;

    // relax-and-fix and decomposition knobs
    int direct_rows_threshold = 60000; // staged path above this many reduced rows
    int benders_max_rounds = 60;
    double benders_tol = 1e-7;
    int rnf_cut_every = 4;      // master cut refresh cadence while fixing
    int64_t block_node_limit = 500;
    double master_var_cap = 1e7; // working bound cap for unbounded master columns
    bool verbose = false;       // progress notes on stderr
};

// Decomposition/fixing guidance produced by the model builder. All indices
// refer to the original instance.
struct SolverHints {
    BlockHints blocks;
    std::vector<int32_t> int_fix_group;      // per original var, -1 = not grouped
    std::vector<int32_t> cut_group_of_block; // per block id b (1-based): aggregation group
    int num_cut_groups = 0;
    // zero-cost gate binaries carry no signal in a relaxation; these pairs let
    // the solver fix them by which gated side the relaxation actually uses
    std::vector<int32_t> int_round_pos; // per original var: "one" side witness, -1 none
    std::vector<int32_t> int_round_neg; // per original var: "zero" side witness
};

struct MilpSolution {
    SolveStatus status = SolveStatus::limit;
    Assignment assignment;
    double objective = 0;
    double bound = 0;
    double gap = 0;
    int64_t nodes = 0;
    std::string note;
};

// LP relaxation solve (integrality ignored).
MilpSolution solve_lp(const MilpInstance& inst, const SolveOptions& opts = {});

// Dispatch on opts.mode. EXTERNAL is orchestrated by the CLI and rejected
// here.
MilpSolution solve_milp(const MilpInstance& inst, const SolveOptions& opts = {},
                        const SolverHints* hints = nullptr);

struct CheckReport {
    double max_row_violation = 0;
    double max_bound_violation = 0;
    double max_integrality_violation = 0;
    double objective = 0;
    bool ok = false;
};
CheckReport check_solution(const MilpInstance& inst, const MilpSolution& sol,
                           const SolveOptions& opts = {});

} // namespace p2pmc

#endif
