#ifndef P2PMC_PRESOLVE_HPP
#define P2PMC_PRESOLVE_HPP

// Exact, postsolvable reductions applied before the simplex/branch-and-bound
// layer sees an instance:
//
//   1. fixed columns (lb == ub) are substituted out,
//   2. zero-rhs doubleton equality rows with opposite equal coefficients
//      alias their two columns (x == y),
//   3. groups of continuous [0, inf) columns that each touch exactly two
//      equality rows with +1/-1 and share one objective cost are recognized
//      as complete-graph trade arcs and replaced by per-node in/out columns
//      plus one conservation row.
//
// Every reduction preserves the optimal value exactly and reconstructs a
// feasible original-space point in postsolve.

#include "p2pmc/milp.hpp"
#include "p2pmc/simplex.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace p2pmc {

struct BlockHints {
    // block 0 is the coupling "master"; blocks 1..num_blocks are independent
    // given the master variables
    std::vector<int32_t> var_block;
    std::vector<int32_t> row_block;
    int num_blocks = 0;
};

struct Reduced {
    bool infeasible = false;
    std::string note;

    Lp lp;
    std::vector<uint8_t> integer;   // per reduced column
    std::vector<int32_t> col_block; // hints carried through (empty when none)
    std::vector<int32_t> row_block;
    int num_blocks = 0;

    // postsolve data
    int orig_vars = 0;
    enum Kind : int8_t { kept = 0, fixed = 1, arc = 2 };
    std::vector<int8_t> kind;
    std::vector<int32_t> rep_col;  // kind==kept: reduced column carrying this var
    std::vector<int32_t> rep_orig; // alias representative in original indices
    std::vector<double> fixed_val; // kind==fixed

    struct Hub {
        std::vector<int32_t> in_col, out_col;           // reduced columns per node
        std::vector<std::array<int32_t, 3>> arcs;       // (orig var, tail node, head node)
    };
    std::vector<Hub> hubs;

    // statistics
    int n_fixed = 0, n_aliased = 0, n_arc_vars = 0, n_rows_dropped = 0;
};

Reduced presolve_reduce(const MilpInstance& inst, const BlockHints* hints = nullptr,
                        bool enable_aggregation = true);

// Expands a reduced-space point to the original variable space.
Assignment postsolve_assignment(const Reduced& red, const std::vector<double>& x_reduced);

} // namespace p2pmc

#endif
