#ifndef P2PMC_SIMPLEX_HPP
#define P2PMC_SIMPLEX_HPP

// Bounded-variable primal simplex over a range-row LP:
//
//     min c'x   s.t.  rl <= A x <= ru,   xl <= x <= xu
//
// Rows are handled through logical columns (A x - z = 0, z in [rl, ru]), so
// the working matrix is [A | -I] with n structural and m logical columns.
// Entering choice is most-negative reduced cost with lowest-index ties and a
// Bland fallback after a stall, which keeps every solve deterministic.

#include "p2pmc/milp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace p2pmc {

struct Lp {
    int n = 0; // structural columns
    int m = 0; // rows
    std::vector<double> c, xl, xu; // n
    std::vector<double> rl, ru;    // m
    std::vector<int64_t> col_start; // n+1
    std::vector<int32_t> rows;
    std::vector<double> vals;
    double obj_offset = 0.0;

    int add_col(double cj, double lo, double hi);
    void add_entry(int row, double v); // to the column most recently added
    int add_row(double lo, double hi);
};

// Builds the range-row LP from a MilpInstance (integrality is simply not
// represented here; callers track it separately). Duplicate coefficients in a
// row are summed. Column order follows the instance.
Lp lp_from_instance(const MilpInstance& inst);

enum class LpStatus : uint8_t { optimal, infeasible, unbounded, iter_limit, numeric };

enum class ColStatus : uint8_t { basic, at_lower, at_upper, nonbasic_free };

struct Basis {
    std::vector<ColStatus> status; // n+m
    bool empty() const { return status.empty(); }
};

struct LpSolution {
    LpStatus status = LpStatus::numeric;
    double objective = 0.0;
    std::vector<double> x;        // structural values, n
    std::vector<double> activity; // row activities, m
    std::vector<double> y;        // row duals (d obj / d rhs)
    std::vector<double> dj;       // reduced costs, structural columns
    Basis basis;
    int64_t iterations = 0;
    std::string note;
};

struct SimplexOptions {
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    int64_t max_iters = -1; // -1: scaled default
    const Basis* warm = nullptr;
    const std::vector<double>* xl_override = nullptr;
    const std::vector<double>* xu_override = nullptr;
    const std::vector<double>* c_override = nullptr;
};

LpSolution simplex_solve(const Lp& lp, const SimplexOptions& opt = {});

} // namespace p2pmc

#endif
