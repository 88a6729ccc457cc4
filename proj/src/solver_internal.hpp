#ifndef P2PMC_SOLVER_INTERNAL_HPP
#define P2PMC_SOLVER_INTERNAL_HPP

#include "p2pmc/solver.hpp"

#include <limits>
#include <string>
#include <vector>

namespace p2pmc::detail {

struct CoreResult {
    SolveStatus status = SolveStatus::limit;
    std::vector<double> x;
    double objective = 0;
    double bound = -std::numeric_limits<double>::infinity();
    int64_t nodes = 0;
    std::string note;
};

double rel_gap(double obj, double bound);

// reduced-space witnesses for gate-binary rounding; -1 when absent
struct IndicatorMap {
    std::vector<int32_t> pos, neg;
};
IndicatorMap map_indicators(const Reduced& red, const SolverHints* hints);

// rounding decision for integer column j at relaxation point x
double round_integer_value(const Lp& lp, const IndicatorMap& ind, const std::vector<double>& x,
                           int j);

// deterministic synchronized-round best-bound branch and bound
CoreResult bnb_core(const Lp& lp, const std::vector<uint8_t>& integer, const SolveOptions& opts);

MilpSolution solve_staged(const MilpInstance& inst, const Reduced& red, const SolveOptions& opts,
                          const SolverHints& hints, bool fix_integers);

} // namespace p2pmc::detail

#endif
