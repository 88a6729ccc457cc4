#include "p2pmc/solver.hpp"
#include "solver_internal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <thread>

namespace p2pmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(SolveMode m) {
    switch (m) {
    case SolveMode::exact_bnb: return "exact";
    case SolveMode::relax_and_fix: return "rnf";
    case SolveMode::lp_only: return "lp";
    case SolveMode::external: return "external";
    }
    return "?";
}

std::string to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::optimal: return "OPTIMAL";
    case SolveStatus::feasible: return "FEASIBLE";
    case SolveStatus::infeasible: return "INFEASIBLE";
    case SolveStatus::unbounded: return "UNBOUNDED";
    case SolveStatus::limit: return "LIMIT";
    }
    return "?";
}

namespace detail {

double rel_gap(double obj, double bound) {
    if (bound == -kInf) return kInf;
    return (obj - bound) / std::max(1.0, std::fabs(obj));
}

namespace {

struct BnbNode {
    double bound;
    int64_t seq;
    int depth;
    std::vector<double> xl, xu;
    Basis warm;
};

struct NodeOrder {
    bool operator()(const BnbNode* a, const BnbNode* b) const {
        if (a->bound != b->bound) return a->bound > b->bound; // min-heap on bound
        if (a->depth != b->depth) return a->depth < b->depth; // dive deeper on ties
        return a->seq > b->seq;
    }
};

} // namespace

CoreResult bnb_core(const Lp& lp, const std::vector<uint8_t>& integer, const SolveOptions& opts) {
    CoreResult res;
    std::vector<int> int_cols;
    for (int j = 0; j < lp.n; ++j)
        if (integer[j]) int_cols.push_back(j);

    auto solve_node = [&](const BnbNode& node) {
        SimplexOptions so;
        so.feas_tol = opts.feas_tol;
        so.xl_override = &node.xl;
        so.xu_override = &node.xu;
        if (!node.warm.empty()) so.warm = &node.warm;
        return simplex_solve(lp, so);
    };

    std::priority_queue<BnbNode*, std::vector<BnbNode*>, NodeOrder> open;
    int64_t seq = 0;
    open.push(new BnbNode{-kInf, seq++, 0, lp.xl, lp.xu, {}});

    bool have_inc = false;
    std::vector<double> inc_x;
    double inc_obj = kInf;
    int64_t nodes = 0;
    bool hit_limit = false;
    bool root_unbounded = false;

    const int width = std::max(1, opts.round_width);
    const int workers = std::max(1, opts.workers);

    while (!open.empty()) {
        if (nodes >= opts.node_limit) {
            hit_limit = true;
            break;
        }
        std::vector<BnbNode*> round;
        while (!open.empty() && static_cast<int>(round.size()) < width) {
            BnbNode* n = open.top();
            open.pop();
            if (have_inc && n->bound >= inc_obj - 1e-9) {
                delete n;
                continue;
            }
            round.push_back(n);
        }
        if (round.empty()) break;

        std::vector<LpSolution> sols(round.size());
        if (workers > 1 && round.size() > 1) {
            std::atomic_size_t next{0};
            std::vector<std::thread> pool;
            size_t nthreads = std::min<size_t>(workers, round.size());
            for (size_t w = 0; w < nthreads; ++w)
                pool.emplace_back([&]() {
                    size_t k;
                    while ((k = next.fetch_add(1)) < round.size()) sols[k] = solve_node(*round[k]);
                });
            for (auto& t : pool) t.join();
        } else {
            for (size_t k = 0; k < round.size(); ++k) sols[k] = solve_node(*round[k]);
        }

        for (size_t k = 0; k < round.size(); ++k) {
            BnbNode* n = round[k];
            LpSolution& s = sols[k];
            ++nodes;
            if (s.status == LpStatus::unbounded) {
                if (n->depth == 0) root_unbounded = true;
                delete n;
                continue;
            }
            if (s.status == LpStatus::infeasible) {
                delete n;
                continue;
            }
            if (s.status != LpStatus::optimal) {
                res.note = "node LP: " + s.note;
                delete n;
                continue;
            }
            if (n->depth == 0) res.bound = s.objective;
            if (have_inc && s.objective >= inc_obj - 1e-9) {
                delete n;
                continue;
            }
            int frac_col = -1;
            double frac_score = -1;
            for (int j : int_cols) {
                double v = s.x[j];
                double f = std::fabs(v - std::round(v));
                if (f <= opts.int_tol) continue;
                double score = 0.5 - std::fabs(v - std::floor(v) - 0.5);
                if (score > frac_score + 1e-12) {
                    frac_score = score;
                    frac_col = j;
                }
            }
            if (frac_col < 0) {
                // integral within tolerance: pin the integers and resolve so
                // the incumbent carries exact integer values
                BnbNode fixed{0, 0, n->depth, n->xl, n->xu, s.basis};
                for (int j : int_cols) {
                    double v = std::round(s.x[j]);
                    fixed.xl[j] = v;
                    fixed.xu[j] = v;
                }
                LpSolution fs = solve_node(fixed);
                if (fs.status == LpStatus::optimal && fs.objective < inc_obj - 1e-9) {
                    have_inc = true;
                    inc_obj = fs.objective;
                    inc_x = fs.x;
                    for (int j : int_cols) inc_x[j] = std::round(inc_x[j]);
                }
                delete n;
                continue;
            }
            double v = s.x[frac_col];
            auto* down = new BnbNode{s.objective, seq++, n->depth + 1, n->xl, n->xu, s.basis};
            down->xu[frac_col] = std::floor(v);
            auto* up = new BnbNode{s.objective, seq++, n->depth + 1, n->xl, n->xu, s.basis};
            up->xl[frac_col] = std::ceil(v);
            open.push(down);
            open.push(up);
            delete n;
        }
    }

    double open_bound = kInf;
    while (!open.empty()) {
        BnbNode* n = open.top();
        open.pop();
        open_bound = std::min(open_bound, n->bound);
        delete n;
    }
    res.nodes = nodes;
    if (have_inc) {
        res.x = inc_x;
        res.objective = inc_obj;
        if (hit_limit) {
            res.bound = std::min(open_bound == kInf ? inc_obj : open_bound, inc_obj);
            res.status = SolveStatus::limit;
        } else {
            res.bound = inc_obj;
            res.status = SolveStatus::optimal;
        }
    } else if (hit_limit) {
        res.status = SolveStatus::limit;
        res.note = "node limit reached without incumbent";
    } else if (root_unbounded) {
        res.status = SolveStatus::unbounded;
    } else {
        res.status = SolveStatus::infeasible;
    }
    return res;
}

IndicatorMap map_indicators(const Reduced& red, const SolverHints* hints) {
    IndicatorMap ind;
    ind.pos.assign(red.lp.n, -1);
    ind.neg.assign(red.lp.n, -1);
    if (!hints || hints->int_round_pos.size() != static_cast<size_t>(red.orig_vars)) return ind;
    for (int ov = 0; ov < red.orig_vars; ++ov) {
        if (hints->int_round_pos[ov] < 0 || red.kind[ov] != Reduced::kept) continue;
        int rc = red.rep_col[ov];
        if (rc < 0) continue;
        int pos_ov = hints->int_round_pos[ov], neg_ov = hints->int_round_neg[ov];
        if (pos_ov < 0 || neg_ov < 0) continue;
        if (red.kind[pos_ov] != Reduced::kept || red.kind[neg_ov] != Reduced::kept) continue;
        ind.pos[rc] = red.rep_col[pos_ov];
        ind.neg[rc] = red.rep_col[neg_ov];
    }
    return ind;
}

double round_integer_value(const Lp& lp, const IndicatorMap& ind, const std::vector<double>& x,
                           int j) {
    double v;
    if (j < static_cast<int>(ind.pos.size()) && ind.pos[j] >= 0)
        v = x[ind.pos[j]] > x[ind.neg[j]] + 1e-9 ? 1.0 : 0.0;
    else
        v = std::round(x[j]);
    return std::min(std::max(v, lp.xl[j]), lp.xu[j]);
}

namespace {

std::vector<std::vector<int>> integer_fix_groups(const Lp& lp, const std::vector<uint8_t>& integer,
                                                 const Reduced& red, const SolverHints* hints) {
    std::map<int32_t, std::vector<int>> grouped;
    std::vector<uint8_t> assigned(lp.n, 0);
    if (hints && hints->int_fix_group.size() == static_cast<size_t>(red.orig_vars)) {
        for (int ov = 0; ov < red.orig_vars; ++ov) {
            int32_t g = hints->int_fix_group[ov];
            if (g < 0 || red.kind[ov] != Reduced::kept) continue;
            int rc = red.rep_col[ov];
            if (rc < 0 || !integer[rc] || assigned[rc]) continue;
            grouped[g].push_back(rc);
            assigned[rc] = 1;
        }
    }
    std::vector<int> rest;
    for (int j = 0; j < lp.n; ++j)
        if (integer[j] && !assigned[j]) rest.push_back(j);
    std::vector<std::vector<int>> out;
    for (auto& [g, cols] : grouped) out.push_back(cols);
    if (!rest.empty()) {
        size_t chunk = std::max<size_t>(1, rest.size() / 24);
        for (size_t i = 0; i < rest.size(); i += chunk)
            out.emplace_back(rest.begin() + i, rest.begin() + std::min(rest.size(), i + chunk));
    }
    return out;
}

CoreResult rnf_direct(const Lp& lp, const std::vector<uint8_t>& integer, const Reduced& red,
                      const SolverHints* hints, const SolveOptions& opts) {
    CoreResult res;
    IndicatorMap ind = map_indicators(red, hints);
    std::vector<double> xl = lp.xl, xu = lp.xu;
    SimplexOptions so;
    so.feas_tol = opts.feas_tol;
    so.xl_override = &xl;
    so.xu_override = &xu;
    LpSolution rel = simplex_solve(lp, so);
    res.nodes = 1;
    if (rel.status == LpStatus::infeasible) {
        res.status = SolveStatus::infeasible;
        return res;
    }
    if (rel.status == LpStatus::unbounded) {
        res.status = SolveStatus::unbounded;
        return res;
    }
    if (rel.status != LpStatus::optimal) {
        res.status = SolveStatus::limit;
        res.note = "root relaxation: " + rel.note;
        return res;
    }
    res.bound = rel.objective;

    LpSolution cur = rel;
    for (const std::vector<int>& group : integer_fix_groups(lp, integer, red, hints)) {
        for (int j : group) {
            double v = round_integer_value(lp, ind, cur.x, j);
            xl[j] = v;
            xu[j] = v;
        }
        so.warm = &cur.basis;
        LpSolution next = simplex_solve(lp, so);
        if (next.status == LpStatus::infeasible) {
            for (int j : group) { // flip binaries once and retry
                double flipped = xl[j] > lp.xl[j] + 0.5 ? lp.xl[j] : std::min(lp.xu[j], xl[j] + 1);
                xl[j] = flipped;
                xu[j] = flipped;
            }
            next = simplex_solve(lp, so);
        }
        if (next.status != LpStatus::optimal) {
            res.status = SolveStatus::limit;
            res.note = "relax-and-fix step failed: " + next.note;
            return res;
        }
        cur = next;
        res.nodes++;
    }
    res.x = cur.x;
    for (int j = 0; j < lp.n; ++j)
        if (integer[j]) res.x[j] = xl[j];
    res.objective = cur.objective;
    res.status = SolveStatus::feasible;
    return res;
}

MilpSolution finish(const MilpInstance& inst, const Reduced& red, CoreResult core) {
    MilpSolution out;
    out.status = core.status;
    out.nodes = core.nodes;
    out.note = core.note;
    out.bound = core.bound;
    if (!core.x.empty()) {
        out.assignment = postsolve_assignment(red, core.x);
        Evaluation ev = evaluate(inst, out.assignment);
        out.objective = ev.objective;
        out.gap = rel_gap(out.objective, out.bound);
    } else {
        out.assignment = Assignment::zeros(inst);
        out.objective = 0;
        out.gap = kInf;
    }
    return out;
}

} // namespace
} // namespace detail

MilpSolution solve_lp(const MilpInstance& inst, const SolveOptions& opts) {
    Reduced red = presolve_reduce(inst);
    if (red.infeasible) {
        MilpSolution out;
        out.status = SolveStatus::infeasible;
        out.note = red.note;
        out.assignment = Assignment::zeros(inst);
        out.gap = kInf;
        return out;
    }
    SimplexOptions so;
    so.feas_tol = opts.feas_tol;
    LpSolution s = simplex_solve(red.lp, so);
    detail::CoreResult core;
    core.nodes = 1;
    core.note = s.note;
    switch (s.status) {
    case LpStatus::optimal:
        core.status = SolveStatus::optimal;
        core.x = s.x;
        core.objective = s.objective;
        core.bound = s.objective;
        break;
    case LpStatus::infeasible: core.status = SolveStatus::infeasible; break;
    case LpStatus::unbounded: core.status = SolveStatus::unbounded; break;
    default: core.status = SolveStatus::limit; break;
    }
    return detail::finish(inst, red, std::move(core));
}

MilpSolution solve_milp(const MilpInstance& inst, const SolveOptions& opts,
                        const SolverHints* hints) {
    if (opts.mode == SolveMode::external)
        throw P2pmcError("external mode writes MPS for an outside solver; nothing to solve here");
    if (opts.mode == SolveMode::lp_only) {
        if (hints && hints->blocks.num_blocks > 0) {
            Reduced red = presolve_reduce(inst, &hints->blocks);
            if (!red.infeasible && red.lp.m > opts.direct_rows_threshold)
                return detail::solve_staged(inst, red, opts, *hints, false);
        }
        return solve_lp(inst, opts);
    }

    const BlockHints* bh = hints ? &hints->blocks : nullptr;
    Reduced red = presolve_reduce(inst, bh);
    if (red.infeasible) {
        MilpSolution out;
        out.status = SolveStatus::infeasible;
        out.note = red.note;
        out.assignment = Assignment::zeros(inst);
        out.gap = kInf;
        return out;
    }

    if (opts.mode == SolveMode::relax_and_fix && hints && hints->blocks.num_blocks > 0 &&
        red.lp.m > opts.direct_rows_threshold)
        return detail::solve_staged(inst, red, opts, *hints, true);

    detail::CoreResult core;
    if (opts.mode == SolveMode::exact_bnb)
        core = detail::bnb_core(red.lp, red.integer, opts);
    else
        core = detail::rnf_direct(red.lp, red.integer, red, hints, opts);
    return detail::finish(inst, red, std::move(core));
}

CheckReport check_solution(const MilpInstance& inst, const MilpSolution& sol,
                           const SolveOptions& opts) {
    CheckReport rep;
    Evaluation ev = evaluate(inst, sol.assignment);
    rep.max_row_violation = ev.max_row_violation;
    rep.max_bound_violation = ev.max_bound_violation;
    rep.max_integrality_violation = ev.max_integrality_violation;
    rep.objective = ev.objective;
    rep.ok = ev.max_row_violation <= opts.feas_tol && ev.max_bound_violation <= opts.feas_tol &&
             ev.max_integrality_violation <= opts.int_tol;
    return rep;
}

} // namespace p2pmc
