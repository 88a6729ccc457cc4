#include "solver_internal.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

// Two-level solve for block-structured instances. The master LP carries the
// coupling columns plus one value column (theta) per cut group; independent
// blocks are re-solved at trial master points and their optimal values and
// row duals yield cuts. A master with any subset of cuts is a relaxation of
// the full LP, so its optimum is always a valid lower bound on the root
// relaxation; when no block value exceeds its theta the bound is the root
// relaxation itself. Integers are then handled by relax-and-fix over the
// master fix groups followed by small per-block searches.

namespace p2pmc {
namespace detail {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Block {
    std::vector<int32_t> cols; // reduced col ids, in block-local order
    std::vector<int32_t> rows; // reduced row ids
    Lp lp;
    std::vector<double> base_rl, base_ru;
    std::vector<uint8_t> integer;
    bool has_integers = false;
    struct Coup {
        int32_t lrow;
        int32_t mcol;
        double coef;
    };
    std::vector<Coup> coupling;
    Basis warm;
    bool warm_valid = false;
    double value = 0;
    std::vector<double> x;
    std::vector<int32_t> grad_cols;
    std::vector<double> grad;
    bool solved = false;
};

// master problem with a growing pool of cut rows; the CSC Lp is rebuilt
// whenever cuts were added (linear cost, once per round)
struct Master {
    int n_cols = 0; // structural + theta
    int n_structural = 0;
    std::vector<double> c, xl, xu;
    std::vector<uint8_t> integer;
    std::vector<std::vector<std::pair<int32_t, double>>> base_cols; // entries into base rows
    std::vector<double> base_rl, base_ru;
    double obj_offset = 0;

    struct Cut {
        double c0;
        std::vector<std::pair<int32_t, double>> terms; // (col, coef), theta included
    };
    std::vector<Cut> cuts;
    std::vector<std::vector<std::pair<int32_t, double>>> cut_by_col; // col -> (cut idx, coef)

    Lp built;
    bool dirty = true;

    int add_cut(double c0, std::vector<std::pair<int32_t, double>> terms) {
        int id = static_cast<int>(cuts.size());
        for (auto& [col, coef] : terms) cut_by_col[col].emplace_back(id, coef);
        cuts.push_back({c0, std::move(terms)});
        dirty = true;
        return id;
    }

    void rebuild() {
        if (!dirty) return;
        Lp lp;
        lp.obj_offset = obj_offset;
        int base_m = static_cast<int>(base_rl.size());
        for (int j = 0; j < n_cols; ++j) {
            lp.add_col(c[j], xl[j], xu[j]);
            for (auto& [r, v] : base_cols[j]) lp.add_entry(r, v);
            for (auto& [cut, v] : cut_by_col[j]) lp.add_entry(base_m + cut, v);
        }
        for (int i = 0; i < base_m; ++i) lp.add_row(base_rl[i], base_ru[i]);
        for (const Cut& cut : cuts) lp.add_row(cut.c0, kInf);
        built = std::move(lp);
        dirty = false;
    }
};

} // namespace

MilpSolution solve_staged(const MilpInstance& inst, const Reduced& red, const SolveOptions& opts,
                          const SolverHints& hints, bool fix_integers) {
    MilpSolution out;
    IndicatorMap ind = map_indicators(red, &hints);
    out.assignment = Assignment::zeros(inst);
    const Lp& rlp = red.lp;
    const int nb = red.num_blocks;

    auto fallback = [&](const std::string& why) {
        out.status = SolveStatus::limit;
        out.note = "staged solve unavailable: " + why;
        out.gap = kInf;
        return out;
    };
    if (nb <= 0 || red.col_block.empty() || red.row_block.empty())
        return fallback("no usable block hints");

    std::vector<int32_t> cut_group(nb + 1, -1);
    int n_groups = hints.num_cut_groups;
    if (static_cast<int>(hints.cut_group_of_block.size()) >= nb && n_groups > 0) {
        for (int b = 1; b <= nb; ++b) cut_group[b] = hints.cut_group_of_block[b - 1];
    } else {
        for (int b = 1; b <= nb; ++b) cut_group[b] = b - 1;
        n_groups = nb;
    }

    // ---- partition ----------------------------------------------------
    Master M;
    std::vector<int32_t> mcol_of_red(rlp.n, -1), red_of_mcol;
    for (int j = 0; j < rlp.n; ++j) {
        if (red.col_block[j] != 0) continue;
        mcol_of_red[j] = static_cast<int32_t>(red_of_mcol.size());
        red_of_mcol.push_back(j);
    }
    std::vector<int32_t> mrow_of_red(rlp.m, -1), lrow_of_red(rlp.m, -1);
    std::vector<int32_t> lcol_of_red(rlp.n, -1);
    std::vector<Block> blocks(nb);
    for (int i = 0; i < rlp.m; ++i) {
        int b = red.row_block[i];
        if (b == 0) {
            mrow_of_red[i] = static_cast<int32_t>(M.base_rl.size());
            M.base_rl.push_back(rlp.rl[i]);
            M.base_ru.push_back(rlp.ru[i]);
        } else {
            if (b < 1 || b > nb) return fallback("row block id out of range");
            lrow_of_red[i] = blocks[b - 1].lp.add_row(rlp.rl[i], rlp.ru[i]);
            blocks[b - 1].rows.push_back(i);
        }
    }

    M.n_structural = static_cast<int>(red_of_mcol.size());
    M.n_cols = M.n_structural + n_groups;
    M.c.resize(M.n_cols);
    M.xl.resize(M.n_cols);
    M.xu.resize(M.n_cols);
    M.integer.assign(M.n_cols, 0);
    M.base_cols.resize(M.n_cols);
    M.cut_by_col.resize(M.n_cols);
    M.obj_offset = rlp.obj_offset;
    for (int mj = 0; mj < M.n_structural; ++mj) {
        int j = red_of_mcol[mj];
        M.c[mj] = rlp.c[j];
        M.xl[mj] = rlp.xl[j];
        M.xu[mj] = rlp.xu[j];
        M.integer[mj] = red.integer[j];
        // cap unbounded working bounds so the cut-less master stays bounded
        if (M.xu[mj] == kInf) M.xu[mj] = opts.master_var_cap;
        if (M.xl[mj] == -kInf) M.xl[mj] = -opts.master_var_cap;
        for (int64_t k = rlp.col_start[j]; k < rlp.col_start[j + 1]; ++k) {
            int i = rlp.rows[k];
            int rb = red.row_block[i];
            if (rb == 0)
                M.base_cols[mj].emplace_back(mrow_of_red[i], rlp.vals[k]);
            else
                blocks[rb - 1].coupling.push_back({lrow_of_red[i], mj, rlp.vals[k]});
        }
    }
    for (int g = 0; g < n_groups; ++g) {
        int col = M.n_structural + g;
        M.c[col] = 1.0;
        M.xl[col] = -1e9;
        M.xu[col] = kInf;
    }

    for (int j = 0; j < rlp.n; ++j) {
        int cb = red.col_block[j];
        if (cb == 0) continue;
        if (cb < 1 || cb > nb) return fallback("column block id out of range");
        Block& blk = blocks[cb - 1];
        lcol_of_red[j] = blk.lp.add_col(rlp.c[j], rlp.xl[j], rlp.xu[j]);
        blk.cols.push_back(j);
        blk.integer.push_back(red.integer[j]);
        if (red.integer[j]) blk.has_integers = true;
        for (int64_t k = rlp.col_start[j]; k < rlp.col_start[j + 1]; ++k) {
            int i = rlp.rows[k];
            if (red.row_block[i] != cb)
                return fallback("column '" + std::string(inst.var_name(j)) +
                                "'-like block column crosses blocks");
            blk.lp.add_entry(lrow_of_red[i], rlp.vals[k]);
        }
    }
    for (Block& blk : blocks) {
        blk.base_rl = blk.lp.rl;
        blk.base_ru = blk.lp.ru;
    }

    // ---- solvers --------------------------------------------------------
    const int workers = std::max(1, opts.workers);
    int64_t total_nodes = 0;

    auto sweep_blocks = [&](const std::vector<double>& xhat, bool want_grad) {
        auto solve_one = [&](Block& blk) {
            blk.lp.rl = blk.base_rl;
            blk.lp.ru = blk.base_ru;
            for (const Block::Coup& c : blk.coupling) {
                double shift = c.coef * xhat[c.mcol];
                if (shift == 0.0) continue;
                if (blk.lp.rl[c.lrow] != -kInf) blk.lp.rl[c.lrow] -= shift;
                if (blk.lp.ru[c.lrow] != kInf) blk.lp.ru[c.lrow] -= shift;
            }
            SimplexOptions so;
            so.feas_tol = opts.feas_tol;
            if (blk.warm_valid) so.warm = &blk.warm;
            LpSolution s = simplex_solve(blk.lp, so);
            if (s.status != LpStatus::optimal) {
                blk.solved = false;
                blk.warm_valid = false;
                return;
            }
            blk.value = s.objective;
            blk.x = s.x;
            blk.warm = std::move(s.basis);
            blk.warm_valid = true;
            blk.solved = true;
            if (want_grad) {
                std::map<int32_t, double> g;
                for (const Block::Coup& c : blk.coupling) g[c.mcol] -= s.y[c.lrow] * c.coef;
                blk.grad_cols.clear();
                blk.grad.clear();
                for (auto& [mc, gv] : g) {
                    blk.grad_cols.push_back(mc);
                    blk.grad.push_back(gv);
                }
            }
        };
        if (workers > 1 && blocks.size() > 1) {
            std::atomic_size_t next{0};
            std::vector<std::thread> pool;
            size_t nthreads = std::min<size_t>(workers, blocks.size());
            for (size_t w = 0; w < nthreads; ++w)
                pool.emplace_back([&]() {
                    size_t b;
                    while ((b = next.fetch_add(1)) < blocks.size()) solve_one(blocks[b]);
                });
            for (auto& t : pool) t.join();
        } else {
            for (Block& blk : blocks) solve_one(blk);
        }
    };

    Basis master_basis;
    bool master_warm = false;
    size_t warm_logicals = 0;
    auto solve_master = [&]() {
        M.rebuild();
        SimplexOptions so;
        so.feas_tol = opts.feas_tol;
        so.xl_override = &M.xl;
        so.xu_override = &M.xu;
        Basis adapted;
        if (master_warm) {
            adapted.status.assign(M.built.n + M.built.m, ColStatus::at_lower);
            for (int j = 0; j < M.built.n; ++j) adapted.status[j] = master_basis.status[j];
            for (int i = 0; i < M.built.m; ++i)
                adapted.status[M.built.n + i] =
                    static_cast<size_t>(i) < warm_logicals
                        ? master_basis.status[M.built.n + i]
                        : ColStatus::basic;
            so.warm = &adapted;
        }
        LpSolution s = simplex_solve(M.built, so);
        if (s.status == LpStatus::optimal) {
            master_basis = s.basis;
            master_warm = true;
            warm_logicals = static_cast<size_t>(M.built.m);
        }
        return s;
    };

    auto add_violated_cuts = [&](const std::vector<double>& xhat) {
        std::vector<double> vg(n_groups, 0.0);
        std::vector<std::map<int32_t, double>> gg(n_groups);
        std::vector<uint8_t> have(n_groups, 0);
        for (int b = 0; b < nb; ++b) {
            Block& blk = blocks[b];
            if (!blk.solved) continue;
            int g = cut_group[b + 1];
            if (g < 0 || g >= n_groups) continue;
            have[g] = 1;
            vg[g] += blk.value;
            for (size_t k = 0; k < blk.grad_cols.size(); ++k)
                gg[g][blk.grad_cols[k]] += blk.grad[k];
        }
        int added = 0;
        for (int g = 0; g < n_groups; ++g) {
            if (!have[g]) continue;
            double theta_hat = xhat[M.n_structural + g];
            if (vg[g] <= theta_hat + std::max(opts.benders_tol, 1e-9 * (1 + std::fabs(vg[g]))))
                continue;
            double c0 = vg[g];
            std::vector<std::pair<int32_t, double>> terms;
            terms.emplace_back(M.n_structural + g, 1.0);
            for (auto& [mc, gv] : gg[g]) {
                c0 -= gv * xhat[mc];
                if (gv != 0.0) terms.emplace_back(mc, -gv);
            }
            M.add_cut(c0, std::move(terms));
            ++added;
        }
        return added;
    };

    // ---- root cut loop ----------------------------------------------------
    LpSolution ms = solve_master();
    if (ms.status == LpStatus::infeasible) {
        out.status = SolveStatus::infeasible;
        out.note = "master infeasible";
        return out;
    }
    if (ms.status != LpStatus::optimal) return fallback("master LP: " + ms.note);

    bool converged = false;
    int rounds = 0;
    for (; rounds < opts.benders_max_rounds; ++rounds) {
        sweep_blocks(ms.x, true);
        for (const Block& blk : blocks)
            if (!blk.solved) return fallback("block LP failed during cut loop");
        int added = add_violated_cuts(ms.x);
        if (opts.verbose)
            std::fprintf(stderr, "  cut round %d: master %.4f, %d new cuts\n", rounds,
                         ms.objective, added);
        if (added == 0) {
            converged = true;
            break;
        }
        ms = solve_master();
        if (ms.status != LpStatus::optimal) return fallback("master re-solve: " + ms.note);
        total_nodes++;
    }
    double root_bound = ms.objective;

    // cap sanity: a binding cap would make the bound unreliable
    for (int j = 0; j < M.n_structural; ++j) {
        if (M.xu[j] == opts.master_var_cap && ms.x[j] > opts.master_var_cap - 1e-3)
            return fallback("master variable hit its working cap");
    }

    auto assemble = [&](const std::vector<double>& mx) {
        std::vector<double> xr(rlp.n, 0.0);
        for (int mj = 0; mj < M.n_structural; ++mj) xr[red_of_mcol[mj]] = mx[mj];
        for (const Block& blk : blocks)
            for (size_t k = 0; k < blk.cols.size(); ++k) xr[blk.cols[k]] = blk.x[k];
        return xr;
    };

    if (!fix_integers) {
        sweep_blocks(ms.x, false);
        for (const Block& blk : blocks)
            if (!blk.solved) return fallback("block LP failed at assembly");
        out.assignment = postsolve_assignment(red, assemble(ms.x));
        Evaluation ev = evaluate(inst, out.assignment);
        out.objective = ev.objective;
        out.bound = root_bound;
        out.gap = rel_gap(out.objective, out.bound);
        out.status = converged ? SolveStatus::optimal : SolveStatus::limit;
        out.nodes = rounds;
        out.note = converged ? "cut loop converged in " + std::to_string(rounds) + " rounds"
                             : "cut loop stopped at round limit";
        return out;
    }

    // ---- relax-and-fix over master integer groups -------------------------
    std::map<int32_t, std::vector<int>> mgroups;
    if (hints.int_fix_group.size() == static_cast<size_t>(red.orig_vars)) {
        for (int ov = 0; ov < red.orig_vars; ++ov) {
            int32_t g = hints.int_fix_group[ov];
            if (g < 0 || red.kind[ov] != Reduced::kept) continue;
            int rc = red.rep_col[ov];
            if (rc < 0 || mcol_of_red[rc] < 0) continue;
            int mj = mcol_of_red[rc];
            if (!M.integer[mj]) continue;
            mgroups[g].push_back(mj);
        }
    } else {
        for (int mj = 0; mj < M.n_structural; ++mj)
            if (M.integer[mj]) mgroups[mj % 24].push_back(mj);
    }
    // Fixing a zero-cost gate binary at the side its relaxation already uses
    // keeps the incumbent point optimal as long as every touched row stays
    // feasible; in that case the LP re-solve is skipped. The point stays a
    // certified optimum of the restricted LP because its objective equals the
    // relaxation bound.
    std::vector<double> xcur = ms.x;
    double obj_cur = ms.objective;
    M.rebuild();
    std::vector<double> act(M.built.m, 0.0);
    auto recompute_activities = [&]() {
        act.assign(M.built.m, 0.0);
        for (int j = 0; j < M.built.n; ++j) {
            if (xcur[j] == 0.0) continue;
            for (int64_t k = M.built.col_start[j]; k < M.built.col_start[j + 1]; ++k)
                act[M.built.rows[k]] += M.built.vals[k] * xcur[j];
        }
    };
    recompute_activities();
    bool basis_stale = false;

    int fixes_done = 0;
    for (auto& [g, cols] : mgroups) {
        // decide values and apply to the incumbent point
        std::vector<int32_t> touched_rows;
        bool zero_cost = true;
        for (int mj : cols) {
            int rc = red_of_mcol[mj];
            double v;
            if (rc < static_cast<int>(ind.pos.size()) && ind.pos[rc] >= 0 &&
                mcol_of_red[ind.pos[rc]] >= 0 && mcol_of_red[ind.neg[rc]] >= 0)
                v = xcur[mcol_of_red[ind.pos[rc]]] > xcur[mcol_of_red[ind.neg[rc]]] + 1e-9 ? 1.0
                                                                                           : 0.0;
            else
                v = std::round(xcur[mj]);
            v = std::min(std::max(v, rlp.xl[rc]), rlp.xu[rc]);
            M.xl[mj] = v;
            M.xu[mj] = v;
            if (M.c[mj] != 0.0) zero_cost = false;
            double dx = v - xcur[mj];
            if (dx != 0.0) {
                for (int64_t k = M.built.col_start[mj]; k < M.built.col_start[mj + 1]; ++k) {
                    act[M.built.rows[k]] += M.built.vals[k] * dx;
                    touched_rows.push_back(M.built.rows[k]);
                }
                xcur[mj] = v;
            }
        }
        bool still_feasible = zero_cost;
        if (still_feasible)
            for (int32_t r : touched_rows) {
                double lo = r < static_cast<int>(M.base_rl.size())
                                ? M.base_rl[r]
                                : M.cuts[r - M.base_rl.size()].c0;
                double hi = r < static_cast<int>(M.base_rl.size()) ? M.base_ru[r] : kInf;
                if (act[r] < lo - 1e-9 || act[r] > hi + 1e-9) {
                    still_feasible = false;
                    break;
                }
            }
        if (still_feasible) {
            basis_stale = true;
            if (opts.verbose)
                std::fprintf(stderr, "  fix group %d: point kept, no re-solve\n", (int)g);
        } else {
            ms = solve_master();
            if (opts.verbose)
                std::fprintf(stderr, "  fix group %d: master %.4f (%lld iters)\n", (int)g,
                             ms.objective, (long long)ms.iterations);
            if (ms.status == LpStatus::infeasible) {
                for (int mj : cols) { // flip once
                    double v = M.xl[mj] > rlp.xl[red_of_mcol[mj]] + 0.5
                                   ? rlp.xl[red_of_mcol[mj]]
                                   : std::min(rlp.xu[red_of_mcol[mj]], M.xl[mj] + 1);
                    M.xl[mj] = v;
                    M.xu[mj] = v;
                }
                ms = solve_master();
            }
            if (ms.status != LpStatus::optimal)
                return fallback("master relax-and-fix step: " + ms.note);
            xcur = ms.x;
            obj_cur = ms.objective;
            recompute_activities();
            basis_stale = false;
        }
        ++fixes_done;
        if (opts.rnf_cut_every > 0 && fixes_done % opts.rnf_cut_every == 0 &&
            fixes_done < static_cast<int>(mgroups.size())) {
            sweep_blocks(xcur, true);
            bool all = true;
            for (const Block& blk : blocks) all = all && blk.solved;
            if (all && add_violated_cuts(xcur) > 0) {
                ms = solve_master();
                if (ms.status != LpStatus::optimal)
                    return fallback("master cut refresh: " + ms.note);
                xcur = ms.x;
                obj_cur = ms.objective;
                recompute_activities();
                basis_stale = false;
            }
        }
        total_nodes++;
    }
    (void)obj_cur;
    (void)basis_stale;

    // ---- final block solves with integrality ------------------------------
    const std::vector<double> xfinal = xcur;
    std::atomic<int64_t> block_nodes{0};
    std::atomic<bool> block_fail{false};
    auto final_one = [&](Block& blk) {
        blk.lp.rl = blk.base_rl;
        blk.lp.ru = blk.base_ru;
        for (const Block::Coup& c : blk.coupling) {
            double shift = c.coef * xfinal[c.mcol];
            if (shift == 0.0) continue;
            if (blk.lp.rl[c.lrow] != -kInf) blk.lp.rl[c.lrow] -= shift;
            if (blk.lp.ru[c.lrow] != kInf) blk.lp.ru[c.lrow] -= shift;
        }
        if (!blk.has_integers) {
            SimplexOptions so;
            so.feas_tol = opts.feas_tol;
            if (blk.warm_valid) so.warm = &blk.warm;
            LpSolution s = simplex_solve(blk.lp, so);
            if (s.status != LpStatus::optimal) {
                block_fail = true;
                return;
            }
            blk.x = s.x;
            return;
        }
        SolveOptions bo = opts;
        bo.node_limit = opts.block_node_limit;
        bo.workers = 1; // outer loop already parallelizes over blocks
        CoreResult r = bnb_core(blk.lp, blk.integer, bo);
        block_nodes += r.nodes;
        if ((r.status == SolveStatus::optimal || r.status == SolveStatus::limit) && !r.x.empty()) {
            blk.x = r.x;
            return;
        }
        // greedy fallback: fix integers one at a time from the relaxation
        std::vector<double> xl = blk.lp.xl, xu = blk.lp.xu;
        SimplexOptions so;
        so.feas_tol = opts.feas_tol;
        so.xl_override = &xl;
        so.xu_override = &xu;
        LpSolution cur = simplex_solve(blk.lp, so);
        if (cur.status != LpStatus::optimal) {
            block_fail = true;
            return;
        }
        for (size_t k = 0; k < blk.integer.size(); ++k) {
            if (!blk.integer[k]) continue;
            int rc = blk.cols[k];
            double v;
            int prc = rc < static_cast<int>(ind.pos.size()) ? ind.pos[rc] : -1;
            if (prc >= 0 && lcol_of_red[prc] >= 0 && lcol_of_red[ind.neg[rc]] >= 0)
                v = cur.x[lcol_of_red[prc]] > cur.x[lcol_of_red[ind.neg[rc]]] + 1e-9 ? 1.0 : 0.0;
            else
                v = std::round(cur.x[k]);
            v = std::min(std::max(v, blk.lp.xl[k]), blk.lp.xu[k]);
            xl[k] = v;
            xu[k] = v;
            so.warm = &cur.basis;
            LpSolution next = simplex_solve(blk.lp, so);
            if (next.status != LpStatus::optimal) {
                double flip = v > blk.lp.xl[k] + 0.5 ? blk.lp.xl[k]
                                                     : std::min(blk.lp.xu[k], v + 1);
                xl[k] = flip;
                xu[k] = flip;
                next = simplex_solve(blk.lp, so);
            }
            if (next.status != LpStatus::optimal) {
                block_fail = true;
                return;
            }
            cur = next;
        }
        blk.x = cur.x;
        for (size_t k = 0; k < blk.integer.size(); ++k)
            if (blk.integer[k]) blk.x[k] = xl[k];
    };
    if (workers > 1 && blocks.size() > 1) {
        std::atomic_size_t next{0};
        std::vector<std::thread> pool;
        size_t nthreads = std::min<size_t>(workers, blocks.size());
        for (size_t w = 0; w < nthreads; ++w)
            pool.emplace_back([&]() {
                size_t b;
                while ((b = next.fetch_add(1)) < blocks.size()) final_one(blocks[b]);
            });
        for (auto& t : pool) t.join();
    } else {
        for (Block& blk : blocks) final_one(blk);
    }
    if (block_fail) return fallback("final block solve failed");

    std::vector<double> xr = assemble(xfinal);
    // integers exactly at their fixed values
    for (auto& [g, cols] : mgroups)
        for (int mj : cols) xr[red_of_mcol[mj]] = M.xl[mj];
    out.assignment = postsolve_assignment(red, xr);
    Evaluation ev = evaluate(inst, out.assignment);
    out.objective = ev.objective;
    out.bound = root_bound;
    out.gap = rel_gap(out.objective, out.bound);
    out.status = SolveStatus::feasible;
    out.nodes = total_nodes + block_nodes;
    out.note = (converged ? "root cuts converged (" : "root cuts stopped (") +
               std::to_string(rounds) + " rounds); " + std::to_string(mgroups.size()) +
               " master fix groups";
    return out;
}

} // namespace detail
} // namespace p2pmc
