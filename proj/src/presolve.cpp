#include "p2pmc/presolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace p2pmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

struct WorkMatrix {
    int ncol = 0, nrow = 0;
    std::vector<double> lb, ub, obj;
    std::vector<uint8_t> integer, col_alive;
    std::vector<int32_t> col_block;
    std::vector<double> rl, ru;
    std::vector<uint8_t> row_alive;
    std::vector<int32_t> row_block;
    // CSR
    std::vector<std::vector<std::pair<int32_t, double>>> rows;
    double obj_offset = 0;
};

struct Dsu {
    std::vector<int32_t> parent;
    explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a > b) std::swap(a, b); // smallest index is the representative
        parent[b] = a;
    }
};

} // namespace

Reduced presolve_reduce(const MilpInstance& inst, const BlockHints* hints,
                        bool enable_aggregation) {
    Reduced red;
    red.orig_vars = inst.num_vars();

    WorkMatrix w;
    w.ncol = inst.num_vars();
    w.nrow = inst.num_rows();
    w.lb.resize(w.ncol);
    w.ub.resize(w.ncol);
    w.obj.resize(w.ncol);
    w.integer.resize(w.ncol);
    w.col_alive.assign(w.ncol, 1);
    w.col_block.assign(w.ncol, 0);
    for (int j = 0; j < w.ncol; ++j) {
        w.lb[j] = inst.lb(j);
        w.ub[j] = inst.ub(j);
        w.obj[j] = inst.obj(j);
        w.integer[j] = inst.is_integer(j) ? 1 : 0;
    }
    w.rl.resize(w.nrow);
    w.ru.resize(w.nrow);
    w.row_alive.assign(w.nrow, 1);
    w.row_block.assign(w.nrow, 0);
    w.rows.resize(w.nrow);
    for (int i = 0; i < w.nrow; ++i) {
        double b = inst.rhs(i);
        switch (inst.sense(i)) {
        case RowSense::le: w.rl[i] = -kInf; w.ru[i] = b; break;
        case RowSense::ge: w.rl[i] = b; w.ru[i] = kInf; break;
        case RowSense::eq: w.rl[i] = b; w.ru[i] = b; break;
        }
        auto vars = inst.row_vars(i);
        auto vals = inst.row_values(i);
        std::vector<std::pair<int32_t, double>> ents;
        for (size_t k = 0; k < vars.size(); ++k) ents.emplace_back(vars[k], vals[k]);
        std::sort(ents.begin(), ents.end());
        // merge duplicate references
        for (auto& e : ents) {
            if (!w.rows[i].empty() && w.rows[i].back().first == e.first)
                w.rows[i].back().second += e.second;
            else
                w.rows[i].push_back(e);
        }
        std::erase_if(w.rows[i], [](const auto& e) { return e.second == 0.0; });
    }
    bool have_hints = hints && hints->var_block.size() == static_cast<size_t>(w.ncol) &&
                      hints->row_block.size() == static_cast<size_t>(w.nrow);
    if (have_hints) {
        w.col_block = hints->var_block;
        w.row_block = hints->row_block;
    }

    Dsu dsu(w.ncol);
    std::vector<double> fixed_val(w.ncol, 0.0);
    std::vector<uint8_t> is_fixed(w.ncol, 0);

    // rounds of fixed-column substitution and doubleton aliasing
    for (int round = 0; round < 6; ++round) {
        bool changed = false;

        // substitute fixed columns
        for (int i = 0; i < w.nrow; ++i) {
            if (!w.row_alive[i]) continue;
            bool any = false;
            for (auto& [j, v] : w.rows[i])
                if (!w.col_alive[dsu.find(j)]) any = true;
            if (!any) continue;
            std::vector<std::pair<int32_t, double>> keep;
            for (auto& [j, v] : w.rows[i]) {
                int r = dsu.find(j);
                if (!w.col_alive[r]) {
                    if (w.rl[i] != -kInf) w.rl[i] -= v * fixed_val[r];
                    if (w.ru[i] != kInf) w.ru[i] -= v * fixed_val[r];
                } else {
                    keep.emplace_back(j, v);
                }
            }
            w.rows[i] = std::move(keep);
            changed = true;
        }

        // canonicalize row entries onto representatives, drop zero sums
        for (int i = 0; i < w.nrow; ++i) {
            if (!w.row_alive[i]) continue;
            bool needs = false;
            for (auto& [j, v] : w.rows[i])
                if (dsu.find(j) != j) needs = true;
            if (!needs) continue;
            std::vector<std::pair<int32_t, double>> ents;
            for (auto& [j, v] : w.rows[i]) ents.emplace_back(dsu.find(j), v);
            std::sort(ents.begin(), ents.end());
            std::vector<std::pair<int32_t, double>> merged;
            for (auto& e : ents) {
                if (!merged.empty() && merged.back().first == e.first)
                    merged.back().second += e.second;
                else
                    merged.push_back(e);
            }
            std::erase_if(merged, [](const auto& e) { return e.second == 0.0; });
            w.rows[i] = std::move(merged);
            changed = true;
        }

        // empty rows
        for (int i = 0; i < w.nrow; ++i) {
            if (!w.row_alive[i] || !w.rows[i].empty()) continue;
            if (w.rl[i] > 1e-9 || w.ru[i] < -1e-9) {
                red.infeasible = true;
                red.note = "row '" + std::string(inst.row_name(i)) + "' became empty and unsatisfiable";
                return red;
            }
            w.row_alive[i] = 0;
            red.n_rows_dropped++;
            changed = true;
        }

        // newly fixed columns
        for (int j = 0; j < w.ncol; ++j) {
            if (!w.col_alive[j] || dsu.find(j) != j) continue;
            if (w.lb[j] > w.ub[j] + 1e-12) {
                red.infeasible = true;
                red.note = "variable '" + std::string(inst.var_name(j)) + "' has empty domain";
                return red;
            }
            if (w.lb[j] == w.ub[j]) {
                w.col_alive[j] = 0;
                is_fixed[j] = 1;
                fixed_val[j] = w.lb[j];
                w.obj_offset += w.obj[j] * w.lb[j];
                red.n_fixed++;
                changed = true;
            }
        }

        // doubleton equality aliasing: a x - a y = 0  ->  x == y
        for (int i = 0; i < w.nrow; ++i) {
            if (!w.row_alive[i] || w.rows[i].size() != 2) continue;
            if (w.rl[i] != 0.0 || w.ru[i] != 0.0) continue;
            auto [j1, v1] = w.rows[i][0];
            auto [j2, v2] = w.rows[i][1];
            int r1 = dsu.find(j1), r2 = dsu.find(j2);
            if (r1 == r2 || !w.col_alive[r1] || !w.col_alive[r2]) continue;
            if (v1 != -v2) continue;
            // merge: bounds intersect, objectives add, integrality ors
            int rep = std::min(r1, r2), other = std::max(r1, r2);
            w.lb[rep] = std::max(w.lb[rep], w.lb[other]);
            w.ub[rep] = std::min(w.ub[rep], w.ub[other]);
            w.obj[rep] += w.obj[other];
            w.integer[rep] = w.integer[rep] || w.integer[other];
            if (w.col_block[rep] != w.col_block[other]) w.col_block[rep] = 0;
            dsu.unite(r1, r2);
            w.col_alive[other] = 0;
            w.row_alive[i] = 0;
            red.n_aliased++;
            red.n_rows_dropped++;
            changed = true;
        }

        if (!changed) break;
    }

    // ---- complete-graph trade aggregation -------------------------------
    struct ArcInfo {
        int32_t col;       // representative column
        int32_t row_plus;  // row with +1
        int32_t row_minus; // row with -1
        double cost;
    };
    std::vector<Reduced::Hub> hubs;
    std::vector<uint8_t> col_is_arc(w.ncol, 0);
    if (enable_aggregation) {
        // count row touches per live representative column
        std::vector<int32_t> touch(w.ncol, 0);
        std::vector<int32_t> rp(w.ncol, -1), rm(w.ncol, -1);
        std::vector<uint8_t> clean(w.ncol, 1);
        for (int i = 0; i < w.nrow; ++i) {
            if (!w.row_alive[i]) continue;
            bool eq = w.rl[i] == w.ru[i];
            for (auto& [j, v] : w.rows[i]) {
                touch[j]++;
                if (!eq || (v != 1.0 && v != -1.0)) clean[j] = 0;
                else if (v == 1.0) rp[j] = i;
                else rm[j] = i;
            }
        }
        std::vector<ArcInfo> arcs;
        for (int j = 0; j < w.ncol; ++j) {
            if (!w.col_alive[j] || dsu.find(j) != j || w.integer[j]) continue;
            if (touch[j] != 2 || !clean[j] || rp[j] < 0 || rm[j] < 0) continue;
            if (w.lb[j] != 0.0 || w.ub[j] != kInf) continue;
            arcs.push_back({j, rp[j], rm[j], w.obj[j]});
        }
        // group by (cost, block) and split into row components
        std::map<std::pair<double, int32_t>, std::vector<int32_t>> groups;
        for (size_t a = 0; a < arcs.size(); ++a) {
            int32_t blk = w.row_block[arcs[a].row_plus];
            if (w.row_block[arcs[a].row_minus] != blk) continue;
            groups[{arcs[a].cost, blk}].push_back(static_cast<int32_t>(a));
        }
        for (auto& [key, members] : groups) {
            // connected components over the rows these arcs touch
            std::map<int32_t, int32_t> row_ids;
            for (int32_t a : members) {
                row_ids.emplace(arcs[a].row_plus, static_cast<int32_t>(row_ids.size()));
                row_ids.emplace(arcs[a].row_minus, static_cast<int32_t>(row_ids.size()));
            }
            Dsu comp(static_cast<int>(row_ids.size()));
            for (int32_t a : members)
                comp.unite(row_ids[arcs[a].row_plus], row_ids[arcs[a].row_minus]);
            std::map<int32_t, std::vector<int32_t>> by_comp;
            for (int32_t a : members)
                by_comp[comp.find(row_ids[arcs[a].row_plus])].push_back(a);
            for (auto& [croot, carcs] : by_comp) {
                // nodes of this component, in deterministic row order
                std::vector<int32_t> nodes;
                for (auto& [row, id] : row_ids)
                    if (comp.find(id) == croot) nodes.push_back(row);
                std::sort(nodes.begin(), nodes.end());
                size_t nn = nodes.size();
                if (nn < 4 || carcs.size() != nn * (nn - 1)) continue;
                // completeness: each ordered pair exactly once
                std::map<int32_t, int32_t> node_id;
                for (size_t t = 0; t < nn; ++t) node_id[nodes[t]] = static_cast<int32_t>(t);
                std::vector<uint8_t> seen(nn * nn, 0);
                bool complete = true;
                for (int32_t a : carcs) {
                    int t = node_id[arcs[a].row_minus]; // tail: flow leaves
                    int h = node_id[arcs[a].row_plus];
                    if (t == h || seen[t * nn + h]) {
                        complete = false;
                        break;
                    }
                    seen[t * nn + h] = 1;
                }
                if (!complete) continue;
                Reduced::Hub hub;
                hub.in_col.assign(nn, -1);
                hub.out_col.assign(nn, -1);
                for (int32_t a : carcs) {
                    arcs[a].cost = key.first;
                    col_is_arc[arcs[a].col] = 1;
                    w.col_alive[arcs[a].col] = 0;
                    hub.arcs.push_back({arcs[a].col, node_id[arcs[a].row_minus],
                                        node_id[arcs[a].row_plus]});
                    red.n_arc_vars++;
                }
                std::sort(hub.arcs.begin(), hub.arcs.end());
                // record node rows temporarily in in_col; resolved to columns below
                for (size_t t = 0; t < nn; ++t) hub.in_col[t] = nodes[t];
                hubs.push_back(std::move(hub));
            }
        }
    }

    // ---- emit the reduced LP --------------------------------------------
    std::vector<int32_t> new_col(w.ncol, -1);
    Lp& lp = red.lp;
    lp.col_start.push_back(0);
    lp.obj_offset = w.obj_offset;
    for (int j = 0; j < w.ncol; ++j) {
        if (!w.col_alive[j] || dsu.find(j) != j) continue;
        new_col[j] = lp.add_col(w.obj[j], w.lb[j], w.ub[j]);
        red.integer.push_back(w.integer[j]);
        red.col_block.push_back(w.col_block[j]);
    }
    std::vector<int32_t> new_row(w.nrow, -1);
    for (int i = 0; i < w.nrow; ++i) {
        if (!w.row_alive[i]) continue;
        new_row[i] = lp.add_row(w.rl[i], w.ru[i]);
        red.row_block.push_back(w.row_block[i]);
    }
    // columns (CSC) gathered from live rows
    {
        std::vector<std::vector<std::pair<int32_t, double>>> cols(lp.n);
        for (int i = 0; i < w.nrow; ++i) {
            if (!w.row_alive[i]) continue;
            for (auto& [j, v] : w.rows[i]) {
                int r = dsu.find(j);
                if (!w.col_alive[r]) continue;
                cols[new_col[r]].emplace_back(new_row[i], v);
            }
        }
        lp.rows.clear();
        lp.vals.clear();
        lp.col_start.assign(1, 0);
        for (int j = 0; j < lp.n; ++j) {
            for (auto& [r, v] : cols[j]) {
                lp.rows.push_back(r);
                lp.vals.push_back(v);
            }
            lp.col_start.push_back(static_cast<int64_t>(lp.rows.size()));
        }
    }
    // hub columns and conservation rows
    for (auto& hub : hubs) {
        size_t nn = hub.in_col.size();
        std::vector<int32_t> node_rows(hub.in_col.begin(), hub.in_col.end());
        double cost = 0;
        // all arcs in a hub share one cost; take it from any original column
        if (!hub.arcs.empty()) cost = w.obj[hub.arcs[0][0]];
        int hub_row = lp.add_row(0.0, 0.0);
        red.row_block.push_back(w.row_block[node_rows[0]]);
        for (size_t t = 0; t < nn; ++t) {
            int in = lp.add_col(cost, 0.0, kInf);
            lp.add_entry(new_row[node_rows[t]], 1.0);
            lp.add_entry(hub_row, 1.0);
            red.integer.push_back(0);
            red.col_block.push_back(w.row_block[node_rows[t]]);
            int out = lp.add_col(0.0, 0.0, kInf);
            lp.add_entry(new_row[node_rows[t]], -1.0);
            lp.add_entry(hub_row, -1.0);
            red.integer.push_back(0);
            red.col_block.push_back(w.row_block[node_rows[t]]);
            hub.in_col[t] = in;
            hub.out_col[t] = out;
        }
        red.hubs.push_back(std::move(hub));
    }

    // postsolve maps
    red.kind.assign(w.ncol, Reduced::kept);
    red.rep_col.assign(w.ncol, -1);
    red.rep_orig.assign(w.ncol, -1);
    red.fixed_val.assign(w.ncol, 0.0);
    for (int j = 0; j < w.ncol; ++j) {
        int r = dsu.find(j);
        red.rep_orig[j] = r;
        if (col_is_arc[r]) {
            red.kind[j] = Reduced::arc;
        } else if (!w.col_alive[r]) {
            red.kind[j] = Reduced::fixed;
            red.fixed_val[j] = fixed_val[r];
        } else {
            red.kind[j] = Reduced::kept;
            red.rep_col[j] = new_col[r];
        }
    }

    if (have_hints) red.num_blocks = hints->num_blocks;
    else {
        red.col_block.clear();
        red.row_block.clear();
    }
    return red;
}

Assignment postsolve_assignment(const Reduced& red, const std::vector<double>& x_reduced) {
    Assignment full(static_cast<size_t>(red.orig_vars));
    std::vector<double> arc_val(red.orig_vars, 0.0);

    for (const Reduced::Hub& hub : red.hubs) {
        size_t nn = hub.in_col.size();
        std::vector<double> in(nn), out(nn);
        for (size_t t = 0; t < nn; ++t) {
            in[t] = std::max(0.0, x_reduced[hub.in_col[t]]);
            out[t] = std::max(0.0, x_reduced[hub.out_col[t]]);
            // cancel simultaneous buy/sell at a node; this keeps the node's
            // balance row exact and makes the diagonal-free expansion exist
            double ov = std::min(in[t], out[t]);
            in[t] -= ov;
            out[t] -= ov;
            if (in[t] < 1e-14) in[t] = 0;
            if (out[t] < 1e-14) out[t] = 0;
        }
        // northwest corner over (tail, head); after cancellation a node never
        // has both in and out flow, so the diagonal is never demanded
        std::map<std::pair<int32_t, int32_t>, double> flow;
        std::vector<double> need = in;
        size_t t = 0, h = 0;
        std::vector<double> give = out;
        while (t < nn && h < nn) {
            if (give[t] <= 1e-15) {
                ++t;
                continue;
            }
            if (need[h] <= 1e-15) {
                ++h;
                continue;
            }
            if (t == h) { // unreachable after cancellation; guard anyway
                ++h;
                continue;
            }
            double f = std::min(give[t], need[h]);
            flow[{static_cast<int32_t>(t), static_cast<int32_t>(h)}] += f;
            give[t] -= f;
            need[h] -= f;
        }
        for (const auto& a : hub.arcs) {
            auto it = flow.find({a[1], a[2]});
            if (it != flow.end()) arc_val[a[0]] = it->second;
        }
    }

    for (int j = 0; j < red.orig_vars; ++j) {
        switch (red.kind[j]) {
        case Reduced::kept: full[j] = x_reduced[red.rep_col[j]]; break;
        case Reduced::fixed: full[j] = red.fixed_val[j]; break;
        case Reduced::arc: full[j] = arc_val[red.rep_orig[j]]; break;
        }
    }
    return full;
}

} // namespace p2pmc
