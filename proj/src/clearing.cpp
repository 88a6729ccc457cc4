#include "p2pmc/clearing.hpp"

#include "p2pmc/solver.hpp"

#include <cmath>

namespace p2pmc {

ClearingResult run_case_study(const CommunityConfig& config, const ScenarioSet& scenarios) {
    BuildResult built = build_model(config, scenarios);
    if (config.solver.mode == SolveMode::external)
        throw P2pmcError("external solver mode: export the model and import a solution instead");

    MilpSolution sol = solve_milp(built.instance, config.solver, &built.hints);
    if (sol.status == SolveStatus::infeasible || sol.status == SolveStatus::unbounded)
        throw P2pmcError("model reported " + to_string(sol.status) +
                         "; the configuration admits no market clearing");
    if (sol.status == SolveStatus::limit && sol.assignment.size() == 0)
        throw P2pmcError("solver hit its limit without an incumbent: " + sol.note);
    bool has_point = sol.assignment.size() == static_cast<size_t>(built.instance.num_vars());
    if (!has_point) throw P2pmcError("solver returned no usable point: " + sol.note);

    CheckReport check = check_solution(built.instance, sol, config.solver);
    if ((sol.status == SolveStatus::optimal || sol.status == SolveStatus::feasible) && !check.ok)
        throw P2pmcError("returned solution fails independent evaluation: row " +
                         std::to_string(check.max_row_violation) + ", bound " +
                         std::to_string(check.max_bound_violation) + ", integrality " +
                         std::to_string(check.max_integrality_violation));

    return decode_solution(config, scenarios, built, sol);
}

ClearingResult decode_solution(const CommunityConfig& config, const ScenarioSet& scenarios,
                               const BuildResult& built, const MilpSolution& sol) {
    const VariableCatalog& cat = built.catalog;
    const Assignment& x = sol.assignment;
    ClearingResult res;
    res.variant = config.variant;
    res.status = sol.status;
    res.objective = sol.objective;
    res.bound = sol.bound;
    res.gap = sol.gap;
    res.nodes = sol.nodes;
    res.solver_note = sol.note;
    res.model_hash = built.instance.content_hash();
    res.P = cat.P;
    res.H = cat.H;
    res.M = cat.M;
    res.L = cat.L;
    res.A = cat.A;
    res.peer_battery = cat.peer_battery;
    for (const Peer& p : config.peers) res.peer_ids.push_back(p.id);

    const int P = cat.P, B = cat.B, H = cat.H, M = cat.M, L = cat.L, A = cat.A;
    res.da_buy.assign(static_cast<size_t>(P) * H, 0.0);
    res.da_sell.assign(static_cast<size_t>(P) * H, 0.0);
    res.reserve_up.assign(static_cast<size_t>(P) * H, 0.0);
    res.reserve_dn.assign(static_cast<size_t>(P) * H, 0.0);
    res.ch2.assign(static_cast<size_t>(P) * H * L, 0.0);
    res.dis2.assign(static_cast<size_t>(P) * H * L, 0.0);
    res.soc2.assign(static_cast<size_t>(P) * (H + 1) * L, 0.0);
    res.eid_buy.assign(static_cast<size_t>(P) * H * L, 0.0);
    res.eid_sell.assign(static_cast<size_t>(P) * H * L, 0.0);
    res.iid_buy.assign(static_cast<size_t>(P) * H * L, 0.0);
    res.iid_sell.assign(static_cast<size_t>(P) * H * L, 0.0);
    res.activation_kw.assign(static_cast<size_t>(P) * H * M * L * A, 0.0);
    res.battery_dev_kw.assign(static_cast<size_t>(P) * H * M * L * A, 0.0);
    res.irt_net_kw.assign(static_cast<size_t>(P) * H * M * L * A, 0.0);
    res.ert_net_kw.assign(static_cast<size_t>(P) * H * M * L * A, 0.0);

    for (int p = 0; p < P; ++p)
        for (int t = 0; t < H; ++t) {
            res.da_buy[res.pt(p, t)] = x[cat.buy(p, t)];
            res.da_sell[res.pt(p, t)] = x[cat.sell(p, t)];
            int b = cat.peer_battery[p];
            if (b >= 0) {
                res.reserve_up[res.pt(p, t)] = x[cat.rup(b, t)];
                res.reserve_dn[res.pt(p, t)] = x[cat.rdn(b, t)];
            }
        }
    for (int p = 0; p < P; ++p) {
        int b = cat.peer_battery[p];
        for (int t = 0; t < H; ++t)
            for (int l = 0; l < L; ++l) {
                size_t k = res.ptl(p, t, l);
                if (b >= 0) {
                    res.ch2[k] = x[cat.ch2(b, t, l)];
                    res.dis2[k] = x[cat.dis2(b, t, l)];
                }
                res.eid_buy[k] = x[cat.eidb(p, t, l)];
                res.eid_sell[k] = x[cat.eids(p, t, l)];
                double ib = 0, is = 0;
                for (int q = 0; q < P; ++q) {
                    if (q == p) continue;
                    ib += x[cat.iib(p, q, t, l)];
                    is += x[cat.iis(p, q, t, l)];
                }
                res.iid_buy[k] = ib;
                res.iid_sell[k] = is;
            }
        if (b >= 0)
            for (int t = 0; t <= H; ++t)
                for (int l = 0; l < L; ++l) res.soc2[res.p1tl(p, t, l)] = x[cat.soc2(b, t, l)];
    }
    for (int b = 0; b < B; ++b) {
        int p = cat.battery_peer[b];
        for (int t = 0; t < H; ++t)
            for (int m = 0; m < M; ++m)
                for (int l = 0; l < L; ++l)
                    for (int a = 0; a < A; ++a) {
                        size_t k = res.ptmla(p, t, m, l, a);
                        double act = scenarios.up_at(a, t, m) * x[cat.rup(b, t)] -
                                     scenarios.dn_at(a, t, m) * x[cat.rdn(b, t)];
                        double dev = (x[cat.dis3(b, t, m, l, a)] - x[cat.ch3(b, t, m, l, a)]) -
                                     (x[cat.dis2(b, t, l)] - x[cat.ch2(b, t, l)]);
                        double irt = 0;
                        for (int q = 0; q < B; ++q) {
                            if (q == b) continue;
                            irt += x[cat.irb(b, q, t, m, l, a)] - x[cat.irs(b, q, t, m, l, a)];
                        }
                        double ert = x[cat.ertb(b, t, m, l, a)] - x[cat.erts(b, t, m, l, a)];
                        res.activation_kw[k] = act;
                        res.battery_dev_kw[k] = dev;
                        res.irt_net_kw[k] = irt;
                        res.ert_net_kw[k] = ert;
                    }
    }

    // settlement, recomputed from decoded values term by term
    const PriceBook& pb = config.price_book;
    const double dtau = config.horizon.delta_tau();
    SettlementBreakdown& st = res.settlement;
    for (int p = 0; p < P; ++p)
        for (int t = 0; t < H; ++t) {
            st.da_purchase_cost += res.da_buy[res.pt(p, t)] * pb.da_price[t];
            st.grid_tariff_cost += res.da_buy[res.pt(p, t)] * pb.grid_tariff[t];
            st.da_sale_revenue -= res.da_sell[res.pt(p, t)] * pb.da_price[t];
            st.fcr_capacity_revenue -=
                pb.fcr_price[t] * (res.reserve_up[res.pt(p, t)] + res.reserve_dn[res.pt(p, t)]);
        }
    for (int b = 0; b < B; ++b) {
        int p = cat.battery_peer[b];
        for (int t = 0; t < H; ++t)
            for (int a = 0; a < A; ++a) {
                double up = 0, dn = 0;
                for (int m = 0; m < M; ++m) {
                    up += scenarios.up_at(a, t, m);
                    dn += scenarios.dn_at(a, t, m);
                }
                st.activation_settlement +=
                    dtau * scenarios.act_prob[a] * pb.da_price[t] *
                    (pb.activation_down_discount * dn * res.reserve_dn[res.pt(p, t)] -
                     pb.activation_up_premium * up * res.reserve_up[res.pt(p, t)]);
            }
    }
    for (int p = 0; p < P; ++p)
        for (int t = 0; t < H; ++t)
            for (int l = 0; l < L; ++l) {
                size_t k = res.ptl(p, t, l);
                double rho = scenarios.load_prob[l];
                st.eid_cost += rho * (res.eid_buy[k] * pb.eid_buy_price[t] -
                                      res.eid_sell[k] * pb.eid_sell_price[t]);
                st.iid_fee_cost +=
                    rho * res.iid_buy[k] * pb.p2p_iid_fee_fraction * pb.da_price[t];
            }
    // gross third-stage legs come from the raw assignment; the decoded arrays
    // only keep nets
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < H; ++t)
            for (int m = 0; m < M; ++m)
                for (int l = 0; l < L; ++l)
                    for (int a = 0; a < A; ++a) {
                        double w = scenarios.load_prob[l] * scenarios.act_prob[a] * dtau;
                        st.ert_cost += w * (x[cat.ertb(b, t, m, l, a)] * pb.ert_buy_price[t] -
                                            x[cat.erts(b, t, m, l, a)] * pb.ert_sell_price[t]);
                        double gross_buy = 0;
                        for (int q = 0; q < B; ++q) {
                            if (q == b) continue;
                            gross_buy += x[cat.irb(b, q, t, m, l, a)];
                        }
                        st.irt_fee_cost += w * gross_buy * pb.p2p_irt_fee_fraction * pb.da_price[t];
                    }

    return res;
}

ReserveVolumeMetric reserve_volume(const ClearingResult& result, int exclude_trailing_hours) {
    if (exclude_trailing_hours < 0 || exclude_trailing_hours >= result.H)
        throw P2pmcError("excluded trailing hours (" + std::to_string(exclude_trailing_hours) +
                         ") must lie in [0, hours)");
    ReserveVolumeMetric m;
    m.excluded_trailing_hours = exclude_trailing_hours;
    for (int p = 0; p < result.P; ++p)
        for (int t = 0; t < result.H - exclude_trailing_hours; ++t)
            m.total_kw += result.reserve_up[result.pt(p, t)];
    return m;
}

std::vector<SubstepDelivery> decompose_third_stage(const ClearingResult& result, int peer, int t,
                                                   int l, int a) {
    if (peer < 0 || peer >= result.P) throw P2pmcError("peer index out of range");
    if (result.peer_battery[peer] < 0)
        throw P2pmcError("peer '" + result.peer_ids[peer] +
                         "' has no battery and no third-stage position");
    std::vector<SubstepDelivery> out(result.M);
    for (int m = 0; m < result.M; ++m) {
        size_t k = result.ptmla(peer, t, m, l, a);
        out[m] = {result.activation_kw[k], result.battery_dev_kw[k], result.irt_net_kw[k],
                  result.ert_net_kw[k]};
    }
    return out;
}

} // namespace p2pmc
