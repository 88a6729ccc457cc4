#include "p2pmc/model.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>

namespace p2pmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// compact structured names: tag[i,j,...]
class NameBuf {
public:
    const char* make(const char* tag, std::initializer_list<int> idx) {
        char* p = buf_;
        while (*tag) *p++ = *tag++;
        *p++ = '[';
        bool first = true;
        for (int v : idx) {
            if (!first) *p++ = ',';
            first = false;
            p = std::to_chars(p, buf_ + sizeof buf_, v).ptr;
        }
        *p++ = ']';
        *p = 0;
        len_ = p - buf_;
        return buf_;
    }
    std::string_view view() const { return {buf_, len_}; }

private:
    char buf_[64];
    size_t len_ = 0;
};

} // namespace

int64_t expected_var_count(int P, int B, int H, int M, int L, int A) {
    int64_t pairsP = int64_t(P) * (P - 1), pairsB = int64_t(B) * (B - 1);
    int64_t v = 0;
    v += 2ll * P * H;                  // buy, sell
    v += 2ll * B * H;                  // rup, rdn
    v += 3ll * B * H * L;              // ch2, dis2, d2
    v += int64_t(B) * (H + 1) * L;     // soc2
    v += 2ll * P * H * L;              // eidb, eids
    v += 2ll * pairsP * H * L;         // iib, iis
    v += 3ll * B * H * M * L * A;      // ch3, dis3, d3
    v += int64_t(B) * H * (M + 1) * L * A; // soc3
    v += 2ll * B * H * M * L * A;      // ertb, erts
    v += 2ll * pairsB * H * M * L * A; // irb, irs
    return v;
}

int64_t expected_row_count(int P, int B, int H, int M, int L, int A) {
    int64_t pairsP = int64_t(P) * (P - 1), pairsB = int64_t(B) * (B - 1);
    int64_t r = 0;
    r += int64_t(P) * H * L;           // bal2
    r += pairsP * H * L;               // rec2
    r += int64_t(B) * H;               // rsym
    r += 4ll * B * H * L;              // re_up, re_dn, rp_up, rp_dn
    r += int64_t(B) * H * L;           // soc2r
    r += 2ll * B * H * L;              // chg2, dsg2
    r += int64_t(B) * H * M * L * A;   // bal3
    r += pairsB * H * M * L * A;       // rec3
    r += int64_t(B) * H * M * L * A;   // soc3r
    r += int64_t(B) * H * L * A;       // anc3
    r += 2ll * B * H * M * L * A;      // chg3, dsg3
    return r;
}

BuildResult build_model(const CommunityConfig& config, const ScenarioSet& scenarios) {
    auto t0 = std::chrono::steady_clock::now();
    {
        auto violations = validate_config(config, scenarios);
        if (!violations.empty()) {
            std::string msg = "configuration invalid:";
            for (const Violation& v : violations) msg += "\n  [" + v.code + "] " + v.message;
            throw P2pmcError(msg);
        }
    }

    BuildResult out;
    VariableCatalog& cat = out.catalog;
    cat.P = static_cast<int>(config.peers.size());
    cat.H = config.horizon.hours;
    cat.M = config.horizon.substeps;
    cat.L = scenarios.n_load;
    cat.A = scenarios.n_act;
    cat.peer_battery.assign(cat.P, -1);
    for (int p = 0; p < cat.P; ++p) {
        if (!config.peers[p].has_battery) continue;
        cat.peer_battery[p] = static_cast<int32_t>(cat.battery_peer.size());
        cat.battery_peer.push_back(p);
    }
    cat.B = static_cast<int>(cat.battery_peer.size());
    const int P = cat.P, B = cat.B, H = cat.H, M = cat.M, L = cat.L, A = cat.A;
    const double dtau = config.horizon.delta_tau();
    const PriceBook& pb = config.price_book;
    const bool p2p_iid = config.variant != MarketVariant::no_p2p;
    const bool p2p_irt = config.variant == MarketVariant::iid_and_irt;

    MilpInstance& inst = out.instance;
    inst = MilpInstance("P2PMC");
    const int64_t n_vars = expected_var_count(P, B, H, M, L, A);
    const int64_t n_rows = expected_row_count(P, B, H, M, L, A);
    // nonzero estimate: balance rows dominate
    int64_t nnz = int64_t(P) * H * L * (8 + 2 * (P - 1)) +
                  int64_t(B) * H * M * L * A * (10 + 2 * (B - 1)) +
                  2ll * P * (P - 1) * H * L + 2ll * B * (B - 1) * H * M * L * A +
                  20ll * B * H * L + 8ll * B * H * M * L * A + 2ll * B * H * L * A;
    inst.reserve(static_cast<size_t>(n_vars), static_cast<size_t>(n_rows),
                 static_cast<size_t>(nnz), static_cast<size_t>(n_vars) * 14);

    SolverHints& hints = out.hints;
    hints.blocks.num_blocks = H * L * A;
    hints.num_cut_groups = L * A;
    hints.cut_group_of_block.resize(hints.blocks.num_blocks);
    for (int t = 0; t < H; ++t)
        for (int l = 0; l < L; ++l)
            for (int a = 0; a < A; ++a)
                hints.cut_group_of_block[(int64_t(t) * L + l) * A + a] = l * A + a;
    hints.blocks.var_block.assign(static_cast<size_t>(n_vars), 0);
    hints.blocks.row_block.assign(static_cast<size_t>(n_rows), 0);
    hints.int_fix_group.assign(static_cast<size_t>(n_vars), -1);
    hints.int_round_pos.assign(static_cast<size_t>(n_vars), -1);
    hints.int_round_neg.assign(static_cast<size_t>(n_vars), -1);
    auto block_id = [&](int t, int l, int a) { return 1 + (int32_t(t) * L + l) * A + a; };

    NameBuf nb;
    auto& rep = out.report;
    auto add_var = [&](const char* tag, std::initializer_list<int> idx, double lo, double hi,
                       double obj, bool integer) {
        int j = inst.add_variable(nb.make(tag, idx), lo, hi, obj, integer);
        rep.var_counts[tag]++;
        return j;
    };

    // probability-weighted activation sums for the reserve objective
    std::vector<double> up_weight(H, 0.0), dn_weight(H, 0.0);
    for (int a = 0; a < A; ++a)
        for (int t = 0; t < H; ++t)
            for (int m = 0; m < M; ++m) {
                up_weight[t] += scenarios.act_prob[a] * scenarios.up_at(a, t, m);
                dn_weight[t] += scenarios.act_prob[a] * scenarios.dn_at(a, t, m);
            }

    // ---- variables, declaration order fixed ------------------------------
    cat.buy0 = inst.num_vars();
    for (int p = 0; p < P; ++p)
        for (int t = 0; t < H; ++t)
            add_var("buy", {p, t}, 0, kInf, pb.da_price[t] + pb.grid_tariff[t], false);
    cat.sell0 = inst.num_vars();
    for (int p = 0; p < P; ++p)
        for (int t = 0; t < H; ++t) add_var("sell", {p, t}, 0, kInf, -pb.da_price[t], false);
    cat.rup0 = inst.num_vars();
    for (int b = 0; b < B; ++b) {
        const BatterySpec& bat = *config.peers[cat.battery_peer[b]].battery;
        for (int t = 0; t < H; ++t)
            add_var("rup", {cat.battery_peer[b], t}, 0, bat.soc_max_kwh,
                    -pb.fcr_price[t] -
                        pb.activation_up_premium * pb.da_price[t] * dtau * up_weight[t],
                    false);
    }
    cat.rdn0 = inst.num_vars();
    for (int b = 0; b < B; ++b) {
        const BatterySpec& bat = *config.peers[cat.battery_peer[b]].battery;
        for (int t = 0; t < H; ++t)
            add_var("rdn", {cat.battery_peer[b], t}, 0, bat.soc_max_kwh,
                    -pb.fcr_price[t] +
                        pb.activation_down_discount * pb.da_price[t] * dtau * dn_weight[t],
                    false);
    }
    cat.ch20 = inst.num_vars();
    for (int b = 0; b < B; ++b) {
        const BatterySpec& bat = *config.peers[cat.battery_peer[b]].battery;
        for (int t = 0; t < H; ++t)
            for (int l = 0; l < L; ++l)
                add_var("ch2", {cat.battery_peer[b], t, l}, 0, bat.charge_max_kw, 0, false);
    }
    cat.dis20 = inst.num_vars();
    for (int b = 0; b < B; ++b) {
        const BatterySpec& bat = *config.peers[cat.battery_peer[b]].battery;
        for (int t = 0; t < H; ++t)
            for (int l = 0; l < L; ++l)
                add_var("dis2", {cat.battery_peer[b], t, l}, 0, bat.discharge_max_kw, 0, false);
    }
    cat.d20 = inst.num_vars();
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < H; ++t)
            for (int l = 0; l < L; ++l) {
                int64_t j = add_var("d2", {cat.battery_peer[b], t, l}, 0, 1, 0, true);
                hints.int_fix_group[j] = t;
                hints.int_round_pos[j] = static_cast<int32_t>(cat.ch2(b, t, l));
                hints.int_round_neg[j] = static_cast<int32_t>(cat.dis2(b, t, l));
            }
    cat.soc20 = inst.num_vars();
    for (int b = 0; b < B; ++b) {
        const BatterySpec& bat = *config.peers[cat.battery_peer[b]].battery;
        for (int t = 0; t <= H; ++t)
            for (int l = 0; l < L; ++l) {
                double lo = t == 0 ? bat.soc_initial_kwh : bat.soc_min_kwh;
                double hi = t == 0 ? bat.soc_initial_kwh : bat.soc_max_kwh;
                add_var("soc2", {cat.battery_peer[b], t, l}, lo, hi, 0, false);
            }
    }
    cat.eidb0 = inst.num_vars();
    for (int p = 0; p < P; ++p)
        for (int t = 0; t < H; ++t)
            for (int l = 0; l < L; ++l)
                add_var("eidb", {p, t, l}, 0, kInf, scenarios.load_prob[l] * pb.eid_buy_price[t],
                        false);
    cat.eids0 = inst.num_vars();
    for (int p = 0; p < P; ++p)
        for (int t = 0; t < H; ++t)
            for (int l = 0; l < L; ++l)
                add_var("eids", {p, t, l}, 0, kInf, -scenarios.load_prob[l] * pb.eid_sell_price[t],
                        false);
    cat.iib0 = inst.num_vars();
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < P; ++q) {
            if (q == p) continue;
            for (int t = 0; t < H; ++t)
                for (int l = 0; l < L; ++l)
                    add_var("iib", {p, q, t, l}, 0, p2p_iid ? kInf : 0.0,
                            scenarios.load_prob[l] * pb.p2p_iid_fee_fraction * pb.da_price[t],
                            false);
        }
    cat.iis0 = inst.num_vars();
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < P; ++q) {
            if (q == p) continue;
            for (int t = 0; t < H; ++t)
                for (int l = 0; l < L; ++l)
                    add_var("iis", {p, q, t, l}, 0, p2p_iid ? kInf : 0.0, 0, false);
        }

    auto third_loop = [&](auto&& fn) {
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < H; ++t)
                for (int m = 0; m < M; ++m)
                    for (int l = 0; l < L; ++l)
                        for (int a = 0; a < A; ++a) fn(b, t, m, l, a);
    };

    cat.ch30 = inst.num_vars();
    third_loop([&](int b, int t, int m, int l, int a) {
        const BatterySpec& bat = *config.peers[cat.battery_peer[b]].battery;
        int64_t j = add_var("ch3", {cat.battery_peer[b], t, m, l, a}, 0, bat.charge_max_kw, 0,
                            false);
        hints.blocks.var_block[j] = block_id(t, l, a);
    });
    cat.dis30 = inst.num_vars();
    third_loop([&](int b, int t, int m, int l, int a) {
        const BatterySpec& bat = *config.peers[cat.battery_peer[b]].battery;
        int64_t j = add_var("dis3", {cat.battery_peer[b], t, m, l, a}, 0, bat.discharge_max_kw, 0,
                            false);
        hints.blocks.var_block[j] = block_id(t, l, a);
    });
    cat.d30 = inst.num_vars();
    third_loop([&](int b, int t, int m, int l, int a) {
        int64_t j = add_var("d3", {cat.battery_peer[b], t, m, l, a}, 0, 1, 0, true);
        hints.blocks.var_block[j] = block_id(t, l, a);
        hints.int_fix_group[j] = H + t;
        hints.int_round_pos[j] = static_cast<int32_t>(cat.ch3(b, t, m, l, a));
        hints.int_round_neg[j] = static_cast<int32_t>(cat.dis3(b, t, m, l, a));
    });
    cat.soc30 = inst.num_vars();
    for (int b = 0; b < B; ++b) {
        const BatterySpec& bat = *config.peers[cat.battery_peer[b]].battery;
        for (int t = 0; t < H; ++t)
            for (int m = 0; m <= M; ++m)
                for (int l = 0; l < L; ++l)
                    for (int a = 0; a < A; ++a) {
                        int64_t j = add_var("soc3", {cat.battery_peer[b], t, m, l, a},
                                            bat.soc_min_kwh, bat.soc_max_kwh, 0, false);
                        hints.blocks.var_block[j] = block_id(t, l, a);
                    }
    }
    cat.ertb0 = inst.num_vars();
    third_loop([&](int b, int t, int m, int l, int a) {
        double w = scenarios.load_prob[l] * scenarios.act_prob[a] * dtau;
        int64_t j = add_var("ertb", {cat.battery_peer[b], t, m, l, a}, 0, kInf,
                            w * pb.ert_buy_price[t], false);
        hints.blocks.var_block[j] = block_id(t, l, a);
    });
    cat.erts0 = inst.num_vars();
    third_loop([&](int b, int t, int m, int l, int a) {
        double w = scenarios.load_prob[l] * scenarios.act_prob[a] * dtau;
        int64_t j = add_var("erts", {cat.battery_peer[b], t, m, l, a}, 0, kInf,
                            -w * pb.ert_sell_price[t], false);
        hints.blocks.var_block[j] = block_id(t, l, a);
    });
    cat.irb0 = inst.num_vars();
    for (int b = 0; b < B; ++b)
        for (int q = 0; q < B; ++q) {
            if (q == b) continue;
            for (int t = 0; t < H; ++t)
                for (int m = 0; m < M; ++m)
                    for (int l = 0; l < L; ++l)
                        for (int a = 0; a < A; ++a) {
                            double w = scenarios.load_prob[l] * scenarios.act_prob[a] * dtau;
                            int64_t j = add_var(
                                "irb", {cat.battery_peer[b], cat.battery_peer[q], t, m, l, a}, 0,
                                p2p_irt ? kInf : 0.0,
                                w * pb.p2p_irt_fee_fraction * pb.da_price[t], false);
                            hints.blocks.var_block[j] = block_id(t, l, a);
                        }
        }
    cat.irs0 = inst.num_vars();
    for (int b = 0; b < B; ++b)
        for (int q = 0; q < B; ++q) {
            if (q == b) continue;
            for (int t = 0; t < H; ++t)
                for (int m = 0; m < M; ++m)
                    for (int l = 0; l < L; ++l)
                        for (int a = 0; a < A; ++a) {
                            int64_t j = add_var(
                                "irs", {cat.battery_peer[b], cat.battery_peer[q], t, m, l, a}, 0,
                                p2p_irt ? kInf : 0.0, 0, false);
                            hints.blocks.var_block[j] = block_id(t, l, a);
                        }
        }
    cat.n_vars = inst.num_vars();

    // ---- rows -------------------------------------------------------------
    auto add_row = [&](const char* tag, std::initializer_list<int> idx, RowSense s, double rhs,
                       int32_t block = 0) {
        int i = inst.begin_row(nb.make(tag, idx), s, rhs);
        rep.row_counts[tag]++;
        hints.blocks.row_block[i] = block;
        return i;
    };

    // second-stage energy balance
    for (int p = 0; p < P; ++p)
        for (int t = 0; t < H; ++t)
            for (int l = 0; l < L; ++l) {
                double rhs = scenarios.load_at(l, p, t) - scenarios.pv_at(p, t);
                add_row("bal2", {p, t, l}, RowSense::eq, rhs);
                inst.add_coef(static_cast<int>(cat.buy(p, t)), 1.0);
                inst.add_coef(static_cast<int>(cat.sell(p, t)), -1.0);
                int b = cat.peer_battery[p];
                if (b >= 0) {
                    inst.add_coef(static_cast<int>(cat.ch2(b, t, l)), -1.0);
                    inst.add_coef(static_cast<int>(cat.dis2(b, t, l)), 1.0);
                }
                for (int q = 0; q < P; ++q) {
                    if (q == p) continue;
                    inst.add_coef(static_cast<int>(cat.iib(p, q, t, l)), 1.0);
                    inst.add_coef(static_cast<int>(cat.iis(p, q, t, l)), -1.0);
                }
                inst.add_coef(static_cast<int>(cat.eidb(p, t, l)), 1.0);
                inst.add_coef(static_cast<int>(cat.eids(p, t, l)), -1.0);
            }
    // second-stage reciprocity
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < P; ++q) {
            if (q == p) continue;
            for (int t = 0; t < H; ++t)
                for (int l = 0; l < L; ++l) {
                    add_row("rec2", {p, q, t, l}, RowSense::eq, 0);
                    inst.add_coef(static_cast<int>(cat.iib(p, q, t, l)), 1.0);
                    inst.add_coef(static_cast<int>(cat.iis(q, p, t, l)), -1.0);
                }
        }
    // symmetric reserve
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < H; ++t) {
            add_row("rsym", {cat.battery_peer[b], t}, RowSense::eq, 0);
            inst.add_coef(static_cast<int>(cat.rup(b, t)), 1.0);
            inst.add_coef(static_cast<int>(cat.rdn(b, t)), -1.0);
        }
    // reserve energy headroom against the planned end-of-hour state of charge
    for (int b = 0; b < B; ++b) {
        const BatterySpec& bat = *config.peers[cat.battery_peer[b]].battery;
        for (int t = 0; t < H; ++t)
            for (int l = 0; l < L; ++l) {
                add_row("re_up", {cat.battery_peer[b], t, l}, RowSense::le, 0);
                inst.add_coef(static_cast<int>(cat.rup(b, t)), 1.0);
                inst.add_coef(static_cast<int>(cat.soc2(b, t + 1, l)), -1.0);
                add_row("re_dn", {cat.battery_peer[b], t, l}, RowSense::le, bat.soc_max_kwh);
                inst.add_coef(static_cast<int>(cat.rdn(b, t)), 1.0);
                inst.add_coef(static_cast<int>(cat.soc2(b, t + 1, l)), 1.0);
            }
    }
    // reserve power headroom; a planned charge can swing to discharge
    for (int b = 0; b < B; ++b) {
        const BatterySpec& bat = *config.peers[cat.battery_peer[b]].battery;
        for (int t = 0; t < H; ++t)
            for (int l = 0; l < L; ++l) {
                add_row("rp_up", {cat.battery_peer[b], t, l}, RowSense::le, bat.discharge_max_kw);
                inst.add_coef(static_cast<int>(cat.rup(b, t)), 1.0);
                inst.add_coef(static_cast<int>(cat.dis2(b, t, l)), 1.0);
                inst.add_coef(static_cast<int>(cat.ch2(b, t, l)), -1.0);
                add_row("rp_dn", {cat.battery_peer[b], t, l}, RowSense::le, bat.charge_max_kw);
                inst.add_coef(static_cast<int>(cat.rdn(b, t)), 1.0);
                inst.add_coef(static_cast<int>(cat.dis2(b, t, l)), -1.0);
                inst.add_coef(static_cast<int>(cat.ch2(b, t, l)), 1.0);
            }
    }
    // second-stage battery dynamics and charge/discharge gates
    for (int b = 0; b < B; ++b) {
        const BatterySpec& bat = *config.peers[cat.battery_peer[b]].battery;
        for (int t = 0; t < H; ++t)
            for (int l = 0; l < L; ++l) {
                add_row("soc2r", {cat.battery_peer[b], t, l}, RowSense::eq, 0);
                inst.add_coef(static_cast<int>(cat.soc2(b, t + 1, l)), 1.0);
                inst.add_coef(static_cast<int>(cat.soc2(b, t, l)), -1.0);
                inst.add_coef(static_cast<int>(cat.ch2(b, t, l)), -bat.eta_charge);
                inst.add_coef(static_cast<int>(cat.dis2(b, t, l)), 1.0 / bat.eta_discharge);
            }
        for (int t = 0; t < H; ++t)
            for (int l = 0; l < L; ++l) {
                add_row("chg2", {cat.battery_peer[b], t, l}, RowSense::le, 0);
                inst.add_coef(static_cast<int>(cat.ch2(b, t, l)), 1.0);
                inst.add_coef(static_cast<int>(cat.d2(b, t, l)), -bat.charge_max_kw);
                add_row("dsg2", {cat.battery_peer[b], t, l}, RowSense::le, bat.discharge_max_kw);
                inst.add_coef(static_cast<int>(cat.dis2(b, t, l)), 1.0);
                inst.add_coef(static_cast<int>(cat.d2(b, t, l)), bat.discharge_max_kw);
            }
    }
    // third-stage activation delivery balance
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < H; ++t)
            for (int m = 0; m < M; ++m)
                for (int l = 0; l < L; ++l)
                    for (int a = 0; a < A; ++a) {
                        add_row("bal3", {cat.battery_peer[b], t, m, l, a}, RowSense::eq, 0,
                                block_id(t, l, a));
                        inst.add_coef(static_cast<int>(cat.dis3(b, t, m, l, a)), 1.0);
                        inst.add_coef(static_cast<int>(cat.ch3(b, t, m, l, a)), -1.0);
                        inst.add_coef(static_cast<int>(cat.dis2(b, t, l)), -1.0);
                        inst.add_coef(static_cast<int>(cat.ch2(b, t, l)), 1.0);
                        inst.add_coef(static_cast<int>(cat.ertb(b, t, m, l, a)), 1.0);
                        inst.add_coef(static_cast<int>(cat.erts(b, t, m, l, a)), -1.0);
                        for (int q = 0; q < B; ++q) {
                            if (q == b) continue;
                            inst.add_coef(static_cast<int>(cat.irb(b, q, t, m, l, a)), 1.0);
                            inst.add_coef(static_cast<int>(cat.irs(b, q, t, m, l, a)), -1.0);
                        }
                        double pu = scenarios.up_at(a, t, m), pd = scenarios.dn_at(a, t, m);
                        if (pu != 0.0) inst.add_coef(static_cast<int>(cat.rup(b, t)), -pu);
                        if (pd != 0.0) inst.add_coef(static_cast<int>(cat.rdn(b, t)), pd);
                    }
    // third-stage reciprocity
    for (int b = 0; b < B; ++b)
        for (int q = 0; q < B; ++q) {
            if (q == b) continue;
            for (int t = 0; t < H; ++t)
                for (int m = 0; m < M; ++m)
                    for (int l = 0; l < L; ++l)
                        for (int a = 0; a < A; ++a) {
                            add_row("rec3", {cat.battery_peer[b], cat.battery_peer[q], t, m, l, a},
                                    RowSense::eq, 0, block_id(t, l, a));
                            inst.add_coef(static_cast<int>(cat.irb(b, q, t, m, l, a)), 1.0);
                            inst.add_coef(static_cast<int>(cat.irs(q, b, t, m, l, a)), -1.0);
                        }
        }
    // third-stage battery dynamics at sub-hour resolution
    for (int b = 0; b < B; ++b) {
        const BatterySpec& bat = *config.peers[cat.battery_peer[b]].battery;
        for (int t = 0; t < H; ++t)
            for (int m = 0; m < M; ++m)
                for (int l = 0; l < L; ++l)
                    for (int a = 0; a < A; ++a) {
                        add_row("soc3r", {cat.battery_peer[b], t, m, l, a}, RowSense::eq, 0,
                                block_id(t, l, a));
                        inst.add_coef(static_cast<int>(cat.soc3(b, t, m + 1, l, a)), 1.0);
                        inst.add_coef(static_cast<int>(cat.soc3(b, t, m, l, a)), -1.0);
                        inst.add_coef(static_cast<int>(cat.ch3(b, t, m, l, a)),
                                      -dtau * bat.eta_charge);
                        inst.add_coef(static_cast<int>(cat.dis3(b, t, m, l, a)),
                                      dtau / bat.eta_discharge);
                    }
    }
    // third-stage state anchored to the hour-start second-stage state
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < H; ++t)
            for (int l = 0; l < L; ++l)
                for (int a = 0; a < A; ++a) {
                    add_row("anc3", {cat.battery_peer[b], t, l, a}, RowSense::eq, 0,
                            block_id(t, l, a));
                    inst.add_coef(static_cast<int>(cat.soc3(b, t, 0, l, a)), 1.0);
                    inst.add_coef(static_cast<int>(cat.soc2(b, t, l)), -1.0);
                }
    // third-stage charge/discharge gates
    for (int b = 0; b < B; ++b) {
        const BatterySpec& bat = *config.peers[cat.battery_peer[b]].battery;
        for (int t = 0; t < H; ++t)
            for (int m = 0; m < M; ++m)
                for (int l = 0; l < L; ++l)
                    for (int a = 0; a < A; ++a) {
                        add_row("chg3", {cat.battery_peer[b], t, m, l, a}, RowSense::le, 0,
                                block_id(t, l, a));
                        inst.add_coef(static_cast<int>(cat.ch3(b, t, m, l, a)), 1.0);
                        inst.add_coef(static_cast<int>(cat.d3(b, t, m, l, a)), -bat.charge_max_kw);
                        add_row("dsg3", {cat.battery_peer[b], t, m, l, a}, RowSense::le,
                                bat.discharge_max_kw, block_id(t, l, a));
                        inst.add_coef(static_cast<int>(cat.dis3(b, t, m, l, a)), 1.0);
                        inst.add_coef(static_cast<int>(cat.d3(b, t, m, l, a)),
                                      bat.discharge_max_kw);
                    }
    }

    rep.total_vars = inst.num_vars();
    rep.total_rows = inst.num_rows();
    rep.nonzeros = inst.num_nonzeros();
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    if (rep.total_vars != n_vars || rep.total_rows != n_rows)
        throw P2pmcError("internal: built size differs from the closed-form count");
    return out;
}

} // namespace p2pmc
