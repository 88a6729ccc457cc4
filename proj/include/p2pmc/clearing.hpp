#ifndef P2PMC_CLEARING_HPP
#define P2PMC_CLEARING_HPP

#include "p2pmc/model.hpp"
#include "p2pmc/scenario.hpp"
#include "p2pmc/types.hpp"

#include <string>
#include <vector>

namespace p2pmc {

// one value per objective term family; costs positive, revenues negative
struct SettlementBreakdown {
    double da_purchase_cost = 0;
    double grid_tariff_cost = 0;
    double da_sale_revenue = 0;
    double fcr_capacity_revenue = 0;
    double activation_settlement = 0;
    double eid_cost = 0;
    double iid_fee_cost = 0;
    double ert_cost = 0;
    double irt_fee_cost = 0;
    double total() const {
        return da_purchase_cost + grid_tariff_cost + da_sale_revenue + fcr_capacity_revenue +
               activation_settlement + eid_cost + iid_fee_cost + ert_cost + irt_fee_cost;
    }
};

// decoded decisions of one market-clearing run
struct ClearingResult {
    MarketVariant variant = MarketVariant::iid_and_irt;
    SolveStatus status = SolveStatus::limit;
    double objective = 0;
    double bound = 0;
    double gap = 0;
    int64_t nodes = 0;
    std::string solver_note;
    uint64_t model_hash = 0;

    int P = 0, H = 0, M = 0, L = 0, A = 0;
    std::vector<std::string> peer_ids;
    std::vector<int32_t> peer_battery; // -1 for non-battery peers

    // first stage, [p][t]
    std::vector<double> da_buy, da_sell, reserve_up, reserve_dn;
    // second stage, [p][t][l] ([p][t+1][l] for soc)
    std::vector<double> ch2, dis2, soc2;
    std::vector<double> eid_buy, eid_sell;
    std::vector<double> iid_buy, iid_sell; // per-peer totals over counterparties
    // third stage, [p][t][m][l][a]; zero for non-battery peers
    std::vector<double> activation_kw;  // called amount, signed (+up, -down)
    std::vector<double> battery_dev_kw; // deviation from the second-stage schedule
    std::vector<double> irt_net_kw;     // bought minus sold between peers
    std::vector<double> ert_net_kw;     // bought minus sold externally

    SettlementBreakdown settlement;

    size_t pt(int p, int t) const { return static_cast<size_t>(p) * H + t; }
    size_t ptl(int p, int t, int l) const { return (static_cast<size_t>(p) * H + t) * L + l; }
    size_t p1tl(int p, int t, int l) const {
        return (static_cast<size_t>(p) * (H + 1) + t) * L + l;
    }
    size_t ptmla(int p, int t, int m, int l, int a) const {
        return (((static_cast<size_t>(p) * H + t) * M + m) * L + l) * A + a;
    }
};

struct ReserveVolumeMetric {
    double total_kw = 0;
    int excluded_trailing_hours = 0;
};

// Builds the variant instance, solves it with the configured mode, verifies
// the returned point independently, and decodes it. Throws on invalid input,
// on solver failure without an incumbent, and on a returned point that fails
// its own feasibility check.
ClearingResult run_case_study(const CommunityConfig& config, const ScenarioSet& scenarios);

// Decodes an already-solved point (internal or imported) against its build.
ClearingResult decode_solution(const CommunityConfig& config, const ScenarioSet& scenarios,
                               const BuildResult& built, const MilpSolution& sol);

// Sum of the up-reserve bids over all peers and all hours except the trailing
// excluded ones (the end-of-horizon bid collapse is a reporting artifact).
ReserveVolumeMetric reserve_volume(const ClearingResult& result, int exclude_trailing_hours);

struct SubstepDelivery {
    double activation_kw;
    double battery_dev_kw;
    double irt_net_kw;
    double ert_net_kw;
};
// per-substep delivery split for one (peer, hour, load scenario, activation
// scenario); errors for non-battery peers
std::vector<SubstepDelivery> decompose_third_stage(const ClearingResult& result, int peer, int t,
                                                   int l, int a);

} // namespace p2pmc

#endif
