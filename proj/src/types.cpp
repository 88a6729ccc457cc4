#include "p2pmc/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace p2pmc {

std::string to_string(MarketVariant v) {
    switch (v) {
    case MarketVariant::no_p2p: return "no_p2p";
    case MarketVariant::iid_only: return "iid_only";
    case MarketVariant::iid_and_irt: return "iid_irt";
    }
    return "?";
}

std::optional<MarketVariant> variant_from_string(std::string_view s) {
    if (s == "no_p2p" || s == "no-p2p" || s == "nop2p") return MarketVariant::no_p2p;
    if (s == "iid_only" || s == "iid-only" || s == "iid") return MarketVariant::iid_only;
    if (s == "iid_irt" || s == "iid-irt" || s == "iid_and_irt") return MarketVariant::iid_and_irt;
    return std::nullopt;
}

namespace {

void check_price_series(std::vector<Violation>& out, const std::vector<double>& v,
                        const char* name, int hours) {
    if (static_cast<int>(v.size()) != hours) {
        out.push_back({"price.length", std::string(name) + " has " + std::to_string(v.size()) +
                                           " entries, horizon has " + std::to_string(hours)});
        return;
    }
    for (int t = 0; t < hours; ++t)
        if (v[t] < 0)
            out.push_back({"price.negative", std::string(name) + "[" + std::to_string(t) +
                                                 "] is negative"});
}

} // namespace

std::vector<Violation> validate_config(const CommunityConfig& config,
                                       const ScenarioSet& scenarios) {
    std::vector<Violation> out;
    const int H = config.horizon.hours;
    const int M = config.horizon.substeps;
    const int P = static_cast<int>(config.peers.size());

    if (H < 1) out.push_back({"horizon.hours", "hours must be at least 1"});
    if (M < 1) out.push_back({"horizon.substeps", "substeps must be at least 1"});
    if (config.peers.empty()) out.push_back({"peer.none", "community has no peers"});

    std::set<std::string> ids;
    for (const Peer& p : config.peers) {
        if (!ids.insert(p.id).second)
            out.push_back({"peer.duplicate_id", "peer id '" + p.id + "' appears more than once"});
        if (p.has_battery && !p.battery)
            out.push_back({"peer.battery_missing", "peer '" + p.id + "' has_battery without a battery spec"});
        if (!p.has_battery && p.battery)
            out.push_back({"peer.battery_unexpected", "peer '" + p.id + "' carries a battery spec but has_battery is false"});
        if (p.has_pv && p.pv_peak_kw <= 0)
            out.push_back({"peer.pv_peak", "peer '" + p.id + "' has_pv with nonpositive pv_peak_kw"});
        if (!p.has_pv && p.pv_peak_kw != 0)
            out.push_back({"peer.pv_unexpected", "peer '" + p.id + "' has pv_peak_kw but has_pv is false"});
        if (p.battery) {
            const BatterySpec& b = *p.battery;
            if (!(0 <= b.soc_min_kwh && b.soc_min_kwh <= b.soc_initial_kwh &&
                  b.soc_initial_kwh <= b.soc_max_kwh))
                out.push_back({"battery.soc_bounds", "peer '" + p.id +
                                                         "': soc bounds inverted or initial soc outside [min,max]"});
            if (b.charge_max_kw <= 0 || b.discharge_max_kw <= 0)
                out.push_back({"battery.power", "peer '" + p.id + "': (dis)charge power must be positive"});
            if (!(b.eta_charge > 0 && b.eta_charge <= 1) ||
                !(b.eta_discharge > 0 && b.eta_discharge <= 1))
                out.push_back({"battery.efficiency", "peer '" + p.id + "': efficiency must lie in (0,1]"});
        }
    }

    const PriceBook& pb = config.price_book;
    check_price_series(out, pb.da_price, "da_price", H);
    check_price_series(out, pb.grid_tariff, "grid_tariff", H);
    check_price_series(out, pb.fcr_price, "fcr_price", H);
    check_price_series(out, pb.eid_buy_price, "eid_buy_price", H);
    check_price_series(out, pb.eid_sell_price, "eid_sell_price", H);
    check_price_series(out, pb.ert_buy_price, "ert_buy_price", H);
    check_price_series(out, pb.ert_sell_price, "ert_sell_price", H);
    if (static_cast<int>(pb.da_price.size()) == H &&
        static_cast<int>(pb.eid_buy_price.size()) == H &&
        static_cast<int>(pb.eid_sell_price.size()) == H &&
        static_cast<int>(pb.ert_buy_price.size()) == H) {
        for (int t = 0; t < H; ++t) {
            if (pb.eid_buy_price[t] < pb.da_price[t] - 1e-12 ||
                pb.eid_sell_price[t] > pb.da_price[t] + 1e-12)
                out.push_back({"price.order_eid", "hour " + std::to_string(t) +
                                                      ": need eid_buy >= da >= eid_sell"});
            if (pb.ert_buy_price[t] < pb.eid_buy_price[t] - 1e-12)
                out.push_back({"price.order_ert", "hour " + std::to_string(t) +
                                                      ": need ert_buy >= eid_buy"});
        }
    }
    if (pb.p2p_iid_fee_fraction < 0 || pb.p2p_irt_fee_fraction < 0)
        out.push_back({"price.fee_fraction", "p2p fee fractions must be nonnegative"});
    if (pb.activation_up_premium < 0 || pb.activation_down_discount < 0)
        out.push_back({"price.activation_coeff", "activation settlement coefficients must be nonnegative"});

    if (config.reserve_exclude_trailing_hours < 0 ||
        config.reserve_exclude_trailing_hours >= H)
        out.push_back({"reserve.exclude_range",
                       "reserve_exclude_trailing_hours must lie in [0, hours)"});

    // scenario dimensions and contents
    const ScenarioSet& s = scenarios;
    if (s.hours != H || s.substeps != M)
        out.push_back({"scenario.horizon", "scenario horizon " + std::to_string(s.hours) + "x" +
                                               std::to_string(s.substeps) + " does not match config " +
                                               std::to_string(H) + "x" + std::to_string(M)});
    if (s.n_load < 1) out.push_back({"scenario.load_count", "need at least one load scenario"});
    if (s.n_act < 1) out.push_back({"scenario.act_count", "need at least one activation scenario"});
    if (s.load.size() != static_cast<size_t>(s.n_load) * P * H)
        out.push_back({"scenario.load_dims", "load table size " + std::to_string(s.load.size()) +
                                                 ", expected " + std::to_string(size_t(s.n_load) * P * H)});
    if (s.pv.size() != static_cast<size_t>(P) * H)
        out.push_back({"scenario.pv_dims", "pv table size " + std::to_string(s.pv.size()) +
                                               ", expected " + std::to_string(size_t(P) * H)});
    if (s.act_up.size() != static_cast<size_t>(s.n_act) * H * M ||
        s.act_dn.size() != s.act_up.size())
        out.push_back({"scenario.act_dims", "activation tables sized " +
                                                std::to_string(s.act_up.size()) + "/" +
                                                std::to_string(s.act_dn.size()) + ", expected " +
                                                std::to_string(size_t(std::max(s.n_act, 0)) * H * M)});
    if (static_cast<int>(s.load_prob.size()) != s.n_load)
        out.push_back({"scenario.load_probs", "probability list does not match scenario count"});
    else {
        double sum = 0;
        for (double r : s.load_prob) {
            if (r <= 0) out.push_back({"scenario.load_probs", "nonpositive load probability"});
            sum += r;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            out.push_back({"scenario.load_probs", "load probabilities sum to " + std::to_string(sum)});
    }
    if (static_cast<int>(s.act_prob.size()) != s.n_act)
        out.push_back({"scenario.act_probs", "probability list does not match scenario count"});
    else {
        double sum = 0;
        for (double r : s.act_prob) {
            if (r <= 0) out.push_back({"scenario.act_probs", "nonpositive activation probability"});
            sum += r;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            out.push_back({"scenario.act_probs", "activation probabilities sum to " + std::to_string(sum)});
    }
    for (size_t k = 0; k < s.load.size(); ++k)
        if (s.load[k] < 0) {
            out.push_back({"scenario.negative_load", "load cell " + std::to_string(k) + " is negative"});
            break;
        }
    for (size_t k = 0; k < s.pv.size(); ++k)
        if (s.pv[k] < 0) {
            out.push_back({"scenario.negative_pv", "pv cell " + std::to_string(k) + " is negative"});
            break;
        }
    if (s.act_up.size() == s.act_dn.size()) {
        for (size_t k = 0; k < s.act_up.size(); ++k) {
            double up = s.act_up[k], dn = s.act_dn[k];
            if (up < 0 || up > 1 || dn < 0 || dn > 1) {
                out.push_back({"scenario.activation_range", "activation fraction outside [0,1] at index " +
                                                               std::to_string(k)});
                break;
            }
        }
        for (size_t k = 0; k < s.act_up.size(); ++k) {
            if (s.act_up[k] * s.act_dn[k] != 0.0) {
                out.push_back({"scenario.bidirectional_activation",
                               "bidirectional activation at index " + std::to_string(k) +
                                   ": a frequency deviation is one-directional per instant"});
                break;
            }
        }
    }

    std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        return a.code != b.code ? a.code < b.code : a.message < b.message;
    });
    return out;
}

} // namespace p2pmc
