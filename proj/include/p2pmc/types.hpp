#ifndef P2PMC_TYPES_HPP
#define P2PMC_TYPES_HPP

#include "p2pmc/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace p2pmc {

struct BatterySpec {
    double soc_min_kwh = 0;
    double soc_max_kwh = 0;
    double charge_max_kw = 0;
    double discharge_max_kw = 0;
    double eta_charge = 1.0;
    double eta_discharge = 1.0;
    double soc_initial_kwh = 0; // defaults to soc_min_kwh
};

struct Peer {
    std::string id;
    bool has_battery = false;
    bool has_pv = false;
    std::optional<BatterySpec> battery;
    double pv_peak_kw = 0;
};

// all prices in euro-cents; energy prices per kWh, reserve capacity per kW
struct PriceBook {
    std::vector<double> da_price;
    std::vector<double> grid_tariff;
    std::vector<double> fcr_price;
    std::vector<double> eid_buy_price, eid_sell_price;
    std::vector<double> ert_buy_price, ert_sell_price;
    double p2p_iid_fee_fraction = 0.05;
    double p2p_irt_fee_fraction = 0.10;
    double activation_up_premium = 1.1;
    double activation_down_discount = 0.9;
};

// delta_tau is the exact rational 1/substeps; substeps is the stored form so
// 288 five-minute periods accumulate no drift
struct Horizon {
    int hours = 24;
    int substeps = 12;
    double delta_tau() const { return 1.0 / substeps; }
};

enum class MarketVariant : uint8_t { no_p2p, iid_only, iid_and_irt };

std::string to_string(MarketVariant v);
std::optional<MarketVariant> variant_from_string(std::string_view s);

struct CommunityConfig {
    std::vector<Peer> peers;
    PriceBook price_book;
    Horizon horizon;
    MarketVariant variant = MarketVariant::iid_and_irt;
    int reserve_exclude_trailing_hours = 2;
    SolveOptions solver;
};

// equiprobable load scenarios, deterministic PV, and sampled reserve
// activation fractions
struct ScenarioSet {
    int n_load = 0;
    int n_act = 0;
    int hours = 0;
    int substeps = 0;
    std::vector<double> load;      // [l][p][t] net inflexible load, kWh
    std::vector<double> pv;        // [p][t] production, kWh
    std::vector<double> load_prob; // per l
    std::vector<double> act_up;    // [a][t][m] fraction of the up bid called
    std::vector<double> act_dn;    // [a][t][m]
    std::vector<double> act_prob;  // per a

    int n_peers() const { return hours > 0 && !pv.empty() ? static_cast<int>(pv.size()) / hours : 0; }
    double load_at(int l, int p, int t) const {
        return load[(static_cast<size_t>(l) * n_peers() + p) * hours + t];
    }
    double pv_at(int p, int t) const { return pv[static_cast<size_t>(p) * hours + t]; }
    double up_at(int a, int t, int m) const {
        return act_up[(static_cast<size_t>(a) * hours + t) * substeps + m];
    }
    double dn_at(int a, int t, int m) const {
        return act_dn[(static_cast<size_t>(a) * hours + t) * substeps + m];
    }
};

struct Violation {
    std::string code;
    std::string message;
    bool operator==(const Violation&) const = default;
};

// Pure validation: every violated invariant comes back as data, sorted by
// (code, message) so permuting peers or scenarios yields the same set.
std::vector<Violation> validate_config(const CommunityConfig& config,
                                       const ScenarioSet& scenarios);

} // namespace p2pmc

#endif
