#ifndef P2PMC_TESTS_FIXTURES_HPP
#define P2PMC_TESTS_FIXTURES_HPP

#include "p2pmc/scenario.hpp"
#include "p2pmc/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace p2pmc_tests {

// community with a 4-way asset split: battery / battery+pv / pv / none
inline p2pmc::CommunityConfig make_config(int peers = 32, int hours = 24, int substeps = 12) {
    using namespace p2pmc;
    CommunityConfig cfg;
    cfg.horizon.hours = hours;
    cfg.horizon.substeps = substeps;
    for (int i = 0; i < peers; ++i) {
        Peer p;
        char buf[16];
        std::snprintf(buf, sizeof buf, "p%02d", i);
        p.id = buf;
        int cls = i % 4; // 0 battery, 1 battery+pv, 2 pv, 3 none
        if (cls == 0 || cls == 1) {
            p.has_battery = true;
            BatterySpec b;
            b.soc_min_kwh = 0;
            b.soc_max_kwh = 10;
            b.charge_max_kw = 10;
            b.discharge_max_kw = 10;
            b.eta_charge = 0.95;
            b.eta_discharge = 0.95;
            b.soc_initial_kwh = 0;
            p.battery = b;
        }
        if (cls == 1 || cls == 2) {
            p.has_pv = true;
            p.pv_peak_kw = 3.0;
        }
        cfg.peers.push_back(std::move(p));
    }
    PriceBook& pb = cfg.price_book;
    pb.da_price.resize(hours);
    pb.grid_tariff.assign(hours, 0.8); // below the EID markup so imports clear day-ahead
    pb.fcr_price.resize(hours);
    for (int t = 0; t < hours; ++t) {
        double frac = static_cast<double>(t) / hours;
        pb.da_price[t] = 4.0 + 1.5 * std::sin(2 * 3.14159265358979 * (frac - 0.25)) +
                         (t >= 17 && t <= 20 ? 0.8 : 0.0);
        pb.fcr_price[t] = t < 5 ? 2.4 : (t >= 22 ? 1.6 : 0.7);
    }
    pb.eid_buy_price.resize(hours);
    pb.eid_sell_price.resize(hours);
    pb.ert_buy_price.resize(hours);
    pb.ert_sell_price.resize(hours);
    for (int t = 0; t < hours; ++t) {
        pb.eid_buy_price[t] = 1.5 * pb.da_price[t];
        pb.eid_sell_price[t] = 0.5 * pb.da_price[t];
        pb.ert_buy_price[t] = 2.0 * pb.da_price[t];
        pb.ert_sell_price[t] = 0.25 * pb.da_price[t];
    }
    return cfg;
}

// deterministic synthetic load days + pv, run through the real ingest path
inline p2pmc::ScenarioSet make_scenarios(const p2pmc::CommunityConfig& cfg, int n_days, int n_act,
                                         uint64_t seed) {
    using namespace p2pmc;
    const int H = cfg.horizon.hours;
    std::vector<SeriesTable> days(n_days);
    for (int d = 0; d < n_days; ++d) {
        days[d].name = "day" + std::to_string(d + 1);
        for (size_t p = 0; p < cfg.peers.size(); ++p) {
            for (int t = 0; t < H; ++t) {
                double base = 0.35 + 0.25 * ((p * 7) % 5);
                double morning = std::exp(-std::pow((t - 7.5) / 2.0, 2));
                double evening = std::exp(-std::pow((t - 18.5) / 2.5, 2));
                double shape = base + 0.9 * morning + 1.4 * evening;
                double daywob =
                    1.0 + 0.22 * std::sin(0.9 * d + 0.8 * t + 1.7 * static_cast<double>(p % 9));
                double v = shape * daywob;
                days[d].cells.push_back({cfg.peers[p].id, t, std::max(0.05, v)});
            }
        }
    }
    SeriesTable pv;
    pv.name = "pv";
    for (size_t p = 0; p < cfg.peers.size(); ++p) {
        if (!cfg.peers[p].has_pv) continue;
        for (int t = 0; t < H; ++t) {
            double bell = std::exp(-std::pow((t - 13.0) / 3.2, 2));
            pv.cells.push_back({cfg.peers[p].id, t, cfg.peers[p].pv_peak_kw * 0.8 * bell});
        }
    }
    ScenarioSet s = ingest_load_scenarios(days, pv, cfg.peers, cfg.horizon);
    ActivationSamplerSpec spec;
    spec.seed = seed;
    spec.scenario_count = n_act;
    sample_activation_scenarios(spec, cfg.horizon, s);
    return s;
}

} // namespace p2pmc_tests

#endif
