#include "p2pmc/config_json.hpp"

#include <fstream>
#include <json.hpp>

namespace p2pmc {

namespace {

using nlohmann::json;

std::vector<double> price_series(const json& j, const char* key, int hours,
                                 const std::vector<double>* fallback = nullptr,
                                 double fallback_scale = 1.0) {
    if (!j.contains(key)) {
        std::vector<double> v(hours, 0.0);
        if (fallback)
            for (int t = 0; t < hours; ++t) v[t] = (*fallback)[t] * fallback_scale;
        return v;
    }
    const json& e = j.at(key);
    if (e.is_number()) return std::vector<double>(hours, e.get<double>());
    if (!e.is_array()) throw P2pmcError(std::string("price_book.") + key + " must be a number or array");
    std::vector<double> v = e.get<std::vector<double>>();
    return v;
}

} // namespace

CommunityConfig config_from_json_text(const std::string& text, const std::string& source_name) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw P2pmcError(source_name + ": " + e.what());
    }
    try {
        CommunityConfig cfg;
        if (j.contains("horizon")) {
            cfg.horizon.hours = j["horizon"].value("hours", 24);
            cfg.horizon.substeps = j["horizon"].value("substeps", 12);
        }
        const int H = cfg.horizon.hours;

        for (const json& pj : j.at("peers")) {
            Peer p;
            p.id = pj.at("id").get<std::string>();
            p.has_battery = pj.value("has_battery", false);
            p.has_pv = pj.value("has_pv", false);
            if (pj.contains("battery")) {
                const json& bj = pj["battery"];
                BatterySpec b;
                b.soc_min_kwh = bj.value("soc_min_kwh", 0.0);
                b.soc_max_kwh = bj.at("soc_max_kwh").get<double>();
                b.charge_max_kw = bj.at("charge_max_kw").get<double>();
                b.discharge_max_kw = bj.at("discharge_max_kw").get<double>();
                b.eta_charge = bj.value("eta_charge", 0.95);
                b.eta_discharge = bj.value("eta_discharge", 0.95);
                b.soc_initial_kwh = bj.value("soc_initial_kwh", b.soc_min_kwh);
                p.battery = b;
            }
            if (pj.contains("pv_peak_kw")) p.pv_peak_kw = pj["pv_peak_kw"].get<double>();
            cfg.peers.push_back(std::move(p));
        }

        const json& pb = j.at("price_book");
        PriceBook& book = cfg.price_book;
        book.da_price = price_series(pb, "da_price", H);
        book.grid_tariff = price_series(pb, "grid_tariff", H);
        book.fcr_price = price_series(pb, "fcr_price", H);
        book.eid_buy_price = price_series(pb, "eid_buy_price", H, &book.da_price, 1.5);
        book.eid_sell_price = price_series(pb, "eid_sell_price", H, &book.da_price, 0.5);
        book.ert_buy_price = price_series(pb, "ert_buy_price", H, &book.da_price, 2.0);
        book.ert_sell_price = price_series(pb, "ert_sell_price", H, &book.da_price, 0.25);
        book.p2p_iid_fee_fraction = pb.value("p2p_iid_fee_fraction", 0.05);
        book.p2p_irt_fee_fraction = pb.value("p2p_irt_fee_fraction", 0.10);
        book.activation_up_premium = pb.value("activation_up_premium", 1.1);
        book.activation_down_discount = pb.value("activation_down_discount", 0.9);

        if (j.contains("variant")) {
            auto v = variant_from_string(j["variant"].get<std::string>());
            if (!v) throw P2pmcError("unknown variant '" + j["variant"].get<std::string>() + "'");
            cfg.variant = *v;
        }
        cfg.reserve_exclude_trailing_hours = j.value("reserve_exclude_trailing_hours", 2);

        if (j.contains("solver")) {
            const json& sj = j["solver"];
            if (sj.contains("mode")) {
                std::string m = sj["mode"].get<std::string>();
                if (m == "exact") cfg.solver.mode = SolveMode::exact_bnb;
                else if (m == "rnf") cfg.solver.mode = SolveMode::relax_and_fix;
                else if (m == "lp") cfg.solver.mode = SolveMode::lp_only;
                else if (m == "external") cfg.solver.mode = SolveMode::external;
                else throw P2pmcError("unknown solver mode '" + m + "'");
            }
            cfg.solver.feas_tol = sj.value("feasibility_tol", cfg.solver.feas_tol);
            cfg.solver.int_tol = sj.value("integrality_tol", cfg.solver.int_tol);
            cfg.solver.mip_gap = sj.value("mip_gap", cfg.solver.mip_gap);
            cfg.solver.node_limit = sj.value("node_limit", cfg.solver.node_limit);
            cfg.solver.workers = sj.value("workers", cfg.solver.workers);
            cfg.solver.benders_max_rounds = sj.value("cut_rounds", cfg.solver.benders_max_rounds);
        }
        return cfg;
    } catch (const json::exception& e) {
        throw P2pmcError(source_name + ": " + e.what());
    }
}

CommunityConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f.good()) throw P2pmcError("cannot read config '" + path + "'");
    std::string text(std::istreambuf_iterator<char>(f), {});
    return config_from_json_text(text, path);
}

} // namespace p2pmc
