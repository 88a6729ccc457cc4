#include "p2pmc/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

namespace p2pmc {

using nlohmann::json;

std::string tool_version() { return "p2pmc 0.1.0"; }

void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw P2pmcError("cannot create directory '" + path + "': " + ec.message());
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f.good()) throw P2pmcError("cannot write '" + path + "'");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f.good()) throw P2pmcError("short write to '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f.good()) throw P2pmcError("cannot read '" + path + "'");
    return std::string(std::istreambuf_iterator<char>(f), {});
}

std::string checksum_hex(uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string manifest_json(const RunManifest& m) {
    json j;
    j["config_path"] = m.config_path;
    j["loads_dir"] = m.loads_dir;
    j["load_files"] = m.load_files;
    j["pv_path"] = m.pv_path;
    j["seed"] = m.seed;
    j["activation_scenarios"] = m.activation_scenarios;
    j["sigma"] = m.sigma;
    j["variants"] = m.variants;
    j["solver_mode"] = m.solver_mode;
    j["workers"] = m.workers;
    j["out_dir"] = m.out_dir;
    j["tool_version"] = m.tool_version;
    json sums = json::object();
    for (auto& [variant, hex] : m.model_checksums) sums[variant] = hex;
    j["model_checksums"] = sums;
    return j.dump(2) + "\n";
}

namespace {
const char* kSettlementTerms[] = {"da_purchase_cost",  "grid_tariff_cost", "da_sale_revenue",
                                  "fcr_capacity_revenue", "activation_settlement", "eid_cost",
                                  "iid_fee_cost",      "ert_cost",         "irt_fee_cost"};

double settlement_term(const SettlementBreakdown& s, int k) {
    switch (k) {
    case 0: return s.da_purchase_cost;
    case 1: return s.grid_tariff_cost;
    case 2: return s.da_sale_revenue;
    case 3: return s.fcr_capacity_revenue;
    case 4: return s.activation_settlement;
    case 5: return s.eid_cost;
    case 6: return s.iid_fee_cost;
    case 7: return s.ert_cost;
    case 8: return s.irt_fee_cost;
    }
    return 0;
}
} // namespace

std::string settlement_csv(const std::vector<ClearingResult>& results) {
    std::string out = "variant,term,value_ct\n";
    for (const ClearingResult& r : results) {
        std::string v = to_string(r.variant);
        for (int k = 0; k < 9; ++k)
            out += v + "," + kSettlementTerms[k] + "," +
                   format_double(settlement_term(r.settlement, k)) + "\n";
        out += v + ",total," + format_double(r.settlement.total()) + "\n";
        out += v + ",objective," + format_double(r.objective) + "\n";
    }
    return out;
}

std::string reserve_bids_csv(const std::vector<ClearingResult>& results) {
    const ClearingResult* by_variant[3] = {nullptr, nullptr, nullptr};
    int hours = 0;
    for (const ClearingResult& r : results) {
        by_variant[static_cast<int>(r.variant)] = &r;
        hours = std::max(hours, r.H);
    }
    std::string out = "hour,no_p2p,iid_only,iid_irt\n";
    for (int t = 0; t < hours; ++t) {
        out += std::to_string(t);
        for (int v = 0; v < 3; ++v) {
            out += ",";
            const ClearingResult* r = by_variant[v];
            if (!r || t >= r->H) continue;
            double total = 0;
            for (int p = 0; p < r->P; ++p) total += r->reserve_up[r->pt(p, t)];
            out += format_double(total);
        }
        out += "\n";
    }
    return out;
}

std::string activation_decomposition_csv(const std::vector<ClearingResult>& results) {
    std::string out =
        "variant,peer_id,hour,substep,load_scenario,activation_scenario,"
        "activation_kw,battery_dev_kw,irt_net_kw,ert_net_kw\n";
    for (const ClearingResult& r : results) {
        std::string v = to_string(r.variant);
        for (int p = 0; p < r.P; ++p) {
            if (r.peer_battery[p] < 0) continue;
            for (int t = 0; t < r.H; ++t)
                for (int m = 0; m < r.M; ++m)
                    for (int l = 0; l < r.L; ++l)
                        for (int a = 0; a < r.A; ++a) {
                            size_t k = r.ptmla(p, t, m, l, a);
                            out += v;
                            out += ',';
                            out += r.peer_ids[p];
                            out += ',';
                            out += std::to_string(t);
                            out += ',';
                            out += std::to_string(m);
                            out += ',';
                            out += std::to_string(l);
                            out += ',';
                            out += std::to_string(a);
                            out += ',';
                            out += format_double(r.activation_kw[k]);
                            out += ',';
                            out += format_double(r.battery_dev_kw[k]);
                            out += ',';
                            out += format_double(r.irt_net_kw[k]);
                            out += ',';
                            out += format_double(r.ert_net_kw[k]);
                            out += '\n';
                        }
        }
    }
    return out;
}

std::string result_json(const std::vector<ClearingResult>& results, int exclude_trailing_hours) {
    json j;
    j["tool_version"] = tool_version();
    json variants = json::object();
    for (const ClearingResult& r : results) {
        json v;
        v["status"] = to_string(r.status);
        v["objective_ct"] = r.objective;
        if (std::isfinite(r.bound)) v["bound_ct"] = r.bound;
        if (std::isfinite(r.gap)) v["relative_gap"] = r.gap;
        v["nodes"] = r.nodes;
        v["solver_note"] = r.solver_note;
        ReserveVolumeMetric m = reserve_volume(r, exclude_trailing_hours);
        v["reserve_volume_kw"] = m.total_kw;
        v["reserve_excluded_trailing_hours"] = m.excluded_trailing_hours;
        json st;
        for (int k = 0; k < 9; ++k) st[kSettlementTerms[k]] = settlement_term(r.settlement, k);
        st["total"] = r.settlement.total();
        v["settlement_ct"] = st;

        json bids = json::array();
        for (int t = 0; t < r.H; ++t) {
            double total = 0;
            for (int p = 0; p < r.P; ++p) total += r.reserve_up[r.pt(p, t)];
            bids.push_back(total);
        }
        v["reserve_bids_total_kw_per_hour"] = bids;
        json per_peer = json::object();
        for (int p = 0; p < r.P; ++p) {
            json row = json::array();
            for (int t = 0; t < r.H; ++t) row.push_back(r.reserve_up[r.pt(p, t)]);
            per_peer[r.peer_ids[p]] = row;
        }
        v["reserve_bids_kw"] = per_peer;
        json buy = json::array(), sell = json::array();
        for (int t = 0; t < r.H; ++t) {
            double b = 0, s = 0;
            for (int p = 0; p < r.P; ++p) {
                b += r.da_buy[r.pt(p, t)];
                s += r.da_sell[r.pt(p, t)];
            }
            buy.push_back(b);
            sell.push_back(s);
        }
        v["da_buy_total_kwh_per_hour"] = buy;
        v["da_sell_total_kwh_per_hour"] = sell;
        variants[to_string(r.variant)] = v;
    }
    j["variants"] = variants;
    return j.dump(2) + "\n";
}

std::string names_csv(const std::vector<std::pair<std::string, std::string>>& dictionary,
                      const std::string& checksum_hex_str) {
    std::string out = "alias,name\n";
    for (auto& [alias, name] : dictionary) out += alias + "," + name + "\n";
    out += "__checksum__," + checksum_hex_str + "\n";
    return out;
}

std::pair<std::vector<std::pair<std::string, std::string>>, std::string>
parse_names_csv(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> dict;
    std::string checksum;
    size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        if (header) {
            if (line != "alias,name") throw P2pmcError("names.csv: unexpected header '" + line + "'");
            header = false;
            continue;
        }
        size_t c = line.find(',');
        if (c == std::string::npos) throw P2pmcError("names.csv: malformed line '" + line + "'");
        std::string alias = line.substr(0, c), name = line.substr(c + 1);
        if (alias == "__checksum__") checksum = name;
        else dict.emplace_back(alias, name);
    }
    if (checksum.empty()) throw P2pmcError("names.csv: missing checksum row");
    return {dict, checksum};
}

} // namespace p2pmc
