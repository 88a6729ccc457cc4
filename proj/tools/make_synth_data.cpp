// Writes the bundled synthetic 32-peer dataset: community_32.json, five load
// days, and a deterministic PV profile. Everything is generated from closed
// formulas so the files are reproducible byte for byte.

#include "p2pmc/milp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace {

double round4(double v) { return std::round(v * 1e4) / 1e4; }

// smooth positive daily load shape with per-peer character
double base_load(int p, int t) {
    double scale = 1.05 + 0.26 * (p % 8) + 0.07 * (p / 8);
    double morning = std::exp(-std::pow((t - 7.5) / 2.1, 2.0));
    double evening = std::exp(-std::pow((t - 18.5) / 2.6, 2.0));
    double night = 0.22 + 0.05 * ((p * 13) % 3);
    return scale * (night + 1.1 * morning + 1.7 * evening);
}

// day-to-day wobble, deliberately out of phase across peers so some peers run
// high while others run low in the same scenario
double day_factor(int p, int t, int d) {
    double phase = 0.9 * d + 0.31 * (p % 11) + 0.13 * t;
    double swing = 0.45 + 0.04 * (d % 3);
    return 1.0 + swing * std::sin(phase);
}

} // namespace

int main(int argc, char** argv) {
    std::string out_dir = argc > 1 ? argv[1] : "data";
    const int P = 32, H = 24;

    std::string cfg = R"({
  "horizon": {"hours": 24, "substeps": 12},
  "variant": "iid-irt",
  "reserve_exclude_trailing_hours": 2,
  "solver": {"mode": "rnf", "workers": 2},
  "price_book": {
    "da_price": [3.6, 3.5, 3.4, 3.4, 3.5, 3.6, 3.9, 4.2, 4.3, 4.2, 4.0, 3.9,
                 3.8, 3.8, 3.9, 4.0, 4.2, 4.4, 4.5, 4.4, 4.2, 4.0, 3.8, 3.7],
    "grid_tariff": 0.8,
    "fcr_price": [1.35, 1.35, 1.35, 1.35, 1.35, 1.2, 0.8, 0.55, 0.5, 0.5, 0.5, 0.5,
                  0.5, 0.5, 0.5, 0.55, 0.6, 0.65, 0.65, 0.65, 0.7, 0.9, 1.1, 1.2],
    "p2p_iid_fee_fraction": 0.05,
    "p2p_irt_fee_fraction": 0.10,
    "activation_up_premium": 1.1,
    "activation_down_discount": 0.9
  },
  "peers": [
)";
    for (int p = 0; p < P; ++p) {
        char id[8];
        std::snprintf(id, sizeof id, "p%02d", p);
        bool battery = p < 16;
        bool pv = p >= 8 && p < 24;
        cfg += "    {\"id\": \"";
        cfg += id;
        cfg += "\"";
        if (battery)
            cfg += ", \"has_battery\": true, \"battery\": {\"soc_min_kwh\": 0, \"soc_max_kwh\": 10, "
                   "\"charge_max_kw\": 10, \"discharge_max_kw\": 10, \"eta_charge\": 0.95, "
                   "\"eta_discharge\": 0.95, \"soc_initial_kwh\": 0}";
        if (pv) cfg += ", \"has_pv\": true, \"pv_peak_kw\": 3.0";
        cfg += p + 1 < P ? "},\n" : "}\n";
    }
    cfg += "  ]\n}\n";

    auto put = [&](const std::string& path, const std::string& content) {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f.good()) {
            std::fprintf(stderr, "cannot write %s\n", path.c_str());
            std::exit(1);
        }
        f << content;
    };

    put(out_dir + "/community_32.json", cfg);

    for (int d = 1; d <= 5; ++d) {
        std::string csv = "peer_id,hour,value\n";
        for (int p = 0; p < P; ++p) {
            char id[8];
            std::snprintf(id, sizeof id, "p%02d", p);
            for (int t = 0; t < H; ++t) {
                double v = round4(std::max(0.04, base_load(p, t) * day_factor(p, t, d - 1)));
                csv += std::string(id) + "," + std::to_string(t) + "," + p2pmc::format_double(v) +
                       "\n";
            }
        }
        put(out_dir + "/loads/day" + std::to_string(d) + ".csv", csv);
    }

    std::string pv_csv = "peer_id,hour,value\n";
    for (int p = 8; p < 24; ++p) {
        char id[8];
        std::snprintf(id, sizeof id, "p%02d", p);
        for (int t = 0; t < H; ++t) {
            double bell = std::exp(-std::pow((t - 13.0) / 3.1, 2.0));
            double v = round4(3.0 * 0.82 * bell);
            if (v < 0.005) v = 0.0;
            pv_csv += std::string(id) + "," + std::to_string(t) + "," + p2pmc::format_double(v) +
                      "\n";
        }
    }
    put(out_dir + "/pv.csv", pv_csv);
    std::printf("dataset written to %s\n", out_dir.c_str());
    return 0;
}
