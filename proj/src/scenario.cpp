#include "p2pmc/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

namespace p2pmc {

namespace {

uint64_t splitmix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace

double inverse_normal_cdf(double p) {
    // Wichura (1988), algorithm AS241, PPND16
    static const double a[8] = {3.3871328727963666080e0, 1.3314166789178437745e2,
                                1.9715909503065514427e3, 1.3731693765509461125e4,
                                4.5921953931549871457e4, 6.7265770927008700853e4,
                                3.3430575583588128105e4, 2.5090809287301226727e3};
    static const double b[8] = {1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
                                5.3941960214247511077e3, 2.1213794301586595867e4,
                                3.9307895800092710610e4, 2.8729085735721942674e4,
                                5.2264952788528545610e3};
    static const double c[8] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                5.76949722146069140550e0, 3.64784832476320460504e0,
                                1.27045825245236838258e0, 2.41780725177450611770e-1,
                                2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static const double d[8] = {1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
                                6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                1.05075007164441684324e-9};
    static const double e[8] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                1.78482653991729133580e0, 2.96560571828504891230e-1,
                                2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static const double f[8] = {1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                2.04426310338993978564e-15};
    if (p <= 0 || p >= 1) throw P2pmcError("inverse_normal_cdf requires p in (0,1)");
    double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        double num = a[7], den = b[7];
        for (int i = 6; i >= 0; --i) {
            num = num * r + a[i];
            den = den * r + b[i];
        }
        return q * num / den;
    }
    r = q < 0 ? p : 1 - p;
    r = std::sqrt(-std::log(r));
    double num, den;
    if (r <= 5.0) {
        r -= 1.6;
        num = c[7];
        den = d[7];
        for (int i = 6; i >= 0; --i) {
            num = num * r + c[i];
            den = den * r + d[i];
        }
    } else {
        r -= 5.0;
        num = e[7];
        den = f[7];
        for (int i = 6; i >= 0; --i) {
            num = num * r + e[i];
            den = den * r + f[i];
        }
    }
    double v = num / den;
    return q < 0 ? -v : v;
}

double activation_raw_draw(uint64_t seed, int a, int t, int tau, double mu, double sigma) {
    uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (0x9E3779B97F4A7C15ull * static_cast<uint64_t>(a + 1)));
    h = splitmix64(h ^ (0xC2B2AE3D27D4EB4Full * static_cast<uint64_t>(t + 1)));
    h = splitmix64(h ^ (0x165667B19E3779F9ull * static_cast<uint64_t>(tau + 1)));
    double u = (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
    return mu + sigma * inverse_normal_cdf(u);
}

std::pair<double, double> split_activation(double x) {
    double up = std::min(std::max(x, 0.0), 1.0);
    double dn = std::min(std::max(-x, 0.0), 1.0);
    return {up, dn};
}

void sample_activation_scenarios(const ActivationSamplerSpec& spec, const Horizon& horizon,
                                 ScenarioSet& out) {
    if (spec.scenario_count < 1) throw P2pmcError("activation scenario_count must be >= 1");
    if (spec.sigma <= 0) throw P2pmcError("activation sigma must be positive");
    const int A = spec.scenario_count, H = horizon.hours, M = horizon.substeps;
    out.n_act = A;
    out.hours = H;
    out.substeps = M;
    out.act_up.assign(static_cast<size_t>(A) * H * M, 0.0);
    out.act_dn.assign(static_cast<size_t>(A) * H * M, 0.0);
    out.act_prob.assign(A, 1.0 / A);
    for (int a = 0; a < A; ++a)
        for (int t = 0; t < H; ++t)
            for (int m = 0; m < M; ++m) {
                double x = activation_raw_draw(spec.seed, a, t, m, spec.mu, spec.sigma);
                auto [up, dn] = split_activation(x);
                size_t k = (static_cast<size_t>(a) * H + t) * M + m;
                out.act_up[k] = up;
                out.act_dn[k] = dn;
            }
}

SeriesTable parse_series_csv(const std::string& name, const std::string& text) {
    SeriesTable table;
    table.name = name;
    size_t pos = 0;
    int line_no = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "peer_id,hour,value")
                throw P2pmcError(name + ":" + std::to_string(line_no) +
                                 ": expected header 'peer_id,hour,value'");
            header_seen = true;
            continue;
        }
        size_t c1 = line.find(',');
        size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
        if (c1 == std::string_view::npos || c2 == std::string_view::npos)
            throw P2pmcError(name + ":" + std::to_string(line_no) + ": expected 3 columns");
        std::string_view peer = line.substr(0, c1);
        std::string_view hour_s = line.substr(c1 + 1, c2 - c1 - 1);
        std::string_view val_s = line.substr(c2 + 1);
        int hour;
        auto r1 = std::from_chars(hour_s.data(), hour_s.data() + hour_s.size(), hour);
        double value;
        auto r2 = std::from_chars(val_s.data(), val_s.data() + val_s.size(), value);
        if (r1.ec != std::errc() || r2.ec != std::errc())
            throw P2pmcError(name + ":" + std::to_string(line_no) + ": bad hour or value");
        table.cells.push_back({std::string(peer), hour, value});
    }
    if (!header_seen) throw P2pmcError(name + ": empty table");
    return table;
}

SeriesTable load_series_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f.good()) throw P2pmcError("cannot read '" + path + "'");
    std::string text(std::istreambuf_iterator<char>(f), {});
    return parse_series_csv(path, text);
}

namespace {

// dense [peer][hour] grid from a table, with full coverage checks
std::vector<double> densify(const SeriesTable& table, const std::vector<Peer>& peers,
                            const Horizon& horizon, bool pv_only) {
    const int H = horizon.hours;
    std::map<std::string, int> index;
    for (size_t p = 0; p < peers.size(); ++p) index[peers[p].id] = static_cast<int>(p);
    std::vector<double> grid(peers.size() * H, 0.0);
    std::vector<uint8_t> seen(peers.size() * H, 0);
    for (const SeriesTable::Cell& cell : table.cells) {
        auto it = index.find(cell.peer_id);
        if (it == index.end())
            throw P2pmcError(table.name + ": unknown peer '" + cell.peer_id + "'");
        if (cell.hour < 0 || cell.hour >= H)
            throw P2pmcError(table.name + ": hour " + std::to_string(cell.hour) +
                             " outside horizon for peer '" + cell.peer_id + "'");
        if (cell.value < 0)
            throw P2pmcError(table.name + ": negative value for (peer '" + cell.peer_id +
                             "', hour " + std::to_string(cell.hour) + ")");
        size_t k = static_cast<size_t>(it->second) * H + cell.hour;
        if (seen[k])
            throw P2pmcError(table.name + ": duplicate cell (peer '" + cell.peer_id + "', hour " +
                             std::to_string(cell.hour) + ")");
        if (pv_only && !peers[it->second].has_pv)
            throw P2pmcError(table.name + ": pv series given for non-pv peer '" + cell.peer_id + "'");
        seen[k] = 1;
        grid[k] = cell.value;
    }
    for (size_t p = 0; p < peers.size(); ++p) {
        if (pv_only && !peers[p].has_pv) continue;
        for (int t = 0; t < H; ++t)
            if (!seen[p * H + t])
                throw P2pmcError(table.name + ": missing cell (peer '" + peers[p].id + "', hour " +
                                 std::to_string(t) + ")");
    }
    return grid;
}

} // namespace

ScenarioSet ingest_load_scenarios(const std::vector<SeriesTable>& day_tables,
                                  const SeriesTable& pv_table, const std::vector<Peer>& peers,
                                  const Horizon& horizon) {
    if (day_tables.empty()) throw P2pmcError("need at least one load day table");
    ScenarioSet out;
    out.hours = horizon.hours;
    out.substeps = horizon.substeps;
    out.n_load = static_cast<int>(day_tables.size());
    out.load_prob.assign(out.n_load, 1.0 / out.n_load);
    out.load.reserve(static_cast<size_t>(out.n_load) * peers.size() * horizon.hours);
    for (const SeriesTable& day : day_tables) {
        std::vector<double> grid = densify(day, peers, horizon, false);
        out.load.insert(out.load.end(), grid.begin(), grid.end());
    }
    out.pv = densify(pv_table, peers, horizon, true);
    return out;
}

} // namespace p2pmc
