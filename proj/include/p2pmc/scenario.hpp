#ifndef P2PMC_SCENARIO_HPP
#define P2PMC_SCENARIO_HPP

#include "p2pmc/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace p2pmc {

struct ActivationSamplerSpec {
    uint64_t seed = 0;
    int scenario_count = 5;
    double sigma = 0.3;
    double mu = 0.0;
};

// one parsed CSV table: rows of (peer_id, hour, value)
struct SeriesTable {
    std::string name; // file name or label, used in error messages
    struct Cell {
        std::string peer_id;
        int hour;
        double value;
    };
    std::vector<Cell> cells;
};

SeriesTable parse_series_csv(const std::string& name, const std::string& text);
SeriesTable load_series_csv(const std::string& path);

// One load scenario per day table, each with probability 1/n; PV attached
// deterministically. Missing or negative cells throw with the offending
// (day, peer, hour).
ScenarioSet ingest_load_scenarios(const std::vector<SeriesTable>& day_tables,
                                  const SeriesTable& pv_table, const std::vector<Peer>& peers,
                                  const Horizon& horizon);

// Deterministic counter-based sampling: the draw for (a, t, tau) depends only
// on (seed, a, t, tau), so changing the scenario count never reshuffles
// earlier scenarios. pi_up = clip(x, 0, 1), pi_dn = clip(-x, 0, 1).
void sample_activation_scenarios(const ActivationSamplerSpec& spec, const Horizon& horizon,
                                 ScenarioSet& out);

// raw pre-clip draw, exposed for statistical tests
double activation_raw_draw(uint64_t seed, int a, int t, int tau, double mu, double sigma);

// split of a raw draw into one-directional fractions
std::pair<double, double> split_activation(double x);

// standard normal quantile (Wichura's AS241, double precision)
double inverse_normal_cdf(double p);

} // namespace p2pmc

#endif
