#ifndef P2PMC_REPORT_HPP
#define P2PMC_REPORT_HPP

#include "p2pmc/clearing.hpp"

#include <string>
#include <vector>

namespace p2pmc {

// everything that determines a run, recorded verbatim for reproducibility
struct RunManifest {
    std::string config_path;
    std::string loads_dir;
    std::vector<std::string> load_files;
    std::string pv_path;
    uint64_t seed = 0;
    int activation_scenarios = 5;
    double sigma = 0.3;
    std::vector<std::string> variants;
    std::string solver_mode;
    int workers = 1;
    std::string out_dir;
    std::string tool_version;
    // content hash of the built instance per variant, hex
    std::vector<std::pair<std::string, std::string>> model_checksums;
};

std::string tool_version();

void ensure_dir(const std::string& path);
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::string manifest_json(const RunManifest& m);

// deterministic report files; all doubles in shortest round-trip form
std::string settlement_csv(const std::vector<ClearingResult>& results);
std::string reserve_bids_csv(const std::vector<ClearingResult>& results);
std::string activation_decomposition_csv(const std::vector<ClearingResult>& results);
std::string result_json(const std::vector<ClearingResult>& results, int exclude_trailing_hours);

// alias dictionary emitted next to an exported MPS; the trailing row carries
// the model checksum the importer must match
std::string names_csv(const std::vector<std::pair<std::string, std::string>>& dictionary,
                      const std::string& checksum_hex);
// parses names.csv back into (dictionary, checksum)
std::pair<std::vector<std::pair<std::string, std::string>>, std::string>
parse_names_csv(const std::string& text);

std::string checksum_hex(uint64_t h);

} // namespace p2pmc

#endif
