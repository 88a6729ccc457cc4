#ifndef P2PMC_CONFIG_JSON_HPP
#define P2PMC_CONFIG_JSON_HPP

#include "p2pmc/types.hpp"

#include <string>

namespace p2pmc {

// JSON schema mirrors the type fields; price series accept either a number
// (broadcast to every hour) or an array of length `hours`. Absent external
// market prices default to multiples of the day-ahead price: EID 1.5x/0.5x,
// ERT 2.0x/0.25x.
CommunityConfig config_from_json_text(const std::string& text, const std::string& source_name);
CommunityConfig load_config(const std::string& path);

} // namespace p2pmc

#endif
