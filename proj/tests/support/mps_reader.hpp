#ifndef P2PMC_TESTS_MPS_READER_HPP
#define P2PMC_TESTS_MPS_READER_HPP

// Minimal MPS reader used by the tests to round-trip exported models. It
// understands exactly the dialect export_mps() emits: N/L/E/G rows, COLUMNS
// with INTORG/INTEND markers, RHS, and FX/FR/MI/LO/UP bounds.

#include "p2pmc/milp.hpp"

#include <charconv>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace p2pmc_tests {

inline p2pmc::MilpInstance read_mps(const std::string& text) {
    using p2pmc::P2pmcError;
    constexpr double kInf = std::numeric_limits<double>::infinity();

    struct Row {
        std::string name;
        p2pmc::RowSense sense;
        double rhs = 0;
        std::vector<std::pair<int, double>> coefs;
    };
    struct Col {
        std::string name;
        double lb = 0, ub = kInf, obj = 0;
        bool integer = false;
        bool lb_set = false, ub_set = false;
    };

    std::string model_name = "MODEL";
    std::vector<Row> rows;
    std::map<std::string, int> row_index;
    std::vector<Col> cols;
    std::map<std::string, int> col_index;

    auto parse_value = [](const std::string& tok) {
        double v;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc()) throw P2pmcError("mps reader: bad numeric '" + tok + "'");
        return v;
    };

    enum Section { none, sec_rows, sec_cols, sec_rhs, sec_bounds, done } section = none;
    bool integer_mode = false;

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '*') continue;
        std::istringstream ls(line);
        std::vector<std::string> tok;
        std::string t;
        while (ls >> t) tok.push_back(t);
        if (tok.empty()) continue;

        if (line[0] != ' ') { // section header
            if (tok[0] == "NAME") {
                if (tok.size() > 1) model_name = tok[1];
            } else if (tok[0] == "ROWS") section = sec_rows;
            else if (tok[0] == "COLUMNS") section = sec_cols;
            else if (tok[0] == "RHS") section = sec_rhs;
            else if (tok[0] == "BOUNDS") section = sec_bounds;
            else if (tok[0] == "ENDATA") section = done;
            else throw P2pmcError("mps reader: unsupported section '" + tok[0] + "'");
            continue;
        }

        switch (section) {
        case sec_rows: {
            if (tok.size() != 2) throw P2pmcError("mps reader: bad ROWS line: " + line);
            if (tok[0] == "N") break; // objective row, implicit
            p2pmc::RowSense s;
            if (tok[0] == "L") s = p2pmc::RowSense::le;
            else if (tok[0] == "E") s = p2pmc::RowSense::eq;
            else if (tok[0] == "G") s = p2pmc::RowSense::ge;
            else throw P2pmcError("mps reader: bad row sense '" + tok[0] + "'");
            row_index[tok[1]] = static_cast<int>(rows.size());
            rows.push_back({tok[1], s, 0, {}});
            break;
        }
        case sec_cols: {
            if (tok.size() >= 3 && tok[1] == "'MARKER'") {
                if (tok[2] == "'INTORG'") integer_mode = true;
                else if (tok[2] == "'INTEND'") integer_mode = false;
                else throw P2pmcError("mps reader: bad marker: " + line);
                break;
            }
            if (tok.size() < 3) throw P2pmcError("mps reader: bad COLUMNS line: " + line);
            auto it = col_index.find(tok[0]);
            int j;
            if (it == col_index.end()) {
                j = static_cast<int>(cols.size());
                col_index[tok[0]] = j;
                cols.push_back({tok[0], 0, kInf, 0, integer_mode, false, false});
            } else {
                j = it->second;
            }
            for (size_t k = 1; k + 1 < tok.size(); k += 2) {
                double v = parse_value(tok[k + 1]);
                if (tok[k] == "COST") cols[j].obj = v;
                else {
                    auto rit = row_index.find(tok[k]);
                    if (rit == row_index.end())
                        throw P2pmcError("mps reader: unknown row '" + tok[k] + "'");
                    rows[rit->second].coefs.emplace_back(j, v);
                }
            }
            break;
        }
        case sec_rhs: {
            for (size_t k = 1; k + 1 < tok.size(); k += 2) {
                auto rit = row_index.find(tok[k]);
                if (rit == row_index.end())
                    throw P2pmcError("mps reader: RHS for unknown row '" + tok[k] + "'");
                rows[rit->second].rhs = parse_value(tok[k + 1]);
            }
            break;
        }
        case sec_bounds: {
            if (tok.size() < 3) throw P2pmcError("mps reader: bad BOUNDS line: " + line);
            auto cit = col_index.find(tok[2]);
            if (cit == col_index.end())
                throw P2pmcError("mps reader: bound for unknown column '" + tok[2] + "'");
            Col& c = cols[cit->second];
            const std::string& bt = tok[0];
            if (bt == "FR") { c.lb = -kInf; c.ub = kInf; }
            else if (bt == "MI") c.lb = -kInf;
            else if (bt == "FX") { c.lb = c.ub = parse_value(tok[3]); }
            else if (bt == "LO") c.lb = parse_value(tok[3]);
            else if (bt == "UP") c.ub = parse_value(tok[3]);
            else throw P2pmcError("mps reader: unsupported bound type '" + bt + "'");
            break;
        }
        case none:
        case done:
            throw P2pmcError("mps reader: data outside sections: " + line);
        }
    }

    p2pmc::MilpInstance inst(model_name);
    for (const Col& c : cols) inst.add_variable(c.name, c.lb, c.ub, c.obj, c.integer);
    for (const Row& r : rows) {
        inst.begin_row(r.name, r.sense, r.rhs);
        for (auto [j, v] : r.coefs) inst.add_coef(j, v);
    }
    return inst;
}

} // namespace p2pmc_tests

#endif
