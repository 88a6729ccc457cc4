#include "p2pmc/milp.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

namespace p2pmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

uint64_t hash_bytes(const void* p, size_t n, uint64_t h) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t hash_double(double v, uint64_t h) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    return hash_bytes(&bits, sizeof bits, h);
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

uint64_t fnv1a64(std::string_view data, uint64_t seed) {
    return hash_bytes(data.data(), data.size(), seed);
}

Assignment Assignment::zeros(const MilpInstance& inst) {
    return Assignment(static_cast<size_t>(inst.num_vars()));
}

Assignment Assignment::from_named(const MilpInstance& inst,
                                  const std::vector<std::pair<std::string, double>>& pairs,
                                  bool require_complete,
                                  std::vector<std::string>* warnings) {
    Assignment a = zeros(inst);
    std::vector<uint8_t> seen(inst.num_vars(), 0);
    for (const auto& [name, value] : pairs) {
        int j = inst.find_variable(name);
        if (j < 0) {
            if (warnings) warnings->push_back("unknown variable '" + name + "' ignored");
            continue;
        }
        a[j] = value;
        seen[j] = 1;
    }
    for (int j = 0; j < inst.num_vars(); ++j) {
        if (seen[j]) continue;
        if (require_complete)
            throw P2pmcError("assignment missing variable '" + std::string(inst.var_name(j)) + "'");
        if (warnings)
            warnings->push_back("variable '" + std::string(inst.var_name(j)) + "' missing, defaulted to 0");
    }
    return a;
}

double Assignment::value(const MilpInstance& inst, std::string_view name) const {
    int j = inst.find_variable(name);
    if (j < 0) throw P2pmcError("no variable named '" + std::string(name) + "'");
    return x_[j];
}

int MilpInstance::add_variable(std::string_view name, double lb, double ub, double obj,
                               bool is_integer) {
    var_names_.push(name);
    lb_.push_back(lb);
    ub_.push_back(ub);
    obj_.push_back(obj);
    integer_.push_back(is_integer ? 1 : 0);
    index_built_ = false;
    return static_cast<int>(lb_.size()) - 1;
}

int MilpInstance::begin_row(std::string_view name, RowSense sense, double rhs) {
    row_names_.push(name);
    sense_.push_back(sense);
    rhs_.push_back(rhs);
    row_start_.push_back(static_cast<int64_t>(coef_var_.size()));
    index_built_ = false;
    return static_cast<int>(rhs_.size()) - 1;
}

void MilpInstance::add_coef(int var, double value) {
    coef_var_.push_back(var);
    coef_val_.push_back(value);
    row_start_.back() = static_cast<int64_t>(coef_var_.size());
}

void MilpInstance::reserve(size_t vars, size_t rows, size_t nonzeros, size_t name_chars) {
    lb_.reserve(vars);
    ub_.reserve(vars);
    obj_.reserve(vars);
    integer_.reserve(vars);
    var_names_.reserve(vars, name_chars / 2);
    sense_.reserve(rows);
    rhs_.reserve(rows);
    row_start_.reserve(rows + 1);
    coef_var_.reserve(nonzeros);
    coef_val_.reserve(nonzeros);
    row_names_.reserve(rows, name_chars / 2);
}

void MilpInstance::build_name_index() const {
    size_t n = var_names_.size() + row_names_.size();
    size_t cap = 16;
    while (cap < n * 2) cap <<= 1;
    name_slots_.assign(cap, -1);
    auto insert = [&](std::string_view s, int64_t key) {
        size_t slot = fnv1a64(s) & (cap - 1);
        while (name_slots_[slot] >= 0) slot = (slot + 1) & (cap - 1);
        name_slots_[slot] = key;
    };
    for (size_t j = 0; j < var_names_.size(); ++j) insert(var_names_.at(j), static_cast<int64_t>(j));
    // rows stored with offset bit
    for (size_t i = 0; i < row_names_.size(); ++i)
        insert(row_names_.at(i), static_cast<int64_t>(i) | (int64_t(1) << 40));
    index_built_ = true;
}

int MilpInstance::find_variable(std::string_view name) const {
    if (!index_built_) build_name_index();
    if (name_slots_.empty()) return -1;
    size_t cap = name_slots_.size();
    size_t slot = fnv1a64(name) & (cap - 1);
    while (name_slots_[slot] >= 0) {
        int64_t key = name_slots_[slot];
        if (!(key >> 40)) {
            int j = static_cast<int>(key);
            if (var_names_.at(j) == name) return j;
        }
        slot = (slot + 1) & (cap - 1);
    }
    return -1;
}

int MilpInstance::find_row(std::string_view name) const {
    if (!index_built_) build_name_index();
    if (name_slots_.empty()) return -1;
    size_t cap = name_slots_.size();
    size_t slot = fnv1a64(name) & (cap - 1);
    while (name_slots_[slot] >= 0) {
        int64_t key = name_slots_[slot];
        if (key >> 40) {
            int i = static_cast<int>(key & ((int64_t(1) << 40) - 1));
            if (row_names_.at(i) == name) return i;
        }
        slot = (slot + 1) & (cap - 1);
    }
    return -1;
}

std::vector<std::string> MilpInstance::verify() const {
    std::vector<std::string> problems;
    for (int j = 0; j < num_vars(); ++j) {
        if (lb_[j] > ub_[j])
            problems.push_back("variable '" + std::string(var_name(j)) + "' has lb > ub");
        if (find_variable(var_name(j)) != j)
            problems.push_back("duplicate variable name '" + std::string(var_name(j)) + "'");
    }
    for (int i = 0; i < num_rows(); ++i) {
        if (find_row(row_name(i)) != i)
            problems.push_back("duplicate row name '" + std::string(row_name(i)) + "'");
        for (int32_t v : row_vars(i))
            if (v < 0 || v >= num_vars())
                problems.push_back("row '" + std::string(row_name(i)) +
                                   "' references variable index " + std::to_string(v));
    }
    return problems;
}

uint64_t MilpInstance::content_hash() const {
    uint64_t h = fnv1a64(name_);
    for (int j = 0; j < num_vars(); ++j) {
        h = fnv1a64(var_name(j), h);
        h = hash_double(lb_[j], h);
        h = hash_double(ub_[j], h);
        h = hash_double(obj_[j], h);
        h = hash_bytes(&integer_[j], 1, h);
    }
    for (int i = 0; i < num_rows(); ++i) {
        h = fnv1a64(row_name(i), h);
        uint8_t s = static_cast<uint8_t>(sense_[i]);
        h = hash_bytes(&s, 1, h);
        h = hash_double(rhs_[i], h);
        auto vars = row_vars(i);
        auto vals = row_values(i);
        for (size_t k = 0; k < vars.size(); ++k) {
            h = hash_bytes(&vars[k], sizeof vars[k], h);
            h = hash_double(vals[k], h);
        }
    }
    return h;
}

Evaluation evaluate(const MilpInstance& inst, const Assignment& point) {
    if (point.size() != static_cast<size_t>(inst.num_vars()))
        throw P2pmcError("assignment covers " + std::to_string(point.size()) + " of " +
                         std::to_string(inst.num_vars()) + " variables");
    Evaluation ev;
    for (int j = 0; j < inst.num_vars(); ++j) {
        double x = point[j];
        ev.objective += inst.obj(j) * x;
        double bv = std::max(inst.lb(j) - x, x - inst.ub(j));
        ev.max_bound_violation = std::max(ev.max_bound_violation, std::max(bv, 0.0));
        if (inst.is_integer(j)) {
            double iv = std::fabs(x - std::round(x));
            ev.max_integrality_violation = std::max(ev.max_integrality_violation, iv);
        }
    }
    for (int i = 0; i < inst.num_rows(); ++i) {
        auto vars = inst.row_vars(i);
        auto vals = inst.row_values(i);
        double act = 0;
        for (size_t k = 0; k < vars.size(); ++k) act += vals[k] * point[vars[k]];
        double diff = act - inst.rhs(i);
        double rv = 0;
        switch (inst.sense(i)) {
        case RowSense::le: rv = std::max(diff, 0.0); break;
        case RowSense::ge: rv = std::max(-diff, 0.0); break;
        case RowSense::eq: rv = std::fabs(diff); break;
        }
        ev.max_row_violation = std::max(ev.max_row_violation, rv);
    }
    return ev;
}

namespace {

// One MPS data line: two-char indicator, then name fields at the classic
// fixed columns (5-12, 15-22, 25-36, ...). Values use shortest round-trip
// form and may overflow their field; mainstream readers tokenize anyway.
void mps_line(std::string& out, std::string_view f1, std::string_view f2, std::string_view f3 = {},
              std::string_view f4 = {}, std::string_view f5 = {}) {
    std::string line;
    line.reserve(64);
    line.push_back(' ');
    line.append(f1);
    while (line.size() < 4) line.push_back(' ');
    line.append(f2);
    if (!f3.empty()) {
        while (line.size() < 14) line.push_back(' ');
        line.append(f3);
    }
    if (!f4.empty()) {
        while (line.size() < 24) line.push_back(' ');
        line.append(f4);
    }
    if (!f5.empty()) {
        while (line.size() < 39) line.push_back(' ');
        line.append(f5);
    }
    out.append(line);
    out.push_back('\n');
}

} // namespace

std::string export_mps(const MilpInstance& inst) {
    for (int j = 0; j < inst.num_vars(); ++j)
        if (inst.var_name(j).size() > 8)
            throw P2pmcError("variable name '" + std::string(inst.var_name(j)) +
                             "' exceeds the 8-character MPS field; mangle names first");
    for (int i = 0; i < inst.num_rows(); ++i)
        if (inst.row_name(i).size() > 8)
            throw P2pmcError("row name '" + std::string(inst.row_name(i)) +
                             "' exceeds the 8-character MPS field; mangle names first");

    std::string out;
    out.reserve(static_cast<size_t>(inst.num_nonzeros()) * 40 + 1024);
    out.append("NAME          ").append(inst.name()).push_back('\n');
    out.append("ROWS\n");
    mps_line(out, "N", "COST");
    for (int i = 0; i < inst.num_rows(); ++i) {
        const char* s = inst.sense(i) == RowSense::le ? "L"
                        : inst.sense(i) == RowSense::eq ? "E"
                                                        : "G";
        mps_line(out, s, inst.row_name(i));
    }

    // column-major: gather row entries per variable, declaration order
    std::vector<int64_t> col_count(inst.num_vars() + 1, 0);
    for (int i = 0; i < inst.num_rows(); ++i)
        for (int32_t v : inst.row_vars(i)) col_count[v + 1]++;
    for (int j = 0; j < inst.num_vars(); ++j) col_count[j + 1] += col_count[j];
    std::vector<int32_t> col_row(static_cast<size_t>(inst.num_nonzeros()));
    std::vector<double> col_val(static_cast<size_t>(inst.num_nonzeros()));
    {
        std::vector<int64_t> cursor(col_count.begin(), col_count.end() - 1);
        for (int i = 0; i < inst.num_rows(); ++i) {
            auto vars = inst.row_vars(i);
            auto vals = inst.row_values(i);
            for (size_t k = 0; k < vars.size(); ++k) {
                int64_t& c = cursor[vars[k]];
                col_row[c] = i;
                col_val[c] = vals[k];
                ++c;
            }
        }
    }

    bool any_column = false;
    for (int j = 0; j < inst.num_vars(); ++j)
        if (inst.obj(j) != 0.0 || col_count[j + 1] > col_count[j]) any_column = true;
    if (any_column) {
        out.append("COLUMNS\n");
        bool in_int = false;
        int marker = 0;
        for (int j = 0; j < inst.num_vars(); ++j) {
            if (inst.is_integer(j) && !in_int) {
                mps_line(out, "", "MARKER" + std::to_string(marker++), "'MARKER'", "'INTORG'");
                in_int = true;
            } else if (!inst.is_integer(j) && in_int) {
                mps_line(out, "", "MARKER" + std::to_string(marker++), "'MARKER'", "'INTEND'");
                in_int = false;
            }
            if (inst.obj(j) != 0.0)
                mps_line(out, "", inst.var_name(j), "COST", format_double(inst.obj(j)));
            for (int64_t k = col_count[j]; k < col_count[j + 1]; ++k)
                mps_line(out, "", inst.var_name(j), inst.row_name(col_row[k]),
                         format_double(col_val[k]));
        }
        if (in_int) mps_line(out, "", "MARKER" + std::to_string(marker++), "'MARKER'", "'INTEND'");
    }

    bool any_rhs = false;
    for (int i = 0; i < inst.num_rows(); ++i)
        if (inst.rhs(i) != 0.0) any_rhs = true;
    if (any_rhs) {
        out.append("RHS\n");
        for (int i = 0; i < inst.num_rows(); ++i)
            if (inst.rhs(i) != 0.0)
                mps_line(out, "", "RHS", inst.row_name(i), format_double(inst.rhs(i)));
    }

    std::string bounds;
    for (int j = 0; j < inst.num_vars(); ++j) {
        double lo = inst.lb(j), hi = inst.ub(j);
        bool def = lo == 0.0 && hi == kInf;
        if (def && !inst.is_integer(j)) continue;
        if (lo == hi) {
            mps_line(bounds, "FX", "BND", inst.var_name(j), format_double(lo));
            continue;
        }
        if (lo == -kInf && hi == kInf) {
            mps_line(bounds, "FR", "BND", inst.var_name(j));
            continue;
        }
        if (lo == -kInf) mps_line(bounds, "MI", "BND", inst.var_name(j));
        else mps_line(bounds, "LO", "BND", inst.var_name(j), format_double(lo));
        if (hi != kInf) mps_line(bounds, "UP", "BND", inst.var_name(j), format_double(hi));
    }
    if (!bounds.empty()) {
        out.append("BOUNDS\n");
        out.append(bounds);
    }
    out.append("ENDATA\n");
    return out;
}

MangledInstance mangle_names(const MilpInstance& inst) {
    MangledInstance m{MilpInstance(inst.name()), {}};
    m.dictionary.reserve(inst.num_vars() + inst.num_rows());
    char buf[16];
    for (int j = 0; j < inst.num_vars(); ++j) {
        std::snprintf(buf, sizeof buf, "C%07d", j + 1);
        m.dictionary.emplace_back(buf, std::string(inst.var_name(j)));
        m.instance.add_variable(buf, inst.lb(j), inst.ub(j), inst.obj(j), inst.is_integer(j));
    }
    for (int i = 0; i < inst.num_rows(); ++i) {
        std::snprintf(buf, sizeof buf, "R%07d", i + 1);
        m.dictionary.emplace_back(buf, std::string(inst.row_name(i)));
        m.instance.begin_row(buf, inst.sense(i), inst.rhs(i));
        auto vars = inst.row_vars(i);
        auto vals = inst.row_values(i);
        for (size_t k = 0; k < vars.size(); ++k) m.instance.add_coef(vars[k], vals[k]);
    }
    return m;
}

ImportedSolution import_solution(const MilpInstance& inst, std::string_view sol_text) {
    ImportedSolution out;
    std::vector<std::pair<std::string, double>> pairs;
    size_t pos = 0;
    int line_no = 0;
    while (pos <= sol_text.size()) {
        size_t eol = sol_text.find('\n', pos);
        if (eol == std::string_view::npos) eol = sol_text.size();
        std::string_view line = sol_text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        // tokenize
        std::vector<std::string_view> tok;
        size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            size_t b = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            if (i > b) tok.push_back(line.substr(b, i - b));
        }
        if (tok.empty()) continue;
        if (tok.size() < 2)
            throw P2pmcError("solution line " + std::to_string(line_no) + ": expected 'name value'");
        double v;
        auto res = std::from_chars(tok[1].data(), tok[1].data() + tok[1].size(), v);
        if (res.ec != std::errc() || res.ptr != tok[1].data() + tok[1].size())
            throw P2pmcError("solution line " + std::to_string(line_no) + ": bad value '" +
                             std::string(tok[1]) + "'");
        pairs.emplace_back(std::string(tok[0]), v);
        if (pos > sol_text.size()) break;
    }
    out.assignment = Assignment::from_named(inst, pairs, false, &out.warnings);
    return out;
}

} // namespace p2pmc
