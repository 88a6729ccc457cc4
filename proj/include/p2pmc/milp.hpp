#ifndef P2PMC_MILP_HPP
#define P2PMC_MILP_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace p2pmc {

struct P2pmcError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class RowSense : uint8_t { le, eq, ge };

// Compact string storage for variable/row names. Names are appended once and
// never mutated; lookups go through a lazily built hash index.
class NameArena {
public:
    void push(std::string_view s) {
        offsets_.push_back(static_cast<uint32_t>(buf_.size()));
        buf_.append(s);
    }
    std::string_view at(size_t k) const {
        uint32_t b = offsets_[k];
        uint32_t e = k + 1 < offsets_.size() ? offsets_[k + 1] : static_cast<uint32_t>(buf_.size());
        return std::string_view(buf_).substr(b, e - b);
    }
    size_t size() const { return offsets_.size(); }
    void reserve(size_t names, size_t chars) {
        offsets_.reserve(names);
        buf_.reserve(chars);
    }

private:
    std::string buf_;
    std::vector<uint32_t> offsets_;
};

// Dense variable assignment, index-aligned with a MilpInstance. The name-based
// view of the contract lives in from_named()/value().
class MilpInstance;
class Assignment {
public:
    Assignment() = default;
    explicit Assignment(size_t n) : x_(n, 0.0) {}
    static Assignment zeros(const MilpInstance& inst);
    // Builds from (name, value) pairs. Unknown names are recorded as warnings
    // and ignored; names absent from `pairs` default to 0 with a warning when
    // `warnings` is non-null, and throw when `require_complete` is set.
    static Assignment from_named(const MilpInstance& inst,
                                 const std::vector<std::pair<std::string, double>>& pairs,
                                 bool require_complete,
                                 std::vector<std::string>* warnings);

    double& operator[](size_t j) { return x_[j]; }
    double operator[](size_t j) const { return x_[j]; }
    size_t size() const { return x_.size(); }
    std::vector<double>& values() { return x_; }
    const std::vector<double>& values() const { return x_; }
    double value(const MilpInstance& inst, std::string_view name) const;

private:
    std::vector<double> x_;
};

struct Evaluation {
    double objective = 0.0;
    double max_bound_violation = 0.0;
    double max_row_violation = 0.0;
    double max_integrality_violation = 0.0;
};

struct RowCoef {
    int32_t var;
    double value;
};

// Sparse minimization MILP. Construction is pass-through: coefficients are
// stored exactly as given, in declaration order.
class MilpInstance {
public:
    explicit MilpInstance(std::string name = "MODEL") : name_(std::move(name)) {}

    int add_variable(std::string_view name, double lb, double ub, double obj, bool is_integer);
    int begin_row(std::string_view name, RowSense sense, double rhs);
    // Appends to the row most recently begun.
    void add_coef(int var, double value);

    const std::string& name() const { return name_; }
    int num_vars() const { return static_cast<int>(lb_.size()); }
    int num_rows() const { return static_cast<int>(rhs_.size()); }
    int64_t num_nonzeros() const { return static_cast<int64_t>(coef_val_.size()); }

    std::string_view var_name(int j) const { return var_names_.at(j); }
    std::string_view row_name(int i) const { return row_names_.at(i); }
    double lb(int j) const { return lb_[j]; }
    double ub(int j) const { return ub_[j]; }
    double obj(int j) const { return obj_[j]; }
    bool is_integer(int j) const { return integer_[j] != 0; }
    RowSense sense(int i) const { return sense_[i]; }
    double rhs(int i) const { return rhs_[i]; }
    std::span<const int32_t> row_vars(int i) const {
        return {coef_var_.data() + row_start_[i], coef_var_.data() + row_start_[i + 1]};
    }
    std::span<const double> row_values(int i) const {
        return {coef_val_.data() + row_start_[i], coef_val_.data() + row_start_[i + 1]};
    }

    void set_bounds(int j, double lo, double hi) {
        lb_[j] = lo;
        ub_[j] = hi;
    }
    void set_obj(int j, double v) { obj_[j] = v; }

    // -1 when absent. First call builds the name index.
    int find_variable(std::string_view name) const;
    int find_row(std::string_view name) const;

    void reserve(size_t vars, size_t rows, size_t nonzeros, size_t name_chars);

    // Structural invariant check: unique names, lb <= ub, coefficient
    // references in range. Returns human-readable problems, empty when clean.
    std::vector<std::string> verify() const;

    uint64_t content_hash() const;

private:
    void build_name_index() const;

    std::string name_;
    std::vector<double> lb_, ub_, obj_;
    std::vector<uint8_t> integer_;
    NameArena var_names_;

    std::vector<RowSense> sense_;
    std::vector<double> rhs_;
    std::vector<int64_t> row_start_{0};
    std::vector<int32_t> coef_var_;
    std::vector<double> coef_val_;
    NameArena row_names_;

    // open-addressing index over both name spaces, built on demand
    mutable std::vector<int64_t> name_slots_;
    mutable bool index_built_ = false;
};

// Exact evaluation of a point against an instance: objective, worst bound /
// row / integrality violation, all as nonnegative magnitudes.
Evaluation evaluate(const MilpInstance& inst, const Assignment& point);

// Fixed-format MPS with ROWS/COLUMNS/RHS/BOUNDS and INTORG/INTEND markers.
// Requires every name to fit the 8-character MPS field; mangle_names()
// produces a compliant copy plus the alias dictionary.
std::string export_mps(const MilpInstance& inst);

struct MangledInstance {
    MilpInstance instance;
    // (alias, original) pairs for variables then rows, in declaration order
    std::vector<std::pair<std::string, std::string>> dictionary;
};
MangledInstance mangle_names(const MilpInstance& inst);

struct ImportedSolution {
    Assignment assignment;
    std::vector<std::string> warnings;
};
// Whitespace-separated "name value" lines; '#' starts a comment. Missing
// variables default to 0 with a warning, unknown names warn and are skipped.
ImportedSolution import_solution(const MilpInstance& inst, std::string_view sol_text);

uint64_t fnv1a64(std::string_view data, uint64_t seed = 1469598103934665603ull);

// shortest decimal form that parses back to the same double
std::string format_double(double v);

} // namespace p2pmc

#endif
