#include "p2pmc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace p2pmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int Lp::add_col(double cj, double lo, double hi) {
    c.push_back(cj);
    xl.push_back(lo);
    xu.push_back(hi);
    if (col_start.empty()) col_start.push_back(0);
    col_start.push_back(static_cast<int64_t>(rows.size()));
    return n++;
}

void Lp::add_entry(int row, double v) {
    rows.push_back(row);
    vals.push_back(v);
    col_start.back() = static_cast<int64_t>(rows.size());
}

int Lp::add_row(double lo, double hi) {
    rl.push_back(lo);
    ru.push_back(hi);
    return m++;
}

Lp lp_from_instance(const MilpInstance& inst) {
    Lp lp;
    lp.col_start.push_back(0);
    lp.n = inst.num_vars();
    lp.m = inst.num_rows();
    lp.c.resize(lp.n);
    lp.xl.resize(lp.n);
    lp.xu.resize(lp.n);
    for (int j = 0; j < lp.n; ++j) {
        lp.c[j] = inst.obj(j);
        lp.xl[j] = inst.lb(j);
        lp.xu[j] = inst.ub(j);
    }
    lp.rl.resize(lp.m);
    lp.ru.resize(lp.m);
    for (int i = 0; i < lp.m; ++i) {
        double b = inst.rhs(i);
        switch (inst.sense(i)) {
        case RowSense::le: lp.rl[i] = -kInf; lp.ru[i] = b; break;
        case RowSense::ge: lp.rl[i] = b; lp.ru[i] = kInf; break;
        case RowSense::eq: lp.rl[i] = b; lp.ru[i] = b; break;
        }
    }
    // transpose CSR rows -> CSC columns, summing duplicates
    std::vector<int64_t> count(lp.n + 1, 0);
    for (int i = 0; i < lp.m; ++i)
        for (int32_t v : inst.row_vars(i)) count[v + 1]++;
    for (int j = 0; j < lp.n; ++j) count[j + 1] += count[j];
    std::vector<int32_t> rr(count[lp.n]);
    std::vector<double> vv(count[lp.n]);
    {
        std::vector<int64_t> cur(count.begin(), count.end() - 1);
        for (int i = 0; i < lp.m; ++i) {
            auto vars = inst.row_vars(i);
            auto vals = inst.row_values(i);
            for (size_t k = 0; k < vars.size(); ++k) {
                int64_t& c2 = cur[vars[k]];
                rr[c2] = i;
                vv[c2] = vals[k];
                ++c2;
            }
        }
    }
    lp.col_start.assign(1, 0);
    lp.rows.reserve(rr.size());
    lp.vals.reserve(vv.size());
    std::vector<std::pair<int32_t, double>> buf;
    for (int j = 0; j < lp.n; ++j) {
        buf.clear();
        for (int64_t k = count[j]; k < count[j + 1]; ++k) buf.emplace_back(rr[k], vv[k]);
        std::sort(buf.begin(), buf.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (size_t k = 0; k < buf.size(); ++k) {
            if (k + 1 < buf.size() && buf[k + 1].first == buf[k].first) {
                buf[k + 1].second += buf[k].second;
                continue;
            }
            if (buf[k].second != 0.0) {
                lp.rows.push_back(buf[k].first);
                lp.vals.push_back(buf[k].second);
            }
        }
        lp.col_start.push_back(static_cast<int64_t>(lp.rows.size()));
    }
    return lp;
}

namespace {

// ---------------------------------------------------------------------------
// Basis LU with a singleton pre-pass (zero fill) and a left-looking bump with
// partial pivoting. PFI eta vectors carry pivots between refactorizations.
// ---------------------------------------------------------------------------

struct LuEntry {
    int32_t pos; // original row id in lcol, pivot index in ucol
    double val;
};

struct LuFactor {
    int m = 0;
    std::vector<int32_t> prow;       // pivot k -> original row
    std::vector<int32_t> pslot;      // pivot k -> basis slot
    std::vector<int32_t> row_to_piv; // original row -> pivot k
    std::vector<double> udiag;
    std::vector<std::vector<LuEntry>> lcol;
    std::vector<std::vector<LuEntry>> ucol;
};

struct Eta {
    int slot;
    double pivot;
    std::vector<std::pair<int32_t, double>> entries; // (slot, value), pivot slot excluded
};

class Engine {
public:
    Engine(const Lp& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {
        n_ = lp.n;
        m_ = lp.m;
        ncol_ = n_ + m_;
        lo_.resize(ncol_);
        hi_.resize(ncol_);
        cost_.assign(ncol_, 0.0);
        const std::vector<double>& xl = opt.xl_override ? *opt.xl_override : lp.xl;
        const std::vector<double>& xu = opt.xu_override ? *opt.xu_override : lp.xu;
        const std::vector<double>& c = opt.c_override ? *opt.c_override : lp.c;
        for (int j = 0; j < n_; ++j) {
            lo_[j] = xl[j];
            hi_[j] = xu[j];
            cost_[j] = c[j];
        }
        for (int i = 0; i < m_; ++i) {
            lo_[n_ + i] = lp.rl[i];
            hi_[n_ + i] = lp.ru[i];
        }
        x_.assign(ncol_, 0.0);
        stat_.assign(ncol_, ColStatus::at_lower);
        slot_of_.assign(ncol_, -1);
        basic_.assign(m_, -1);
        wrow_.assign(m_, 0.0);
        wslot_.assign(m_, 0.0);
        y_.assign(m_, 0.0);
        fslot_.assign(m_, 0.0);
        max_iters_ = opt.max_iters > 0 ? opt.max_iters
                                       : std::max<int64_t>(100000, 40ll * (m_ + n_));
    }

    LpSolution run();

private:
    template <typename F> void for_col(int j, F&& f) const {
        if (j < n_) {
            for (int64_t k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k)
                f(lp_.rows[k], lp_.vals[k]);
        } else {
            f(j - n_, -1.0);
        }
    }

    void default_basis();
    void basis_from_warm(const Basis& warm);
    bool factorize();
    bool factorize_with_repair();
    void ftran(const std::vector<double>& rowvec, std::vector<double>& out_slot) const;
    void btran(const std::vector<double>& slotvec, std::vector<double>& out_row) const;
    void refresh_basic_values();
    double infeasibility() const;
    double objective() const;
    void set_nonbasic(int j) {
        if (stat_[j] == ColStatus::at_lower) x_[j] = lo_[j];
        else if (stat_[j] == ColStatus::at_upper) x_[j] = hi_[j];
        else x_[j] = 0.0;
    }

    const Lp& lp_;
    SimplexOptions opt_;
    int n_ = 0, m_ = 0, ncol_ = 0;
    std::vector<double> lo_, hi_, cost_;
    std::vector<double> x_;
    std::vector<ColStatus> stat_;
    std::vector<int32_t> slot_of_;
    std::vector<int32_t> basic_;
    LuFactor lu_;
    std::vector<Eta> etas_;
    mutable std::vector<double> wrow_, wslot_, y_, fslot_;
    int64_t iters_ = 0;
    int64_t max_iters_ = 0;
};

void Engine::default_basis() {
    for (int j = 0; j < n_; ++j) {
        if (lo_[j] == -kInf && hi_[j] == kInf) stat_[j] = ColStatus::nonbasic_free;
        else if (lo_[j] == -kInf) stat_[j] = ColStatus::at_upper;
        else if (hi_[j] == kInf) stat_[j] = ColStatus::at_lower;
        else stat_[j] = std::fabs(lo_[j]) <= std::fabs(hi_[j]) ? ColStatus::at_lower
                                                               : ColStatus::at_upper;
        set_nonbasic(j);
    }
    for (int i = 0; i < m_; ++i) {
        int j = n_ + i;
        stat_[j] = ColStatus::basic;
        basic_[i] = j;
        slot_of_[j] = i;
    }
}

void Engine::basis_from_warm(const Basis& warm) {
    int nb = 0;
    for (int j = 0; j < ncol_; ++j) {
        ColStatus s = warm.status[j];
        if (s == ColStatus::basic && nb < m_) {
            stat_[j] = ColStatus::basic;
            basic_[nb] = j;
            slot_of_[j] = nb;
            ++nb;
            continue;
        }
        if (s == ColStatus::basic) s = ColStatus::at_lower;
        if (s == ColStatus::at_upper && hi_[j] == kInf)
            s = lo_[j] == -kInf ? ColStatus::nonbasic_free : ColStatus::at_lower;
        if (s == ColStatus::at_lower && lo_[j] == -kInf)
            s = hi_[j] == kInf ? ColStatus::nonbasic_free : ColStatus::at_upper;
        if (s == ColStatus::nonbasic_free && (lo_[j] != -kInf || hi_[j] != kInf))
            s = lo_[j] != -kInf ? ColStatus::at_lower : ColStatus::at_upper;
        stat_[j] = s;
        set_nonbasic(j);
    }
    for (int i = 0; i < m_ && nb < m_; ++i) {
        int j = n_ + i;
        if (stat_[j] == ColStatus::basic) continue;
        stat_[j] = ColStatus::basic;
        basic_[nb] = j;
        slot_of_[j] = nb;
        ++nb;
    }
}

bool Engine::factorize() {
    lu_.m = m_;
    lu_.prow.assign(m_, -1);
    lu_.pslot.assign(m_, -1);
    lu_.row_to_piv.assign(m_, -1);
    lu_.udiag.assign(m_, 0.0);
    lu_.lcol.assign(m_, {});
    lu_.ucol.assign(m_, {});
    etas_.clear();
    if (m_ == 0) return true;

    std::vector<std::vector<std::pair<int32_t, double>>> bcol(m_);
    std::vector<std::vector<int32_t>> brow(m_);
    for (int s = 0; s < m_; ++s) {
        for_col(basic_[s], [&](int r, double v) {
            if (v == 0.0) return;
            bcol[s].emplace_back(r, v);
            brow[r].push_back(s);
        });
    }
    std::vector<int32_t> rowcnt(m_), colcnt(m_);
    std::vector<uint8_t> row_active(m_, 1), col_active(m_, 1);
    for (int i = 0; i < m_; ++i) rowcnt[i] = static_cast<int32_t>(brow[i].size());
    for (int s = 0; s < m_; ++s) colcnt[s] = static_cast<int32_t>(bcol[s].size());

    std::vector<int32_t> cq, rq;
    for (int s = 0; s < m_; ++s)
        if (colcnt[s] == 1) cq.push_back(s);
    for (int i = 0; i < m_; ++i)
        if (rowcnt[i] == 1) rq.push_back(i);

    int k = 0;
    auto place_pivot = [&](int r, int s, double pv) {
        lu_.prow[k] = r;
        lu_.pslot[k] = s;
        lu_.udiag[k] = pv;
        lu_.row_to_piv[r] = k;
        row_active[r] = 0;
        col_active[s] = 0;
        for (int32_t s2 : brow[r])
            if (col_active[s2] && --colcnt[s2] == 1) cq.push_back(s2);
        for (auto& [r2, v2] : bcol[s]) {
            (void)v2;
            if (row_active[r2] && --rowcnt[r2] == 1) rq.push_back(r2);
        }
        ++k;
    };

    size_t ci = 0, ri = 0;
    while (true) {
        if (ci < cq.size()) {
            int s = cq[ci++];
            if (!col_active[s] || colcnt[s] != 1) continue;
            int prw = -1;
            double pval = 0;
            lu_.ucol[k].clear();
            for (auto& [r, v] : bcol[s]) {
                if (row_active[r]) {
                    prw = r;
                    pval = v;
                } else {
                    lu_.ucol[k].push_back({lu_.row_to_piv[r], v});
                }
            }
            if (prw < 0 || pval == 0.0) {
                col_active[s] = 0;
                lu_.ucol[k].clear();
                continue;
            }
            place_pivot(prw, s, pval);
            continue;
        }
        if (ri < rq.size()) {
            int r = rq[ri++];
            if (!row_active[r] || rowcnt[r] != 1) continue;
            int ps = -1;
            for (int32_t s : brow[r])
                if (col_active[s]) ps = s;
            if (ps < 0) continue;
            double pval = 0;
            for (auto& [r2, v] : bcol[ps])
                if (r2 == r) pval = v;
            if (pval == 0.0) continue;
            lu_.ucol[k].clear();
            lu_.lcol[k].clear();
            for (auto& [r2, v] : bcol[ps]) {
                if (r2 == r) continue;
                if (!row_active[r2]) lu_.ucol[k].push_back({lu_.row_to_piv[r2], v});
                else lu_.lcol[k].push_back({r2, v / pval});
            }
            place_pivot(r, ps, pval);
            continue;
        }
        break;
    }

    // bump
    if (k < m_) {
        std::vector<double> spa(m_, 0.0);
        std::vector<uint8_t> mark(m_, 0);
        std::vector<int32_t> touched;
        for (int s = 0; s < m_; ++s) {
            if (!col_active[s]) continue;
            touched.clear();
            for (auto& [r, v] : bcol[s]) {
                spa[r] = v;
                mark[r] = 1;
                touched.push_back(r);
            }
            lu_.ucol[k].clear();
            for (int j = 0; j < k; ++j) {
                double u = spa[lu_.prow[j]];
                if (u == 0.0) continue;
                lu_.ucol[k].push_back({j, u});
                for (const LuEntry& e : lu_.lcol[j]) {
                    if (!mark[e.pos]) {
                        mark[e.pos] = 1;
                        touched.push_back(e.pos);
                    }
                    spa[e.pos] -= e.val * u;
                }
            }
            int prw = -1;
            double bestmag = 0;
            for (int32_t r : touched) {
                if (!row_active[r]) continue;
                double a = std::fabs(spa[r]);
                if (a > bestmag || (a == bestmag && prw >= 0 && r < prw)) {
                    bestmag = a;
                    prw = r;
                }
            }
            if (prw < 0 || bestmag < 1e-11) { // numerically singular column
                for (int32_t r : touched) { spa[r] = 0.0; mark[r] = 0; }
                lu_.ucol[k].clear();
                col_active[s] = 0;
                continue;
            }
            double pval = spa[prw];
            lu_.lcol[k].clear();
            for (int32_t r : touched) {
                if (!row_active[r] || r == prw || spa[r] == 0.0) continue;
                lu_.lcol[k].push_back({r, spa[r] / pval});
            }
            std::sort(lu_.lcol[k].begin(), lu_.lcol[k].end(),
                      [](const LuEntry& a, const LuEntry& b) { return a.pos < b.pos; });
            for (int32_t r : touched) { spa[r] = 0.0; mark[r] = 0; }
            place_pivot(prw, s, pval);
        }
    }
    return k == m_;
}

bool Engine::factorize_with_repair() {
    for (int attempt = 0; attempt < 4; ++attempt) {
        if (factorize()) return true;
        std::vector<uint8_t> row_done(m_, 0), slot_done(m_, 0);
        for (int kk = 0; kk < m_; ++kk) {
            if (lu_.prow[kk] >= 0) row_done[lu_.prow[kk]] = 1;
            if (lu_.pslot[kk] >= 0) slot_done[lu_.pslot[kk]] = 1;
        }
        int r = 0;
        for (int s = 0; s < m_; ++s) {
            if (slot_done[s]) continue;
            while (r < m_ && row_done[r]) ++r;
            if (r >= m_) break;
            int out = basic_[s];
            int logical = n_ + r;
            if (stat_[logical] == ColStatus::basic) {
                int s2 = slot_of_[logical];
                basic_[s] = logical;
                slot_of_[logical] = s;
                basic_[s2] = out;
                slot_of_[out] = s2;
            } else {
                slot_of_[out] = -1;
                stat_[out] = lo_[out] != -kInf ? ColStatus::at_lower
                             : hi_[out] != kInf ? ColStatus::at_upper
                                                : ColStatus::nonbasic_free;
                set_nonbasic(out);
                stat_[logical] = ColStatus::basic;
                basic_[s] = logical;
                slot_of_[logical] = s;
            }
            row_done[r] = 1;
        }
    }
    return factorize();
}

void Engine::ftran(const std::vector<double>& b, std::vector<double>& out) const {
    static thread_local std::vector<double> work;
    work.assign(m_, 0.0);
    for (int kk = 0; kk < m_; ++kk) work[kk] = b[lu_.prow[kk]];
    for (int kk = 0; kk < m_; ++kk) {
        double v = work[kk];
        if (v == 0.0) continue;
        for (const LuEntry& e : lu_.lcol[kk]) work[lu_.row_to_piv[e.pos]] -= e.val * v;
    }
    for (int kk = m_ - 1; kk >= 0; --kk) {
        double v = work[kk] / lu_.udiag[kk];
        work[kk] = v;
        if (v == 0.0) continue;
        for (const LuEntry& e : lu_.ucol[kk]) work[e.pos] -= e.val * v;
    }
    out.assign(m_, 0.0);
    for (int kk = 0; kk < m_; ++kk) out[lu_.pslot[kk]] = work[kk];
    for (const Eta& e : etas_) {
        double piv = out[e.slot] / e.pivot;
        out[e.slot] = piv;
        if (piv == 0.0) continue;
        for (auto& [s, v] : e.entries) out[s] -= v * piv;
    }
}

void Engine::btran(const std::vector<double>& f, std::vector<double>& out) const {
    static thread_local std::vector<double> g;
    g = f;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double acc = g[it->slot];
        for (auto& [s, v] : it->entries) acc -= v * g[s];
        g[it->slot] = acc / it->pivot;
    }
    static thread_local std::vector<double> t;
    t.assign(m_, 0.0);
    for (int kk = 0; kk < m_; ++kk) {
        double acc = g[lu_.pslot[kk]];
        for (const LuEntry& e : lu_.ucol[kk]) acc -= e.val * t[e.pos];
        t[kk] = acc / lu_.udiag[kk];
    }
    out.assign(m_, 0.0);
    for (int kk = m_ - 1; kk >= 0; --kk) {
        double acc = t[kk];
        for (const LuEntry& e : lu_.lcol[kk]) acc -= e.val * out[e.pos];
        out[lu_.prow[kk]] = acc;
    }
}

void Engine::refresh_basic_values() {
    std::fill(wrow_.begin(), wrow_.end(), 0.0);
    for (int j = 0; j < ncol_; ++j) {
        if (stat_[j] == ColStatus::basic) continue;
        set_nonbasic(j);
        if (x_[j] == 0.0) continue;
        double v = x_[j];
        for_col(j, [&](int r, double a) { wrow_[r] -= a * v; });
    }
    ftran(wrow_, wslot_);
    for (int s = 0; s < m_; ++s) x_[basic_[s]] = wslot_[s];
}

double Engine::infeasibility() const {
    double f = 0;
    for (int s = 0; s < m_; ++s) {
        int j = basic_[s];
        if (x_[j] < lo_[j]) f += lo_[j] - x_[j];
        else if (x_[j] > hi_[j]) f += x_[j] - hi_[j];
    }
    return f;
}

double Engine::objective() const {
    double v = lp_.obj_offset;
    for (int j = 0; j < ncol_; ++j)
        if (cost_[j] != 0.0) v += cost_[j] * x_[j];
    return v;
}

LpSolution Engine::run() {
    LpSolution sol;
    if (opt_.warm && opt_.warm->status.size() == static_cast<size_t>(ncol_))
        basis_from_warm(*opt_.warm);
    else
        default_basis();
    if (!factorize_with_repair()) {
        sol.status = LpStatus::numeric;
        sol.note = "basis factorization failed";
        sol.x.assign(n_, 0.0);
        sol.activity.assign(m_, 0.0);
        sol.y.assign(m_, 0.0);
        sol.dj.assign(n_, 0.0);
        sol.basis.status = stat_;
        return sol;
    }
    refresh_basic_values();

    const double ftol = opt_.feas_tol;
    const double dtol = std::max(opt_.opt_tol, 1e-11);
    bool bland = false;
    int64_t stall = 0;
    int polish_rounds = 0;
    std::vector<uint8_t> banned(ncol_, 0);
    int ban_count = 0;

    std::vector<double> dj(ncol_, 0.0);
    struct Event {
        double t;
        double jump;
        int slot; // -1: entering variable's own opposite bound
        int to_upper;
    };
    std::vector<Event> events;

    while (true) {
        if (iters_ >= max_iters_) {
            sol.status = LpStatus::iter_limit;
            sol.note = "iteration limit reached";
            break;
        }
        double F = infeasibility();
        int phase = F > ftol ? 1 : 2;

        for (int s = 0; s < m_; ++s) {
            int j = basic_[s];
            if (phase == 1)
                fslot_[s] = x_[j] < lo_[j] ? -1.0 : (x_[j] > hi_[j] ? 1.0 : 0.0);
            else
                fslot_[s] = cost_[j];
        }
        btran(fslot_, y_);

        int enter = -1, dir = 0;
        double best = phase == 1 ? -1e-7 : -dtol;
        for (int j = 0; j < ncol_; ++j) {
            if (stat_[j] == ColStatus::basic || lo_[j] == hi_[j] || banned[j]) continue;
            double d = phase == 2 ? cost_[j] : 0.0;
            if (j < n_) {
                for (int64_t k2 = lp_.col_start[j]; k2 < lp_.col_start[j + 1]; ++k2)
                    d -= y_[lp_.rows[k2]] * lp_.vals[k2];
            } else {
                d += y_[j - n_];
            }
            dj[j] = d;
            int s = 0;
            if ((stat_[j] == ColStatus::at_lower || stat_[j] == ColStatus::nonbasic_free) &&
                d < best)
                s = 1;
            else if ((stat_[j] == ColStatus::at_upper || stat_[j] == ColStatus::nonbasic_free) &&
                     -d < best)
                s = -1;
            if (s != 0) {
                enter = j;
                dir = s;
                best = s == 1 ? d : -d;
                if (bland) break;
            }
        }

        if (enter < 0) {
            if (!etas_.empty() && polish_rounds < 3) {
                ++polish_rounds;
                if (!factorize_with_repair()) { sol.status = LpStatus::numeric; break; }
                refresh_basic_values();
                continue;
            }
            if (phase == 1) {
                sol.status = LpStatus::infeasible;
                sol.note = "phase 1 optimum " + std::to_string(F);
            } else {
                sol.status = LpStatus::optimal;
            }
            break;
        }

        std::fill(wrow_.begin(), wrow_.end(), 0.0);
        for_col(enter, [&](int r, double v) { wrow_[r] += v; });
        ftran(wrow_, wslot_);

        double tstar = kInf;
        int leave_slot = -1;
        int leave_upper = 0;
        bool bound_flip = false;
        double range = hi_[enter] - lo_[enter];

        if (phase == 2) {
            if (range != kInf && stat_[enter] != ColStatus::nonbasic_free) {
                tstar = range;
                bound_flip = true;
            }
            double best_w = 0;
            for (int s = 0; s < m_; ++s) {
                double d = -dir * wslot_[s];
                if (std::fabs(d) < 1e-11) continue;
                int j = basic_[s];
                double t;
                int up;
                if (d > 0) {
                    if (hi_[j] == kInf) continue;
                    t = (hi_[j] - x_[j]) / d;
                    up = 1;
                } else {
                    if (lo_[j] == -kInf) continue;
                    t = (lo_[j] - x_[j]) / d;
                    up = 0;
                }
                if (t < 0) t = 0;
                bool better = false;
                if (t < tstar - 1e-10) better = true;
                else if (t <= tstar + 1e-10) {
                    if (bound_flip) better = true; // prefer a pivot over the flip on ties
                    else if (leave_slot < 0) better = true;
                    else if (bland) better = j < basic_[leave_slot];
                    else better = std::fabs(d) > best_w;
                }
                if (better) {
                    tstar = std::min(tstar, t);
                    leave_slot = s;
                    leave_upper = up;
                    best_w = std::fabs(d);
                    bound_flip = false;
                }
            }
            if (tstar == kInf) {
                sol.status = LpStatus::unbounded;
                sol.note = "unbounded direction on column " + std::to_string(enter);
                break;
            }
        } else {
            events.clear();
            for (int s = 0; s < m_; ++s) {
                double d = -dir * wslot_[s];
                if (std::fabs(d) < 1e-11) continue;
                int j = basic_[s];
                double v = x_[j];
                if (d > 0) {
                    if (v < lo_[j] - ftol)
                        events.push_back({(lo_[j] - v) / d, d, s, 0});
                    if (hi_[j] != kInf && v <= hi_[j] + ftol)
                        events.push_back({std::max(0.0, (hi_[j] - v) / d), d, s, 1});
                } else {
                    if (v > hi_[j] + ftol)
                        events.push_back({(hi_[j] - v) / d, -d, s, 1});
                    if (lo_[j] != -kInf && v >= lo_[j] - ftol)
                        events.push_back({std::max(0.0, (lo_[j] - v) / d), -d, s, 0});
                }
            }
            if (range != kInf && stat_[enter] != ColStatus::nonbasic_free)
                events.push_back({range, kInf, -1, dir > 0 ? 1 : 0});
            std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
                if (a.t != b.t) return a.t < b.t;
                return a.slot < b.slot;
            });
            double slope = dir == 1 ? dj[enter] : -dj[enter];
            size_t e = 0;
            bool found = false;
            for (; e < events.size(); ++e) {
                slope += events[e].jump;
                if (slope >= -1e-12) {
                    found = true;
                    break;
                }
            }
            if (!found) {
                if (!etas_.empty()) {
                    if (!factorize_with_repair()) { sol.status = LpStatus::numeric; break; }
                    refresh_basic_values();
                    continue;
                }
                // numerically hollow direction: set the column aside
                if (ban_count < 64) {
                    banned[enter] = 1;
                    ++ban_count;
                    continue;
                }
                sol.status = LpStatus::numeric;
                sol.note = "phase 1 ray without blocking event";
                break;
            }
            tstar = events[e].t;
            if (events[e].slot < 0) bound_flip = true;
            else {
                leave_slot = events[e].slot;
                leave_upper = events[e].to_upper;
            }
        }

        if (tstar > 0) {
            for (int s = 0; s < m_; ++s)
                if (wslot_[s] != 0.0) x_[basic_[s]] -= dir * wslot_[s] * tstar;
            x_[enter] += dir * tstar;
            stall = 0;
            bland = false;
            if (ban_count) {
                std::fill(banned.begin(), banned.end(), 0);
                ban_count = 0;
            }
        } else if (++stall > 500) {
            bland = true;
        }

        ++iters_;
        if (bound_flip) {
            stat_[enter] = dir == 1 ? ColStatus::at_upper : ColStatus::at_lower;
            set_nonbasic(enter);
            continue;
        }

        int leave = basic_[leave_slot];
        double wpiv = wslot_[leave_slot];
        if (std::fabs(wpiv) < 1e-9 && !etas_.empty()) {
            if (!factorize_with_repair()) { sol.status = LpStatus::numeric; break; }
            refresh_basic_values();
            continue;
        }
        if (std::fabs(wpiv) < 1e-12) {
            sol.status = LpStatus::numeric;
            sol.note = "degenerate pivot element";
            break;
        }
        stat_[leave] = leave_upper ? ColStatus::at_upper : ColStatus::at_lower;
        set_nonbasic(leave);
        slot_of_[leave] = -1;
        stat_[enter] = ColStatus::basic;
        basic_[leave_slot] = enter;
        slot_of_[enter] = leave_slot;

        Eta eta;
        eta.slot = leave_slot;
        eta.pivot = wpiv;
        for (int s = 0; s < m_; ++s)
            if (s != leave_slot && wslot_[s] != 0.0) eta.entries.emplace_back(s, wslot_[s]);
        etas_.push_back(std::move(eta));
        if (etas_.size() >= 64) {
            if (!factorize_with_repair()) { sol.status = LpStatus::numeric; break; }
            refresh_basic_values();
        }
    }

    if (sol.status == LpStatus::optimal || sol.status == LpStatus::iter_limit) {
        factorize_with_repair();
        refresh_basic_values();
        if (sol.status == LpStatus::optimal && infeasibility() > 100 * ftol) {
            sol.status = LpStatus::numeric;
            sol.note = "residual infeasibility after polish";
        }
    }
    sol.objective = objective();
    sol.x.assign(x_.begin(), x_.begin() + n_);
    sol.activity.assign(m_, 0.0);
    for (int j = 0; j < n_; ++j) {
        if (sol.x[j] == 0.0) continue;
        for (int64_t k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k)
            sol.activity[lp_.rows[k]] += lp_.vals[k] * sol.x[j];
    }
    if (m_ > 0 && (sol.status == LpStatus::optimal || sol.status == LpStatus::iter_limit)) {
        for (int s = 0; s < m_; ++s) fslot_[s] = cost_[basic_[s]];
        btran(fslot_, y_);
        sol.y = y_;
    } else {
        sol.y.assign(m_, 0.0);
    }
    sol.dj.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
        if (stat_[j] == ColStatus::basic) continue;
        double d = cost_[j];
        for (int64_t k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k)
            d -= sol.y[lp_.rows[k]] * lp_.vals[k];
        sol.dj[j] = d;
    }
    sol.basis.status = stat_;
    sol.iterations = iters_;
    return sol;
}

} // namespace

LpSolution simplex_solve(const Lp& lp, const SimplexOptions& opt) {
    Engine eng(lp, opt);
    return eng.run();
}

} // namespace p2pmc
