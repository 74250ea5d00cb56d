#include "salp/exactlp.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "salp/caps.hpp"

namespace salp {

int LinearSystem::add_variable(const std::string& name) {
    if (var_index.count(name)) throw std::invalid_argument("duplicate LP variable: " + name);
    int id = var_count();
    var_index.emplace(name, id);
    var_names.push_back(name);
    return id;
}

int LinearSystem::ensure_variable(const std::string& name) {
    auto it = var_index.find(name);
    return it != var_index.end() ? it->second : add_variable(name);
}

int LinearSystem::variable(const std::string& name) const {
    auto it = var_index.find(name);
    return it != var_index.end() ? it->second : -1;
}

void LinearSystem::add_row(std::vector<std::pair<int, Rat>> terms, Rat rhs, std::string label) {
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<int, Rat>> out;
    for (auto& [v, c] : terms) {
        if (v < 0 || v >= var_count()) throw std::out_of_range("LP row references unknown variable");
        if (!out.empty() && out.back().first == v)
            out.back().second += c;
        else
            out.emplace_back(v, c);
    }
    std::erase_if(out, [](const auto& t) { return t.second == 0; });
    rows.push_back(Row{std::move(out), std::move(rhs), std::move(label)});
}

std::int64_t LinearSystem::nonzeros() const {
    std::int64_t n = 0;
    for (const auto& r : rows) n += static_cast<std::int64_t>(r.terms.size());
    return n;
}

std::string dump_lp(const LinearSystem& sys) {
    std::ostringstream os;
    os << "vars " << sys.var_count() << " rows " << sys.rows.size() << "\n";
    for (int v = 0; v < sys.var_count(); ++v) os << "var " << sys.var_names[v] << " >= 0\n";
    for (std::size_t r = 0; r < sys.rows.size(); ++r) {
        const auto& row = sys.rows[r];
        os << (row.label.empty() ? "r" + std::to_string(r) : row.label) << ":";
        bool first = true;
        for (const auto& [v, c] : row.terms) {
            os << (first ? " " : " + ") << rat_str(c) << "*" << sys.var_names[v];
            first = false;
        }
        if (first) os << " 0";
        os << " = " << rat_str(row.rhs) << "\n";
    }
    return os.str();
}

namespace {

using Terms = std::vector<std::pair<int, Rat>>;

int sgn(const Rat& q) { return mpq_sgn(q.get_mpq_t()); }

void sort_combine(Terms& t) {
    std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t w = 0;
    for (std::size_t i = 0; i < t.size();) {
        int id = t[i].first;
        Rat c = t[i].second;
        for (++i; i < t.size() && t[i].first == id; ++i) c += t[i].second;
        if (c != 0) t[w++] = {id, std::move(c)};
    }
    t.resize(w);
}

/// a + c*b, both sorted; result sorted, no zeros.
Terms axpy(const Terms& a, const Rat& c, const Terms& b) {
    Terms out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            Rat v = c * b[j].second;
            if (v != 0) out.emplace_back(b[j].first, std::move(v));
            ++j;
        } else {
            Rat v = a[i].second + c * b[j].second;
            if (v != 0) out.emplace_back(a[i].first, std::move(v));
            ++i;
            ++j;
        }
    }
    return out;
}

const Rat* find_term(const Terms& t, int var) {
    auto it = std::lower_bound(t.begin(), t.end(), var,
                               [](const auto& a, int v) { return a.first < v; });
    return (it != t.end() && it->first == var) ? &it->second : nullptr;
}

struct WorkRow {
    Terms terms;
    Rat rhs;
    Terms prov;  // combination of original rows equal to this row modulo
                 // zero-fixed variables
    bool dead = false;
};

struct VarState {
    enum Kind { Active, FixedVal, Scaled, BlockFill } kind = Active;
    Rat value;       // FixedVal
    int alias = -1;  // Scaled: var = scale*alias; BlockFill: product fill
    Rat scale;
    int alias2 = -1;
    Terms def_prov;  // defining row (FixedVal / Scaled substitutions)
    Rat def_coeff;   // coefficient of this var in the defining row
};

struct ZeroFact {
    int var;
    Rat coeff;   // coefficient of var in the forcing row (positive)
    Terms prov;  // forcing row: nonnegative on then-active vars, rhs 0
};

struct InfeasibleSignal {
    Terms farkas_prov;  // y over original rows, pre-repair
};

class Solver {
  public:
    Solver(const LinearSystem& sys, const SolveOptions& opts, bool track_prov = false)
        : sys_(sys), opts_(opts), track_prov_(track_prov) {
        states_.resize(sys.var_count());
        check_cap(sys.nonzeros(), caps().lp_nonzeros, "LP nonzeros");
        work_.reserve(sys.rows.size());
        for (std::size_t r = 0; r < sys.rows.size(); ++r)
            work_.push_back(WorkRow{sys.rows[r].terms, sys.rows[r].rhs,
                                    track_prov_ ? Terms{{static_cast<int>(r), Rat(1)}} : Terms{},
                                    false});
    }

    bool tracks_provenance() const { return track_prov_; }

    /// Presolve + elimination + phase-I. Returns the feasibility verdict.
    bool solve_feasibility() {
        try {
            presolve();
            eliminate();
            build_tableau();
            run_phase1();
            feasible_ = true;
        } catch (const InfeasibleSignal& sig) {
            feasible_ = false;
            if (track_prov_) farkas_ = finalize_farkas(sig.farkas_prov);
        }
        return feasible_;
    }

    bool feasible() const { return feasible_; }
    const std::vector<std::pair<int, Rat>>& farkas() const { return farkas_; }

    std::vector<Rat> witness() {
        std::map<int, Rat> active = basis_point_vars();
        return resolve_all(active);
    }

    struct Opt {
        bool unbounded = false;
        Rat value;
        std::vector<Rat> point;
    };

    /// Maximize one variable starting from the current feasible basis.
    Opt maximize_var(int var) {
        if (!feasible_) throw std::logic_error("maximize on infeasible system");
        // Resolve the objective through presolve substitutions.
        Rat scale(1);
        int v = var;
        while (true) {
            const VarState& st = states_[v];
            if (st.kind == VarState::FixedVal) {
                Opt o;
                o.value = scale * st.value;
                std::map<int, Rat> active = basis_point_vars();
                o.point = resolve_all(active);
                return o;
            }
            if (st.kind == VarState::Scaled) {
                scale *= st.scale;
                v = st.alias;
                continue;
            }
            if (st.kind == VarState::BlockFill)
                throw std::logic_error("maximize over an eliminated block variable");
            break;  // Active
        }
        auto it = col_of_var_.find(v);
        if (it == col_of_var_.end()) {
            // Absent from every constraint: unbounded above. Report a
            // feasible point where it is positive.
            Opt o;
            o.unbounded = true;
            std::map<int, Rat> active = basis_point_vars();
            active[v] = 1;
            o.point = resolve_all(active);
            return o;
        }
        Opt o;
        bool bounded = run_phase2(it->second);
        std::map<int, Rat> active = basis_point_vars();
        if (!bounded) {
            o.unbounded = true;
            // One step along the improving ray makes the objective variable
            // strictly larger while staying feasible.
            apply_ray(active, ray_col_);
        }
        auto pv = active.find(v);
        o.value = pv == active.end() ? Rat(0) : pv->second;
        o.value *= scale;
        o.point = resolve_all(active);
        return o;
    }

  private:
    const LinearSystem& sys_;
    SolveOptions opts_;
    bool track_prov_ = false;
    std::vector<WorkRow> work_;
    std::vector<VarState> states_;
    std::vector<ZeroFact> zero_facts_;
    bool feasible_ = false;
    std::vector<std::pair<int, Rat>> farkas_;

    // Core system snapshot (after elimination, rhs-normalized to >= 0).
    std::vector<Terms> core_terms_;  // over dense column ids
    std::vector<Rat> core_rhs_;
    std::vector<Terms> core_prov_;
    std::vector<int> col_vars_;           // dense col id -> var id
    std::map<int, int> col_of_var_;       // var id -> dense col id

    // Tableau state.
    std::vector<Terms> tab_;       // row-wise over dense col ids
    std::vector<Rat> tab_rhs_;
    std::vector<int> basic_;       // col id, or -1 for the row's artificial
    std::vector<Rat> obj_;         // dense over col ids
    Rat obj_rhs_;
    int ray_col_ = -1;

    // ---- presolve ----------------------------------------------------

    void presolve() {
        while (true) {
            bool changed = false;
            for (auto& w : work_) {
                if (w.dead) continue;
                if (normalize_row(w)) changed = true;
                if (w.dead) continue;
                if (apply_local_rules(w)) changed = true;
            }
            if (dedup_rows()) changed = true;
            if (changed) continue;
            // Only inspect blocks once the rows are stable: every term then
            // refers to an active variable.
            if (opts_.block_elimination && eliminate_blocks()) continue;
            break;
        }
    }

    /// Substitutes resolved variables into the row. True if it changed.
    bool normalize_row(WorkRow& w) {
        bool touched = false;
        for (const auto& [v, c] : w.terms)
            if (states_[v].kind != VarState::Active) { touched = true; break; }
        if (!touched) return false;
        Terms fresh;
        fresh.reserve(w.terms.size());
        Terms pending = std::move(w.terms);
        w.terms.clear();
        while (!pending.empty()) {
            Terms next;
            for (auto& [v, c] : pending) {
                VarState& st = states_[v];
                switch (st.kind) {
                    case VarState::Active:
                        fresh.emplace_back(v, std::move(c));
                        break;
                    case VarState::FixedVal:
                        w.rhs -= c * st.value;
                        if (track_prov_ && (st.value != 0 || !st.def_prov.empty()))
                            w.prov = axpy(w.prov, -(c / st.def_coeff), st.def_prov);
                        break;
                    case VarState::Scaled:
                        next.emplace_back(st.alias, c * st.scale);
                        if (track_prov_)
                            w.prov = axpy(w.prov, -(c / st.def_coeff), st.def_prov);
                        break;
                    case VarState::BlockFill:
                        throw std::logic_error("block variable resurfaced in a row");
                }
            }
            pending = std::move(next);
        }
        w.terms = std::move(fresh);
        sort_combine(w.terms);
        return true;
    }

    /// Empty / singleton / uniform-sign / doubleton rules. True on change.
    bool apply_local_rules(WorkRow& w) {
        if (w.terms.empty()) {
            if (w.rhs != 0) raise_infeasible_from_row(w);
            w.dead = true;
            return true;
        }
        if (w.terms.size() == 1) {
            auto [v, c] = w.terms[0];
            Rat val = w.rhs / c;
            if (val < 0) raise_infeasible_from_row(w);
            VarState& st = states_[v];
            st.kind = VarState::FixedVal;
            st.value = val;
            st.def_prov = w.prov;
            st.def_coeff = c;
            w.dead = true;
            return true;
        }
        int pos = 0, neg = 0;
        for (const auto& [v, c] : w.terms) (sgn(c) > 0 ? pos : neg)++;
        if (pos == 0 || neg == 0) {
            int rs = sgn(w.rhs);
            int cs = pos ? 1 : -1;
            if (rs == 0) {
                // Nonnegative variables with same-sign coefficients summing
                // to zero are all zero.
                Terms forcing = w.prov;
                if (cs < 0)
                    for (auto& [r, m] : forcing) m = -m;
                for (const auto& [v, c] : w.terms) {
                    VarState& st = states_[v];
                    st.kind = VarState::FixedVal;
                    st.value = 0;
                    st.def_prov.clear();
                    st.def_coeff = 1;
                    zero_facts_.push_back(ZeroFact{v, cs > 0 ? c : Rat(-c), forcing});
                }
                w.dead = true;
                return true;
            }
            if (rs != cs) raise_infeasible_from_row(w);
            if (w.terms.size() == 1) return false;  // unreachable, handled above
        }
        if (w.terms.size() == 2 && w.rhs == 0) {
            auto& [v1, c1] = w.terms[0];
            auto& [v2, c2] = w.terms[1];
            if (sgn(c1) * sgn(c2) < 0) {
                // c1*v1 + c2*v2 = 0 with opposite signs: v2 = -(c1/c2) v1.
                VarState& st = states_[v2];
                st.kind = VarState::Scaled;
                st.alias = v1;
                st.scale = -(c1 / c2);
                st.def_prov = w.prov;
                st.def_coeff = c2;
                w.dead = true;
                return true;
            }
        }
        return false;
    }

    [[noreturn]] void raise_infeasible_from_row(const WorkRow& w) {
        if (!track_prov_) throw InfeasibleSignal{Terms{}};
        // Orient the multiplier so every coefficient is <= 0 and the
        // combined right-hand side is positive.
        bool flip;
        if (w.terms.empty()) {
            flip = sgn(w.rhs) < 0;
        } else {
            flip = sgn(w.terms[0].second) > 0;
        }
        Terms y = w.prov;
        if (flip)
            for (auto& [r, m] : y) m = -m;
        throw InfeasibleSignal{std::move(y)};
    }

    bool dedup_rows() {
        std::unordered_set<std::string> seen;
        bool changed = false;
        for (auto& w : work_) {
            if (w.dead || w.terms.empty()) continue;
            std::ostringstream key;
            const Rat& lead = w.terms[0].second;
            for (const auto& [v, c] : w.terms) key << v << ":" << rat_str(c / lead) << ";";
            key << "=" << rat_str(w.rhs / lead);
            if (!seen.insert(key.str()).second) {
                w.dead = true;
                changed = true;
            }
        }
        return changed;
    }

    // Two-marginal distribution blocks (a joint distribution constrained
    // only by one normalization row and two partition-marginal row families)
    // are always fillable by products, so they can be removed wholesale.
    bool eliminate_blocks();

    // ---- elimination --------------------------------------------------

    void eliminate() {
        std::vector<int> order;
        for (std::size_t i = 0; i < work_.size(); ++i)
            if (!work_[i].dead) order.push_back(static_cast<int>(i));
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return work_[a].terms.size() < work_[b].terms.size();
        });

        std::map<int, int> pivot_row_of_var;  // var -> index into core
        for (int idx : order) {
            WorkRow row = std::move(work_[idx]);
            // Reduce against chosen pivots until no pivoted column remains.
            while (true) {
                int hit_var = -1, hit_core = -1;
                for (const auto& [v, c] : row.terms) {
                    auto it = pivot_row_of_var.find(v);
                    if (it != pivot_row_of_var.end()) {
                        hit_var = v;
                        hit_core = it->second;
                        break;
                    }
                }
                if (hit_var < 0) break;
                const Rat* c = find_term(row.terms, hit_var);
                Rat ratio = *c / *find_term(core_raw_[hit_core].terms, hit_var);
                row.terms = axpy(row.terms, -ratio, core_raw_[hit_core].terms);
                row.rhs -= ratio * core_raw_[hit_core].rhs;
                if (track_prov_) row.prov = axpy(row.prov, -ratio, core_raw_[hit_core].prov);
            }
            if (row.terms.empty()) {
                if (row.rhs != 0) raise_infeasible_from_row(row);
                continue;  // dependent row
            }
            // Pivot on the largest-id column: later-created variables tend
            // to be per-constraint locals, which keeps fill low.
            int piv = row.terms.back().first;
            pivot_row_of_var.emplace(piv, static_cast<int>(core_raw_.size()));
            core_raw_.push_back(std::move(row));
        }
    }

    std::vector<WorkRow> core_raw_;

    // ---- tableau ------------------------------------------------------

    void build_tableau() {
        std::set<int> vars;
        for (const auto& w : core_raw_)
            for (const auto& [v, c] : w.terms) vars.insert(v);
        for (int v : vars) {
            col_of_var_.emplace(v, static_cast<int>(col_vars_.size()));
            col_vars_.push_back(v);
        }
        for (auto& w : core_raw_) {
            bool flip = sgn(w.rhs) < 0;
            Terms t;
            t.reserve(w.terms.size());
            for (const auto& [v, c] : w.terms)
                t.emplace_back(col_of_var_.at(v), flip ? Rat(-c) : c);
            sort_combine(t);
            core_terms_.push_back(t);
            core_rhs_.push_back(flip ? Rat(-w.rhs) : w.rhs);
            Terms p = w.prov;
            if (flip)
                for (auto& [r, m] : p) m = -m;
            core_prov_.push_back(std::move(p));
        }
        core_raw_.clear();
        tab_ = core_terms_;
        tab_rhs_ = core_rhs_;
        basic_.assign(tab_.size(), -1);  // -1: the row's own artificial
    }

    void pivot(int prow, int col) {
        const Rat piv = *find_term(tab_[prow], col);
        if (piv != 1) {
            Rat inv = 1 / piv;
            for (auto& [v, c] : tab_[prow]) c *= inv;
            tab_rhs_[prow] *= inv;
        }
        for (std::size_t i = 0; i < tab_.size(); ++i) {
            if (static_cast<int>(i) == prow) continue;
            const Rat* c = find_term(tab_[i], col);
            if (!c) continue;
            Rat ratio = *c;
            tab_[i] = axpy(tab_[i], -ratio, tab_[prow]);
            tab_rhs_[i] -= ratio * tab_rhs_[prow];
        }
        if (!obj_.empty() && obj_[col] != 0) {
            Rat ratio = obj_[col];
            for (const auto& [v, c] : tab_[prow]) obj_[v] -= ratio * c;
            obj_rhs_ -= ratio * tab_rhs_[prow];
        }
        basic_[prow] = col;
    }

    /// Entering column by the active pricing rule; -1 when optimal.
    int entering_column(bool bland) const {
        int best = -1;
        const Rat* best_val = nullptr;
        for (std::size_t j = 0; j < obj_.size(); ++j) {
            if (sgn(obj_[j]) >= 0) continue;
            if (bland) return static_cast<int>(j);
            if (best < 0 || obj_[j] < *best_val) {
                best = static_cast<int>(j);
                best_val = &obj_[j];
            }
        }
        return best;
    }

    /// Leaving row by the exact ratio test; Bland tie-break on the basic id.
    int leaving_row(int col) const {
        int best = -1;
        Rat best_ratio;
        for (std::size_t i = 0; i < tab_.size(); ++i) {
            const Rat* a = find_term(tab_[i], col);
            if (!a || sgn(*a) <= 0) continue;
            Rat ratio = tab_rhs_[i] / *a;
            if (best < 0 || ratio < best_ratio ||
                (ratio == best_ratio && basic_key(static_cast<int>(i)) < basic_key(best))) {
                best = static_cast<int>(i);
                best_ratio = ratio;
            }
        }
        return best;
    }

    // Artificials order after structural columns for Bland comparisons.
    long basic_key(int row) const {
        return basic_[row] >= 0 ? basic_[row]
                                : static_cast<long>(col_vars_.size()) + row;
    }

    void run_simplex(bool allow_artificial_exit_only) {
        (void)allow_artificial_exit_only;
        bool bland = !opts_.dantzig;
        int degenerate_streak = 0;
        while (true) {
            int col = entering_column(bland);
            if (col < 0) return;
            int row = leaving_row(col);
            if (row < 0) {
                ray_col_ = col;
                throw Unbounded{};
            }
            bool degenerate = (tab_rhs_[row] == 0);
            pivot(row, col);
            if (degenerate) {
                if (++degenerate_streak > 60) bland = true;  // anti-cycling
            } else {
                degenerate_streak = 0;
                bland = !opts_.dantzig;
            }
        }
    }

    struct Unbounded {};

    void run_phase1() {
        // Maximize -(sum of artificials); the reduced-cost row starts as
        // minus the column sums because every artificial begins basic.
        obj_.assign(col_vars_.size(), Rat(0));
        obj_rhs_ = 0;
        for (std::size_t i = 0; i < tab_.size(); ++i) {
            for (const auto& [v, c] : tab_[i]) obj_[v] -= c;
            obj_rhs_ -= tab_rhs_[i];
        }
        try {
            run_simplex(true);
        } catch (const Unbounded&) {
            throw std::logic_error("phase-I objective cannot be unbounded");
        }
        if (obj_rhs_ != 0) {
            raise_infeasible_from_phase1();
        }
        // Drive leftover zero-level artificials out of the basis.
        for (std::size_t i = 0; i < tab_.size(); ++i) {
            if (basic_[i] >= 0) continue;
            if (tab_rhs_[i] != 0) throw std::logic_error("nonzero artificial after phase-I");
            if (tab_[i].empty())
                throw std::logic_error("dependent core row survived elimination");
            pivot(static_cast<int>(i), tab_[i][0].first);
        }
        obj_.clear();
    }

    [[noreturn]] void raise_infeasible_from_phase1() {
        if (!track_prov_) throw InfeasibleSignal{Terms{}};
        // Solve B^T y = c_B exactly from the core snapshot; the Farkas
        // direction is -y.
        const int m = static_cast<int>(core_terms_.size());
        std::vector<Terms> cols(m);  // B^T rows: one per basis member
        std::vector<Rat> rhs(m);
        for (int p = 0; p < m; ++p) {
            if (basic_[p] >= 0) {
                int col = basic_[p];
                for (int r = 0; r < m; ++r) {
                    const Rat* c = find_term(core_terms_[r], col);
                    if (c) cols[p].emplace_back(r, *c);
                }
                rhs[p] = 0;
            } else {
                cols[p].emplace_back(p, Rat(1));
                rhs[p] = -1;
            }
        }
        std::vector<Rat> y = solve_square(cols, rhs);
        Terms y_orig;
        for (int r = 0; r < m; ++r) {
            if (y[r] == 0) continue;
            y_orig = axpy(y_orig, -y[r], core_prov_[r]);
        }
        throw InfeasibleSignal{std::move(y_orig)};
    }

    /// Gaussian solve of a full-rank square sparse system (rows given).
    static std::vector<Rat> solve_square(std::vector<Terms> rows, std::vector<Rat> rhs) {
        const int m = static_cast<int>(rows.size());
        std::vector<int> pivot_col(m, -1);
        std::vector<char> col_used(m, 0);
        for (int i = 0; i < m; ++i) {
            int pc = -1;
            for (const auto& [v, c] : rows[i])
                if (!col_used[v]) { pc = v; break; }
            if (pc < 0) throw std::logic_error("singular basis in Farkas extraction");
            col_used[pc] = 1;
            pivot_col[i] = pc;
            const Rat piv = *find_term(rows[i], pc);
            for (int j = 0; j < m; ++j) {
                if (j == i) continue;
                const Rat* c = find_term(rows[j], pc);
                if (!c) continue;
                Rat ratio = *c / piv;
                rows[j] = axpy(rows[j], -ratio, rows[i]);
                rhs[j] -= ratio * rhs[i];
            }
        }
        std::vector<Rat> x(m, Rat(0));
        for (int i = 0; i < m; ++i)
            x[pivot_col[i]] = rhs[i] / *find_term(rows[i], pivot_col[i]);
        return x;
    }

    /// True when bounded (optimal); false when unbounded (ray_col_ set).
    bool run_phase2(int objective_col) {
        obj_.assign(col_vars_.size(), Rat(0));
        obj_rhs_ = 0;
        obj_[objective_col] = -1;
        for (std::size_t i = 0; i < tab_.size(); ++i) {
            if (basic_[i] == objective_col) {
                for (const auto& [v, c] : tab_[i]) obj_[v] += c;
                obj_rhs_ += tab_rhs_[i];
            }
        }
        try {
            run_simplex(false);
        } catch (const Unbounded&) {
            obj_.clear();
            return false;
        }
        obj_.clear();
        return true;
    }

    std::map<int, Rat> basis_point_vars() const {
        std::map<int, Rat> vals;
        for (std::size_t i = 0; i < tab_.size(); ++i)
            if (basic_[i] >= 0 && tab_rhs_[i] != 0) vals[col_vars_[basic_[i]]] = tab_rhs_[i];
        return vals;
    }

    void apply_ray(std::map<int, Rat>& vals, int ray_col) const {
        vals[col_vars_[ray_col]] += 1;
        for (std::size_t i = 0; i < tab_.size(); ++i) {
            const Rat* a = find_term(tab_[i], ray_col);
            if (!a || basic_[i] < 0) continue;
            Rat& slot = vals[col_vars_[basic_[i]]];
            slot -= *a;
            if (slot == 0) vals.erase(col_vars_[basic_[i]]);
        }
    }

    std::vector<Rat> resolve_all(const std::map<int, Rat>& active) {
        std::vector<Rat> out(sys_.var_count(), Rat(0));
        std::vector<char> done(sys_.var_count(), 0);
        for (int v = 0; v < sys_.var_count(); ++v) resolve_one(v, active, out, done);
        return out;
    }

    void resolve_one(int v, const std::map<int, Rat>& active, std::vector<Rat>& out,
                     std::vector<char>& done) {
        if (done[v]) return;
        done[v] = 1;  // chains are acyclic by construction
        const VarState& st = states_[v];
        switch (st.kind) {
            case VarState::Active: {
                auto it = active.find(v);
                out[v] = it == active.end() ? Rat(0) : it->second;
                break;
            }
            case VarState::FixedVal:
                out[v] = st.value;
                break;
            case VarState::Scaled:
                resolve_one(st.alias, active, out, done);
                out[v] = st.scale * out[st.alias];
                break;
            case VarState::BlockFill:
                resolve_one(st.alias, active, out, done);
                resolve_one(st.alias2, active, out, done);
                out[v] = out[st.alias] * out[st.alias2];
                break;
        }
    }

    /// Expands a row-multiplier vector into coefficient space and repairs
    /// positive coefficients on zero-fixed variables, then verifies the
    /// certificate exactly.
    std::vector<std::pair<int, Rat>> finalize_farkas(Terms y) {
        std::map<int, Rat> coeff;
        Rat rhs_combo(0);
        auto accumulate = [&](const Terms& mult, const Rat& factor) {
            for (const auto& [r, m] : mult) {
                const auto& row = sys_.rows[r];
                Rat f = m * factor;
                for (const auto& [v, c] : row.terms) {
                    Rat& slot = coeff[v];
                    slot += f * c;
                }
                rhs_combo += f * row.rhs;
            }
        };
        accumulate(y, Rat(1));
        for (auto it = zero_facts_.rbegin(); it != zero_facts_.rend(); ++it) {
            auto slot = coeff.find(it->var);
            if (slot == coeff.end() || sgn(slot->second) <= 0) continue;
            Rat t = slot->second / it->coeff;
            accumulate(it->prov, -t);
            y = axpy(y, -t, it->prov);
        }
        for (const auto& [v, c] : coeff)
            if (sgn(c) > 0)
                throw std::logic_error("Farkas repair failed: positive coefficient");
        if (sgn(rhs_combo) <= 0)
            throw std::logic_error("Farkas certificate lost its contradiction");
        std::erase_if(y, [](const auto& t) { return t.second == 0; });
        return y;
    }
};

bool Solver::eliminate_blocks() {
    // Index: variable -> live rows containing it. Computed once per sweep;
    // the groups considered below are pairwise disjoint in their joint
    // variables, so firing one group never invalidates another.
    std::map<int, std::vector<int>> rows_of;
    const std::size_t initial_rows = work_.size();
    for (std::size_t i = 0; i < initial_rows; ++i) {
        if (work_[i].dead) continue;
        for (const auto& [v, c] : work_[i].terms) rows_of[v].push_back(static_cast<int>(i));
    }
    bool fired = false;
    for (std::size_t ni = 0; ni < initial_rows; ++ni) {
        if (work_[ni].dead || work_[ni].terms.size() < 9 || work_[ni].rhs != 1) continue;
        bool ok = true;
        for (const auto& [v, c] : work_[ni].terms)
            if (c != 1) { ok = false; break; }
        if (!ok) continue;
        std::set<int> group;
        for (const auto& [v, c] : work_[ni].terms) {
            if (states_[v].kind != VarState::Active) { ok = false; break; }
            group.insert(v);
        }
        if (!ok) continue;
        // Every group variable must sit in exactly: this row + two others.
        std::set<int> margin_rows;
        for (int v : group) {
            const auto& rs = rows_of[v];
            if (rs.size() != 3) { ok = false; break; }
            for (int r : rs)
                if (r != static_cast<int>(ni)) margin_rows.insert(r);
        }
        if (!ok) continue;
        // Margin rows must each read  z = sum of a subset of the group:
        // -1 on group members, +1 on a single outside variable, rhs 0.
        std::map<int, std::pair<int, std::vector<int>>> margins;  // row -> (z, subset)
        std::set<int> zs;
        for (int r : margin_rows) {
            const WorkRow& w = work_[r];
            if (w.dead || w.rhs != 0) { ok = false; break; }
            int z = -1;
            std::vector<int> subset;
            for (const auto& [v, c] : w.terms) {
                if (group.count(v)) {
                    if (c != -1) { ok = false; break; }
                    subset.push_back(v);
                } else {
                    if (z >= 0 || c != 1) { ok = false; break; }
                    z = v;
                }
            }
            if (!ok || z < 0 || subset.empty()) { ok = false; break; }
            if (!zs.insert(z).second) { ok = false; break; }
            margins[r] = {z, std::move(subset)};
        }
        if (!ok) continue;
        // Two-colour the margin rows so that each colour class partitions
        // the group: rows sharing a member must take different colours.
        std::map<int, std::array<int, 2>> var_rows;
        for (auto& [r, zs_sub] : margins) {
            for (int v : zs_sub.second) {
                auto& slots = var_rows[v];
                if (slots[0] == 0)
                    slots[0] = r + 1;
                else if (slots[1] == 0)
                    slots[1] = r + 1;
                else
                    ok = false;
            }
        }
        if (!ok) continue;
        for (int v : group) {
            auto it = var_rows.find(v);
            if (it == var_rows.end() || it->second[1] == 0) { ok = false; break; }
        }
        if (!ok) continue;
        std::map<int, int> colour;
        std::vector<int> stack;
        for (auto& [r, zsub] : margins) {
            (void)zsub;
            if (colour.count(r)) continue;
            colour[r] = 0;
            stack.push_back(r);
            while (ok && !stack.empty()) {
                int cur = stack.back();
                stack.pop_back();
                for (int v : margins[cur].second) {
                    int other = var_rows[v][0] - 1 == cur ? var_rows[v][1] - 1
                                                          : var_rows[v][0] - 1;
                    auto it = colour.find(other);
                    if (it == colour.end()) {
                        colour[other] = 1 - colour[cur];
                        stack.push_back(other);
                    } else if (it->second == colour[cur]) {
                        ok = false;
                    }
                }
            }
            if (!ok) break;
        }
        if (!ok) continue;
        // Both colour classes must cover the group exactly once (the
        // two-rows-per-variable check above gives disjointness).
        for (int side = 0; side < 2 && ok; ++side) {
            std::size_t covered = 0;
            for (auto& [r, zsub] : margins)
                if (colour[r] == side) covered += zsub.second.size();
            if (covered != group.size()) ok = false;
        }
        if (!ok) continue;
        // The grid must be complete: every cross pair of margin rows meets
        // the group in exactly one variable, or the product fill would
        // drop mass.
        {
            std::vector<int> p0, p1;
            for (auto& [r, zsub] : margins) {
                (void)zsub;
                (colour[r] == 0 ? p0 : p1).push_back(r);
            }
            for (auto& [r, zsub] : margins) std::sort(zsub.second.begin(), zsub.second.end());
            for (int r0 : p0) {
                for (int r1 : p1) {
                    const auto& s0 = margins[r0].second;
                    const auto& s1 = margins[r1].second;
                    std::size_t common = 0;
                    std::size_t i = 0, j = 0;
                    while (i < s0.size() && j < s1.size()) {
                        if (s0[i] < s1[j])
                            ++i;
                        else if (s1[j] < s0[i])
                            ++j;
                        else {
                            ++common;
                            ++i;
                            ++j;
                        }
                    }
                    if (common != 1) { ok = false; break; }
                }
                if (!ok) break;
            }
        }
        if (!ok) continue;

        // Eliminate: one implied total-mass row per side, product fill per
        // joint variable. Copy everything needed before appending rows.
        std::array<WorkRow, 2> implied;
        for (int side = 0; side < 2; ++side) {
            Terms terms;
            Terms prov = work_[ni].prov;
            for (auto& [r, zsub] : margins) {
                if (colour[r] != side) continue;
                terms.emplace_back(zsub.first, Rat(1));
                if (track_prov_) prov = axpy(prov, Rat(1), work_[r].prov);
            }
            sort_combine(terms);
            implied[side] = WorkRow{std::move(terms), Rat(1), std::move(prov), false};
        }
        for (int v : group) {
            VarState& st = states_[v];
            st.kind = VarState::BlockFill;
            st.alias = margins[var_rows[v][0] - 1].first;
            st.alias2 = margins[var_rows[v][1] - 1].first;
        }
        work_[ni].dead = true;
        for (auto& [r, zsub] : margins) {
            (void)zsub;
            work_[r].dead = true;
        }
        work_.push_back(std::move(implied[0]));
        work_.push_back(std::move(implied[1]));
        fired = true;
    }
    return fired;
}

void verify_witness(const LinearSystem& sys, const std::vector<Rat>& w) {
    if (static_cast<int>(w.size()) != sys.var_count())
        throw std::logic_error("witness length mismatch");
    for (const auto& v : w)
        if (v < 0) throw std::logic_error("witness violates nonnegativity");
    for (const auto& row : sys.rows) {
        Rat lhs(0);
        for (const auto& [v, c] : row.terms) lhs += c * w[v];
        if (lhs != row.rhs)
            throw std::logic_error("witness violates row " + row.label);
    }
}

void verify_farkas(const LinearSystem& sys, const std::vector<std::pair<int, Rat>>& y) {
    std::map<int, Rat> coeff;
    Rat rhs(0);
    for (const auto& [r, m] : y) {
        if (r < 0 || r >= static_cast<int>(sys.rows.size()))
            throw std::logic_error("certificate references unknown row");
        for (const auto& [v, c] : sys.rows[r].terms) coeff[v] += m * c;
        rhs += m * sys.rows[r].rhs;
    }
    for (const auto& [v, c] : coeff)
        if (c > 0) throw std::logic_error("certificate coefficient positive");
    if (rhs <= 0) throw std::logic_error("certificate yields no contradiction");
}

}  // namespace

FeasibilityResult feasible(const LinearSystem& sys, const SolveOptions& opts) {
    FeasibilityResult res;
    Solver solver(sys, opts);
    if (solver.solve_feasibility()) {
        res.status = LPStatus::Feasible;
        res.witness = solver.witness();
        verify_witness(sys, res.witness);
        return res;
    }
    // Infeasible: replay with provenance tracking to build the Farkas
    // certificate. The pipeline is deterministic, so the verdict repeats.
    Solver certifying(sys, opts, true);
    if (certifying.solve_feasibility())
        throw std::logic_error("certificate replay disagrees with the first solve");
    res.status = LPStatus::Infeasible;
    res.farkas = certifying.farkas();
    verify_farkas(sys, res.farkas);
    return res;
}

MaximizeResult maximize(const LinearSystem& sys, int var, const SolveOptions& opts) {
    if (var < 0 || var >= sys.var_count()) throw std::out_of_range("maximize: unknown variable");
    SolveOptions o = opts;
    o.block_elimination = false;
    Solver solver(sys, o);
    if (!solver.solve_feasibility())
        throw std::invalid_argument("maximize called on an infeasible system");
    auto opt = solver.maximize_var(var);
    MaximizeResult res;
    res.unbounded = opt.unbounded;
    res.value = opt.value;
    res.argmax = opt.point;
    verify_witness(sys, res.argmax);
    if (!res.unbounded && res.argmax[var] != res.value)
        throw std::logic_error("optimum does not match its witness");
    return res;
}

MaximizeResult maximize(const LinearSystem& sys, const std::string& var,
                        const SolveOptions& opts) {
    int id = sys.variable(var);
    if (id < 0) throw std::out_of_range("maximize: unknown variable " + var);
    return maximize(sys, id, opts);
}

MaxSupportResult max_support_solution(const LinearSystem& sys, const SolveOptions& opts) {
    SolveOptions o = opts;
    o.block_elimination = false;
    Solver solver(sys, o);
    if (!solver.solve_feasibility())
        throw std::invalid_argument("max_support_solution on an infeasible system");

    std::vector<std::vector<Rat>> pool;
    std::vector<char> known_positive(sys.var_count(), 0);
    auto note_solution = [&](std::vector<Rat> point) {
        verify_witness(sys, point);
        for (int v = 0; v < sys.var_count(); ++v)
            if (point[v] > 0) known_positive[v] = 1;
        pool.push_back(std::move(point));
    };
    // Probe variables in canonical order. A variable already positive in
    // some pooled solution needs no LP: its optimum is positive.
    for (int v = 0; v < sys.var_count(); ++v) {
        if (known_positive[v]) continue;
        auto opt = solver.maximize_var(v);
        if (opt.unbounded || opt.value > 0) note_solution(std::move(opt.point));
    }
    MaxSupportResult res;
    if (pool.empty()) {
        // Only the zero solution has support; still a valid witness.
        res.witness = solver.witness();
        verify_witness(sys, res.witness);
    } else {
        res.witness.assign(sys.var_count(), Rat(0));
        Rat inv(1, static_cast<unsigned long>(pool.size()));
        inv.canonicalize();
        for (const auto& p : pool)
            for (int v = 0; v < sys.var_count(); ++v) res.witness[v] += inv * p[v];
        verify_witness(sys, res.witness);
    }
    for (int v = 0; v < sys.var_count(); ++v)
        if (known_positive[v]) res.support.push_back(v);
    // The witness support must coincide with the support set.
    for (int v = 0; v < sys.var_count(); ++v) {
        bool pos = res.witness[v] > 0;
        if (pos != static_cast<bool>(known_positive[v]))
            throw std::logic_error("max-support witness disagrees with the support set");
    }
    return res;
}

}  // namespace salp
