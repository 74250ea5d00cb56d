#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "salp/rational.hpp"

namespace salp {

/// Equality-form rational linear system over named nonnegative variables.
struct LinearSystem {
    struct Row {
        std::vector<std::pair<int, Rat>> terms;  // sorted by variable id
        Rat rhs;
        std::string label;
    };

    std::vector<std::string> var_names;
    std::unordered_map<std::string, int> var_index;
    std::vector<Row> rows;

    int add_variable(const std::string& name);
    int ensure_variable(const std::string& name);
    int variable(const std::string& name) const;  // -1 if absent
    void add_row(std::vector<std::pair<int, Rat>> terms, Rat rhs, std::string label = {});
    int var_count() const { return static_cast<int>(var_names.size()); }
    std::int64_t nonzeros() const;
};

enum class LPStatus { Feasible, Infeasible };

struct FeasibilityResult {
    LPStatus status = LPStatus::Infeasible;
    /// Satisfies every row exactly; present iff feasible.
    std::vector<Rat> witness;
    /// Row multipliers y with A^T y <= 0 entrywise and b^T y > 0;
    /// present iff infeasible.
    std::vector<std::pair<int, Rat>> farkas;
};

struct SolveOptions {
    /// Dantzig pricing with an automatic switch to Bland's rule after a
    /// degenerate streak; pure Bland when false.
    bool dantzig = true;
    /// Presolve may eliminate unconstrained two-marginal distribution
    /// blocks. Always disabled internally while optimizing.
    bool block_elimination = true;
};

/// Exact feasibility; witness and certificate are both re-verified against
/// the input before returning.
FeasibilityResult feasible(const LinearSystem& sys, const SolveOptions& opts = {});

struct MaximizeResult {
    bool unbounded = false;
    Rat value;
    std::vector<Rat> argmax;  // a feasible point attaining the optimum
};

/// Exact maximum of a single variable; throws if the system is infeasible.
MaximizeResult maximize(const LinearSystem& sys, int var, const SolveOptions& opts = {});
MaximizeResult maximize(const LinearSystem& sys, const std::string& var,
                        const SolveOptions& opts = {});

struct MaxSupportResult {
    std::vector<Rat> witness;
    std::vector<int> support;  // ascending variable ids with positive optimum
};

/// Uniform convex average of per-variable optimal solutions; the witness
/// support equals the set of variables that are positive somewhere in the
/// feasible region.
MaxSupportResult max_support_solution(const LinearSystem& sys, const SolveOptions& opts = {});

/// Equality-form text dump for external cross-checking.
std::string dump_lp(const LinearSystem& sys);

}  // namespace salp
