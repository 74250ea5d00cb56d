#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace salp {

/// Desk-scale guardrails. Every enumerating operation checks the relevant
/// cap and fails loudly instead of thrashing.
struct Caps {
    std::int64_t enumeration = 1'000'000;  // objects enumerated per operation
    std::int64_t lp_nonzeros = 50'000'000; // nonzeros admitted into one LP
    std::int64_t node_budget = 10'000'000; // default search node budget
};

/// Process-wide configuration, set once at startup by the CLI / test driver.
Caps& caps();

struct CapExceeded : std::runtime_error {
    explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

inline void check_cap(std::int64_t need, std::int64_t cap, const char* what) {
    if (need > cap)
        throw CapExceeded(std::string(what) + ": " + std::to_string(need) +
                          " exceeds cap " + std::to_string(cap));
}

/// v^e with overflow and cap detection; used for n^k domain sizes.
std::int64_t checked_pow(std::int64_t v, int e, std::int64_t cap);

}  // namespace salp
