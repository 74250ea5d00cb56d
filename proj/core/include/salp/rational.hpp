#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>

namespace salp {

/// Exact rational, always kept canonical (reduced, positive denominator).
using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rat q(num, den);
    q.canonicalize();
    return q;
}

/// Renders as "p/q" with q > 0, the form used by all dump formats.
inline std::string rat_str(const Rat& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

/// Parses "p/q" or a bare integer "p".
Rat parse_rat(const std::string& text);

}  // namespace salp
