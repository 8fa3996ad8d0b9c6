#pragma once

#include <gmpxx.h>

#include <string>

#include "loguni/errors.hpp"

namespace loguni {

inline mpq_class frac(long num, long den = 1) {
    mpq_class q(num, den);
    q.canonicalize();
    return q;
}

// Parses "p", "-p" or "p/q" with arbitrary precision.
inline mpq_class parse_rational(const std::string& s) {
    mpq_class q;
    if (q.set_str(s, 10) != 0)
        throw malformed_input("bad rational literal: " + s);
    q.canonicalize();
    if (q.get_den() == 0)
        throw malformed_input("zero denominator: " + s);
    return q;
}

inline std::string rational_str(const mpq_class& q) {
    return q.get_str();
}

inline int sign_of(const mpq_class& q) { return sgn(q); }

} // namespace loguni
