#pragma once

#include <cstdint>
#include <gmpxx.h>

namespace eaciar {

// Exact rational arithmetic for all utilization math. Accept/reject
// decisions at the u = 1 boundary must not depend on rounding.
using Rational = mpq_class;

inline Rational make_rational(std::int64_t num, std::int64_t den) {
    Rational q(static_cast<long>(num), static_cast<long>(den));
    q.canonicalize();
    return q;
}

// floor(q * scale), exact.
inline std::int64_t floor_scaled(const Rational& q, std::int64_t scale) {
    mpz_class num = q.get_num() * scale;
    mpz_class out;
    mpz_fdiv_q(out.get_mpz_t(), num.get_mpz_t(), q.get_den().get_mpz_t());
    return out.get_si();
}

}  // namespace eaciar
