#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <string>

#include "persistwalk/errors.hpp"

namespace pw {

using Int = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(long num, long den = 1) {
  Rat q(num, den);
  q.canonicalize();
  return q;
}

// Parses "n", "-n" or "n/d". Used by the law-spec grammar and by CSV readers,
// so the error carries the offending token.
inline Rat parse_rat(const std::string& tok) {
  if (tok.empty()) fail(errc::parse_error, "empty rational token");
  Rat q;
  if (mpq_set_str(q.get_mpq_t(), tok.c_str(), 10) != 0)
    fail(errc::parse_error, "bad rational token '" + tok + "'");
  if (mpz_sgn(mpq_denref(q.get_mpq_t())) <= 0)
    fail(errc::parse_error, "nonpositive denominator in '" + tok + "'");
  q.canonicalize();
  return q;
}

inline std::string rat_str(const Rat& q) { return q.get_str(); }

// Top 64 bits of |z| as an integer mantissa, with z ~= sign * mag * 2^shift.
// Keeps the full long-double mantissa, unlike mpz_get_d_2exp.
inline unsigned long long int_top64(const mpz_t z, long& shift) {
  shift = 0;
  if (mpz_sgn(z) == 0) return 0;
  const long bits = static_cast<long>(mpz_sizeinbase(z, 2));
  shift = bits - 64;
  if (shift <= 0) {
    shift = 0;
    return mpz_get_ui(z);
  }
  mpz_t top;
  mpz_init(top);
  mpz_tdiv_q_2exp(top, z, static_cast<mp_bitcnt_t>(shift));
  const unsigned long long mag = mpz_get_ui(top);
  mpz_clear(top);
  return mag;
}

inline long double ratio_long_double(const mpz_t num, const mpz_t den) {
  long sn = 0, sd = 0;
  const unsigned long long mn = int_top64(num, sn);
  const unsigned long long md = int_top64(den, sd);
  if (md == 0) return 0.0L;
  long double v = std::ldexp(static_cast<long double>(mn) / static_cast<long double>(md),
                             static_cast<int>(sn - sd));
  if (mpz_sgn(num) * mpz_sgn(den) < 0) v = -v;
  return v;
}

inline long double to_long_double(const Int& z) {
  long shift = 0;
  const unsigned long long mag = int_top64(z.get_mpz_t(), shift);
  long double v = std::ldexp(static_cast<long double>(mag), static_cast<int>(shift));
  return mpz_sgn(z.get_mpz_t()) < 0 ? -v : v;
}

inline long double to_long_double(const Rat& q) {
  return ratio_long_double(mpq_numref(q.get_mpq_t()), mpq_denref(q.get_mpq_t()));
}

inline double to_double(const Rat& q) { return static_cast<double>(to_long_double(q)); }

inline Int int_pow(const Int& base, unsigned long exp) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
  return r;
}

}  // namespace pw
