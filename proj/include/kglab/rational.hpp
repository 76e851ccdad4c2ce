#pragma once

// Exact rational arithmetic and certified enclosures.
//
// Every measure in kglab is an exact Rational. Quantities that are irrational
// in general (fractional powers, logarithms) are carried as an Enclosure: a
// closed rational interval [lo, hi] guaranteed to contain the true value.
// Enclosures collapse to a point whenever the value happens to be rational.

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kglab {

using Integer = mpz_class;
using Rational = mpq_class;

/// Working precision (bits) of every enclosure the library produces.
inline constexpr unsigned kEnclosureBits = 128;

/// Raised when an irrational quantity is requested in exact mode.
class UnsupportedScale : public std::runtime_error {
 public:
  explicit UnsupportedScale(const std::string& what) : std::runtime_error(what) {}
};

inline Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Rational make_rational(std::int64_t num, std::int64_t den) {
  return make_rational(Integer(static_cast<long>(num)), Integer(static_cast<long>(den)));
}

inline Integer floor_of(const Rational& x) {
  Integer out;
  mpz_fdiv_q(out.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return out;
}

inline Integer ceil_of(const Rational& x) {
  Integer out;
  mpz_cdiv_q(out.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return out;
}

/// x mod 1, in [0,1).
inline Rational frac(const Rational& x) { return x - Rational(floor_of(x)); }

inline Integer ipow(const Integer& base, unsigned long e) {
  Integer out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
  return out;
}

inline Rational rpow(const Rational& base, long e) {
  if (e < 0) {
    if (base == 0) throw std::domain_error("zero to a negative power");
    return rpow(1 / base, -e);
  }
  const auto ue = static_cast<unsigned long>(e);
  return make_rational(ipow(base.get_num(), ue), ipow(base.get_den(), ue));
}

/// "p/q", or "p" when the denominator is 1.
inline std::string to_string(const Rational& x) { return x.get_str(); }

/// Accepts "p/q", "p", and finite decimals such as "-0.125" (converted exactly).
inline Rational parse_rational(std::string_view text) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  }
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto digits_ok = [](std::string_view d, bool allow_sign) {
    std::size_t i = 0;
    if (allow_sign && !d.empty() && (d[0] == '-' || d[0] == '+')) i = 1;
    if (i >= d.size()) return false;
    for (; i < d.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(d[i]))) return false;
    }
    return true;
  };
  auto to_integer = [](std::string d) {
    if (!d.empty() && d[0] == '+') d.erase(0, 1);
    return Integer(d, 10);
  };
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    const std::string num = s.substr(0, slash);
    const std::string den = s.substr(slash + 1);
    if (!digits_ok(num, true) || !digits_ok(den, false)) {
      throw std::invalid_argument("malformed rational literal '" + s + "'");
    }
    return make_rational(to_integer(num), to_integer(den));
  }
  if (const auto dot = s.find('.'); dot != std::string::npos) {
    std::string whole = s.substr(0, dot);
    const std::string fraction = s.substr(dot + 1);
    bool negative = !whole.empty() && whole[0] == '-';
    if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) whole.erase(0, 1);
    if (whole.empty()) whole = "0";
    if (!digits_ok(whole, false) || (!fraction.empty() && !digits_ok(fraction, false))) {
      throw std::invalid_argument("malformed decimal literal '" + s + "'");
    }
    const Integer scale = ipow(Integer(10), fraction.size());
    Integer num = Integer(whole, 10) * scale + (fraction.empty() ? Integer(0) : Integer(fraction, 10));
    if (negative) num = -num;
    return make_rational(num, scale);
  }
  if (!digits_ok(s, true)) throw std::invalid_argument("malformed rational literal '" + s + "'");
  return Rational(to_integer(s));
}

/// Closed rational interval known to contain a real value.
struct Enclosure {
  Rational lo;
  Rational hi;

  Enclosure() = default;
  Enclosure(Rational low, Rational high) : lo(std::move(low)), hi(std::move(high)) {
    if (lo > hi) throw std::logic_error("enclosure with lo > hi");
  }
  static Enclosure point(const Rational& x) { return {x, x}; }

  bool exact() const { return lo == hi; }
  Rational width() const { return hi - lo; }
  Rational midpoint() const { return (lo + hi) / 2; }
  double to_double() const { return midpoint().get_d(); }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }

  Enclosure& operator+=(const Enclosure& o) {
    lo += o.lo;
    hi += o.hi;
    return *this;
  }
  friend Enclosure operator+(Enclosure a, const Enclosure& b) { return a += b; }
  friend Enclosure operator-(const Enclosure& a, const Enclosure& b) {
    return {a.lo - b.hi, a.hi - b.lo};
  }
  /// Product of enclosures of non-negative quantities.
  friend Enclosure operator*(const Enclosure& a, const Enclosure& b) {
    if (a.lo < 0 || b.lo < 0) throw std::domain_error("enclosure product needs non-negative factors");
    return {a.lo * b.lo, a.hi * b.hi};
  }
  friend Enclosure operator*(const Enclosure& a, const Rational& k) {
    if (k < 0) return {a.hi * k, a.lo * k};
    return {a.lo * k, a.hi * k};
  }
  /// Quotient of a non-negative enclosure by a positive one.
  friend Enclosure operator/(const Enclosure& a, const Enclosure& b) {
    if (b.lo <= 0) throw std::domain_error("enclosure division by a non-positive enclosure");
    if (a.lo < 0) throw std::domain_error("enclosure quotient needs a non-negative numerator");
    return {a.lo / b.hi, a.hi / b.lo};
  }
  friend bool operator==(const Enclosure& a, const Enclosure& b) { return a.lo == b.lo && a.hi == b.hi; }
};

/// Rounds a non-point enclosure outward to the grid 2^-bits, keeping
/// denominators bounded in long sums. Points are returned unchanged.
inline Enclosure outward(const Enclosure& e, unsigned bits = 2 * kEnclosureBits) {
  if (e.exact()) return e;
  const Integer scale = ipow(Integer(2), bits);
  return {make_rational(floor_of(e.lo * scale), scale), make_rational(ceil_of(e.hi * scale), scale)};
}

namespace detail {

/// floor(root_k(n)) for n >= 0, plus whether the root is exact.
inline std::pair<Integer, bool> integer_root(const Integer& n, unsigned long k) {
  Integer r;
  const int exact = mpz_root(r.get_mpz_t(), n.get_mpz_t(), k);
  return {r, exact != 0};
}

}  // namespace detail

/// x^(exponent) for x >= 0 and rational exponent, exact when the result is
/// rational, otherwise a certified enclosure of width ~2^-bits relative to 1/den.
inline Enclosure pow_enclosure(const Rational& x, const Rational& exponent,
                               unsigned bits = kEnclosureBits) {
  if (x < 0) throw std::domain_error("pow_enclosure of a negative base");
  if (x == 0) {
    if (exponent > 0) return Enclosure::point(0);
    if (exponent == 0) return Enclosure::point(1);
    throw std::domain_error("zero to a negative power");
  }
  const Integer& p_signed = exponent.get_num();
  const Integer& s = exponent.get_den();
  if (!s.fits_ulong_p() || !p_signed.fits_slong_p()) {
    throw std::domain_error("pow_enclosure exponent too large");
  }
  const long p = p_signed.get_si();
  const unsigned long root = s.get_ui();
  const Rational base = rpow(x, p);  // x^p, exact
  if (root == 1) return Enclosure::point(base);
  const Integer& a = base.get_num();
  const Integer& b = base.get_den();
  // root_s(a/b) = root_s(a * b^(s-1)) / b
  const Integer radicand = a * ipow(b, root - 1);
  if (auto [r, exact] = detail::integer_root(radicand, root); exact) {
    return Enclosure::point(make_rational(r, b));
  }
  const Integer scale = ipow(Integer(2), bits);
  const auto [r, exact] = detail::integer_root(radicand * ipow(scale, root), root);
  const Integer den = b * scale;
  if (exact) return Enclosure::point(make_rational(r, den));
  return {make_rational(r, den), make_rational(r + 1, den)};
}

/// Monotone extension of pow_enclosure to an enclosed non-negative base.
inline Enclosure pow_enclosure(const Enclosure& x, const Rational& exponent,
                               unsigned bits = kEnclosureBits) {
  if (x.exact()) return pow_enclosure(x.lo, exponent, bits);
  if (exponent == 0) return Enclosure::point(1);
  const Enclosure at_lo = pow_enclosure(x.lo, exponent, bits);
  const Enclosure at_hi = pow_enclosure(x.hi, exponent, bits);
  if (exponent > 0) return {at_lo.lo, at_hi.hi};
  return {at_hi.lo, at_lo.hi};
}

/// Natural logarithm of x > 0 via MPFR with outward directed rounding.
inline Enclosure log_enclosure(const Rational& x, unsigned bits = kEnclosureBits) {
  if (x <= 0) throw std::domain_error("log_enclosure of a non-positive value");
  if (x == 1) return Enclosure::point(0);
  mpfr_t arg;
  mpfr_t out;
  mpfr_init2(arg, bits);
  mpfr_init2(out, bits);
  Rational lo;
  Rational hi;
  mpfr_set_q(arg, x.get_mpq_t(), MPFR_RNDD);
  mpfr_log(out, arg, MPFR_RNDD);
  mpfr_get_q(lo.get_mpq_t(), out);
  mpfr_set_q(arg, x.get_mpq_t(), MPFR_RNDU);
  mpfr_log(out, arg, MPFR_RNDU);
  mpfr_get_q(hi.get_mpq_t(), out);
  mpfr_clear(arg);
  mpfr_clear(out);
  return {lo, hi};
}

}  // namespace kglab
