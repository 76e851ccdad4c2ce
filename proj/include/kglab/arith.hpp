#pragma once

// Integer kernels: gcd, Euler's totient, divisor sums, gcd-power sums,
// max-norm sphere counts and primitive lattice directions.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "kglab/rational.hpp"

namespace kglab {

/// Which integer vectors q range over: the non-negative orthant (default) or all of Z^n.
enum class LatticeMode { orthant, full };

using IntVec = std::vector<std::int64_t>;

inline std::uint64_t uabs(std::int64_t a) {
  return a < 0 ? static_cast<std::uint64_t>(0) - static_cast<std::uint64_t>(a)
               : static_cast<std::uint64_t>(a);
}

inline std::uint64_t gcd(std::int64_t a, std::int64_t b) {
  if (a == 0 && b == 0) throw std::domain_error("gcd(0, 0) is undefined");
  return std::gcd(uabs(a), uabs(b));
}

/// Prime factorisation by trial division; adequate for q < 2^63.
inline std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t q) {
  if (q == 0) throw std::domain_error("factorize(0)");
  std::vector<std::pair<std::uint64_t, unsigned>> out;
  for (std::uint64_t p = 2; p <= q / p; p += (p == 2 ? 1 : 2)) {
    if (q % p != 0) continue;
    unsigned e = 0;
    while (q % p == 0) {
      q /= p;
      ++e;
    }
    out.emplace_back(p, e);
  }
  if (q > 1) out.emplace_back(q, 1);
  return out;
}

inline std::uint64_t euler_phi(std::uint64_t q) {
  if (q == 0) throw std::domain_error("euler_phi(0)");
  std::uint64_t phi = q;
  for (const auto& [p, e] : factorize(q)) phi = phi / p * (p - 1);
  return phi;
}

/// phi(0..limit) by sieve; entry 0 is 0.
inline std::vector<std::uint64_t> euler_phi_table(std::uint64_t limit) {
  std::vector<std::uint64_t> phi(limit + 1);
  std::iota(phi.begin(), phi.end(), std::uint64_t{0});
  for (std::uint64_t p = 2; p <= limit; ++p) {
    if (phi[p] != p) continue;  // composite: already reduced by a smaller prime
    for (std::uint64_t k = p; k <= limit; k += p) phi[k] -= phi[k] / p;
  }
  return phi;
}

inline std::vector<std::uint64_t> divisors(std::uint64_t q) {
  std::vector<std::uint64_t> divs{1};
  for (const auto& [p, e] : factorize(q)) {
    const std::size_t base = divs.size();
    std::uint64_t pk = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) divs.push_back(divs[i] * pk);
    }
  }
  std::sort(divs.begin(), divs.end());
  return divs;
}

/// sigma(q) = sum of the divisors of q.
inline Integer divisor_sum(std::uint64_t q) {
  Integer s = 0;
  for (auto d : divisors(q)) s += Integer(static_cast<unsigned long>(d));
  return s;
}

/// sum_{r=1}^{q} gcd(r, q)^m, evaluated as sum_{d | q} d^m phi(q/d).
inline Integer gcd_power_sum(std::uint64_t q, unsigned m) {
  if (q == 0 || m == 0) throw std::domain_error("gcd_power_sum needs q >= 1 and m >= 1");
  Integer s = 0;
  for (auto d : divisors(q)) {
    s += ipow(Integer(static_cast<unsigned long>(d)), m) *
         Integer(static_cast<unsigned long>(euler_phi(q / d)));
  }
  return s;
}

/// gcd(q, r) / min(q, r), always in (0, 1].
inline Rational gamma(std::uint64_t q, std::uint64_t r) {
  if (q == 0 || r == 0) throw std::domain_error("gamma needs positive arguments");
  return make_rational(Integer(static_cast<unsigned long>(std::gcd(q, r))),
                       Integer(static_cast<unsigned long>(std::min(q, r))));
}

/// Number of lattice vectors of max-norm exactly q (q >= 1).
inline Integer sphere_count(unsigned n, std::uint64_t q, LatticeMode mode) {
  if (n == 0 || q == 0) throw std::domain_error("sphere_count needs n >= 1 and q >= 1");
  const Integer qq(static_cast<unsigned long>(q));
  if (mode == LatticeMode::full) return ipow(2 * qq + 1, n) - ipow(2 * qq - 1, n);
  return ipow(qq + 1, n) - ipow(qq, n);
}

/// Number of primitive lines through the origin whose primitive vector has
/// max-norm d, for d = 0..limit (entry 0 unused). In full mode a line carries
/// two primitive vectors (+e and -e); in orthant mode exactly one.
inline std::vector<Integer> primitive_line_counts(unsigned n, std::uint64_t limit, LatticeMode mode) {
  std::vector<Integer> prim(limit + 1, 0);
  for (std::uint64_t d = 1; d <= limit; ++d) prim[d] = sphere_count(n, d, mode);
  // sphere_count(d) = sum_{e | d} prim(e); invert.
  for (std::uint64_t d = 1; d <= limit; ++d) {
    for (std::uint64_t k = 2 * d; k <= limit; k += d) prim[k] -= prim[d];
  }
  if (mode == LatticeMode::full) {
    for (auto& v : prim) v /= 2;
  }
  return prim;
}

inline std::uint64_t max_norm(const IntVec& v) {
  std::uint64_t norm = 0;
  for (auto c : v) norm = std::max(norm, uabs(c));
  return norm;
}

inline std::uint64_t content(const IntVec& v) {
  std::uint64_t g = 0;
  for (auto c : v) g = std::gcd(g, uabs(c));
  return g;
}

/// Visits every vector of the lattice domain with 1 <= |v| <= limit, in
/// lexicographic order of coordinates.
template <typename Visitor>
void for_each_lattice_vector(unsigned n, std::uint64_t limit, LatticeMode mode, Visitor&& visit) {
  if (n == 0) throw std::domain_error("lattice dimension must be positive");
  const auto hi = static_cast<std::int64_t>(limit);
  const std::int64_t lo = mode == LatticeMode::full ? -hi : 0;
  IntVec v(n, lo);
  while (true) {
    if (max_norm(v) >= 1) visit(static_cast<const IntVec&>(v));
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (v[i] < hi) {
        ++v[i];
        break;
      }
      v[i] = lo;
      if (i == 0) return;
    }
  }
}

/// Primitive vectors with 1 <= |v| <= limit; in full mode one representative
/// per line (first nonzero coordinate positive). Sorted by norm, then lexicographically.
inline std::vector<IntVec> primitive_vectors(unsigned n, std::uint64_t limit, LatticeMode mode) {
  std::vector<IntVec> out;
  for_each_lattice_vector(n, limit, mode, [&](const IntVec& v) {
    if (content(v) != 1) return;
    if (mode == LatticeMode::full) {
      const auto first = std::find_if(v.begin(), v.end(), [](auto c) { return c != 0; });
      if (*first < 0) return;
    }
    out.push_back(v);
  });
  std::stable_sort(out.begin(), out.end(),
                   [](const IntVec& a, const IntVec& b) { return max_norm(a) < max_norm(b); });
  return out;
}

}  // namespace kglab
