#pragma once

// Reference computations that share no code path with the library's
// measure engine beyond Rational arithmetic.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "kglab/rational.hpp"
#include "kglab/torus.hpp"

namespace oracle {

using kglab::Ball;
using kglab::frac;
using kglab::Integer;
using kglab::Rational;

inline Rational rmax(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline Rational rmin(const Rational& a, const Rational& b) { return a < b ? a : b; }

/// Overlap of the arcs [a, a+la) and [b, b+lb) on R/Z, la, lb <= 1.
inline Rational circle_overlap(const Rational& a, const Rational& la, const Rational& b, const Rational& lb) {
  const Rational d = frac(b - a);
  Rational total = 0;
  for (int k : {-1, 0}) {
    const Rational lo = rmax(a, a + d + k);
    const Rational hi = rmin(a + la, a + d + k + lb);
    if (hi > lo) total += hi - lo;
  }
  return total;
}

/// The |q| arcs making up { x : q x mod 1 in (c - r, c + r) } as (start, length).
inline std::vector<std::pair<Rational, Rational>> preimage_arcs(std::int64_t q, Rational c, const Rational& r) {
  if (q < 0) {
    q = -q;
    c = -c;
  }
  std::vector<std::pair<Rational, Rational>> arcs;
  const Rational qq(static_cast<long>(q));
  for (std::int64_t j = 0; j < q; ++j) arcs.emplace_back(frac((c - r + j) / qq), 2 * r / qq);
  return arcs;
}

/// |A(q1, arc1) ∩ A(q2, arc2)| by summing all |q1||q2| pairwise arc overlaps.
inline Rational arc_pairs_measure(std::int64_t q1, const Rational& c1, const Rational& r1, std::int64_t q2,
                                  const Rational& c2, const Rational& r2) {
  if (r1 == 0 || r2 == 0) return 0;
  Rational total = 0;
  const auto first = preimage_arcs(q1, c1, r1);
  const auto second = preimage_arcs(q2, c2, r2);
  for (const auto& [a, la] : first) {
    for (const auto& [b, lb] : second) total += circle_overlap(a, la, b, lb);
  }
  return total;
}

/// Coordinate-product version for balls of any dimension.
inline Rational brute_measure_1d(std::int64_t q1, const Ball& b1, std::int64_t q2, const Ball& b2) {
  Rational product = 1;
  for (std::size_t j = 0; j < b1.dim(); ++j) {
    product *= arc_pairs_measure(q1, b1.center()[j], b1.radius(), q2, b2.center()[j], b2.radius());
  }
  return product;
}

/// Volume of { x in [0,1]^k : w . x <= s } for positive weights w.
inline Rational box_cdf(const std::vector<Rational>& w, const Rational& s) {
  const std::size_t k = w.size();
  if (k == 0) return s >= 0 ? 1 : 0;
  Rational total = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    Rational shift = 0;
    int parity = 1;
    for (std::size_t i = 0; i < k; ++i) {
      if ((mask >> i) & 1U) {
        shift += w[i];
        parity = -parity;
      }
    }
    const Rational t = s - shift;
    if (t > 0) total += parity * kglab::rpow(t, static_cast<long>(k));
  }
  Rational denom = 1;
  for (std::size_t i = 1; i <= k; ++i) denom *= static_cast<long>(i);
  for (const auto& x : w) denom *= x;
  return total / denom;
}

/// Real y with k y in (c - r, c + r) + Z and lo <= y <= hi, as sorted disjoint intervals.
inline std::vector<std::pair<Rational, Rational>> real_preimage(std::int64_t k, Rational c, const Rational& r,
                                                                const Rational& lo, const Rational& hi) {
  std::vector<std::pair<Rational, Rational>> out;
  if (r == 0) return out;
  if (k < 0) {
    k = -k;
    c = -c;
  }
  const Rational kk(static_cast<long>(k));
  const Integer pmin = kglab::floor_of(kk * lo - c - r) - 1;
  const Integer pmax = kglab::ceil_of(kk * hi - c + r) + 1;
  for (Integer p = pmin; p <= pmax; ++p) {
    const Rational a = rmax((c - r + Rational(p)) / kk, lo);
    const Rational b = rmin((c + r + Rational(p)) / kk, hi);
    if (b > a) {
      if (!out.empty() && out.back().second >= a) {
        out.back().second = b;
      } else {
        out.emplace_back(a, b);
      }
    }
  }
  return out;
}

inline std::vector<std::pair<Rational, Rational>> intersect_lists(const std::vector<std::pair<Rational, Rational>>& x,
                                                                  const std::vector<std::pair<Rational, Rational>>& y) {
  std::vector<std::pair<Rational, Rational>> out;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    const Rational lo = rmax(x[i].first, y[j].first);
    const Rational hi = rmin(x[i].second, y[j].second);
    if (hi > lo) out.emplace_back(lo, hi);
    if (x[i].second < y[j].second) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

/// |{x in [0,1]^n : k1 (e.x) in I1 + Z, k2 (e.x) in I2 + Z}| for one column,
/// by integrating the exact distribution of the real number e.x.
inline Rational slab_measure(const std::vector<std::int64_t>& e, std::int64_t k1, const Rational& c1,
                             const Rational& r1, std::int64_t k2, const Rational& c2, const Rational& r2) {
  std::vector<Rational> w;
  Rational offset = 0;
  for (auto ei : e) {
    if (ei > 0) w.emplace_back(static_cast<long>(ei));
    if (ei < 0) {
      w.emplace_back(static_cast<long>(-ei));
      offset += static_cast<long>(ei);
    }
  }
  Rational span = 0;
  for (const auto& x : w) span += x;
  const auto both = intersect_lists(real_preimage(k1, c1, r1, offset, offset + span),
                                    real_preimage(k2, c2, r2, offset, offset + span));
  Rational total = 0;
  for (const auto& [a, b] : both) total += box_cdf(w, b - offset) - box_cdf(w, a - offset);
  return total;
}

/// |A(q1, B1) ∩ A(q2, B2)| for parallel q1, q2 in Z^n, computed in n dimensions.
inline Rational parallel_measure(const std::vector<std::int64_t>& q1, const Ball& b1,
                                 const std::vector<std::int64_t>& q2, const Ball& b2) {
  std::uint64_t g = 0;
  for (auto x : q1) g = std::gcd(g, static_cast<std::uint64_t>(x < 0 ? -x : x));
  std::vector<std::int64_t> e(q1.size());
  for (std::size_t i = 0; i < q1.size(); ++i) e[i] = q1[i] / static_cast<std::int64_t>(g);
  std::size_t pivot = 0;
  while (e[pivot] == 0) ++pivot;
  const std::int64_t k1 = q1[pivot] / e[pivot];
  const std::int64_t k2 = q2[pivot] / e[pivot];
  Rational product = 1;
  for (std::size_t j = 0; j < b1.dim(); ++j) {
    product *= slab_measure(e, k1, b1.center()[j], b1.radius(), k2, b2.center()[j], b2.radius());
  }
  return product;
}

namespace detail {

/// Integral from -infinity to u of |[0, l1) ∩ [d, d + l2)| in d.
inline Rational trap_integral(const Rational& u, const Rational& l1, const Rational& l2) {
  const Rational h = rmin(l1, l2);
  const Rational p1 = rmin(Rational(0), l1 - l2);
  const Rational p2 = rmax(Rational(0), l1 - l2);
  if (u <= -l2) return 0;
  if (u <= p1) return (u + l2) * (u + l2) / 2;
  if (u <= p2) return h * h / 2 + (u - p1) * h;
  if (u <= l1) return h * h / 2 + (p2 - p1) * h + (h * h - (l1 - u) * (l1 - u)) / 2;
  return l1 * l2;
}

/// Sum over k of trap_integral(x + f + k) - trap_integral(x + k), 0 <= f < 1.
inline Rational periodic_increment(const Rational& x, const Rational& f, const Rational& l1, const Rational& l2) {
  Rational total = 0;
  const Integer kmin = kglab::floor_of(-l2 - x - f) - 1;
  const Integer kmax = kglab::ceil_of(l1 - x) + 1;
  for (Integer k = kmin; k <= kmax; ++k) {
    const Rational base = x + Rational(k);
    total += trap_integral(base + f, l1, l2) - trap_integral(base, l1, l2);
  }
  return total;
}

/// One column, first coordinates a, b nonzero: integrate the x1-section over x2.
inline Rational sliced_column(std::int64_t a, std::int64_t alpha, Rational c1, const Rational& r1, std::int64_t b,
                              std::int64_t beta, Rational c2, const Rational& r2) {
  if (r1 == 0 || r2 == 0) return 0;
  if (a < 0) {
    a = -a;
    alpha = -alpha;
    c1 = -c1;
  }
  if (b < 0) {
    b = -b;
    beta = -beta;
    c2 = -c2;
  }
  const Rational ra(static_cast<long>(a));
  const Rational rb(static_cast<long>(b));
  const Rational l1 = 2 * r1 / ra;
  const Rational l2 = 2 * r2 / rb;
  // arcs start at (c - r + i)/a - (alpha/a) x2; their offset d moves with speed v
  const Rational v = Rational(static_cast<long>(alpha)) / ra - Rational(static_cast<long>(beta)) / rb;
  const Rational av = v < 0 ? -v : v;
  const Integer whole = kglab::floor_of(av);
  const Rational f = av - Rational(whole);
  Rational total = 0;
  for (std::int64_t i = 0; i < a; ++i) {
    for (std::int64_t j = 0; j < b; ++j) {
      const Rational d0 = (c2 - r2 + j) / rb - (c1 - r1 + i) / ra;
      // integral over x2 of sum_k trap(d0 + v x2 + k) = (1/|v|) * integral over a window of length |v|
      const Rational start = v > 0 ? d0 : d0 + v;
      total += Rational(whole) * l1 * l2 + periodic_increment(start, f, l1, l2);
    }
  }
  return total / av;
}

}  // namespace detail

/// |A(q1, B1) ∩ A(q2, B2)| for nonparallel q1, q2 in Z^2 by exact Fubini
/// integration of the one-dimensional sections.
inline Rational plane_measure(const std::vector<std::int64_t>& q1, const Ball& b1, const std::vector<std::int64_t>& q2,
                              const Ball& b2) {
  std::int64_t a = q1[0], alpha = q1[1], b = q2[0], beta = q2[1];
  if (a == 0 || b == 0) {
    std::swap(a, alpha);
    std::swap(b, beta);
  }
  Rational product = 1;
  for (std::size_t j = 0; j < b1.dim(); ++j) {
    const Rational& c1 = b1.center()[j];
    const Rational& c2 = b2.center()[j];
    if (a != 0 && b != 0) {
      product *= detail::sliced_column(a, alpha, c1, b1.radius(), b, beta, c2, b2.radius());
    } else {
      // one vector lies on each axis: a product set
      const std::int64_t s1 = a != 0 ? a : alpha;
      const std::int64_t s2 = b != 0 ? b : beta;
      product *= arc_pairs_measure(s1, c1, b1.radius(), s1, c1, b1.radius()) *
                 arc_pairs_measure(s2, c2, b2.radius(), s2, c2, b2.radius());
    }
  }
  return product;
}

/// sum_{r=1}^{q} gcd(r, q)^m by direct summation.
inline std::uint64_t direct_gcd_power_sum(std::uint64_t q, unsigned m) {
  std::uint64_t s = 0;
  for (std::uint64_t r = 1; r <= q; ++r) {
    std::uint64_t g = std::gcd(r, q);
    std::uint64_t p = 1;
    for (unsigned i = 0; i < m; ++i) p *= g;
    s += p;
  }
  return s;
}

/// Growth exponent of sum_{q <= Q} q^A log(q+1)^B: the coefficient of log Q in
/// a least-squares fit of log S(Q) by a + delta log Q + beta log log Q over
/// Q = 2^10 .. 2^20.
inline double partial_sum_growth(double A, double B) {
  std::vector<double> xs, ys;
  long double s = 0;
  std::uint64_t next = 1 << 10;
  for (std::uint64_t q = 1; q <= (1U << 20); ++q) {
    const auto qq = static_cast<long double>(q);
    s += std::pow(qq, static_cast<long double>(A)) * std::pow(std::log(qq + 1), static_cast<long double>(B));
    if (q == next) {
      xs.push_back(std::log(static_cast<double>(q)));
      ys.push_back(std::log(static_cast<double>(s)));
      next <<= 1;
    }
  }
  // normal equations for the three-column design [1, x, log x]
  double m[3][4] = {};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double row[3] = {1.0, xs[i], std::log(xs[i])};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += row[r] * row[c];
      m[r][3] += row[r] * ys[i];
    }
  }
  for (int p = 0; p < 3; ++p) {
    for (int r = p + 1; r < 3; ++r) {
      const double f = m[r][p] / m[p][p];
      for (int c = p; c < 4; ++c) m[r][c] -= f * m[p][c];
    }
  }
  double sol[3];
  for (int r = 2; r >= 0; --r) {
    double acc = m[r][3];
    for (int c = r + 1; c < 3; ++c) acc -= m[r][c] * sol[c];
    sol[r] = acc / m[r][r];
  }
  return sol[1];
}

inline constexpr double kGrowthThreshold = 0.01;

/// Hand-rolled generators for property sweeps.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }
  std::int64_t nonzero(std::int64_t bound) {
    std::int64_t v = 0;
    while (v == 0) v = integer(-bound, bound);
    return v;
  }
  bool coin() { return integer(0, 1) == 1; }
  /// p / den with den in [1, max_den] and the value in [lo, hi].
  Rational rational(const Rational& lo, const Rational& hi, std::int64_t max_den = 64) {
    const std::int64_t den = integer(1, max_den);
    const Integer a = kglab::ceil_of(lo * den);
    const Integer b = kglab::floor_of(hi * den);
    if (b < a) return lo;
    const std::int64_t span = Integer(b - a).get_si();
    return kglab::make_rational(Integer(a + integer(0, span)), Integer(static_cast<long>(den)));
  }
  Ball ball(std::size_t m, const Rational& max_radius = Rational(1, 2), std::int64_t max_den = 64) {
    std::vector<Rational> c;
    for (std::size_t j = 0; j < m; ++j) c.push_back(rational(0, 1, max_den));
    return {c, rational(0, max_radius, max_den)};
  }
  std::vector<std::int64_t> vec(std::size_t n, std::int64_t bound) {
    std::vector<std::int64_t> v(n, 0);
    while (std::all_of(v.begin(), v.end(), [](auto x) { return x == 0; })) {
      for (auto& x : v) x = integer(-bound, bound);
    }
    return v;
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace oracle
