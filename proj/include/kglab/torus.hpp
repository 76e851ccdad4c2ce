#pragma once

// Exact measure engine for the sets
//
//   A_{n,m}(q, B) = { x in [0,1)^{nm} : q x + p in B for some p in Z^m }
//
// where q is an integer row vector and B a max-norm ball on the torus R^m/Z^m.
// A ball is a product of m arcs, so every set here factors coordinate-wise and
// every measure reduces to one-dimensional arc arithmetic over the rationals.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "kglab/arith.hpp"
#include "kglab/rational.hpp"

namespace kglab {

/// How irrational scale factors are handled: rejected, or carried as enclosures.
enum class ScaleMode { exact, enclosure };

/// Max-norm ball in R^m/Z^m. Centre coordinates live in [0,1); the radius is
/// clamped to 1/2 (the whole torus), and clamping is recorded.
class Ball {
 public:
  Ball(std::vector<Rational> center, Rational radius) : center_(std::move(center)), radius_(std::move(radius)) {
    if (center_.empty()) throw std::domain_error("ball dimension must be positive");
    if (radius_ < 0) throw std::domain_error("ball radius must be non-negative");
    for (auto& c : center_) c = frac(c);
    if (radius_ > Rational(1, 2)) {
      radius_ = Rational(1, 2);
      clamped_ = true;
    }
  }

  static Ball arc(const Rational& center, const Rational& radius) { return Ball({center}, radius); }

  std::size_t dim() const { return center_.size(); }
  const std::vector<Rational>& center() const { return center_; }
  const Rational& radius() const { return radius_; }
  bool clamped() const { return clamped_; }

  Rational measure() const { return rpow(2 * radius_, static_cast<long>(dim())); }

  Ball coordinate(std::size_t j) const { return arc(center_.at(j), radius_); }

  Ball negated() const {
    std::vector<Rational> c(center_.size());
    std::transform(center_.begin(), center_.end(), c.begin(), [](const Rational& x) { return -x; });
    return {std::move(c), radius_};
  }

  /// Dilation about the centre by a non-negative factor.
  Ball scaled(const Rational& factor) const {
    if (factor < 0) throw std::domain_error("negative dilation factor");
    Ball out(center_, radius_ * factor);
    out.clamped_ = out.clamped_ || clamped_;
    return out;
  }

  /// True when all coordinate arcs coincide, so per-coordinate products are powers.
  bool isotropic() const {
    return std::all_of(center_.begin(), center_.end(), [&](const Rational& c) { return c == center_[0]; });
  }

  friend bool operator==(const Ball& a, const Ball& b) {
    return a.center_ == b.center_ && a.radius_ == b.radius_;
  }

 private:
  std::vector<Rational> center_;
  Rational radius_;
  bool clamped_ = false;
};

/// A ball known only up to its radius: every set built from `inner` is
/// contained in the true set, which is contained in the one built from `outer`.
struct BallBounds {
  Ball inner;
  Ball outer;

  static BallBounds point(const Ball& b) { return {b, b}; }
  bool exact() const { return inner.radius() == outer.radius(); }
  Enclosure measure() const { return {inner.measure(), outer.measure()}; }
  BallBounds scaled(const Enclosure& factor) const {
    return {inner.scaled(factor.lo), outer.scaled(factor.hi)};
  }
};

/// Half-open arc [lo, hi) with 0 <= lo < hi <= 1.
struct Arc {
  Rational lo;
  Rational hi;
  friend bool operator==(const Arc& a, const Arc& b) { return a.lo == b.lo && a.hi == b.hi; }
};

/// Finite union of arcs on R/Z in canonical form: sorted, disjoint and
/// non-adjacent, with an arc crossing 0 split into [0,b) and [a,1).
class IntervalUnion {
 public:
  IntervalUnion() = default;

  static IntervalUnion full() {
    IntervalUnion u;
    u.arcs_.push_back({Rational(0), Rational(1)});
    return u;
  }

  /// Builds the union of real half-open intervals [a, b), each taken mod 1.
  static IntervalUnion from_intervals(const std::vector<std::pair<Rational, Rational>>& intervals) {
    std::vector<Arc> pieces;
    for (const auto& [a, b] : intervals) {
      if (b <= a) continue;
      if (b - a >= 1) return full();
      const Rational shift(floor_of(a));
      const Rational lo = a - shift;
      const Rational hi = b - shift;
      if (hi <= 1) {
        pieces.push_back({lo, hi});
      } else {
        pieces.push_back({lo, Rational(1)});
        pieces.push_back({Rational(0), hi - 1});
      }
    }
    return normalized(std::move(pieces));
  }

  const std::vector<Arc>& arcs() const { return arcs_; }
  bool empty() const { return arcs_.empty(); }

  Rational measure() const {
    Rational total = 0;
    for (const auto& a : arcs_) total += a.hi - a.lo;
    return total;
  }

  bool contains(const Rational& x) const {
    const Rational y = frac(x);
    auto it = std::upper_bound(arcs_.begin(), arcs_.end(), y,
                               [](const Rational& v, const Arc& a) { return v < a.lo; });
    if (it == arcs_.begin()) return false;
    --it;
    return y < it->hi;
  }

  /// Merge sweep over both arc lists.
  IntervalUnion intersect(const IntervalUnion& other) const {
    std::vector<Arc> out;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < arcs_.size() && j < other.arcs_.size()) {
      const Arc& a = arcs_[i];
      const Arc& b = other.arcs_[j];
      const Rational& lo = std::max(a.lo, b.lo);
      const Rational& hi = std::min(a.hi, b.hi);
      if (lo < hi) out.push_back({lo, hi});
      if (a.hi < b.hi) {
        ++i;
      } else {
        ++j;
      }
    }
    return normalized(std::move(out));
  }

  IntervalUnion unite(const IntervalUnion& other) const {
    std::vector<Arc> all = arcs_;
    all.insert(all.end(), other.arcs_.begin(), other.arcs_.end());
    return normalized(std::move(all));
  }

  friend bool operator==(const IntervalUnion& a, const IntervalUnion& b) { return a.arcs_ == b.arcs_; }

 private:
  static IntervalUnion normalized(std::vector<Arc> pieces) {
    std::sort(pieces.begin(), pieces.end(), [](const Arc& a, const Arc& b) { return a.lo < b.lo; });
    IntervalUnion u;
    for (auto& p : pieces) {
      if (p.hi <= p.lo) continue;
      if (!u.arcs_.empty() && p.lo <= u.arcs_.back().hi) {
        if (p.hi > u.arcs_.back().hi) u.arcs_.back().hi = p.hi;
      } else {
        u.arcs_.push_back(std::move(p));
      }
    }
    return u;
  }

  std::vector<Arc> arcs_;
};

/// Nonzero integer vector with its max-norm.
class LatticeVector {
 public:
  explicit LatticeVector(IntVec coords) : coords_(std::move(coords)), norm_(max_norm(coords_)) {
    if (coords_.empty()) throw std::domain_error("lattice vector needs at least one coordinate");
    if (norm_ == 0) throw std::domain_error("lattice vector must be nonzero");
  }
  LatticeVector(std::initializer_list<std::int64_t> coords) : LatticeVector(IntVec(coords)) {}

  const IntVec& coords() const { return coords_; }
  std::size_t dim() const { return coords_.size(); }
  std::uint64_t norm() const { return norm_; }

  LatticeVector operator-() const {
    IntVec c(coords_.size());
    std::transform(coords_.begin(), coords_.end(), c.begin(), [](auto x) { return -x; });
    return LatticeVector(std::move(c));
  }

  /// q = k e with k >= 1 and e primitive.
  std::pair<std::uint64_t, LatticeVector> primitive() const {
    const std::uint64_t k = content(coords_);
    IntVec e(coords_.size());
    std::transform(coords_.begin(), coords_.end(), e.begin(),
                   [k](auto x) { return x / static_cast<std::int64_t>(k); });
    return {k, LatticeVector(std::move(e))};
  }

  /// Primitive vector spanning the same line, first nonzero coordinate positive.
  LatticeVector line_representative() const {
    auto e = primitive().second;
    const auto first = std::find_if(e.coords_.begin(), e.coords_.end(), [](auto c) { return c != 0; });
    return *first < 0 ? -e : e;
  }

  friend bool operator==(const LatticeVector& a, const LatticeVector& b) { return a.coords_ == b.coords_; }
  friend bool operator<(const LatticeVector& a, const LatticeVector& b) {
    return std::tie(a.norm_, a.coords_) < std::tie(b.norm_, b.coords_);
  }

 private:
  IntVec coords_;
  std::uint64_t norm_;
};

inline Integer dot(const LatticeVector& a, const LatticeVector& b) {
  if (a.dim() != b.dim()) throw std::domain_error("dot product of vectors of different dimension");
  Integer s = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    s += Integer(static_cast<long>(a.coords()[i])) * Integer(static_cast<long>(b.coords()[i]));
  }
  return s;
}

inline bool parallel(const LatticeVector& a, const LatticeVector& b) {
  if (a.dim() != b.dim()) throw std::domain_error("parallel test on vectors of different dimension");
  const auto& x = a.coords();
  const auto& y = b.coords();
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const Integer minor = Integer(static_cast<long>(x[i])) * Integer(static_cast<long>(y[j])) -
                            Integer(static_cast<long>(x[j])) * Integer(static_cast<long>(y[i]));
      if (minor != 0) return false;
    }
  }
  return true;
}

/// { x in [0,1) : q x mod 1 in arc }: |q| arcs of length |arc|/|q|, spaced 1/|q| apart.
inline IntervalUnion preimage_1d(std::int64_t q, const Ball& arc) {
  if (q == 0) throw std::domain_error("preimage_1d needs q != 0");
  if (arc.dim() != 1) throw std::domain_error("preimage_1d needs a one-dimensional arc");
  if (q < 0) return preimage_1d(-q, arc.negated());
  const Rational& c = arc.center()[0];
  const Rational& r = arc.radius();
  if (r == 0) return {};
  std::vector<std::pair<Rational, Rational>> intervals;
  intervals.reserve(static_cast<std::size_t>(q));
  const Rational qq(static_cast<long>(q));
  for (std::int64_t j = 0; j < q; ++j) {
    intervals.emplace_back((c - r + j) / qq, (c + r + j) / qq);
  }
  return IntervalUnion::from_intervals(intervals);
}

namespace detail {

/// sum over k in Z of |[0, len1] ∩ [x0 + k h, x0 + k h + len2]| for h > 0.
/// The summand is a continuous trapezoid in its offset, so each of its three
/// linear pieces sums in closed form over an arithmetic progression.
inline Rational trapezoid_lattice_sum(const Rational& len1, const Rational& len2, const Rational& x0,
                                      const Rational& h) {
  if (len1 == 0 || len2 == 0) return 0;
  const Rational diff = len1 - len2;
  const Rational rise_end = diff < 0 ? diff : Rational(0);
  const Rational fall_start = diff > 0 ? diff : Rational(0);
  const Rational plateau = diff < 0 ? len1 : len2;
  Rational total = 0;
  auto piece = [&](const Rational& from, const Rational& to, int slope, const Rational& intercept) {
    if (from >= to) return;
    const Integer kmin = ceil_of((from - x0) / h);
    const Integer kmax = ceil_of((to - x0) / h) - 1;
    if (kmax < kmin) return;
    const Integer count = kmax - kmin + 1;
    const Integer ksum = (kmin + kmax) * count / 2;
    total += Rational(count) * (slope * x0 + intercept) + slope * h * Rational(ksum);
  };
  piece(-len2, rise_end, 1, len2);
  piece(rise_end, fall_start, 0, plateau);
  piece(fall_start, len1, -1, len1);
  return total;
}

/// |{ y : a y in arc(c1, r1), b y in arc(c2, r2) }| for coprime a, b >= 1.
/// Parametrising the closed curve y -> (a y, b y) by its first coordinate u,
/// the second condition becomes u in [(k + a(c2 - r2))/b, (k + a(c2 + r2))/b]
/// for exactly one family of integers k, each point u having a preimages.
inline Rational coprime_arc_overlap(std::uint64_t a, std::uint64_t b, const Rational& c1, const Rational& r1,
                                    const Rational& c2, const Rational& r2) {
  if (r1 == 0 || r2 == 0) return 0;
  const Rational ra(static_cast<unsigned long>(a));
  const Rational rb(static_cast<unsigned long>(b));
  const Rational len1 = 2 * r1;
  const Rational len2 = 2 * ra * r2 / rb;
  const Rational x0 = ra * (c2 - r2) / rb - (c1 - r1);
  return trapezoid_lattice_sum(len1, len2, x0, 1 / rb) / ra;
}

struct ArcPairKey {
  std::uint64_t a;
  std::uint64_t b;
  Rational c1, r1, c2, r2;

  friend bool operator<(const ArcPairKey& x, const ArcPairKey& y) {
    if (x.a != y.a) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    if (auto c = cmp(x.c1, y.c1); c != 0) return c < 0;
    if (auto c = cmp(x.r1, y.r1); c != 0) return c < 0;
    if (auto c = cmp(x.c2, y.c2); c != 0) return c < 0;
    return cmp(x.r2, y.r2) < 0;
  }
};

}  // namespace detail

/// Memo table for one-dimensional arc overlaps, keyed by the reduced pair
/// (q1/g, q2/g) with signs folded into the arc centres. Safe for concurrent use.
class IntersectionCache {
 public:
  template <typename Compute>
  Rational get_or_compute(const detail::ArcPairKey& key, Compute&& compute) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = table_.find(key); it != table_.end()) {
        ++hits_;
        return it->second;
      }
    }
    Rational value = compute();
    std::unique_lock lock(mutex_);
    table_.emplace(key, value);
    return value;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return table_.size();
  }
  std::size_t hits() const { return hits_; }

 private:
  mutable std::shared_mutex mutex_;
  std::map<detail::ArcPairKey, Rational> table_;
  std::atomic<std::size_t> hits_{0};
};

/// Exact |A_{1,1}(q1, arc1) ∩ A_{1,1}(q2, arc2)| for one-dimensional arcs.
inline Rational arc_intersect_measure(std::int64_t q1, const Ball& arc1, std::int64_t q2, const Ball& arc2,
                                      IntersectionCache* cache = nullptr) {
  if (q1 == 0 || q2 == 0) throw std::domain_error("intersect_measure_1d needs nonzero multipliers");
  if (arc1.dim() != 1 || arc2.dim() != 1) throw std::domain_error("arc_intersect_measure needs arcs");
  // A(-q, B) = A(q, -B): fold each sign into its arc.
  Rational c1 = q1 < 0 ? frac(-arc1.center()[0]) : arc1.center()[0];
  Rational c2 = q2 < 0 ? frac(-arc2.center()[0]) : arc2.center()[0];
  const std::uint64_t u1 = uabs(q1);
  const std::uint64_t u2 = uabs(q2);
  const std::uint64_t g = std::gcd(u1, u2);
  detail::ArcPairKey key{u1 / g, u2 / g, std::move(c1), arc1.radius(), std::move(c2), arc2.radius()};
  auto compute = [&] { return detail::coprime_arc_overlap(key.a, key.b, key.c1, key.r1, key.c2, key.r2); };
  if (cache != nullptr) return cache->get_or_compute(key, compute);
  return compute();
}

/// Exact |A_{1,m}(q1, B1) ∩ A_{1,m}(q2, B2)|: the product of the coordinate arc overlaps.
inline Rational intersect_measure_1d(std::int64_t q1, const Ball& b1, std::int64_t q2, const Ball& b2,
                                     IntersectionCache* cache = nullptr) {
  if (b1.dim() != b2.dim()) throw std::domain_error("balls of different dimension");
  if (b1.isotropic() && b2.isotropic()) {
    return rpow(arc_intersect_measure(q1, b1.coordinate(0), q2, b2.coordinate(0), cache),
                static_cast<long>(b1.dim()));
  }
  Rational product = 1;
  for (std::size_t j = 0; j < b1.dim() && product != 0; ++j) {
    product *= arc_intersect_measure(q1, b1.coordinate(j), q2, b2.coordinate(j), cache);
  }
  return product;
}

/// Exact |A_{n,m}(q1, B1) ∩ A_{n,m}(q2, B2)|. Nonparallel vectors give
/// independent sets; parallel ones reduce to n = 1 with norms |q1|, ±|q2|,
/// the sign being that of q1 . q2.
inline Rational intersect_measure(const LatticeVector& q1, const Ball& b1, const LatticeVector& q2, const Ball& b2,
                                  IntersectionCache* cache = nullptr) {
  if (q1.dim() != q2.dim()) throw std::domain_error("lattice vectors of different dimension");
  if (b1.dim() != b2.dim()) throw std::domain_error("balls of different dimension");
  if (!parallel(q1, q2)) return b1.measure() * b2.measure();
  const auto n1 = static_cast<std::int64_t>(q1.norm());
  const auto n2 = static_cast<std::int64_t>(q2.norm());
  return intersect_measure_1d(n1, b1, dot(q1, q2) > 0 ? n2 : -n2, b2, cache);
}

/// Certified bounds on the intersection measure when the balls are known up to radius.
inline Enclosure intersect_measure(const LatticeVector& q1, const BallBounds& b1, const LatticeVector& q2,
                                   const BallBounds& b2, IntersectionCache* cache = nullptr) {
  const Rational lo = intersect_measure(q1, b1.inner, q2, b2.inner, cache);
  if (b1.exact() && b2.exact()) return Enclosure::point(lo);
  return {lo, intersect_measure(q1, b1.outer, q2, b2.outer, cache)};
}

/// Rational x^(exponent), or an enclosure when irrational and the mode allows it.
inline Enclosure scale_factor(const Rational& x, const Rational& exponent, ScaleMode mode,
                              const std::string& what) {
  Enclosure f = pow_enclosure(x, exponent);
  if (!f.exact() && mode == ScaleMode::exact) {
    throw UnsupportedScale("irrational scale factor " + what + " = (" + to_string(x) + ")^(" +
                           to_string(exponent) + ") in exact mode");
  }
  return f;
}

struct DilationGap {
  Enclosure lhs;  // |A(q1, |q1|^{-1/m} B1) ∩ A(q2, |q2|^{-1/m} B2)|
  Enclosure rhs;  // |A(q1, B1) ∩ A(q2, (|q1|/|q2|)^{1/m} B2)| / |q1|
  /// lhs <= rhs is certified by the bounds.
  bool holds() const { return lhs.hi <= rhs.lo; }
};

inline DilationGap dilate_gap(const LatticeVector& q1, const Ball& b1, const LatticeVector& q2, const Ball& b2,
                              ScaleMode mode = ScaleMode::exact) {
  if (!parallel(q1, q2)) throw std::domain_error("dilate_gap needs parallel vectors");
  if (q1.norm() > q2.norm()) throw std::domain_error("dilate_gap needs |q1| <= |q2|");
  if (b1.dim() != b2.dim()) throw std::domain_error("balls of different dimension");
  const Rational inv_m(1, static_cast<unsigned long>(b1.dim()));
  const Rational n1(static_cast<unsigned long>(q1.norm()));
  const Rational n2(static_cast<unsigned long>(q2.norm()));
  const Enclosure s1 = scale_factor(n1, -inv_m, mode, "|q1|^(-1/m)");
  const Enclosure s2 = scale_factor(n2, -inv_m, mode, "|q2|^(-1/m)");
  const Enclosure s12 = scale_factor(n1 / n2, inv_m, mode, "(|q1|/|q2|)^(1/m)");
  const BallBounds one = BallBounds::point(b1);
  const BallBounds two = BallBounds::point(b2);
  DilationGap gap;
  gap.lhs = intersect_measure(q1, one.scaled(s1), q2, two.scaled(s2));
  gap.rhs = intersect_measure(q1, one, q2, two.scaled(s12)) * (1 / n1);
  return gap;
}

/// 2^m (|B1||B2| + |B2| |q|^{-m} gcd(r, q)^m), an upper bound for |A_{1,m}(r,B1) ∩ A_{1,m}(q,B2)|.
inline Rational overlap_bound(std::int64_t r, const Ball& b1, std::int64_t q, const Ball& b2) {
  if (r == 0 || q == 0) throw std::domain_error("overlap_bound needs nonzero multipliers");
  if (b1.dim() != b2.dim()) throw std::domain_error("balls of different dimension");
  const auto m = static_cast<long>(b1.dim());
  const Rational g_over_q = make_rational(Integer(static_cast<unsigned long>(gcd(r, q))),
                                          Integer(static_cast<unsigned long>(uabs(q))));
  return rpow(Rational(2), m) * (b1.measure() * b2.measure() + b2.measure() * rpow(g_over_q, m));
}

/// |A(q,B) ∩ U| / (|A(q,B)| |U|) for n = m = 1.
inline Rational mixing_defect_1d(std::int64_t q, const Ball& arc, const IntervalUnion& u) {
  const Rational mu_u = u.measure();
  const Rational mu_b = arc.measure();
  if (mu_u == 0 || mu_b == 0) throw std::domain_error("mixing defect needs |B| > 0 and |U| > 0");
  return preimage_1d(q, arc).intersect(u).measure() / (mu_b * mu_u);
}

}  // namespace kglab
