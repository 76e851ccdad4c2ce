#pragma once

// Measure sums, Gamma^w-weighted pair sums and the quasi-independence ratio.
//
// The pair sum runs over unordered pairs of lattice vectors with
// 1 <= |q1| <= |q2| <= Q (diagonal pairs once) of
//
//   Gamma(|q1|,|q2|)^w |A(q1, B_|q1|) ∩ A(q2, (|q1|/|q2|)^(w/m) B_|q2|)|.
//
// The fast path groups vectors by norm. Nonparallel pairs contribute the
// product of measures, so only their number is needed; parallel pairs at
// norms (s, t) lie on the primitive lines whose norm divides gcd(s, t), and
// each contributes a one-dimensional overlap that depends only on (s, t, sign).

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "kglab/arith.hpp"
#include "kglab/rational.hpp"
#include "kglab/sequence.hpp"
#include "kglab/torus.hpp"

namespace kglab {

struct PairSumOptions {
  LatticeMode mode = LatticeMode::orthant;
  ScaleMode scale = ScaleMode::exact;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct PairSumReport {
  unsigned n = 0;
  unsigned m = 0;
  unsigned w = 0;
  std::uint64_t Q = 0;
  Enclosure S;            // sum of |A(q, B_|q|)| over 1 <= |q| <= Q
  Enclosure P;            // pair sum
  Enclosure parallel;     // parallel pairs, diagonal included
  Enclosure nonparallel;  // nonparallel pairs
  Enclosure diagonal;     // pairs q1 = q2

  /// S^2 / P.
  Enclosure ratio() const {
    if (P.lo <= 0) throw std::domain_error("ratio undefined: pair sum is zero");
    return (S * S) / P;
  }
  /// P / S^2, the constant in P <= C S^2.
  Enclosure constant() const {
    if (S.lo <= 0) throw std::domain_error("constant undefined: measure sum is zero");
    return P / (S * S);
  }
};

namespace detail {

inline unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned t = requested != 0 ? requested : std::max(1U, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(jobs, 1)));
}

/// Runs body(i) for i in [first, last) on interleaved worker threads.
template <typename Body>
void parallel_for(std::uint64_t first, std::uint64_t last, unsigned threads, Body&& body) {
  const unsigned workers = worker_count(threads, last > first ? last - first : 0);
  if (workers <= 1) {
    for (auto i = first; i < last; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned k = 0; k < workers; ++k) {
    pool.emplace_back([&, k] {
      try {
        for (auto i = first + k; i < last; i += workers) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline Enclosure to_enclosure(const Integer& k) { return Enclosure::point(Rational(k)); }

/// (s/t)^(w/m), checked against the scale mode.
inline Enclosure shrink_factor(std::uint64_t s, std::uint64_t t, unsigned w, unsigned m, ScaleMode mode) {
  if (w == 0 || s == t) return Enclosure::point(1);
  return scale_factor(make_rational(Integer(static_cast<unsigned long>(s)), Integer(static_cast<unsigned long>(t))),
                      Rational(static_cast<long>(w), static_cast<unsigned long>(m)), mode, "(q1/q2)^(w/m)");
}

inline void check_lift(const BallSequence& seq, ScaleMode mode) {
  if (mode == ScaleMode::exact && seq.lift() % seq.dim() != 0) {
    throw UnsupportedScale("irrational lift factor |q|^(-" + std::to_string(seq.lift()) + "/" +
                           std::to_string(seq.dim()) + ") in exact mode");
  }
}

/// One-dimensional overlap of the coordinate balls, as an enclosure.
inline Enclosure overlap_1d(std::int64_t q1, const BallBounds& b1, std::int64_t q2, const BallBounds& b2,
                            IntersectionCache* cache) {
  const Rational lo = intersect_measure_1d(q1, b1.inner, q2, b2.inner, cache);
  if (b1.exact() && b2.exact()) return Enclosure::point(lo);
  return outward({lo, intersect_measure_1d(q1, b1.outer, q2, b2.outer, cache)});
}

}  // namespace detail

/// S(Q) = sum_{q=1}^{Q} sphere_count(n, q) |B_q|.
inline Enclosure measure_sum(const BallSequence& seq, unsigned n, std::uint64_t Q,
                             LatticeMode mode = LatticeMode::orthant) {
  if (Q == 0) throw std::domain_error("measure_sum needs Q >= 1");
  Enclosure s = Enclosure::point(0);
  for (std::uint64_t q = 1; q <= Q; ++q) {
    s += outward(seq.measure(q) * Rational(sphere_count(n, q, mode)));
  }
  return s;
}

/// Pair-sum reports at every cutoff of the schedule, computed in one pass.
inline std::vector<PairSumReport> pair_sum_schedule(const BallSequence& seq, unsigned n,
                                                    std::vector<std::uint64_t> schedule, unsigned w,
                                                    const PairSumOptions& opts = {}) {
  if (n == 0) throw std::domain_error("lattice dimension must be positive");
  if (schedule.empty()) throw std::domain_error("empty Q schedule");
  std::sort(schedule.begin(), schedule.end());
  schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
  if (schedule.front() == 0) throw std::domain_error("schedule entries must be >= 1");
  detail::check_lift(seq, opts.scale);
  const unsigned m = seq.dim();
  const std::uint64_t qmax = schedule.back();
  const bool full = opts.mode == LatticeMode::full;

  std::vector<BallBounds> balls;
  std::vector<Enclosure> measures;
  std::vector<Integer> spheres(qmax + 1);
  balls.reserve(qmax + 1);
  balls.push_back(BallBounds::point(Ball(std::vector<Rational>(m, Rational(0)), 0)));
  measures.push_back(Enclosure::point(0));
  for (std::uint64_t q = 1; q <= qmax; ++q) {
    balls.push_back(seq.ball(q));
    measures.push_back(balls.back().measure());
    spheres[q] = sphere_count(n, q, opts.mode);
  }
  // lines_through[g] = number of primitive lines whose primitive norm divides g
  const auto prim = primitive_line_counts(n, qmax, opts.mode);
  std::vector<Integer> lines_through(qmax + 1, 0);
  for (std::uint64_t d = 1; d <= qmax; ++d) {
    for (std::uint64_t k = d; k <= qmax; k += d) lines_through[k] += prim[d];
  }

  struct Row {
    Enclosure parallel = Enclosure::point(0);
    Enclosure nonparallel = Enclosure::point(0);
    Enclosure diagonal = Enclosure::point(0);
  };
  std::vector<Row> rows(qmax + 1);

  detail::parallel_for(1, qmax + 1, opts.threads, [&](std::uint64_t t) {
    Row row;
    const auto tt = static_cast<std::int64_t>(t);
    for (std::uint64_t s = 1; s <= t; ++s) {
      if (balls[s].outer.radius() == 0 || balls[t].outer.radius() == 0) continue;
      const auto ss = static_cast<std::int64_t>(s);
      const std::uint64_t g = std::gcd(s, t);
      const Rational weight =
          w == 0 ? Rational(1)
                 : rpow(make_rational(Integer(static_cast<unsigned long>(g)), Integer(static_cast<unsigned long>(s))),
                        static_cast<long>(w));
      const BallBounds second = balls[t].scaled(detail::shrink_factor(s, t, w, m, opts.scale));
      const Integer& lines = lines_through[g];
      Enclosure par = Enclosure::point(0);
      Integer nonpar_pairs;
      if (s < t) {
        par += detail::overlap_1d(ss, balls[s], tt, second, nullptr) * Rational(full ? 2 : 1);
        if (full) par += detail::overlap_1d(ss, balls[s], -tt, second, nullptr) * Rational(2);
        par = par * Rational(lines);
        nonpar_pairs = spheres[s] * spheres[t] - lines * (full ? 4 : 1);
      } else {
        const Enclosure diag = measures[s] * Rational(spheres[s]);
        row.diagonal += diag * weight;
        par += diag;
        if (full) par += detail::overlap_1d(ss, balls[s], -ss, balls[s], nullptr) * Rational(lines);
        nonpar_pairs = spheres[s] * (spheres[s] - 1) / 2 - (full ? lines : Integer(0));
      }
      row.parallel += outward(par * weight);
      if (nonpar_pairs != 0) {
        row.nonparallel += outward(measures[s] * second.measure() * (weight * Rational(nonpar_pairs)));
      }
    }
    rows[t] = std::move(row);
  });

  std::vector<PairSumReport> out;
  Row acc;
  Enclosure S = Enclosure::point(0);
  std::size_t next = 0;
  for (std::uint64_t t = 1; t <= qmax; ++t) {
    acc.parallel += rows[t].parallel;
    acc.nonparallel += rows[t].nonparallel;
    acc.diagonal += rows[t].diagonal;
    S += outward(measures[t] * Rational(spheres[t]));
    if (t == schedule[next]) {
      PairSumReport r;
      r.n = n;
      r.m = m;
      r.w = w;
      r.Q = t;
      r.S = S;
      r.parallel = acc.parallel;
      r.nonparallel = acc.nonparallel;
      r.diagonal = acc.diagonal;
      r.P = acc.parallel + acc.nonparallel;
      out.push_back(std::move(r));
      ++next;
    }
  }
  return out;
}

inline PairSumReport pair_sum(const BallSequence& seq, unsigned n, std::uint64_t Q, unsigned w,
                              const PairSumOptions& opts = {}) {
  if (Q == 0) throw std::domain_error("pair_sum needs Q >= 1");
  return pair_sum_schedule(seq, n, {Q}, w, opts).front();
}

/// Direct double loop over all vector pairs; the reference for the fast path.
inline PairSumReport pair_sum_exhaustive(const BallSequence& seq, unsigned n, std::uint64_t Q, unsigned w,
                                         const PairSumOptions& opts = {}) {
  if (Q == 0) throw std::domain_error("pair_sum needs Q >= 1");
  detail::check_lift(seq, opts.scale);
  const unsigned m = seq.dim();
  std::vector<LatticeVector> vecs;
  for_each_lattice_vector(n, Q, opts.mode, [&](const IntVec& v) { vecs.emplace_back(v); });
  std::sort(vecs.begin(), vecs.end());

  PairSumReport r;
  r.n = n;
  r.m = m;
  r.w = w;
  r.Q = Q;
  r.S = r.P = r.parallel = r.nonparallel = r.diagonal = Enclosure::point(0);
  for (const auto& v : vecs) r.S += seq.measure(v.norm());
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    const auto s = vecs[i].norm();
    const BallBounds first = seq.ball(s);
    for (std::size_t j = i; j < vecs.size(); ++j) {
      const auto t = vecs[j].norm();
      const Rational weight = rpow(gamma(s, t), static_cast<long>(w));
      const BallBounds second = seq.ball(t).scaled(detail::shrink_factor(s, t, w, m, opts.scale));
      const Enclosure term = intersect_measure(vecs[i], first, vecs[j], second) * weight;
      if (i == j) r.diagonal += term;
      if (parallel(vecs[i], vecs[j])) {
        r.parallel += term;
      } else {
        r.nonparallel += term;
      }
    }
  }
  r.P = r.parallel + r.nonparallel;
  return r;
}

enum class Trend { bounded_below, decaying, inconclusive };

inline const char* to_string(Trend t) {
  switch (t) {
    case Trend::bounded_below:
      return "bounded-below";
    case Trend::decaying:
      return "decaying";
    case Trend::inconclusive:
      return "inconclusive";
  }
  return "?";
}

struct RatioPoint {
  std::uint64_t Q;
  Enclosure ratio;
};

struct QiaTrajectory {
  std::vector<PairSumReport> reports;
  std::vector<RatioPoint> points;
  double slope = 0;  // least-squares slope of log ratio against log Q
  Trend trend = Trend::inconclusive;
};

inline constexpr double kTrendThreshold = 0.05;

/// Least-squares slope of log y against log x.
inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto k = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = k * sxx - sx * sx;
  return denom == 0 ? 0 : (k * sxy - sx * sy) / denom;
}

inline QiaTrajectory qia_ratio(const BallSequence& seq, unsigned n, const std::vector<std::uint64_t>& schedule,
                               unsigned w, const PairSumOptions& opts = {}) {
  QiaTrajectory out;
  out.reports = pair_sum_schedule(seq, n, schedule, w, opts);
  std::vector<double> xs, ys;
  bool sharp = true;
  for (const auto& r : out.reports) {
    if (r.S.hi == 0) throw std::domain_error("ratio undefined: S(Q) = 0 at Q = " + std::to_string(r.Q));
    const Enclosure ratio = r.ratio();
    out.points.push_back({r.Q, ratio});
    xs.push_back(static_cast<double>(r.Q));
    ys.push_back(ratio.to_double());
    if (ratio.width() > ratio.lo * Rational(1, 1000000)) sharp = false;
  }
  if (xs.size() >= 3 && sharp) {
    out.slope = log_log_slope(xs, ys);
    out.trend = out.slope < -kTrendThreshold ? Trend::decaying : Trend::bounded_below;
  }
  return out;
}

struct InheritanceRow {
  std::uint64_t Q;
  PairSumReport lifted;  // (n+k, m) with balls |q|^(-k/m) B_|q| at exponent max(w-k, 0)
  PairSumReport base;    // (n, m) at exponent w
  Enclosure ratio;       // lifted.parallel / base.P
};

inline std::vector<InheritanceRow> inheritance_compare(const BallSequence& seq, unsigned n, unsigned k,
                                                       const std::vector<std::uint64_t>& schedule, unsigned w,
                                                       const PairSumOptions& opts = {}) {
  const unsigned w_lifted = w > k ? w - k : 0;
  const auto lifted = pair_sum_schedule(seq.lifted(k), n + k, schedule, w_lifted, opts);
  const auto base = pair_sum_schedule(seq, n, schedule, w, opts);
  std::vector<InheritanceRow> out;
  for (std::size_t i = 0; i < lifted.size(); ++i) {
    if (base[i].P.lo <= 0) throw std::domain_error("base pair sum vanishes");
    out.push_back({lifted[i].Q, lifted[i], base[i], lifted[i].parallel / base[i].P});
  }
  return out;
}

struct ChungErdos {
  Rational union_measure;
  Rational bound;  // (sum mu(A_i))^2 / sum_{i,j} mu(A_i ∩ A_j)
};

/// Exact union measure of one-dimensional sets A(q, B) and the Chung-Erdős lower bound.
inline ChungErdos chung_erdos_bound(const std::vector<std::pair<std::int64_t, Ball>>& sets) {
  IntervalUnion all;
  Rational first = 0;
  Rational second = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& [q, b] = sets[i];
    all = all.unite(preimage_1d(q, b));
    first += b.measure();
    for (std::size_t j = 0; j < sets.size(); ++j) {
      second += intersect_measure_1d(q, b, sets[j].first, sets[j].second);
    }
  }
  if (second == 0) throw std::domain_error("chung_erdos_bound needs a set of positive measure");
  return {all.measure(), first * first / second};
}

/// The l with 2^l <= q/phi(q) < 2^(l+1).
inline unsigned dyadic_block_index(std::uint64_t q) {
  const Integer num(static_cast<unsigned long>(q));
  const Integer phi(static_cast<unsigned long>(euler_phi(q)));
  unsigned l = 0;
  while (phi * ipow(Integer(2), l + 1) <= num) ++l;
  return l;
}

struct BlockSum {
  unsigned level;
  std::uint64_t members = 0;  // norms q <= Q in the block
  Enclosure sum = Enclosure::point(0);
};

/// Block sums of sphere_count(n, q) (phi(q)/q)^(1+eps) |B_q| over the blocks D_l.
inline std::vector<BlockSum> dyadic_blocks(const BallSequence& seq, unsigned n, std::uint64_t Q,
                                           const Rational& eps, LatticeMode mode = LatticeMode::orthant) {
  if (Q == 0) throw std::domain_error("dyadic_blocks needs Q >= 1");
  if (eps <= 0) throw std::domain_error("dyadic_blocks needs eps > 0");
  const auto phi = euler_phi_table(Q);
  std::vector<BlockSum> blocks;
  for (std::uint64_t q = 1; q <= Q; ++q) {
    const unsigned l = dyadic_block_index(q);
    while (blocks.size() <= l) blocks.push_back({static_cast<unsigned>(blocks.size())});
    const Rational density = make_rational(Integer(static_cast<unsigned long>(phi[q])),
                                           Integer(static_cast<unsigned long>(q)));
    const Enclosure term = pow_enclosure(density, 1 + eps) * seq.measure(q) * Rational(sphere_count(n, q, mode));
    blocks[l].members += 1;
    blocks[l].sum += outward(term);
  }
  return blocks;
}

/// Partial sum up to Q of sum q^(n-1) (phi(q)/q)^(1+eps) |B_q|, defined for nm = 2.
inline Enclosure extra_divergence_sum(const BallSequence& seq, unsigned n, std::uint64_t Q, const Rational& eps) {
  if (n * seq.dim() != 2) throw std::domain_error("extra-divergence sum is defined for nm = 2 only");
  if (eps <= 0) throw std::domain_error("extra-divergence sum needs eps > 0");
  const auto phi = euler_phi_table(Q);
  Enclosure total = Enclosure::point(0);
  for (std::uint64_t q = 1; q <= Q; ++q) {
    const Enclosure mu = seq.measure(q);
    if (mu.hi == 0) continue;
    const Rational density = make_rational(Integer(static_cast<unsigned long>(phi[q])),
                                           Integer(static_cast<unsigned long>(q)));
    const Rational power = rpow(Rational(static_cast<unsigned long>(q)), static_cast<long>(n) - 1);
    total += outward(pow_enclosure(density, 1 + eps) * mu * power);
  }
  return total;
}

}  // namespace kglab
