#pragma once

// Monte Carlo estimates on the torus.
//
// Sample points lie on the grid 2^-64 Z: coordinate u in [0, 2^64) stands for
// u / 2^64, so q x mod 1 is the wrapped integer sum of q_i u_i and every
// membership test against a rational ball is exact.

#include <boost/math/distributions/beta.hpp>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kglab/arith.hpp"
#include "kglab/qia.hpp"
#include "kglab/rational.hpp"
#include "kglab/sequence.hpp"
#include "kglab/torus.hpp"

namespace kglab {

struct SampleSpec {
  std::uint64_t seed = 0;
  std::uint64_t samples = 10000;
  unsigned threads = 0;  // 0: hardware concurrency; results do not depend on it
};

/// Name of the generator below, recorded in manifests.
inline constexpr const char* kGeneratorName = "splitmix64-counter";

inline std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Word number `counter` of the stream for `seed`.
inline std::uint64_t sample_word(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(splitmix64(seed) + (counter + 1) * 0x9e3779b97f4a7c15ULL);
}

/// Coordinates of sample i in [0,1)^(nm) as grid integers, row-major (row = lattice index).
inline void fill_sample(std::uint64_t seed, std::uint64_t i, std::size_t words, std::uint64_t* out) {
  for (std::size_t j = 0; j < words; ++j) out[j] = sample_word(seed, i * words + j);
}

inline Rational grid_point(std::uint64_t u) { return make_rational(Integer(static_cast<unsigned long>(u)), ipow(Integer(2), 64)); }

/// Binomial proportion with a Clopper-Pearson interval.
struct Proportion {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;

  Rational value() const {
    if (trials == 0) throw std::domain_error("proportion of zero trials");
    return make_rational(Integer(static_cast<unsigned long>(successes)), Integer(static_cast<unsigned long>(trials)));
  }
  double estimate() const { return value().get_d(); }
  /// Binomial standard deviation of the estimate at the estimate itself.
  double sigma() const {
    const double p = estimate();
    return std::sqrt(p * (1 - p) / static_cast<double>(trials));
  }
  std::pair<double, double> interval(double level = 0.95) const {
    const double alpha = 1 - level;
    const auto k = static_cast<double>(successes);
    const auto n = static_cast<double>(trials);
    double lo = 0;
    double hi = 1;
    if (successes > 0) lo = boost::math::quantile(boost::math::beta_distribution<>(k, n - k + 1), alpha / 2);
    if (successes < trials) hi = boost::math::quantile(boost::math::beta_distribution<>(k + 1, n - k), 1 - alpha / 2);
    return {lo, hi};
  }
};

/// Integers v in [0, 2^64) with v / 2^64 in the open arc (c - r, c + r) mod 1:
/// the cyclic range lo, lo + 1, ..., lo + span.
struct Window {
  std::uint64_t lo = 0;
  std::uint64_t span = 0;
  bool empty = true;
  bool full = false;

  bool contains(std::uint64_t v) const { return full || (!empty && v - lo <= span); }
  friend bool operator==(const Window& a, const Window& b) {
    return a.empty == b.empty && a.full == b.full && (a.empty || a.full || (a.lo == b.lo && a.span == b.span));
  }
};

namespace detail {

inline std::uint64_t low_word(const Integer& x) {
  Integer r;
  mpz_fdiv_r_2exp(r.get_mpz_t(), x.get_mpz_t(), 64);
  return static_cast<std::uint64_t>(mpz_get_ui(r.get_mpz_t()));
}

inline Window open_window(const Rational& c, const Rational& r) {
  Window w;
  if (r == 0) return w;
  const Integer T = ipow(Integer(2), 64);
  const Integer lo = floor_of((c - r) * Rational(T)) + 1;
  const Integer hi = ceil_of((c + r) * Rational(T)) - 1;
  if (hi < lo) return w;
  w.empty = false;
  if (hi - lo >= T - 1) {
    w.full = true;
    return w;
  }
  w.lo = low_word(lo);
  w.span = low_word(hi - lo);
  return w;
}

}  // namespace detail

/// Window of coordinate j of a ball known up to its radius. Throws when the
/// inner and outer balls disagree on the grid, which needs a radius within
/// about 2^-128 of a grid threshold.
inline Window grid_window(const BallBounds& b, std::size_t j) {
  const Window inner = detail::open_window(b.inner.center()[j], b.inner.radius());
  if (b.exact()) return inner;
  const Window outer = detail::open_window(b.outer.center()[j], b.outer.radius());
  if (!(inner == outer)) throw std::runtime_error("radius enclosure straddles a sampling-grid threshold");
  return inner;
}

/// Exact membership of a grid point in A(q, B).
inline bool grid_member(const IntVec& q, const std::uint64_t* u, std::size_t m, const std::vector<Window>& windows) {
  for (std::size_t j = 0; j < m; ++j) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < q.size(); ++i) v += static_cast<std::uint64_t>(q[i]) * u[i * m + j];
    if (!windows[j].contains(v)) return false;
  }
  return true;
}

/// Number of q with 1 <= |q| <= Q and q x mod 1 in B_|q|, for an arbitrary
/// rational point x (row-major n x m). Exact rational arithmetic throughout.
inline std::uint64_t hit_count(const std::vector<Rational>& x, const BallSequence& seq, unsigned n, std::uint64_t Q,
                               LatticeMode mode = LatticeMode::orthant) {
  const unsigned m = seq.dim();
  if (x.size() != static_cast<std::size_t>(n) * m) throw std::domain_error("point has the wrong dimension");
  std::vector<BallBounds> balls;
  for (std::uint64_t q = 1; q <= Q; ++q) balls.push_back(seq.ball(q));
  auto inside = [](const Rational& v, const Ball& b, std::size_t j) {
    if (b.radius() == 0) return false;
    Rational d = frac(v - b.center()[j]);
    if (d > Rational(1, 2)) d = 1 - d;
    return d < b.radius();
  };
  std::uint64_t hits = 0;
  for_each_lattice_vector(n, Q, mode, [&](const IntVec& q) {
    const BallBounds& b = balls[max_norm(q) - 1];
    bool in_inner = true;
    bool in_outer = true;
    for (unsigned j = 0; j < m; ++j) {
      Rational v = 0;
      for (unsigned i = 0; i < n; ++i) v += Rational(static_cast<long>(q[i])) * x[i * m + j];
      in_inner = in_inner && inside(v, b.inner, j);
      in_outer = in_outer && inside(v, b.outer, j);
    }
    if (in_inner != in_outer) throw std::runtime_error("membership undecided by the radius enclosure");
    if (in_inner) ++hits;
  });
  return hits;
}

/// Enumerates the hits of grid points against a ball sequence up to a cutoff.
/// For n = 2 the vectors of norm s are (k, +-s) and (+-s, k); the first
/// column of q x is then a shift of k u, so candidates come from a range query
/// on the sorted values k u and only they are checked in full.
class HitCounter {
 public:
  HitCounter(const BallSequence& seq, unsigned n, std::uint64_t Q, LatticeMode mode)
      : n_(n), m_(seq.dim()), Q_(Q), mode_(mode), windows_(Q + 1) {
    if (n == 0 || Q == 0) throw std::domain_error("hit counter needs n >= 1 and Q >= 1");
    for (std::uint64_t s = 1; s <= Q; ++s) {
      const BallBounds b = seq.ball(s);
      for (unsigned j = 0; j < m_; ++j) windows_[s].push_back(grid_window(b, j));
      if (!windows_[s][0].empty) active_.push_back(s);
    }
    if (n_ >= 3) {
      for_each_lattice_vector(n_, Q_, mode_, [&](const IntVec& q) {
        if (!windows_[max_norm(q)][0].empty) vectors_.push_back(q);
      });
    }
  }

  unsigned n() const { return n_; }
  unsigned m() const { return m_; }
  std::uint64_t cutoff() const { return Q_; }

  /// Calls visit(|q|) for every hit of the grid point u (n*m words).
  template <typename Visit>
  void for_each_hit(const std::uint64_t* u, Visit&& visit) const {
    if (n_ == 1) {
      for (auto s : active_) {
        const auto& win = windows_[s];
        bool plus = true;
        bool minus = mode_ == LatticeMode::full;
        for (unsigned j = 0; j < m_ && (plus || minus); ++j) {
          const std::uint64_t v = s * u[j];
          plus = plus && win[j].contains(v);
          minus = minus && win[j].contains(0 - v);
        }
        if (plus) visit(s);
        if (minus) visit(s);
      }
    } else if (n_ == 2) {
      plane_hits(u, visit);
    } else {
      for (const auto& q : vectors_) {
        const auto s = max_norm(q);
        if (grid_member(q, u, m_, windows_[s])) visit(s);
      }
    }
  }

  std::uint64_t count(const std::uint64_t* u) const {
    std::uint64_t c = 0;
    for_each_hit(u, [&](std::uint64_t) { ++c; });
    return c;
  }

 private:
  using Entry = std::pair<std::uint64_t, std::int64_t>;  // (k u mod 2^64, k)

  std::vector<Entry> sorted_multiples(std::uint64_t u) const {
    const auto q = static_cast<std::int64_t>(Q_);
    std::vector<Entry> out;
    out.reserve(static_cast<std::size_t>(2 * q + 1));
    for (std::int64_t k = mode_ == LatticeMode::full ? -q : 0; k <= q; ++k) {
      out.emplace_back(static_cast<std::uint64_t>(k) * u, k);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Entries whose value lies in the cyclic range lo .. lo + span.
  template <typename F>
  static void range(const std::vector<Entry>& sorted, const Window& w, std::uint64_t shift, F&& f) {
    if (w.full) {
      for (const auto& e : sorted) f(e.second);
      return;
    }
    const std::uint64_t lo = w.lo - shift;
    const std::uint64_t hi = lo + w.span;
    auto scan = [&](std::uint64_t a, std::uint64_t b) {
      auto it = std::lower_bound(sorted.begin(), sorted.end(), Entry{a, INT64_MIN});
      for (; it != sorted.end() && it->first <= b; ++it) f(it->second);
    };
    if (hi >= lo) {
      scan(lo, hi);
    } else {
      scan(lo, UINT64_MAX);
      scan(0, hi);
    }
  }

  template <typename Visit>
  void plane_hits(const std::uint64_t* u, Visit&& visit) const {
    const std::uint64_t* row0 = u;
    const std::uint64_t* row1 = u + m_;
    const auto first = sorted_multiples(row0[0]);
    const auto second = sorted_multiples(row1[0]);
    const bool full = mode_ == LatticeMode::full;
    for (auto s : active_) {
      const auto ss = static_cast<std::int64_t>(s);
      const auto& win = windows_[s];
      for (const std::int64_t sign : {1, -1}) {
        if (sign < 0 && !full) break;
        const std::int64_t fixed = sign * ss;
        // q = (k, fixed), |k| <= s
        range(first, win[0], static_cast<std::uint64_t>(fixed) * row1[0], [&](std::int64_t k) {
          if (static_cast<std::uint64_t>(k < 0 ? -k : k) > s) return;
          if (rest_member(k, fixed, u, win)) visit(s);
        });
        // q = (fixed, k), |k| < s
        range(second, win[0], static_cast<std::uint64_t>(fixed) * row0[0], [&](std::int64_t k) {
          if (static_cast<std::uint64_t>(k < 0 ? -k : k) >= s) return;
          if (rest_member(fixed, k, u, win)) visit(s);
        });
      }
    }
  }

  bool rest_member(std::int64_t a, std::int64_t b, const std::uint64_t* u, const std::vector<Window>& win) const {
    for (unsigned j = 1; j < m_; ++j) {
      const std::uint64_t v = static_cast<std::uint64_t>(a) * u[j] + static_cast<std::uint64_t>(b) * u[m_ + j];
      if (!win[j].contains(v)) return false;
    }
    return true;
  }

  unsigned n_;
  unsigned m_;
  std::uint64_t Q_;
  LatticeMode mode_;
  std::vector<std::vector<Window>> windows_;
  std::vector<std::uint64_t> active_;
  std::vector<IntVec> vectors_;
};

/// Per-sample hit counts up to one cutoff.
struct HitHistogram {
  std::uint64_t Q = 0;
  std::vector<std::uint32_t> counts;

  std::uint64_t samples() const { return counts.size(); }
  Proportion at_least(std::uint64_t K) const {
    Proportion p{0, counts.size()};
    for (auto c : counts) p.successes += c >= K ? 1 : 0;
    return p;
  }
  Rational fraction_at_least(std::uint64_t K) const { return at_least(K).value(); }
  Rational mean() const {
    Integer total = 0;
    for (auto c : counts) total += static_cast<unsigned long>(c);
    return make_rational(total, Integer(static_cast<unsigned long>(counts.size())));
  }
};

/// Hit histograms at every cutoff of the schedule, from one pass over the samples.
inline std::vector<HitHistogram> estimate_limsup_measure(const BallSequence& seq, unsigned n,
                                                         std::vector<std::uint64_t> schedule, const SampleSpec& spec,
                                                         LatticeMode mode = LatticeMode::orthant) {
  if (schedule.empty()) throw std::domain_error("empty Q schedule");
  if (spec.samples == 0) throw std::domain_error("sample count must be positive");
  std::sort(schedule.begin(), schedule.end());
  schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
  if (schedule.front() == 0) throw std::domain_error("schedule entries must be >= 1");
  const HitCounter counter(seq, n, schedule.back(), mode);
  const std::size_t words = static_cast<std::size_t>(n) * seq.dim();
  std::vector<HitHistogram> out(schedule.size());
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    out[i].Q = schedule[i];
    out[i].counts.assign(spec.samples, 0);
  }
  detail::parallel_for(0, spec.samples, spec.threads, [&](std::uint64_t i) {
    std::vector<std::uint64_t> u(words);
    fill_sample(spec.seed, i, words, u.data());
    std::vector<std::uint32_t> local(schedule.size(), 0);
    counter.for_each_hit(u.data(), [&](std::uint64_t s) {
      const auto first = std::lower_bound(schedule.begin(), schedule.end(), s) - schedule.begin();
      for (auto k = static_cast<std::size_t>(first); k < schedule.size(); ++k) ++local[k];
    });
    for (std::size_t k = 0; k < schedule.size(); ++k) out[k].counts[i] = local[k];
  });
  return out;
}

/// Mean and standard error of the per-sample hit counts with Q0 < |q| <= Q.
struct WindowMean {
  double mean = 0;
  double standard_error = 0;
  std::uint64_t samples = 0;
};

inline WindowMean window_mean(const HitHistogram& lower, const HitHistogram& upper) {
  if (lower.samples() != upper.samples() || lower.Q > upper.Q) throw std::domain_error("incompatible histograms");
  WindowMean out;
  out.samples = upper.samples();
  double sum = 0;
  double sq = 0;
  for (std::size_t i = 0; i < upper.counts.size(); ++i) {
    const double d = static_cast<double>(upper.counts[i]) - static_cast<double>(lower.counts[i]);
    sum += d;
    sq += d * d;
  }
  const auto k = static_cast<double>(out.samples);
  out.mean = sum / k;
  const double var = k > 1 ? (sq - k * out.mean * out.mean) / (k - 1) : 0;
  out.standard_error = std::sqrt(std::max(var, 0.0) / k);
  return out;
}

/// Expected number of hits with Q0 < |q| <= Q: the sum of sphere_count(n, q) |B_q|.
inline Enclosure expected_hits(const BallSequence& seq, unsigned n, std::uint64_t Q0, std::uint64_t Q,
                               LatticeMode mode = LatticeMode::orthant) {
  Enclosure e = Enclosure::point(0);
  for (std::uint64_t q = Q0 + 1; q <= Q; ++q) e += outward(seq.measure(q) * Rational(sphere_count(n, q, mode)));
  return e;
}

/// Fraction of samples in A(q, B).
inline Proportion empirical_set_measure(const LatticeVector& q, const Ball& b, const SampleSpec& spec) {
  const std::size_t m = b.dim();
  const std::size_t words = q.dim() * m;
  std::vector<Window> windows;
  for (std::size_t j = 0; j < m; ++j) windows.push_back(grid_window(BallBounds::point(b), j));
  std::vector<std::uint8_t> hit(spec.samples, 0);
  detail::parallel_for(0, spec.samples, spec.threads, [&](std::uint64_t i) {
    std::vector<std::uint64_t> u(words);
    fill_sample(spec.seed, i, words, u.data());
    hit[i] = grid_member(q.coords(), u.data(), m, windows) ? 1 : 0;
  });
  Proportion p{0, spec.samples};
  for (auto h : hit) p.successes += h;
  return p;
}

/// Half-open box prod [lo_k, hi_k) in [0,1)^(nm), row-major like sample points.
struct Box {
  std::vector<std::pair<Rational, Rational>> sides;

  Rational measure() const {
    Rational v = 1;
    for (const auto& [a, b] : sides) v *= b - a;
    return v;
  }
};

struct MixingEstimate {
  Proportion conditional;  // hits in A among samples in U
  Rational set_measure;    // |A| = |B|
  double defect() const { return conditional.estimate() / set_measure.get_d(); }
  std::pair<double, double> interval(double level = 0.95) const {
    auto [lo, hi] = conditional.interval(level);
    return {lo / set_measure.get_d(), hi / set_measure.get_d()};
  }
};

/// Estimates |A(q,B) ∩ U| / (|A(q,B)| |U|) as P(x in A | x in U) / |B|.
inline MixingEstimate mixing_mc(const LatticeVector& q, const Ball& b, const Box& box, const SampleSpec& spec) {
  const std::size_t m = b.dim();
  const std::size_t words = q.dim() * m;
  if (box.sides.size() != words) throw std::domain_error("box has the wrong dimension");
  if (box.measure() <= 0) throw std::domain_error("mixing estimate needs |U| > 0");
  if (b.measure() == 0) throw std::domain_error("mixing estimate needs |B| > 0");
  using u128 = unsigned __int128;
  std::vector<std::pair<u128, u128>> limits;
  const Integer T = ipow(Integer(2), 64);
  auto to_u128 = [](const Integer& x) {
    const Integer hi = x >> 64;
    return (static_cast<u128>(mpz_get_ui(hi.get_mpz_t())) << 64) | detail::low_word(x);
  };
  for (const auto& [a, c] : box.sides) {
    if (a < 0 || c > 1 || c <= a) throw std::domain_error("box sides must satisfy 0 <= lo < hi <= 1");
    limits.emplace_back(to_u128(ceil_of(a * Rational(T))), to_u128(ceil_of(c * Rational(T))));
  }
  std::vector<Window> windows;
  for (std::size_t j = 0; j < m; ++j) windows.push_back(grid_window(BallBounds::point(b), j));
  std::vector<std::uint8_t> state(spec.samples, 0);  // bit 0: in U, bit 1: in A
  detail::parallel_for(0, spec.samples, spec.threads, [&](std::uint64_t i) {
    std::vector<std::uint64_t> u(words);
    fill_sample(spec.seed, i, words, u.data());
    for (std::size_t k = 0; k < words; ++k) {
      if (u[k] < limits[k].first || u[k] >= limits[k].second) return;
    }
    state[i] = static_cast<std::uint8_t>(1 | (grid_member(q.coords(), u.data(), m, windows) ? 2 : 0));
  });
  MixingEstimate est{{0, 0}, b.measure()};
  for (auto s : state) {
    est.conditional.trials += s & 1;
    est.conditional.successes += (s >> 1) & 1;
  }
  if (est.conditional.trials == 0) throw std::runtime_error("no samples landed in the box");
  return est;
}

}  // namespace kglab
