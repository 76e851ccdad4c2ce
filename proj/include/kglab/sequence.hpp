#pragma once

// Symbolic ball sequences q -> B_q.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "kglab/arith.hpp"
#include "kglab/rational.hpp"
#include "kglab/torus.hpp"

namespace kglab {

/// radius(q) = c q^(-tau) (log(q+1))^(-sigma), natural logarithm.
struct PowerLog {
  Rational c = 0;
  Rational tau = 0;
  Rational sigma = 0;

  bool zero() const { return c == 0; }
  Enclosure at(std::uint64_t q) const {
    if (q == 0) throw std::domain_error("radius law evaluated at q = 0");
    if (c == 0) return Enclosure::point(0);
    const Rational qq(static_cast<unsigned long>(q));
    Enclosure r = pow_enclosure(qq, -tau) * c;
    if (sigma != 0) r = r * pow_enclosure(log_enclosure(qq + 1), -sigma);
    return r;
  }
  friend bool operator==(const PowerLog& a, const PowerLog& b) {
    return a.c == b.c && a.tau == b.tau && a.sigma == b.sigma;
  }
};

enum class TailRule { none, zero, powerlog };

/// Explicit radii for q = 1..radii.size(), then the tail rule.
struct TableRadii {
  std::vector<Rational> radii;
  TailRule tail = TailRule::none;
  PowerLog tail_law{};
};

/// Radius profile(q) when q is a power of base (including q = 1), zero elsewhere.
struct DyadicSupport {
  std::uint64_t base = 2;
  PowerLog profile{};

  bool supports(std::uint64_t q) const {
    while (q % base == 0) q /= base;
    return q == 1;
  }
};

using RadiusLaw = std::variant<PowerLog, TableRadii, DyadicSupport>;

class BallSequence {
 public:
  BallSequence(RadiusLaw law, unsigned dim, std::vector<Rational> center = {})
      : law_(std::move(law)), dim_(dim), center_(std::move(center)) {
    if (dim_ == 0) throw std::domain_error("ball sequence dimension must be positive");
    if (center_.empty()) center_.assign(dim_, Rational(0));
    if (center_.size() != dim_) throw std::domain_error("centre has the wrong dimension");
    if (const auto* p = std::get_if<PowerLog>(&law_); p != nullptr && p->c < 0) {
      throw std::domain_error("radius constant must be non-negative");
    }
    if (const auto* d = std::get_if<DyadicSupport>(&law_); d != nullptr && d->base < 2) {
      throw std::domain_error("dyadic support base must be at least 2");
    }
    if (const auto* t = std::get_if<TableRadii>(&law_)) {
      for (const auto& r : t->radii) {
        if (r < 0) throw std::domain_error("negative radius in table");
      }
    }
  }

  static BallSequence power_log(Rational c, Rational tau, Rational sigma, unsigned dim,
                                std::vector<Rational> center = {}) {
    return {PowerLog{std::move(c), std::move(tau), std::move(sigma)}, dim, std::move(center)};
  }

  const RadiusLaw& law() const { return law_; }
  unsigned dim() const { return dim_; }
  unsigned lift() const { return lift_; }
  const std::vector<Rational>& center() const { return center_; }

  /// Per-q centres for q = 1..list.size(); later q use the fixed centre.
  void set_centers(std::vector<std::vector<Rational>> per_q) {
    for (const auto& c : per_q) {
      if (c.size() != dim_) throw std::domain_error("per-q centre has the wrong dimension");
    }
    per_q_center_ = std::move(per_q);
  }

  const std::vector<Rational>& center(std::uint64_t q) const {
    if (q >= 1 && q <= per_q_center_.size()) return per_q_center_[q - 1];
    return center_;
  }

  /// Radius before clamping and lifting.
  Enclosure nominal_radius(std::uint64_t q) const {
    if (q == 0) throw std::domain_error("ball sequence evaluated at q = 0");
    return std::visit(
        [q](const auto& law) -> Enclosure {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, PowerLog>) {
            return law.at(q);
          } else if constexpr (std::is_same_v<T, DyadicSupport>) {
            return law.supports(q) ? law.profile.at(q) : Enclosure::point(0);
          } else {
            if (q <= law.radii.size()) return Enclosure::point(law.radii[q - 1]);
            switch (law.tail) {
              case TailRule::zero:
                return Enclosure::point(0);
              case TailRule::powerlog:
                return law.tail_law.at(q);
              case TailRule::none:
                break;
            }
            throw std::out_of_range("radius table has no entry for q = " + std::to_string(q) +
                                    " and no tail rule");
          }
        },
        law_);
  }

  /// Radius of B_q: clamped to 1/2, then shrunk by q^(-lift/m).
  Enclosure radius(std::uint64_t q) const {
    Enclosure r = nominal_radius(q);
    const Rational half(1, 2);
    if (r.lo > half) r.lo = half;
    if (r.hi > half) r.hi = half;
    if (lift_ != 0) {
      r = r * pow_enclosure(Rational(static_cast<unsigned long>(q)),
                            Rational(-static_cast<long>(lift_), static_cast<unsigned long>(dim_)));
    }
    return r;
  }

  BallBounds ball(std::uint64_t q) const {
    const Enclosure r = radius(q);
    const auto& c = center(q);
    return {Ball(c, r.lo), Ball(c, r.hi)};
  }

  Enclosure measure(std::uint64_t q) const { return ball(q).measure(); }

  /// The sequence q -> q^(-k/m) B_q used for the (n+k, m) problem.
  BallSequence lifted(unsigned k) const {
    BallSequence out = *this;
    out.lift_ += k;
    return out;
  }

  /// True when no term is ever nonzero.
  bool identically_zero() const {
    return std::visit(
        [](const auto& law) {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, PowerLog>) {
            return law.zero();
          } else if constexpr (std::is_same_v<T, DyadicSupport>) {
            return law.profile.zero();
          } else {
            for (const auto& r : law.radii) {
              if (r != 0) return false;
            }
            return law.tail == TailRule::zero || (law.tail == TailRule::powerlog && law.tail_law.zero());
          }
        },
        law_);
  }

 private:
  RadiusLaw law_;
  unsigned dim_;
  std::vector<Rational> center_;
  std::vector<std::vector<Rational>> per_q_center_;
  unsigned lift_ = 0;
};

/// One-dimensional sequence in the style of Duffin and Schaeffer: for each
/// level k, every divisor q <= limit of N_k (the product of the first k
/// primes) not used by an earlier level gets radius q / (4 N_k), so all sets
/// of a level sit inside { x : ||N_k x|| < 1/4 }. Radii beyond are zero.
inline BallSequence duffin_schaeffer_sequence(unsigned levels, std::uint64_t limit) {
  static constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47};
  if (levels == 0 || levels > std::size(kPrimes)) throw std::domain_error("unsupported number of levels");
  std::vector<Rational> radii(limit, Rational(0));
  std::vector<bool> used(limit + 1, false);
  std::uint64_t n_k = 1;
  for (unsigned k = 1; k <= levels; ++k) {
    n_k *= kPrimes[k - 1];
    const Rational scale = make_rational(Integer(1), Integer(4) * Integer(static_cast<unsigned long>(n_k)));
    for (auto q : divisors(n_k)) {
      if (q > limit || used[q]) continue;
      used[q] = true;
      radii[q - 1] = scale * Rational(static_cast<unsigned long>(q));
    }
  }
  return {TableRadii{std::move(radii), TailRule::zero, {}}, 1};
}

}  // namespace kglab
