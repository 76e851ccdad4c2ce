#pragma once

// Series verdicts for the Khintchine-Groshev dichotomy and the transform
// theta(q) = q g(psi(q)/q)^(1/m), g(r) = r^(-m(n-1)) f(r), on power-log families.

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "kglab/rational.hpp"
#include "kglab/sequence.hpp"

namespace kglab {

/// f(r) = r^s (log 1/r)^t near 0.
struct DimensionFunction {
  Rational s = 0;
  Rational t = 0;

  /// Continuous, non-decreasing and vanishing at 0 near the origin.
  bool valid() const { return s > 0 || (s == 0 && t < 0); }
};

enum class Verdict { converges, diverges, unknown };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::converges:
      return "converges";
    case Verdict::diverges:
      return "diverges";
    case Verdict::unknown:
      return "unknown";
  }
  return "?";
}

/// Verdict on a series whose terms behave like K q^power (log q)^log_power,
/// or (dyadic) like K b^(k power) k^log_power over q = b^k.
struct SeriesVerdict {
  Verdict verdict = Verdict::unknown;
  Rational power = 0;
  Rational log_power = 0;
  bool dyadic = false;
};

/// Integral test for sum q^power (log q)^log_power.
inline Verdict integral_test(const Rational& power, const Rational& log_power) {
  if (power > -1 || (power == -1 && log_power >= -1)) return Verdict::diverges;
  return Verdict::converges;
}

/// Test for sum over k of b^(k power) k^log_power.
inline Verdict dyadic_test(const Rational& power, const Rational& log_power) {
  if (power > 0 || (power == 0 && log_power >= -1)) return Verdict::diverges;
  return Verdict::converges;
}

namespace detail {

inline SeriesVerdict classify_power_log(const PowerLog& law, unsigned n, unsigned m, const Rational& extra_tau,
                                       bool dyadic) {
  SeriesVerdict v;
  v.dyadic = dyadic;
  if (law.zero()) {
    v.verdict = Verdict::converges;
    return v;
  }
  const Rational mm(static_cast<unsigned long>(m));
  v.power = Rational(static_cast<long>(n) - 1) - mm * (law.tau + extra_tau);
  v.log_power = -mm * law.sigma;
  v.verdict = dyadic ? dyadic_test(v.power, v.log_power) : integral_test(v.power, v.log_power);
  return v;
}

}  // namespace detail

/// Verdict on sum q^(n-1) |B_q| for the sequence, with m = seq.dim().
inline SeriesVerdict series_classify(const BallSequence& seq, unsigned n) {
  const unsigned m = seq.dim();
  const Rational extra(static_cast<long>(seq.lift()), static_cast<unsigned long>(m));
  return std::visit(
      [&](const auto& law) -> SeriesVerdict {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, PowerLog>) {
          return detail::classify_power_log(law, n, m, extra, false);
        } else if constexpr (std::is_same_v<T, DyadicSupport>) {
          return detail::classify_power_log(law.profile, n, m, extra, true);
        } else {
          switch (law.tail) {
            case TailRule::zero:
              return {Verdict::converges, 0, 0, false};
            case TailRule::powerlog:
              return detail::classify_power_log(law.tail_law, n, m, extra, false);
            case TailRule::none:
              break;
          }
          return {};
        }
      },
      seq.law());
}

/// Power-log parameters of theta. With t = 0 they are exact; with t != 0 the
/// factor log(q/psi(q)) is replaced by its asymptotic (tau+1) log(q+1), which
/// changes theta by a factor tending to 1.
struct ThetaLaw {
  Enclosure c;
  Rational tau;
  Rational sigma;
  bool asymptotic = false;

  PowerLog power_log() const {
    if (!c.exact()) throw UnsupportedScale("theta constant " + to_string(c.lo) + ".." + to_string(c.hi) + " is irrational");
    return {c.lo, tau, sigma};
  }
};

/// g(r) = r^(s - m(n-1)) (log 1/r)^t.
inline DimensionFunction g_of(const DimensionFunction& f, unsigned n, unsigned m) {
  return {f.s - Rational(static_cast<long>(m) * (static_cast<long>(n) - 1)), f.t};
}

inline void check_transfer_inputs(const PowerLog& psi, const DimensionFunction& f, unsigned n, unsigned m) {
  if (n == 0 || m == 0) throw std::domain_error("n and m must be positive");
  if (!f.valid()) throw std::domain_error("f is not a dimension function in the power-log family");
  if (!g_of(f, n, m).valid()) throw std::domain_error("g(r) = r^(-m(n-1)) f(r) is not a dimension function");
  if (psi.c < 0) throw std::domain_error("psi must be non-negative");
  if (psi.c != 0 && psi.tau <= -1) throw std::domain_error("theta transform needs psi(q)/q -> 0 (tau > -1)");
}

inline ThetaLaw theta_transform(const PowerLog& psi, const DimensionFunction& f, unsigned n, unsigned m) {
  check_transfer_inputs(psi, f, n, m);
  const Rational mm(static_cast<unsigned long>(m));
  const Rational e = g_of(f, n, m).s;
  ThetaLaw out;
  out.tau = (psi.tau + 1) * e / mm - 1;
  out.sigma = (psi.sigma * e - f.t) / mm;
  out.asymptotic = f.t != 0;
  if (psi.c == 0) {
    out.c = Enclosure::point(0);
  } else {
    out.c = pow_enclosure(psi.c, e / mm) * pow_enclosure(psi.tau + 1, f.t / mm);
  }
  return out;
}

/// Verdict on sum q^(n+m-1) g(psi(q)/q), which is sum q^(n-1) theta(q)^m.
inline SeriesVerdict hausdorff_series_classify(const PowerLog& psi, const DimensionFunction& f, unsigned n,
                                               unsigned m) {
  const ThetaLaw theta = theta_transform(psi, f, n, m);
  if (psi.c == 0) return {Verdict::converges, 0, 0, false};
  SeriesVerdict v;
  const Rational mm(static_cast<unsigned long>(m));
  v.power = Rational(static_cast<long>(n) - 1) - mm * theta.tau;
  v.log_power = -mm * theta.sigma;
  v.verdict = integral_test(v.power, v.log_power);
  return v;
}

enum class Outcome { measure_zero, measure_one, open, none, unknown };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::measure_zero:
      return "0";
    case Outcome::measure_one:
      return "1";
    case Outcome::open:
      return "open";
    case Outcome::none:
      return "none";
    case Outcome::unknown:
      return "unknown";
  }
  return "?";
}

struct DichotomyPrediction {
  Outcome outcome = Outcome::unknown;
  SeriesVerdict series;
  std::optional<SeriesVerdict> extra;  // the (phi(q)/q)^(1+eps)-weighted series, nm = 2
  std::string note;
};

/// Verdict on sum q^(n-1) (phi(q)/q)^(1+eps) |B_q|. The weight lies in (0,1]
/// and has a positive mean along the integers and along powers of a fixed
/// base, so on these families it never changes the verdict.
inline SeriesVerdict extra_divergence_classify(const BallSequence& seq, unsigned n, const Rational& eps) {
  if (eps <= 0) throw std::domain_error("eps must be positive");
  return series_classify(seq, n);
}

inline DichotomyPrediction dichotomy_predict(const BallSequence& seq, unsigned n,
                                             const std::optional<Rational>& eps = std::nullopt) {
  const unsigned m = seq.dim();
  DichotomyPrediction p;
  p.series = series_classify(seq, n);
  if (p.series.verdict == Verdict::unknown) {
    p.outcome = Outcome::unknown;
    p.note = "radius table has no declared tail";
    return p;
  }
  if (n == 1 && m == 1) {
    p.outcome = Outcome::none;
    p.note = std::string("no unconditional prediction for (n,m) = (1,1): the series ") + to_string(p.series.verdict) +
             ", but without monotonicity of psi divergence does not force full measure";
    return p;
  }
  if (p.series.verdict == Verdict::converges) {
    p.outcome = Outcome::measure_zero;
    p.note = "convergent series: measure 0 by the first Borel-Cantelli lemma";
    return p;
  }
  if (n * m > 2) {
    p.outcome = Outcome::measure_one;
    p.note = "divergent series with nm > 2: full measure";
    return p;
  }
  if (!eps) {
    p.outcome = Outcome::open;
    p.note = "nm = 2 with a divergent series: open without the extra-divergence hypothesis (conjectured full measure)";
    return p;
  }
  p.extra = extra_divergence_classify(seq, n, *eps);
  if (p.extra->verdict == Verdict::diverges) {
    p.outcome = Outcome::measure_one;
    p.note = "nm = 2 with divergent extra-divergence series: full measure";
  } else {
    p.outcome = Outcome::open;
    p.note = "nm = 2: extra-divergence series does not diverge (conjectured full measure)";
  }
  return p;
}

}  // namespace kglab
