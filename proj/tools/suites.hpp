#pragma once

// Invariant suites behind `kglab verify`. Each is a reduced sweep that runs
// in seconds; the acceptance binary runs the full-size versions.

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "kglab/kglab.hpp"

namespace kglab::cli {

struct Check {
  std::string suite;
  std::string invariant;
  std::uint64_t checks = 0;
  std::uint64_t failures = 0;
  std::string counterexample;  // first failing case

  Check(std::string s, std::string i) : suite(std::move(s)), invariant(std::move(i)) {}

  bool pass() const { return failures == 0 && checks > 0; }
  void fail(const std::string& what) {
    if (failures++ == 0) counterexample = what;
  }
};

namespace suites {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : engine_(seed) {}

  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  Rational unit(std::int64_t max_den) {
    const auto den = integer(1, max_den);
    return make_rational(integer(0, den - 1), den);
  }
  Ball ball(std::size_t m, std::int64_t max_den = 32) {
    std::vector<Rational> c(m);
    for (auto& x : c) x = unit(max_den);
    return Ball(c, unit(max_den) / 2);
  }

 private:
  std::mt19937_64 engine_;
};

inline std::string describe(const IntVec& q, const Ball& b) {
  std::string s = "q=(";
  for (std::size_t i = 0; i < q.size(); ++i) s += (i ? "," : "") + std::to_string(q[i]);
  s += ") B(c=";
  for (std::size_t i = 0; i < b.dim(); ++i) s += (i ? "," : "") + to_string(b.center()[i]);
  return s + ", r=" + to_string(b.radius()) + ")";
}

inline std::vector<Check> lemmas() {
  std::vector<Check> out;
  Draw draw(2024);

  Check prod{"lemmas", "nonparallel pairs in Z^2 are independent"};
  std::vector<IntVec> vecs;
  for_each_lattice_vector(2, 4, LatticeMode::full, [&](const IntVec& v) { vecs.push_back(v); });
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    for (std::size_t j = i + 1; j < vecs.size(); ++j) {
      if (vecs[i][0] * vecs[j][1] == vecs[i][1] * vecs[j][0]) continue;
      for (int t = 0; t < 10; ++t) {
        const std::size_t m = t % 2 == 0 ? 1 : 2;
        const Ball b1 = draw.ball(m), b2 = draw.ball(m);
        ++prod.checks;
        const Rational mu = intersect_measure(LatticeVector(vecs[i]), b1, LatticeVector(vecs[j]), b2);
        if (mu != b1.measure() * b2.measure()) {
          prod.fail(describe(vecs[i], b1) + " & " + describe(vecs[j], b2) + ": measure " + to_string(mu));
        }
      }
    }
  }
  out.push_back(prod);

  Check par{"lemmas", "parallel pairs reduce to one dimension"};
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = i % 2 == 0 ? 2 : 3;
    IntVec e(n);
    do {
      for (auto& x : e) x = draw.integer(-3, 3);
    } while (max_norm(e) == 0);
    auto k1 = draw.integer(1, 4) * (draw.integer(0, 1) ? 1 : -1);
    auto k2 = draw.integer(1, 4) * (draw.integer(0, 1) ? 1 : -1);
    IntVec q1(n), q2(n);
    for (std::size_t j = 0; j < n; ++j) {
      q1[j] = k1 * e[j];
      q2[j] = k2 * e[j];
    }
    const std::size_t m = static_cast<std::size_t>(draw.integer(1, 2));
    const Ball b1 = draw.ball(m), b2 = draw.ball(m);
    const LatticeVector v1(q1), v2(q2);
    const auto n1 = static_cast<std::int64_t>(v1.norm());
    const auto n2 = static_cast<std::int64_t>(v2.norm());
    ++par.checks;
    const Rational reduced = intersect_measure_1d(n1, b1, dot(v1, v2) > 0 ? n2 : -n2, b2);
    const Rational full = intersect_measure(v1, b1, v2, b2);
    if (reduced != full) {
      par.fail(describe(q1, b1) + " & " + describe(q2, b2) + ": " + to_string(full) + " vs " + to_string(reduced));
    }
  }
  out.push_back(par);

  Check dil{"lemmas", "dilation inequality (m = 1)"};
  std::vector<std::pair<Ball, Ball>> arcs;
  for (int i = 0; i < 40; ++i) arcs.emplace_back(draw.ball(1), draw.ball(1));
  for (std::int64_t q1 = 1; q1 <= 12; ++q1) {
    for (std::int64_t a = q1; a <= 12; ++a) {
      for (std::int64_t q2 : {a, -a}) {
        for (const auto& [b1, b2] : arcs) {
          ++dil.checks;
          const auto gap = dilate_gap(LatticeVector{q1}, b1, LatticeVector{q2}, b2, ScaleMode::exact);
          if (!gap.holds()) {
            dil.fail(describe({q1}, b1) + " & " + describe({q2}, b2) + ": lhs " + to_string(gap.lhs.hi) +
                     " > rhs " + to_string(gap.rhs.lo));
          }
        }
      }
    }
  }
  out.push_back(dil);

  Check ovl{"lemmas", "overlap bound with constant 2^m"};
  for (std::size_t m = 1; m <= 2; ++m) {
    std::vector<std::pair<Ball, Ball>> balls;
    for (int i = 0; i < 40; ++i) balls.emplace_back(draw.ball(m), draw.ball(m));
    for (std::int64_t r = 1; r <= 20; ++r) {
      for (std::int64_t q = 1; q <= 20; ++q) {
        for (const auto& [b1, b2] : balls) {
          ++ovl.checks;
          const Rational mu = intersect_measure_1d(r, b1, q, b2);
          const Rational bound = overlap_bound(r, b1, q, b2);
          if (mu > bound) {
            ovl.fail(describe({r}, b1) + " & " + describe({q}, b2) + ": " + to_string(mu) + " > " + to_string(bound));
          }
        }
      }
    }
  }
  out.push_back(ovl);

  Check mix{"lemmas", "mixing defect at least 1/4"};
  for (int sets = 0; sets < 25;) {
    const auto k = draw.integer(2, 4);
    std::vector<Rational> cuts;
    for (std::int64_t i = 0; i < 2 * k; ++i) cuts.push_back(draw.unit(48));
    std::sort(cuts.begin(), cuts.end());
    if (std::adjacent_find(cuts.begin(), cuts.end()) != cuts.end() || cuts.front() == 0) continue;
    std::vector<std::pair<Rational, Rational>> parts;
    Rational rho = 1;
    for (std::int64_t i = 0; i < k; ++i) {
      parts.emplace_back(cuts[2 * i], cuts[2 * i + 1]);
      rho = std::min(rho, Rational((cuts[2 * i + 1] - cuts[2 * i]) / 2));
    }
    const IntervalUnion u = IntervalUnion::from_intervals(parts);
    if (u.measure() < Rational(1, 8)) continue;
    ++sets;
    const Ball b = Ball::arc(draw.unit(48), Rational(1, 8));
    const std::int64_t q0 = ceil_of(2 / rho).get_si();
    for (std::int64_t q = q0; q <= q0 + 50; ++q) {
      for (std::int64_t sq : {q, -q}) {
        ++mix.checks;
        const Rational d = mixing_defect_1d(sq, b, u);
        if (d < Rational(1, 4)) {
          std::string arcs_text;
          for (const auto& a : u.arcs()) arcs_text += "[" + to_string(a.lo) + "," + to_string(a.hi) + ")";
          mix.fail(describe({sq}, b) + " U=" + arcs_text + ": defect " + to_string(d));
        }
      }
    }
  }
  out.push_back(mix);

  Check gcds{"lemmas", "gcd power sums match the divisor formula"};
  for (std::uint64_t q = 1; q <= 2000; ++q) {
    Integer s[4] = {0, 0, 0, 0};
    for (std::uint64_t r = 1; r <= q; ++r) {
      const Integer g(static_cast<unsigned long>(std::gcd(r, q)));
      s[1] += g;
      s[2] += g * g;
      s[3] += g * g * g;
    }
    for (unsigned m = 1; m <= 3; ++m) {
      ++gcds.checks;
      if (gcd_power_sum(q, m) != s[m]) {
        gcds.fail("q=" + std::to_string(q) + " m=" + std::to_string(m) + ": direct " + s[m].get_str() +
                  ", formula " + gcd_power_sum(q, m).get_str());
      }
    }
    ++gcds.checks;
    if (s[2] > Integer(static_cast<unsigned long>(q)) * divisor_sum(q)) {
      gcds.fail("q=" + std::to_string(q) + ": sum gcd^2 exceeds q sigma(q)");
    }
  }
  out.push_back(gcds);
  return out;
}

/// The (1,3) w=0, (1,2) w=1 and (1,1) w=2 grids with |B_q| = 1/q.
inline std::vector<Check> basecase(unsigned threads) {
  std::vector<Check> out;
  const std::vector<std::uint64_t> schedule{16, 32, 64, 128, 256};
  struct Grid {
    unsigned m, w;
  };
  for (const Grid g : {Grid{3, 0}, Grid{2, 1}, Grid{1, 2}}) {
    Check c{"basecase", "(1," + std::to_string(g.m) + ") w=" + std::to_string(g.w) +
                            " P/S^2 stays below 1.25x its value at Q=16"};
    const auto seq = BallSequence::power_log(Rational(1, 2), Rational(1, g.m), Rational(0), g.m);
    const auto reports = pair_sum_schedule(seq, 1, schedule, g.w, {LatticeMode::orthant, ScaleMode::enclosure, threads});
    const Rational limit = reports.front().constant().lo * Rational(5, 4);
    for (const auto& r : reports) {
      ++c.checks;
      if (r.constant().hi > limit) {
        c.fail("Q=" + std::to_string(r.Q) + ": P/S^2 " + std::to_string(r.constant().to_double()) + " > " +
               std::to_string(limit.get_d()));
      }
    }
    out.push_back(c);
  }
  return out;
}

/// (n,m,k) = (1,1,2) with |B_q| = 1/(2q).
inline std::vector<Check> inheritance(unsigned threads) {
  const auto seq = BallSequence::power_log(Rational(1, 4), Rational(1), Rational(0), 1);
  const auto rows = inheritance_compare(seq, 1, 2, {8, 16, 32, 64}, 0, {LatticeMode::orthant, ScaleMode::exact, threads});
  Check bounded{"inheritance", "lifted P <= C S^2 with C fixed at Q=16"};
  Check nonpar{"inheritance", "lifted nonparallel part <= S^2"};
  Rational C = 0;
  for (const auto& row : rows) {
    if (row.Q == 16) C = row.lifted.constant().hi * Rational(5, 4);
  }
  for (const auto& row : rows) {
    const Enclosure s2 = row.lifted.S * row.lifted.S;
    ++bounded.checks;
    if (row.lifted.P.hi > C * s2.lo) {
      bounded.fail("Q=" + std::to_string(row.Q) + ": P/S^2 " + std::to_string(row.lifted.constant().to_double()) +
                   " > C = " + std::to_string(C.get_d()));
    }
    ++nonpar.checks;
    if (row.lifted.nonparallel.hi > s2.lo) {
      nonpar.fail("Q=" + std::to_string(row.Q) + ": nonparallel " + to_string(row.lifted.nonparallel.hi) +
                  " > S^2 " + to_string(s2.lo));
    }
  }
  return {bounded, nonpar};
}

inline std::vector<Check> dichotomy(unsigned threads) {
  std::vector<Check> out;
  Check consistent{"dichotomy", "predictions agree with the series verdict"};
  for (unsigned n = 1; n <= 3; ++n) {
    for (unsigned m = 1; m <= 3; ++m) {
      for (long tau8 = -4; tau8 <= 24; tau8 += 2) {
        for (long sigma = -2; sigma <= 2; ++sigma) {
          const auto seq = BallSequence::power_log(Rational(1, 4), Rational(tau8, 8), Rational(sigma), m);
          for (bool with_eps : {false, true}) {
            const auto p = dichotomy_predict(seq, n, with_eps ? std::optional<Rational>(Rational(1, 10)) : std::nullopt);
            ++consistent.checks;
            const bool bad = (p.series.verdict == Verdict::converges && p.outcome == Outcome::measure_one) ||
                             (n * m > 2 && p.series.verdict == Verdict::diverges && p.outcome != Outcome::measure_one) ||
                             (n * m > 1 && p.series.verdict == Verdict::converges && p.outcome != Outcome::measure_zero);
            if (bad) {
              consistent.fail("(n,m)=(" + std::to_string(n) + "," + std::to_string(m) + ") tau=" +
                              std::to_string(tau8) + "/8 sigma=" + std::to_string(sigma) + ": series " +
                              to_string(p.series.verdict) + ", outcome " + to_string(p.outcome));
            }
          }
        }
      }
    }
  }
  out.push_back(consistent);

  // (2,1) at desk scale; thresholds are calibration targets
  const SampleSpec spec{777, 2000, threads};
  const std::vector<Rational> centre{Rational(1, 3)};
  const auto divergent = BallSequence::power_log(Rational(1, 4), Rational(2), Rational(0), 1, centre);
  const auto convergent = BallSequence::power_log(Rational(1, 4), Rational(2), Rational(2), 1, centre);
  Check div{"dichotomy", "divergent (2,1) family: fraction with >= 5 hits by Q=2048 is >= 0.95"};
  const double fraction = estimate_limsup_measure(divergent, 2, {2048}, spec).front().at_least(5).estimate();
  ++div.checks;
  if (fraction < 0.95) div.fail("fraction " + std::to_string(fraction));
  out.push_back(div);
  Check conv{"dichotomy", "convergent (2,1) family: hits in (512,2048] match the expectation within 3 se"};
  const auto hc = estimate_limsup_measure(convergent, 2, {512, 2048}, spec);
  const auto wm = window_mean(hc[0], hc[1]);
  const double expected = expected_hits(convergent, 2, 512, 2048).to_double();
  ++conv.checks;
  if (std::abs(wm.mean - expected) > 3 * wm.standard_error) {
    conv.fail("mean " + std::to_string(wm.mean) + " vs expected " + std::to_string(expected) + " (se " +
              std::to_string(wm.standard_error) + ")");
  }
  out.push_back(conv);
  return out;
}

inline const std::vector<std::string> kSuites{"lemmas", "basecase", "inheritance", "dichotomy", "all"};

inline std::vector<Check> run(const std::string& suite, unsigned threads) {
  std::vector<Check> out;
  auto append = [&](std::vector<Check> more) { out.insert(out.end(), more.begin(), more.end()); };
  if (suite == "lemmas" || suite == "all") append(lemmas());
  if (suite == "basecase" || suite == "all") append(basecase(threads));
  if (suite == "inheritance" || suite == "all") append(inheritance(threads));
  if (suite == "dichotomy" || suite == "all") append(dichotomy(threads));
  return out;
}

}  // namespace suites
}  // namespace kglab::cli
