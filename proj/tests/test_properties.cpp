// Randomized invariants. Every generator is seeded, so a failure reproduces.

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "config.hpp"
#include "kglab/torus.hpp"
#include "oracles.hpp"
#include "output.hpp"
#include "plot.hpp"

using namespace kglab;
using oracle::Gen;

namespace {

constexpr int kTrials = 200;

LatticeVector random_vector(Gen& g, std::size_t n, std::int64_t bound) { return LatticeVector(g.vec(n, bound)); }

/// Distance on R/Z.
Rational circle_distance(const Rational& a, const Rational& b) {
  const Rational d = frac(a - b);
  return std::min(d, Rational(1 - d));
}

/// Minimal RFC 4180 reader, enough to invert Table::csv.
std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows(1);
  std::string cellv;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cellv += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cellv += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      rows.back().push_back(cellv);
      cellv.clear();
    } else if (ch == '\n') {
      rows.back().push_back(cellv);
      cellv.clear();
      rows.emplace_back();
    } else {
      cellv += ch;
    }
  }
  rows.pop_back();
  return rows;
}

std::string random_text(Gen& g) {
  static const std::string alphabet = "ab ,\"\nxy=";
  std::string s;
  const auto len = g.integer(0, 8);
  for (std::int64_t i = 0; i < len; ++i) s += alphabet[static_cast<std::size_t>(g.integer(0, 8))];
  return s;
}

cli::Table random_table(Gen& g) {
  using cli::ColumnType;
  cli::Table t;
  t.kind = "prop";
  t.columns = {{"exact", ColumnType::exact},     {"lossy", ColumnType::lossy}, {"count", ColumnType::integer},
               {"flag", ColumnType::boolean},    {"note", ColumnType::text}};
  const auto n = g.integer(0, 12);
  for (std::int64_t i = 0; i < n; ++i) {
    const Rational x = g.rational(-5, 5, 1000);
    const Rational y = g.rational(x, x + 1, 1000);
    const std::string exact = g.coin() ? cli::cell(x) : cli::cell(Enclosure{x, y});
    t.add({exact, cli::cell(cli::nearest(x)), std::to_string(g.integer(-1000000, 1000000)), cli::cell(g.coin()),
           random_text(g)});
  }
  t.summary["n"] = n;
  return t;
}

}  // namespace

TEST(Property, PreimageOfBallWithItselfHasBallMeasure) {
  Gen g(101);
  for (int t = 0; t < kTrials; ++t) {
    const auto n = static_cast<std::size_t>(g.integer(1, 3));
    const auto m = static_cast<std::size_t>(g.integer(1, 2));
    const LatticeVector q = random_vector(g, n, 12);
    const Ball b = g.ball(m);
    ASSERT_EQ(intersect_measure(q, b, q, b), b.measure()) << "q norm " << q.norm();
  }
}

TEST(Property, IntersectionIsSymmetricAndReflectionInvariant) {
  Gen g(102);
  for (int t = 0; t < kTrials; ++t) {
    const auto n = static_cast<std::size_t>(g.integer(1, 2));
    const auto m = static_cast<std::size_t>(g.integer(1, 2));
    // small bound so parallel pairs come up often
    const LatticeVector q1 = random_vector(g, n, 3), q2 = random_vector(g, n, 3);
    const Ball b1 = g.ball(m), b2 = g.ball(m);
    const Rational mu = intersect_measure(q1, b1, q2, b2);
    ASSERT_EQ(mu, intersect_measure(q2, b2, q1, b1));
    ASSERT_EQ(mu, intersect_measure(-q1, b1.negated(), q2, b2));
    ASSERT_EQ(mu, intersect_measure(-q1, b1.negated(), -q2, b2.negated()));
  }
}

TEST(Property, IntersectionIsBoundedAndMonotoneInRadius) {
  Gen g(103);
  for (int t = 0; t < kTrials; ++t) {
    const auto n = static_cast<std::size_t>(g.integer(1, 2));
    const LatticeVector q1 = random_vector(g, n, 6), q2 = random_vector(g, n, 6);
    const Ball b1 = g.ball(1), b2 = g.ball(1);
    const Rational mu = intersect_measure(q1, b1, q2, b2);
    ASSERT_GE(mu, 0);
    ASSERT_LE(mu, std::min(b1.measure(), b2.measure()));
    const Ball smaller({b2.center()}, g.rational(0, b2.radius(), 64));
    ASSERT_LE(intersect_measure(q1, b1, q2, smaller), mu);
  }
}

TEST(Property, PreimageMembershipMatchesDefinition) {
  Gen g(104);
  for (int t = 0; t < kTrials; ++t) {
    const std::int64_t q = g.nonzero(9);
    const Ball b = g.ball(1);
    const IntervalUnion u = preimage_1d(q, b);
    ASSERT_EQ(u.measure(), b.measure());
    for (int k = 0; k < 20; ++k) {
      const Rational x = g.rational(0, 1, 997);
      const Rational d = circle_distance(Rational(q * x), b.center()[0]);
      if (d == b.radius()) continue;  // boundary points carry no measure
      ASSERT_EQ(u.contains(x), d < b.radius()) << "q=" << q << " x=" << x;
    }
  }
}

TEST(Property, IntervalUnionInclusionExclusion) {
  Gen g(105);
  auto random_union = [&] {
    std::vector<std::pair<Rational, Rational>> v;
    const auto k = g.integer(0, 4);
    for (std::int64_t i = 0; i < k; ++i) {
      const Rational lo = g.rational(-1, 2, 48);
      v.emplace_back(lo, g.rational(lo, lo + Rational(1, 2), 48));
    }
    return IntervalUnion::from_intervals(v);
  };
  for (int t = 0; t < kTrials; ++t) {
    const IntervalUnion a = random_union(), b = random_union();
    const IntervalUnion both = a.intersect(b), either = a.unite(b);
    ASSERT_EQ(either.measure() + both.measure(), a.measure() + b.measure());
    ASSERT_LE(either.measure(), 1);
    for (int k = 0; k < 10; ++k) {
      const Rational x = g.rational(0, 1, 97);
      ASSERT_EQ(either.contains(x), a.contains(x) || b.contains(x));
      ASSERT_EQ(both.contains(x), a.contains(x) && b.contains(x));
    }
  }
}

TEST(Property, RationalTextRoundTrip) {
  Gen g(106);
  for (int t = 0; t < kTrials; ++t) {
    const Rational x = g.rational(-1000, 1000, 100000);
    ASSERT_EQ(parse_rational(to_string(x)), x);
    const auto digits = g.integer(0, 6);
    const Integer scaled(g.integer(-999999, 999999));
    std::string s = Integer(abs(scaled)).get_str();
    while (static_cast<std::int64_t>(s.size()) <= digits) s.insert(0, "0");
    if (digits > 0) s.insert(s.size() - static_cast<std::size_t>(digits), ".");
    if (scaled < 0) s.insert(0, "-");
    ASSERT_EQ(parse_rational(s), make_rational(scaled, ipow(Integer(10), static_cast<unsigned long>(digits)))) << s;
  }
}

TEST(Property, RootsOfPerfectPowersAreExact) {
  Gen g(107);
  for (int t = 0; t < kTrials; ++t) {
    const Rational x = g.rational(Rational(1, 100), 10, 30);
    const long k = static_cast<long>(g.integer(2, 5));
    const Enclosure root = pow_enclosure(rpow(x, k), Rational(1, k));
    ASSERT_TRUE(root.exact());
    ASSERT_EQ(root.lo, x);
  }
}

TEST(Property, IrrationalPowersAreBracketed) {
  Gen g(108);
  for (int t = 0; t < 50; ++t) {
    const Rational x = g.rational(Rational(1, 10), 50, 20);
    const long k = static_cast<long>(g.integer(2, 4));
    const Enclosure root = pow_enclosure(x, Rational(1, k));
    ASSERT_LE(rpow(root.lo, k), x);
    ASSERT_GE(rpow(root.hi, k), x);
  }
}

TEST(Property, LogarithmIsAdditiveUpToEnclosure) {
  Gen g(109);
  for (int t = 0; t < 50; ++t) {
    const Rational a = g.rational(Rational(1, 10), 100, 50), b = g.rational(Rational(1, 10), 100, 50);
    const Enclosure la = log_enclosure(a), lb = log_enclosure(b), lab = log_enclosure(a * b);
    ASSERT_LE(la.lo + lb.lo, lab.hi);
    ASSERT_GE(la.hi + lb.hi, lab.lo);
  }
}

TEST(Property, TableJsonRoundTrip) {
  Gen g(110);
  for (int t = 0; t < 100; ++t) {
    const cli::Table a = random_table(g);
    const cli::Table b = cli::Table::from_json(cli::json::parse(a.to_json().dump()));
    ASSERT_EQ(b.kind, a.kind);
    ASSERT_EQ(b.rows, a.rows);
    ASSERT_EQ(b.summary, a.summary);
    ASSERT_EQ(b.csv(), a.csv());
  }
}

TEST(Property, CsvQuotingRoundTrip) {
  Gen g(111);
  for (int t = 0; t < 100; ++t) {
    const cli::Table a = random_table(g);
    auto rows = read_csv(a.csv());
    ASSERT_EQ(rows.size(), a.rows.size() + 1);
    rows.erase(rows.begin());
    ASSERT_EQ(rows, a.rows);
  }
}

TEST(Property, ExactCellsSurviveEnclosureParsing) {
  Gen g(112);
  for (int t = 0; t < kTrials; ++t) {
    const Rational lo = g.rational(-3, 3, 500);
    const Enclosure e{lo, g.rational(lo, lo + 1, 500)};
    const Enclosure back = cli::parse_enclosure(cli::cell(e));
    ASSERT_EQ(back.lo, e.lo);
    ASSERT_EQ(back.hi, e.hi);
  }
}

TEST(Property, ScheduleIsTheSortedUnionOfItsTerms) {
  Gen g(113);
  for (int t = 0; t < kTrials; ++t) {
    std::set<std::uint64_t> expected;
    std::string text;
    const auto terms = g.integer(1, 4);
    for (std::int64_t i = 0; i < terms; ++i) {
      if (!text.empty()) text += g.coin() ? "," : " , ";
      switch (g.integer(0, 3)) {
        case 0: {
          const auto q = g.integer(1, 5000);
          text += std::to_string(q);
          expected.insert(static_cast<std::uint64_t>(q));
          break;
        }
        case 1: {
          const auto e = g.integer(0, 12);
          text += "2^" + std::to_string(e);
          expected.insert(std::uint64_t{1} << e);
          break;
        }
        case 2: {
          const auto a = g.integer(0, 10), b = g.integer(a, 12);
          text += "2^" + std::to_string(a) + "..2^" + std::to_string(b);
          for (auto e = a; e <= b; ++e) expected.insert(std::uint64_t{1} << e);
          break;
        }
        default: {
          const auto a = g.integer(1, 300), b = g.integer(a, a + 20);
          text += std::to_string(a) + ".." + std::to_string(b);
          for (auto q = a; q <= b; ++q) expected.insert(static_cast<std::uint64_t>(q));
        }
      }
    }
    std::istringstream in("version = 1\nQ = " + text + "\n");
    const auto cfg = cli::Config::parse(in, "prop");
    const auto got = cfg.schedule("Q", 1 << 20);
    ASSERT_EQ(got, std::vector<std::uint64_t>(expected.begin(), expected.end())) << text;
  }
}

TEST(Property, ConfigRejectsExactlyTheUnreadKeys) {
  Gen g(114);
  for (int t = 0; t < 100; ++t) {
    std::map<std::string, std::string> kv{{"version", "1"}};
    const auto n = g.integer(1, 6);
    for (std::int64_t i = 0; i < n; ++i) kv["k" + std::to_string(i)] = cli::cell(g.rational(-9, 9, 9));
    const auto cfg = cli::Config::from_map(kv, "prop");
    const auto skipped = g.integer(-1, n - 1);
    for (const auto& [k, v] : kv) {
      if (k == "version" || k == "k" + std::to_string(skipped)) continue;
      ASSERT_EQ(cfg.rational(k), parse_rational(v));
    }
    if (skipped < 0) {
      ASSERT_NO_THROW(cfg.finish());
    } else {
      ASSERT_THROW(cfg.finish(), cli::ConfigError);
    }
  }
}

TEST(Property, ClippedStripeEdgesLieOnLineAndSquareBoundary) {
  Gen g(115);
  auto on_boundary = [](const cli::Point& p) { return p.x == 0 || p.x == 1 || p.y == 0 || p.y == 1; };
  for (int t = 0; t < kTrials; ++t) {
    const auto v = g.vec(2, 6);
    const Rational level = g.rational(-12, 12, 16);
    const auto seg = cli::clip_line(v[0], v[1], level);
    if (!seg) continue;
    for (const auto& p : {seg->first, seg->second}) {
      ASSERT_EQ(Rational(v[0] * p.x + v[1] * p.y), level);
      ASSERT_TRUE(on_boundary(p));
      ASSERT_TRUE(p.x >= 0 && p.x <= 1 && p.y >= 0 && p.y <= 1);
    }
  }
}
