#pragma once

// Plot-ready views over a results directory.

#include <algorithm>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "output.hpp"

namespace kglab::cli {

inline const std::vector<std::string> kViews{"ratio", "fraction", "blocks", "stripes"};

/// A view that does not apply to the stored results.
class ViewError : public std::runtime_error {
 public:
  explicit ViewError(const std::string& what) : std::runtime_error(what) {}
};

inline Table xy_table(const std::string& view) {
  Table t;
  t.kind = "plot." + view;
  t.columns = {{"x", ColumnType::lossy}, {"y", ColumnType::lossy}, {"y_exact", ColumnType::exact}};
  return t;
}

inline Table ratio_view(const Table& results) {
  std::string exact;
  if (results.kind == "qia") exact = "ratio";
  if (results.kind == "pairsum") exact = "constant";
  if (results.kind == "inherit") exact = "ratio";
  if (exact.empty()) throw ViewError("ratio view needs qia, pairsum or inherit results, not " + results.kind);
  Table t = xy_table("ratio");
  const auto iq = results.index("Q");
  const auto iy = results.index(exact);
  for (const auto& row : results.rows) {
    if (row[iy] == "undefined") continue;
    t.add({row[iq], cell(nearest(parse_enclosure(row[iy]))), row[iy]});
  }
  t.summary["y"] = exact;
  return t;
}

inline Table fraction_view(const Table& results) {
  if (results.kind != "simulate") throw ViewError("fraction view needs simulate results, not " + results.kind);
  Table t = xy_table("fraction");
  t.columns.push_back({"ci_low", ColumnType::lossy});
  t.columns.push_back({"ci_high", ColumnType::lossy});
  for (const auto& row : results.rows) {
    t.add({row[results.index("Q")], row[results.index("fraction_float")], row[results.index("fraction")],
           row[results.index("ci_low")], row[results.index("ci_high")]});
  }
  return t;
}

/// Block sums over l of sphere_count (phi(q)/q)^(1+eps) |B_q|, rebuilt from the stored config.
inline Table blocks_view(const Table& results, const Config& cfg) {
  const std::vector<std::string> kinds{"pairsum", "qia", "inherit", "simulate"};
  if (std::find(kinds.begin(), kinds.end(), results.kind) == kinds.end()) {
    throw ViewError("blocks view needs a ball-sequence experiment, not " + results.kind);
  }
  const auto p = prepare(cfg);
  const Rational eps = cfg.rational("eps", Rational(1, 10));
  const auto blocks = dyadic_blocks(p.seq, p.n, p.schedule.back(), eps, lattice_mode(cfg));
  Table t = xy_table("blocks");
  t.columns.push_back({"members", ColumnType::integer});
  for (const auto& b : blocks) {
    t.add({cell(std::uint64_t{b.level}), cell(nearest(b.sum)), cell(b.sum), cell(b.members)});
  }
  t.summary = {{"Q", p.schedule.back()}, {"eps", to_string(eps)}};
  return t;
}

struct Point {
  Rational x, y;
  friend bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }
  friend bool operator<(const Point& a, const Point& b) { return std::tie(a.x, a.y) < std::tie(b.x, b.y); }
};

/// Intersection of the line a x + b y = v with the unit square, if it is a segment.
inline std::optional<std::pair<Point, Point>> clip_line(std::int64_t a, std::int64_t b, const Rational& v) {
  std::vector<Point> pts;
  const Rational A(static_cast<long>(a)), B(static_cast<long>(b));
  auto keep = [&](const Rational& x, const Rational& y) {
    if (x >= 0 && x <= 1 && y >= 0 && y <= 1) pts.push_back({x, y});
  };
  if (b != 0) {
    keep(Rational(0), Rational(v / B));
    keep(Rational(1), Rational((v - A) / B));
  }
  if (a != 0) {
    keep(Rational(v / A), Rational(0));
    keep(Rational((v - B) / A), Rational(1));
  }
  if (pts.size() < 2) return std::nullopt;
  const auto [lo, hi] = std::minmax_element(pts.begin(), pts.end());
  if (*lo == *hi) return std::nullopt;
  return std::make_pair(*lo, *hi);
}

/// Arc endpoints of A(q, B) for n = m = 1, or the boundary segments of the
/// stripes A(q, B) in the unit square for n = 2, m = 1.
inline Table stripes_view(const Table& results) {
  if (results.kind != "measure") throw ViewError("stripes view needs measure results, not " + results.kind);
  const auto& row = results.rows.at(0);
  struct Set {
    IntVec q;
    Rational c, r;
  };
  std::vector<Set> sets;
  for (const std::string suffix : {"1", "2"}) {
    const auto cs = split(row[results.index("center" + suffix)], ' ');
    if (cs.size() != 1) throw ViewError("stripes view needs m = 1");
    IntVec q;
    for (const auto& x : split(row[results.index("q" + suffix)], ' ')) q.push_back(std::stoll(x));
    sets.push_back({q, parse_rational(cs[0]), parse_rational(row[results.index("radius" + suffix)])});
  }
  if (sets[0].q == sets[1].q && sets[0].c == sets[1].c && sets[0].r == sets[1].r) sets.pop_back();
  const std::size_t n = sets[0].q.size();
  Table t;
  t.kind = "plot.stripes";
  if (n == 1) {
    t.columns = {{"set", ColumnType::integer},
                 {"lo", ColumnType::exact},
                 {"hi", ColumnType::exact},
                 {"lo_float", ColumnType::lossy},
                 {"hi_float", ColumnType::lossy}};
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const auto arcs = preimage_1d(sets[i].q[0], Ball::arc(sets[i].c, sets[i].r));
      for (const auto& a : arcs.arcs()) {
        t.add({cell(std::uint64_t{i + 1}), cell(a.lo), cell(a.hi), cell(nearest(a.lo)), cell(nearest(a.hi))});
      }
    }
    return t;
  }
  if (n != 2) throw ViewError("stripes view needs n <= 2");
  t.columns = {{"set", ColumnType::integer},   {"stripe", ColumnType::integer}, {"edge", ColumnType::text},
               {"x0", ColumnType::exact},      {"y0", ColumnType::exact},       {"x1", ColumnType::exact},
               {"y1", ColumnType::exact},      {"x0_float", ColumnType::lossy}, {"y0_float", ColumnType::lossy},
               {"x1_float", ColumnType::lossy}, {"y1_float", ColumnType::lossy}};
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const Ball b = Ball::arc(sets[i].c, sets[i].r);
    if (b.radius() == 0 || b.radius() == Rational(1, 2)) continue;  // empty set or the whole square
    const auto a = sets[i].q[0], bb = sets[i].q[1];
    const Rational lo(static_cast<long>(std::min<std::int64_t>(0, a) + std::min<std::int64_t>(0, bb)));
    const Rational hi(static_cast<long>(std::max<std::int64_t>(0, a) + std::max<std::int64_t>(0, bb)));
    // stripe k lies between a x + b y = c - r + k and a x + b y = c + r + k
    const Rational first_edge = b.center()[0] - b.radius();
    const Integer k0 = ceil_of(lo - first_edge - 2 * b.radius());
    const Integer k1 = floor_of(hi - first_edge);
    for (Integer k = k0; k <= k1; ++k) {
      for (const auto& [edge, v] : {std::pair<std::string, Rational>{"lower", first_edge + k},
                                    std::pair<std::string, Rational>{"upper", first_edge + 2 * b.radius() + k}}) {
        const auto seg = clip_line(a, bb, v);
        if (!seg) continue;
        const auto& [p0, p1] = *seg;
        t.add({cell(std::uint64_t{i + 1}), k.get_str(), edge, cell(p0.x), cell(p0.y), cell(p1.x), cell(p1.y),
               cell(nearest(p0.x)), cell(nearest(p0.y)), cell(nearest(p1.x)), cell(nearest(p1.y))});
      }
    }
  }
  return t;
}

}  // namespace kglab::cli
