#pragma once

// Experiment kinds: each reads its keys from a Config and returns a Table.
//
// CSV schemas (version 1), one row per entry of the Q schedule unless noted:
//   measure   q1,center1,radius1,q2,center2,radius2,measure,measure_float   (one row)
//   gcdsum    q,direct_sum,divisor_formula,equal
//   pairsum   Q,S,P,parallel,nonparallel,diagonal,constant,S_float,P_float,constant_float
//   qia       Q,S,P,ratio,ratio_float
//   inherit   Q,lifted_S,lifted_P,lifted_parallel,lifted_nonparallel,base_P,ratio,
//             lifted_constant,nonparallel_below_S2,ratio_float,lifted_constant_float
//   simulate  Q,samples,K,hits_at_least_K,fraction,fraction_float,ci_low,ci_high,
//             mean_hits,expected_hits,mean_hits_float,expected_hits_float
//   transfer  theta_c,theta_tau,theta_sigma,asymptotic,hausdorff_power,hausdorff_log_power,
//             hausdorff_verdict,lebesgue_verdict,prediction,theta_c_float   (one row)
//   verify    suite,invariant,checks,failures,pass,counterexample

#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"
#include "kglab/kglab.hpp"
#include "output.hpp"

namespace kglab::cli {

inline constexpr std::uint64_t kMaxCutoff = 1 << 20;

inline const std::vector<std::string> kKinds{"measure", "pairsum", "qia",      "inherit",
                                             "simulate", "gcdsum", "transfer", "verify"};

inline std::string join(const std::vector<Rational>& xs) {
  std::string s;
  for (const auto& x : xs) s += (s.empty() ? "" : " ") + to_string(x);
  return s;
}

inline std::string join(const IntVec& xs) {
  std::string s;
  for (auto x : xs) s += (s.empty() ? "" : " ") + std::to_string(x);
  return s;
}

inline LatticeMode lattice_mode(const Config& cfg) {
  return cfg.choice("mode", {"orthant", "full"}, "orthant") == "full" ? LatticeMode::full : LatticeMode::orthant;
}

inline ScaleMode scale_mode(const Config& cfg) {
  return cfg.choice("scale", {"exact", "enclosure"}, "exact") == "exact" ? ScaleMode::exact : ScaleMode::enclosure;
}

inline unsigned dimension(const Config& cfg, const std::string& key) {
  return static_cast<unsigned>(cfg.integer(key, 1, 8, 1));
}

inline PowerLog power_log(const Config& cfg, const std::string& prefix = "") {
  PowerLog law{cfg.rational(prefix + "c"), cfg.rational(prefix + "tau", Rational(0)),
               cfg.rational(prefix + "sigma", Rational(0))};
  if (law.c < 0) cfg.fail(prefix + "c", "radius constant must be non-negative");
  return law;
}

/// Ball sequence keys: radius = powerlog | table | dyadic | ds, with
/// c, tau, sigma (powerlog and tails), radii and tail (table), base (dyadic),
/// levels (ds), center (m coordinates) and lift.
inline BallSequence build_sequence(const Config& cfg, unsigned m, std::uint64_t qmax) {
  const std::string law = cfg.choice("radius", {"powerlog", "table", "dyadic", "ds"}, "powerlog");
  std::vector<Rational> centre(m, Rational(0));
  if (cfg.has("center")) {
    centre = cfg.rational_list("center");
    if (centre.size() != m) cfg.fail("center", "expected " + std::to_string(m) + " coordinates");
  }
  RadiusLaw radii;
  if (law == "powerlog") {
    radii = power_log(cfg);
  } else if (law == "table") {
    TableRadii t;
    t.radii = cfg.rational_list("radii");
    for (const auto& r : t.radii) {
      if (r < 0) cfg.fail("radii", "negative radius " + to_string(r));
    }
    const std::string tail = cfg.choice("tail", {"none", "zero", "powerlog"}, "none");
    t.tail = tail == "none" ? TailRule::none : tail == "zero" ? TailRule::zero : TailRule::powerlog;
    if (t.tail == TailRule::powerlog) t.tail_law = power_log(cfg);
    if (t.tail == TailRule::none && t.radii.size() < qmax) {
      cfg.fail("radii", "table has " + std::to_string(t.radii.size()) + " entries but the largest cutoff is " +
                            std::to_string(qmax) + " and tail = none");
    }
    radii = std::move(t);
  } else if (law == "dyadic") {
    radii = DyadicSupport{static_cast<std::uint64_t>(cfg.integer("base", 2, 1 << 20, 2)), power_log(cfg)};
  } else {
    if (m != 1) cfg.fail("radius", "ds sequences are one-dimensional (m = 1)");
    auto seq = duffin_schaeffer_sequence(static_cast<unsigned>(cfg.integer("levels", 1, 15)), qmax);
    if (cfg.has("center")) seq = BallSequence(seq.law(), 1, centre);
    return seq;
  }
  BallSequence seq(std::move(radii), m, std::move(centre));
  if (const auto lift = cfg.integer("lift", 0, 8, 0); lift > 0) seq = seq.lifted(static_cast<unsigned>(lift));
  return seq;
}

/// Exact mode needs rational radii; names the parameter responsible otherwise.
inline void require_exact_radii(const Config& cfg, const BallSequence& seq, std::uint64_t qmax) {
  for (std::uint64_t q = 1; q <= qmax; ++q) {
    if (seq.nominal_radius(q).exact()) continue;
    std::string parameter = "tau";
    if (cfg.has("sigma") && cfg.rational("sigma") != 0) parameter = "sigma";
    throw UnsupportedScale("parameter '" + parameter + "': radius at q = " + std::to_string(q) +
                           " is irrational in exact mode (set scale = enclosure)");
  }
}

inline void require_exact_shrink(unsigned w, unsigned m, std::uint64_t qmax, const std::string& key) {
  if (w % m == 0 || qmax < 2) return;
  throw UnsupportedScale("parameter '" + key + "' = " + std::to_string(w) + " with m = " + std::to_string(m) +
                         ": the factor (q1/q2)^(" + key + "/m) is irrational in exact mode (set scale = enclosure)");
}

inline void require_exact_lift(unsigned lift, unsigned m, const std::string& key) {
  if (lift % m == 0) return;
  throw UnsupportedScale("parameter '" + key + "' = " + std::to_string(lift) + " with m = " + std::to_string(m) +
                         ": the lift factor |q|^(-" + key + "/m) is irrational in exact mode (set scale = enclosure)");
}

inline PairSumOptions pair_options(const Config& cfg, unsigned threads) {
  return {lattice_mode(cfg), scale_mode(cfg), threads};
}

struct Prepared {
  unsigned n = 1;
  unsigned m = 1;
  std::vector<std::uint64_t> schedule;
  BallSequence seq;
  ScaleMode scale = ScaleMode::exact;
};

inline Prepared prepare(const Config& cfg, std::uint64_t max_cutoff = kMaxCutoff) {
  const unsigned n = dimension(cfg, "n");
  const unsigned m = dimension(cfg, "m");
  auto schedule = cfg.schedule("Q", max_cutoff);
  auto seq = build_sequence(cfg, m, schedule.back());
  const ScaleMode scale = scale_mode(cfg);
  if (scale == ScaleMode::exact) {
    require_exact_radii(cfg, seq, schedule.back());
    require_exact_lift(seq.lift(), m, "lift");
  }
  return {n, m, std::move(schedule), std::move(seq), scale};
}

inline Table run_measure(const Config& cfg) {
  const auto q1 = cfg.integer_list("q", -1000000, 1000000);
  const auto c1 = cfg.rational_list("center");
  if (c1.empty()) cfg.fail("center", "empty centre");
  const Rational r1 = cfg.rational("radius");
  if (r1 < 0) cfg.fail("radius", "must be non-negative");
  const auto q2 = cfg.has("q2") ? cfg.integer_list("q2", -1000000, 1000000) : q1;
  const auto c2 = cfg.has("center2") ? cfg.rational_list("center2") : c1;
  const Rational r2 = cfg.rational("radius2", r1);
  if (r2 < 0) cfg.fail("radius2", "must be non-negative");
  if (q2.size() != q1.size()) cfg.fail("q2", "must have the same length as q");
  if (c2.size() != c1.size()) cfg.fail("center2", "must have the same length as center");
  if (max_norm(q1) == 0) cfg.fail("q", "must be a nonzero vector");
  if (max_norm(q2) == 0) cfg.fail("q2", "must be a nonzero vector");
  const Ball b1(c1, r1), b2(c2, r2);
  const Rational mu = intersect_measure(LatticeVector(q1), b1, LatticeVector(q2), b2);
  Table t;
  t.kind = "measure";
  t.columns = {{"q1", ColumnType::text},      {"center1", ColumnType::text}, {"radius1", ColumnType::exact},
               {"q2", ColumnType::text},      {"center2", ColumnType::text}, {"radius2", ColumnType::exact},
               {"measure", ColumnType::exact}, {"measure_float", ColumnType::lossy}};
  t.add({join(q1), join(b1.center()), cell(b1.radius()), join(q2), join(b2.center()), cell(b2.radius()), cell(mu),
         cell(nearest(mu))});
  t.summary["n"] = q1.size();
  t.summary["m"] = c1.size();
  return t;
}

inline Table run_gcdsum(const Config& cfg) {
  const auto qmax = static_cast<std::uint64_t>(cfg.integer("q_max", 1, 20000));
  const auto m = static_cast<unsigned>(cfg.integer("m", 1, 8));
  cfg.finish();
  Table t;
  t.kind = "gcdsum";
  t.columns = {{"q", ColumnType::integer},
               {"direct_sum", ColumnType::exact},
               {"divisor_formula", ColumnType::exact},
               {"equal", ColumnType::boolean}};
  bool all = true;
  for (std::uint64_t q = 1; q <= qmax; ++q) {
    Integer direct = 0;
    for (std::uint64_t r = 1; r <= q; ++r) direct += ipow(Integer(static_cast<unsigned long>(std::gcd(r, q))), m);
    const Integer formula = gcd_power_sum(q, m);
    all = all && direct == formula;
    t.add({cell(q), cell(direct), cell(formula), cell(direct == formula)});
  }
  t.summary["all_equal"] = all;
  return t;
}

inline Table run_pairsum(const Config& cfg, unsigned threads) {
  const auto p = prepare(cfg);
  const auto w = static_cast<unsigned>(cfg.integer("w", 0, 16, 0));
  if (p.scale == ScaleMode::exact) require_exact_shrink(w, p.m, p.schedule.back(), "w");
  const auto opts = pair_options(cfg, threads);
  cfg.finish();
  const auto reports = pair_sum_schedule(p.seq, p.n, p.schedule, w, opts);
  Table t;
  t.kind = "pairsum";
  t.columns = {{"Q", ColumnType::integer},         {"S", ColumnType::exact},       {"P", ColumnType::exact},
               {"parallel", ColumnType::exact},    {"nonparallel", ColumnType::exact},
               {"diagonal", ColumnType::exact},    {"constant", ColumnType::exact}, {"S_float", ColumnType::lossy},
               {"P_float", ColumnType::lossy},     {"constant_float", ColumnType::lossy}};
  for (const auto& r : reports) {
    const bool defined = r.S.lo > 0;
    const Enclosure constant = defined ? r.constant() : Enclosure::point(0);
    t.add({cell(r.Q), cell(r.S), cell(r.P), cell(r.parallel), cell(r.nonparallel), cell(r.diagonal),
           defined ? cell(constant) : "undefined", cell(nearest(r.S)), cell(nearest(r.P)),
           cell(defined ? nearest(constant) : 0.0)});
  }
  t.summary = {{"n", p.n}, {"m", p.m}, {"w", w}};
  return t;
}

inline Table run_qia(const Config& cfg, unsigned threads) {
  const auto p = prepare(cfg);
  const auto w = static_cast<unsigned>(cfg.integer("w", 0, 16, 0));
  if (p.scale == ScaleMode::exact) require_exact_shrink(w, p.m, p.schedule.back(), "w");
  const auto opts = pair_options(cfg, threads);
  cfg.finish();
  const auto traj = qia_ratio(p.seq, p.n, p.schedule, w, opts);
  Table t;
  t.kind = "qia";
  t.columns = {{"Q", ColumnType::integer},
               {"S", ColumnType::exact},
               {"P", ColumnType::exact},
               {"ratio", ColumnType::exact},
               {"ratio_float", ColumnType::lossy}};
  for (std::size_t i = 0; i < traj.reports.size(); ++i) {
    const auto& r = traj.reports[i];
    t.add({cell(r.Q), cell(r.S), cell(r.P), cell(traj.points[i].ratio), cell(nearest(traj.points[i].ratio))});
  }
  t.summary = {{"n", p.n}, {"m", p.m}, {"w", w}, {"slope", traj.slope}, {"trend", to_string(traj.trend)}};
  return t;
}

inline Table run_inherit(const Config& cfg, unsigned threads) {
  const auto p = prepare(cfg);
  const auto w = static_cast<unsigned>(cfg.integer("w", 0, 16, 0));
  const auto k = static_cast<unsigned>(cfg.integer("k", 1, 4));
  if (p.scale == ScaleMode::exact) {
    require_exact_shrink(w, p.m, p.schedule.back(), "w");
    require_exact_lift(p.seq.lift() + k, p.m, "k");
  }
  const auto opts = pair_options(cfg, threads);
  cfg.finish();
  const auto rows = inheritance_compare(p.seq, p.n, k, p.schedule, w, opts);
  Table t;
  t.kind = "inherit";
  t.columns = {{"Q", ColumnType::integer},
               {"lifted_S", ColumnType::exact},
               {"lifted_P", ColumnType::exact},
               {"lifted_parallel", ColumnType::exact},
               {"lifted_nonparallel", ColumnType::exact},
               {"base_P", ColumnType::exact},
               {"ratio", ColumnType::exact},
               {"lifted_constant", ColumnType::exact},
               {"nonparallel_below_S2", ColumnType::boolean},
               {"ratio_float", ColumnType::lossy},
               {"lifted_constant_float", ColumnType::lossy}};
  for (const auto& row : rows) {
    const Enclosure constant = row.lifted.constant();
    const Enclosure s2 = row.lifted.S * row.lifted.S;
    t.add({cell(row.Q), cell(row.lifted.S), cell(row.lifted.P), cell(row.lifted.parallel),
           cell(row.lifted.nonparallel), cell(row.base.P), cell(row.ratio), cell(constant),
           cell(row.lifted.nonparallel.hi <= s2.lo), cell(nearest(row.ratio)), cell(nearest(constant))});
  }
  t.summary = {{"n", p.n}, {"m", p.m}, {"k", k}, {"w", w}};
  return t;
}

inline Table run_simulate(const Config& cfg, unsigned threads, std::optional<std::uint64_t> seed_override) {
  const auto p = prepare(cfg, 1 << 16);
  const auto K = static_cast<std::uint64_t>(cfg.integer("K", 1, 1000000, 1));
  SampleSpec spec;
  spec.seed = static_cast<std::uint64_t>(cfg.integer("seed", 0, INT64_MAX, 0));
  if (seed_override) spec.seed = *seed_override;
  spec.samples = static_cast<std::uint64_t>(cfg.integer("samples", 1, 100000000));
  spec.threads = threads;
  const LatticeMode mode = lattice_mode(cfg);
  scale_mode(cfg);  // accepted for uniformity; sampling never rescales balls
  cfg.finish();
  const auto hist = estimate_limsup_measure(p.seq, p.n, p.schedule, spec, mode);
  Table t;
  t.kind = "simulate";
  t.columns = {{"Q", ColumnType::integer},           {"samples", ColumnType::integer},
               {"K", ColumnType::integer},           {"hits_at_least_K", ColumnType::integer},
               {"fraction", ColumnType::exact},      {"fraction_float", ColumnType::lossy},
               {"ci_low", ColumnType::lossy},        {"ci_high", ColumnType::lossy},
               {"mean_hits", ColumnType::exact},     {"expected_hits", ColumnType::exact},
               {"mean_hits_float", ColumnType::lossy}, {"expected_hits_float", ColumnType::lossy}};
  for (const auto& h : hist) {
    const Proportion frac = h.at_least(K);
    const auto [lo, hi] = frac.interval();
    const Rational mean = h.mean();
    const Enclosure expected = expected_hits(p.seq, p.n, 0, h.Q, mode);
    t.add({cell(h.Q), cell(h.samples()), cell(K), cell(frac.successes), cell(frac.value()), cell(frac.estimate()),
           cell(lo), cell(hi), cell(mean), cell(expected), cell(nearest(mean)), cell(nearest(expected))});
  }
  json windows = json::array();
  for (std::size_t i = 1; i < hist.size(); ++i) {
    const auto wm = window_mean(hist[i - 1], hist[i]);
    windows.push_back({{"Q0", hist[i - 1].Q},
                       {"Q", hist[i].Q},
                       {"mean", wm.mean},
                       {"standard_error", wm.standard_error},
                       {"expected", cell(expected_hits(p.seq, p.n, hist[i - 1].Q, hist[i].Q, mode))}});
  }
  t.summary = {{"n", p.n}, {"m", p.m}, {"seed", spec.seed}, {"generator", kGeneratorName}, {"windows", windows}};
  return t;
}

inline Table run_transfer(const Config& cfg) {
  const unsigned n = dimension(cfg, "n");
  const unsigned m = dimension(cfg, "m");
  const PowerLog psi = power_log(cfg);
  const DimensionFunction f{cfg.rational("s"), cfg.rational("t", Rational(0))};
  if (!f.valid()) cfg.fail("s", "f(r) = r^s (log 1/r)^t must be a dimension function (s > 0, or s = 0 and t < 0)");
  if (!g_of(f, n, m).valid()) cfg.fail("s", "r^(-m(n-1)) f(r) must be a dimension function");
  std::optional<Rational> eps;
  if (cfg.has("eps")) eps = cfg.rational("eps");
  if (eps && *eps <= 0) cfg.fail("eps", "must be positive");
  if (psi.c != 0 && psi.tau <= -1) cfg.fail("tau", "psi(q)/q must tend to 0 (tau > -1)");
  const ThetaLaw theta = theta_transform(psi, f, n, m);
  const SeriesVerdict h = hausdorff_series_classify(psi, f, n, m);
  const auto seq = BallSequence::power_log(psi.c, psi.tau, psi.sigma, m);
  const auto prediction = dichotomy_predict(seq, n, eps);
  Table t;
  t.kind = "transfer";
  t.columns = {{"theta_c", ColumnType::exact},          {"theta_tau", ColumnType::exact},
               {"theta_sigma", ColumnType::exact},      {"asymptotic", ColumnType::boolean},
               {"hausdorff_power", ColumnType::exact},  {"hausdorff_log_power", ColumnType::exact},
               {"hausdorff_verdict", ColumnType::text}, {"lebesgue_verdict", ColumnType::text},
               {"prediction", ColumnType::text},        {"theta_c_float", ColumnType::lossy}};
  t.add({cell(theta.c), cell(theta.tau), cell(theta.sigma), cell(theta.asymptotic), cell(h.power), cell(h.log_power),
         to_string(h.verdict), to_string(prediction.series.verdict), to_string(prediction.outcome),
         cell(nearest(theta.c))});
  t.summary = {{"n", n}, {"m", m}, {"note", prediction.note}};
  return t;
}

}  // namespace kglab::cli
