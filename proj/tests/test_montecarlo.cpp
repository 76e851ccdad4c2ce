#include <gtest/gtest.h>

#include "kglab/montecarlo.hpp"
#include "oracles.hpp"

using namespace kglab;

namespace {

Rational R(long p, long q = 1) { return make_rational(p, q); }

std::vector<Rational> as_point(const std::vector<std::uint64_t>& u) {
  std::vector<Rational> x;
  for (auto v : u) x.push_back(grid_point(v));
  return x;
}

}  // namespace

TEST(Generator, SplitMixReferenceValue) {
  EXPECT_EQ(splitmix64(0x9e3779b97f4a7c15ULL), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(sample_word(7, 3), sample_word(7, 3));
  EXPECT_NE(sample_word(7, 3), sample_word(8, 3));
}

TEST(Proportion, ClopperPearson) {
  const Proportion none{0, 10};
  const auto [lo, hi] = none.interval(0.95);
  EXPECT_EQ(lo, 0);
  EXPECT_NEAR(hi, 1 - std::pow(0.025, 0.1), 1e-12);
  const Proportion half{500, 1000};
  const auto ci = half.interval();
  EXPECT_LT(ci.first, 0.5);
  EXPECT_GT(ci.second, 0.5);
  EXPECT_NEAR(half.sigma(), std::sqrt(0.25 / 1000), 1e-15);
  EXPECT_THROW((Proportion{0, 0}.value()), std::domain_error);
}

TEST(GridWindow, OpenBallMembership) {
  // B(0, 1/4): grid values v with v/2^64 in (-1/4, 1/4) mod 1
  const Window w = grid_window(BallBounds::point(Ball::arc(0, R(1, 4))), 0);
  EXPECT_FALSE(w.contains(std::uint64_t{1} << 62));
  EXPECT_TRUE(w.contains((std::uint64_t{1} << 62) - 1));
  EXPECT_TRUE(w.contains(0));
  EXPECT_FALSE(w.contains(std::uint64_t{3} << 62));
  EXPECT_TRUE(w.contains((std::uint64_t{3} << 62) + 1));
  EXPECT_TRUE(grid_window(BallBounds::point(Ball::arc(R(1, 3), 0)), 0).empty);
}

TEST(HitCount, Examples) {
  const auto constant = BallSequence::power_log(R(1, 10), R(0), R(0), 1);
  EXPECT_EQ(hit_count({R(1, 3)}, constant, 1, 10), 3U);
  const BallSequence zero({TableRadii{{}, TailRule::zero, {}}}, 1);
  EXPECT_EQ(hit_count({R(1, 3)}, zero, 1, 10), 0U);
  const auto shrinking = BallSequence::power_log(R(1, 2), R(2), R(0), 1);
  EXPECT_EQ(hit_count({R(0)}, shrinking, 1, 17), 17U);
  EXPECT_EQ(hit_count({R(0)}, shrinking, 1, 17, LatticeMode::full), 34U);
}

TEST(HitCounter, MatchesExactPointwiseCount) {
  oracle::Gen gen(31);
  struct Case {
    unsigned n, m;
    std::uint64_t Q;
  };
  for (const Case c : {Case{1, 1, 60}, Case{1, 2, 30}, Case{2, 1, 25}, Case{2, 2, 12}, Case{3, 1, 6}}) {
    for (auto mode : {LatticeMode::orthant, LatticeMode::full}) {
      std::vector<Rational> centre;
      for (unsigned j = 0; j < c.m; ++j) centre.push_back(gen.rational(0, 1, 50));
      // large radii so that hits are frequent
      const auto seq = BallSequence::power_log(R(1, 2), Rational(1, 2 * c.m), R(0), c.m, centre);
      const HitCounter counter(seq, c.n, c.Q, mode);
      for (int s = 0; s < 25; ++s) {
        std::vector<std::uint64_t> u(c.n * c.m);
        fill_sample(77, static_cast<std::uint64_t>(s), u.size(), u.data());
        ASSERT_EQ(counter.count(u.data()), hit_count(as_point(u), seq, c.n, c.Q, mode))
            << "n=" << c.n << " m=" << c.m << " sample " << s;
      }
    }
  }
}

TEST(HitCounter, PlaneFastPathMatchesEnumeration) {
  // random sample words stress the n = 2 candidate search at a larger cutoff
  const auto seq = BallSequence::power_log(R(1, 3), R(1), R(0), 1, {R(2, 7)});
  const HitCounter counter(seq, 2, 80, LatticeMode::full);
  const auto windows_of = [&](std::uint64_t s) {
    return std::vector<Window>{grid_window(seq.ball(s), 0)};
  };
  for (std::uint64_t i = 0; i < 40; ++i) {
    std::uint64_t u[2];
    fill_sample(5, i, 2, u);
    std::uint64_t direct = 0;
    for_each_lattice_vector(2, 80, LatticeMode::full, [&](const IntVec& q) {
      direct += grid_member(q, u, 1, windows_of(max_norm(q))) ? 1 : 0;
    });
    ASSERT_EQ(counter.count(u), direct) << i;
  }
}

TEST(EstimateLimsup, ZeroRadiiGiveZeroFractions) {
  const BallSequence zero({TableRadii{{}, TailRule::zero, {}}}, 1);
  const auto hist = estimate_limsup_measure(zero, 2, {4, 8}, {1, 500, 1});
  for (const auto& h : hist) EXPECT_EQ(h.fraction_at_least(1), 0);
  EXPECT_THROW(estimate_limsup_measure(zero, 2, {}, {1, 500, 1}), std::domain_error);
}

TEST(EstimateLimsup, ReproducibleAcrossThreadCounts) {
  const auto seq = BallSequence::power_log(R(1, 4), R(2), R(0), 1, {R(1, 3)});
  const auto a = estimate_limsup_measure(seq, 2, {64, 16}, {99, 2000, 1});
  const auto b = estimate_limsup_measure(seq, 2, {16, 64}, {99, 2000, 3});
  ASSERT_EQ(a.size(), 2U);
  EXPECT_EQ(a[0].Q, 16U);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].counts, b[i].counts);
  for (std::size_t s = 0; s < a[0].counts.size(); ++s) EXPECT_LE(a[0].counts[s], a[1].counts[s]);
}

TEST(EstimateLimsup, WindowMeanNearExpectation) {
  const auto seq = BallSequence::power_log(R(1, 4), R(2), R(0), 1, {R(1, 3)});
  const auto hist = estimate_limsup_measure(seq, 2, {32, 128}, {4, 20000, 0});
  const auto wm = window_mean(hist[0], hist[1]);
  const double expected = expected_hits(seq, 2, 32, 128).to_double();
  EXPECT_NEAR(wm.mean, expected, 4 * wm.standard_error + 1e-12);
}

TEST(EmpiricalSetMeasure, Examples) {
  const SampleSpec spec{2024, 1000000, 0};
  const auto quarter = empirical_set_measure(LatticeVector{5}, Ball::arc(R(1, 3), R(1, 8)), spec);
  EXPECT_LE(std::abs(quarter.estimate() - 0.25), 4 * std::sqrt(0.25 * 0.75 / 1e6));
  const auto whole = empirical_set_measure(LatticeVector{3}, Ball::arc(0, R(1, 2)), {1, 1000, 1});
  EXPECT_GE(whole.estimate(), 0.999);
  const auto fifth = empirical_set_measure(LatticeVector{3, 4}, Ball::arc(0, R(1, 10)), spec);
  EXPECT_LE(std::abs(fifth.estimate() - 0.2), 4 * std::sqrt(0.2 * 0.8 / 1e6));
}

TEST(MixingMc, Examples) {
  const SampleSpec spec{9, 200000, 0};
  const Box cube{{{0, 1}, {0, 1}}};
  const auto whole = mixing_mc(LatticeVector{2, 5}, Ball::arc(R(1, 5), R(1, 8)), cube, spec);
  const auto [lo, hi] = whole.interval(0.999);
  EXPECT_LE(lo, 1);
  EXPECT_GE(hi, 1);

  const Box corner{{{0, R(1, 4)}, {0, R(1, 4)}}};
  const auto mixed = mixing_mc(LatticeVector{16, 3}, Ball::arc(0, R(1, 8)), corner, spec);
  EXPECT_GE(mixed.interval().second, 0.25);
  EXPECT_GE(mixed.defect(), 0.25);

  const Box far{{{R(2, 5), R(9, 20)}, {0, 1}}};
  const auto none = mixing_mc(LatticeVector{1, 0}, Ball::arc(0, R(1, 8)), far, spec);
  EXPECT_EQ(none.conditional.successes, 0U);
  EXPECT_THROW(mixing_mc(LatticeVector{1, 0}, Ball::arc(0, R(1, 8)), Box{{{0, 1}}}, spec), std::domain_error);
}
