#include "hcfl/agents.hpp"
#include "hcfl/flsim.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hcfl;

namespace {

ModelProposal labelled(ModelId id, LabelSet labels, std::uint32_t rounds = 50)
{
  ModelProposal p;
  p.model_id          = id;
  p.owner             = owner(0);
  p.expected_accuracy = Rational{9, 10};
  p.rounds            = rounds;
  p.target_labels     = std::move(labels);
  return p;
}

}  // namespace

TEST(Valuations, AdditiveOverLabels)
{
  AgentConfig a;
  a.id           = owner(0);
  a.label_values = {{0, Money{10}}, {1, Money{10}}, {2, Money{0}}};
  auto rng       = make_stream({1});
  auto const row = draw_valuations(a, {labelled(ModelId{0}, {0, 1, 2}), labelled(ModelId{1}, {2})}, rng);
  EXPECT_EQ(row.at(ModelId{0}), Money{20});
  EXPECT_EQ(row.at(ModelId{1}), Money{0});
}

TEST(Valuations, StationCostScalesWithRounds)
{
  AgentConfig a;
  a.id           = station(0);
  a.label_values = {{0, Money{10}}, {1, Money{10}}};
  auto rng       = make_stream({1});
  auto const row = draw_valuations(a, {labelled(ModelId{0}, {0, 1}, 25)}, rng);
  EXPECT_EQ(row.at(ModelId{0}), Money{10});
}

TEST(Valuations, DrawsStayInDeclaredSupport)
{
  auto rng = make_stream({2});
  Money lo{1000}, hi{0};
  for (int i = 0; i < 5000; ++i)
  {
    auto const v = draw_around_mean(Money{100}, rng);
    lo           = std::min(lo, v);
    hi           = std::max(hi, v);
  }
  EXPECT_EQ(lo, Money{50});
  EXPECT_EQ(hi, Money{150});
}

TEST(MakeBid, TruthfulIsIdentity)
{
  auto rng = make_stream({3});
  EXPECT_EQ(make_bid(Truthful{}, Money{100}, rng), Money{100});
}

TEST(MakeBid, DishonestWithZeroProbabilityMatchesTruthful)
{
  for (std::uint64_t seed = 0; seed < 100; ++seed)
  {
    auto a = make_stream({seed});
    auto b = make_stream({seed});
    for (std::int64_t t = 0; t < 200; t += 7)
      EXPECT_EQ(make_bid(Dishonest{0.0, 0.5}, Money{t}, a), make_bid(Truthful{}, Money{t}, b));
  }
}

TEST(MakeBid, AlwaysLyingStaysInBand)
{
  auto rng = make_stream({4});
  bool moved = false;
  for (int i = 0; i < 2000; ++i)
  {
    auto const b = make_bid(Dishonest{1.0, 0.5}, Money{100}, rng);
    EXPECT_GE(b, Money{50});
    EXPECT_LE(b, Money{150});
    moved = moved || b != Money{100};
  }
  EXPECT_TRUE(moved);
}

TEST(MakeBid, NeverNegative)
{
  auto rng = make_stream({5});
  for (int i = 0; i < 500; ++i)
    EXPECT_GE(make_bid(Dishonest{1.0, 3.0}, Money{10}, rng), Money{0});
}

TEST(MakeBid, InvalidParametersRejected)
{
  EXPECT_THROW(validate(Strategy{Dishonest{1.5, 0.5}}), std::invalid_argument);
  EXPECT_THROW(validate(Strategy{Dishonest{0.5, -1.0}}), std::invalid_argument);
}

TEST(BaselineTarget, SelfishIsIntersection)
{
  std::vector<LabelSet> const interests{{0, 1, 2}, {1, 2, 3}};
  auto rng = make_stream({6});
  EXPECT_EQ(select_baseline_target(SelfishIntersection{}, interests, 10, rng), (LabelSet{1, 2}));
}

TEST(BaselineTarget, SelfishSingleOwner)
{
  std::vector<LabelSet> const interests{{4, 7}};
  auto rng = make_stream({6});
  EXPECT_EQ(select_baseline_target(SelfishIntersection{}, interests, 10, rng), (LabelSet{4, 7}));
}

TEST(BaselineTarget, SelfishEmptyIntersectionRejected)
{
  std::vector<LabelSet> const interests{{0}, {1}};
  auto rng = make_stream({6});
  EXPECT_THROW(select_baseline_target(SelfishIntersection{}, interests, 10, rng), std::invalid_argument);
}

TEST(BaselineTarget, RandomIsNonemptySubset)
{
  std::vector<LabelSet> const interests{{0}};
  auto rng = make_stream({7});
  std::set<std::size_t> sizes;
  for (int i = 0; i < 300; ++i)
  {
    auto const t = select_baseline_target(RandomTarget{}, interests, 10, rng);
    ASSERT_FALSE(t.empty());
    EXPECT_LT(*t.rbegin(), 10u);
    sizes.insert(t.size());
  }
  EXPECT_GT(sizes.size(), 3u);
}

TEST(Accuracy, ZeroImagesIsZero)
{
  EXPECT_EQ(AccuracyModel{}.accuracy(0), 0.0);
}

TEST(Accuracy, ClosedFormAtKappa)
{
  double const expected = 0.9 * (1.0 - std::exp(-1.0));
  EXPECT_NEAR(AccuracyModel{}.accuracy(2000), expected, 1e-12);
  EXPECT_NEAR(AccuracyModel{}.accuracy(2000), 0.5689, 1e-4);
}

TEST(Accuracy, MonotoneAndBounded)
{
  AccuracyModel const m;
  double prev = 0.0;
  for (std::int64_t n = 0; n <= 50'000; n += 250)
  {
    double const a = m.accuracy(n);
    EXPECT_GE(a, prev);
    EXPECT_LE(a, m.acc_max);
    prev = a;
  }
}

TEST(Train, NarrowTargetsGetMorePerLabelData)
{
  AccuracyModel const        m;
  std::vector<ParticipantId> stations{station(0), station(1)};
  auto const                 shares = equal_data_shares(m.total_budget, stations);
  auto rng = make_stream({8});
  auto const wide   = train(labelled(ModelId{0}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), m, shares, rng);
  auto const narrow = train(labelled(ModelId{1}, {0, 1}), m, shares, rng);
  EXPECT_NEAR(wide.per_label_accuracy.at(0), m.accuracy(1000), 1e-12);
  EXPECT_NEAR(narrow.per_label_accuracy.at(0), m.accuracy(5000), 1e-12);
  EXPECT_LT(wide.average_accuracy, narrow.average_accuracy);
}

TEST(Train, ContributionsSumToOne)
{
  AccuracyModel const m;
  DataShares const    shares{{station(0), 5000}, {station(1), 3000}, {station(2), 2000}};
  auto rng       = make_stream({9});
  auto const rep = train(labelled(ModelId{0}, {1, 2}), m, shares, rng);
  Rational   sum{0};
  for (auto const& [_, c] : rep.station_contribution)
    sum += c;
  EXPECT_EQ(sum, Rational{1});
  EXPECT_EQ(rep.station_contribution.at(station(0)), Rational(1, 2));
}

TEST(Train, ZeroBudgetGivesZeroAccuracy)
{
  AccuracyModel m;
  m.total_budget = 0;
  DataShares const shares{{station(0), 0}};
  auto rng       = make_stream({10});
  auto const rep = train(labelled(ModelId{0}, {1, 2}), m, shares, rng);
  EXPECT_EQ(rep.average_accuracy, 0.0);
}

TEST(Train, FewerRoundsScaleDown)
{
  AccuracyModel const m;
  DataShares const    shares{{station(0), 10'000}};
  auto rng       = make_stream({11});
  auto const rep = train(labelled(ModelId{0}, {1}, 25), m, shares, rng);
  EXPECT_NEAR(rep.average_accuracy, m.accuracy(10'000) / 2, 1e-12);
}

TEST(SocialMetric, WelfareTimesAccuracy)
{
  TrainingReport r;
  r.average_accuracy = 0.5;
  EXPECT_DOUBLE_EQ(social_utility_metric(Money{80}, r), 40.0);
  EXPECT_DOUBLE_EQ(social_utility_metric(Money{0}, r), 0.0);
  EXPECT_DOUBLE_EQ(social_utility_metric(Money{80}, std::optional<TrainingReport>{}), 0.0);
}

TEST(RealizedVsExpected, Threshold)
{
  auto           p = labelled(ModelId{0}, {0});
  TrainingReport r;
  r.average_accuracy = 0.85;
  EXPECT_TRUE(realized_vs_expected(r, p, 0.1));
  r.average_accuracy = 0.70;
  EXPECT_FALSE(realized_vs_expected(r, p, 0.1));
}
