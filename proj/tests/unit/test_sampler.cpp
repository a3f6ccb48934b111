#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aas/errors.hpp"
#include "aas/sampler.hpp"
#include "../support/oracles.hpp"

using namespace aas;

namespace
{

CandidatePair os_pair(std::size_t a, std::size_t b, double sim)
{
  CandidatePair c;
  c.pair = PairKey(a, b);
  c.origin = PoolOrigin::OverSegmentation;
  c.similarity = sim;
  return c;
}

CandidatePair us_pair(std::size_t a, std::size_t b, PairType type, std::size_t region, double sim)
{
  CandidatePair c;
  c.pair = PairKey(a, b);
  c.origin = PoolOrigin::UnderSegmentation;
  c.pair_type = type;
  c.region = c.other_region = region;
  c.similarity = sim;
  return c;
}

double sum(const std::vector<double>& v)
{
  return std::accumulate(v.begin(), v.end(), 0.0);
}

std::vector<CandidatePair> random_pool(PoolOrigin origin, std::size_t size, oracle::Rng& rng)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> type(0, 2), region(0, 4);
  std::vector<CandidatePair> out;
  for (std::size_t i = 0; i < size; ++i)
  {
    const auto a = 2 * i, b = 2 * i + 1 + (origin == PoolOrigin::OverSegmentation ? 1000 : 0);
    out.push_back(origin == PoolOrigin::OverSegmentation
                      ? os_pair(a, b, u(rng))
                      : us_pair(a, b, static_cast<PairType>(type(rng)), static_cast<std::size_t>(region(rng)), u(rng)));
  }
  return out;
}

} // namespace

TEST_SUITE("os conditional")
{
  TEST_CASE("normalised similarity")
  {
    std::vector<CandidatePair> pool{os_pair(0, 1, 0.8), os_pair(2, 3, 0.2)};
    auto p = os_conditional(pool);
    CHECK(p.probabilities[0] == doctest::Approx(0.8));
    CHECK(p.probabilities[1] == doctest::Approx(0.2));
    CHECK_FALSE(p.degenerate);

    pool = {os_pair(0, 1, 0.4)};
    CHECK(os_conditional(pool).probabilities == std::vector<double>{1.0});

    pool = {os_pair(0, 1, 0.3), os_pair(0, 2, 0.3), os_pair(0, 3, 0.4)};
    p = os_conditional(pool);
    CHECK(p.probabilities[0] == doctest::Approx(0.3));
    CHECK(p.probabilities[1] == doctest::Approx(0.3));
    CHECK(p.probabilities[2] == doctest::Approx(0.4));
  }

  TEST_CASE("all-zero similarities fall back to uniform")
  {
    std::vector<CandidatePair> pool{os_pair(0, 1, 0.0), os_pair(2, 3, 0.0)};
    const auto p = os_conditional(pool);
    CHECK(p.degenerate);
    CHECK(p.probabilities == std::vector<double>{0.5, 0.5});
  }
}

TEST_SUITE("us conditional")
{
  TEST_CASE("symmetric pool is uniform")
  {
    std::vector<CandidatePair> pool;
    for (std::size_t i = 0; i < 4; ++i) pool.push_back(us_pair(i, i + 10, PairType::InlierInlier, 0, 0.5));
    for (double p : us_conditional(pool).probabilities) CHECK(p == doctest::Approx(0.25));
  }

  TEST_CASE("region mass follows the type count")
  {
    std::vector<CandidatePair> pool{us_pair(0, 1, PairType::InlierInlier, 0, 0.5),
                                    us_pair(0, 2, PairType::InlierInlier, 0, 0.5),
                                    us_pair(0, 3, PairType::InlierInlier, 0, 0.5),
                                    us_pair(5, 6, PairType::InlierInlier, 1, 0.5)};
    const auto p = us_conditional(pool).probabilities;
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(0.75));
    CHECK(p[3] == doctest::Approx(0.25));
  }

  TEST_CASE("type prior renormalises over present types")
  {
    std::vector<CandidatePair> pool{us_pair(0, 1, PairType::InlierInlier, 0, 0.5),
                                    us_pair(0, 2, PairType::InlierInlier, 0, 0.9),
                                    us_pair(0, 3, PairType::InlierOutlier, 0, 0.5)};
    const auto p = us_conditional(pool).probabilities;
    CHECK(p[0] + p[1] == doctest::Approx(0.5));
    CHECK(p[2] == doctest::Approx(0.5));
    // within a (type, region) cell mass follows similarity
    CHECK(p[1] / p[0] == doctest::Approx(0.9 / 0.5));
  }

  TEST_CASE("beta and uniform switches")
  {
    std::vector<CandidatePair> pool{us_pair(0, 1, PairType::InlierInlier, 0, 0.2),
                                    us_pair(0, 2, PairType::OutlierOutlier, 0, 0.5),
                                    us_pair(0, 3, PairType::InlierInlier, 1, 0.8),
                                    us_pair(0, 4, PairType::InlierInlier, 1, 0.1),
                                    us_pair(0, 5, PairType::InlierInlier, 1, 0.1)};
    UsWeighting w;
    w.beta = {3.0, 1.0, 1.0};
    auto p = us_conditional(pool, w).probabilities;
    CHECK(p[1] == doctest::Approx(0.25));
    CHECK(p[0] == doctest::Approx(0.75 * (1.0 / 4.0)));
    CHECK(sum(p) == doctest::Approx(1.0));
    w = {};
    w.region_by_count = false;
    w.pair_by_similarity = false;
    p = us_conditional(pool, w).probabilities;
    CHECK(p[0] == doctest::Approx(0.25));
    CHECK(p[2] == doctest::Approx(0.5 * 0.5 / 3.0));
  }
}

TEST_SUITE("marginal")
{
  TEST_CASE("epsilon mixture")
  {
    const std::vector<CandidatePair> os{os_pair(0, 9, 0.5)}, us{us_pair(1, 2, PairType::InlierInlier, 0, 0.5)};
    auto m = marginal(os, us, 0.6);
    CHECK(m.probabilities[0] == doctest::Approx(0.6));
    CHECK(m.probabilities[1] == doctest::Approx(0.4));
    CHECK(m.pairs[0].origin == PoolOrigin::OverSegmentation);
    m = marginal(os, us, 1.0);
    CHECK(m.probabilities == std::vector<double>{1.0, 0.0});
    m = marginal(os, us, 0.0);
    CHECK(m.probabilities == std::vector<double>{0.0, 1.0});
  }

  TEST_CASE("empty pools move the mass")
  {
    const std::vector<CandidatePair> none, us{us_pair(1, 2, PairType::InlierInlier, 0, 0.5),
                                              us_pair(1, 3, PairType::InlierInlier, 0, 0.5)};
    auto m = marginal(none, us, 0.6);
    CHECK(m.epsilon_effective == 0.0);
    CHECK(sum(m.probabilities) == doctest::Approx(1.0));
    m = marginal(us, none, 0.6);
    CHECK(m.epsilon_effective == 1.0);
    m = marginal(none, none, 0.6);
    CHECK(m.empty);
    CHECK(m.pairs.empty());
    CHECK_THROWS_AS(marginal(none, us, 1.5), ValidationError);
    CHECK_THROWS_AS(marginal(none, us, -0.1), ValidationError);
  }

  TEST_CASE("totals count pairs per origin, type and region")
  {
    const std::vector<CandidatePair> os{os_pair(0, 9, 0.5)},
        us{us_pair(1, 2, PairType::InlierInlier, 0, 0.5), us_pair(1, 3, PairType::InlierInlier, 0, 0.5),
           us_pair(1, 4, PairType::OutlierOutlier, 2, 0.5)};
    const auto m = marginal(os, us, 0.6);
    CHECK(m.totals.at({PoolOrigin::UnderSegmentation, PairType::InlierInlier, 0}) == 2);
    CHECK(m.totals.at({PoolOrigin::UnderSegmentation, PairType::OutlierOutlier, 2}) == 1);
  }

  TEST_CASE("sums to one on random pools")
  {
    oracle::Rng rng(50);
    std::uniform_int_distribution<std::size_t> size(0, 30);
    std::uniform_real_distribution<double> eps(0.0, 1.0);
    for (int t = 0; t < 2000; ++t)
    {
      const auto os = random_pool(PoolOrigin::OverSegmentation, size(rng), rng);
      const auto us = random_pool(PoolOrigin::UnderSegmentation, size(rng), rng);
      const auto m = marginal(os, us, eps(rng));
      if (os.empty() && us.empty())
      {
        CHECK(m.empty);
        continue;
      }
      REQUIRE(std::abs(sum(m.probabilities) - 1.0) <= 1e-9);
      for (double p : m.probabilities) REQUIRE(p >= 0.0);
    }
  }
}

TEST_SUITE("drawing")
{
  TEST_CASE("budget larger than the pool returns all of it")
  {
    const std::vector<CandidatePair> os{os_pair(0, 9, 0.5), os_pair(1, 9, 0.2)},
        us{us_pair(1, 2, PairType::InlierInlier, 0, 0.5)};
    const auto m = marginal(os, us, 0.6);
    const auto batch = draw_batch(m, 10, 7);
    CHECK(batch.size() == 3);
    CHECK(std::set<PairKey>(batch.begin(), batch.end()).size() == 3);
    CHECK(draw_batch(m, 0, 7).empty());
    CHECK(draw_batch(marginal({}, {}, 0.6), 5, 7).empty());
  }

  TEST_CASE("seeded draws are reproducible")
  {
    oracle::Rng rng(51);
    const auto us = random_pool(PoolOrigin::UnderSegmentation, 40, rng);
    const auto m = marginal({}, us, 0.6);
    CHECK(draw_batch(m, 15, 99) == draw_batch(m, 15, 99));
    CHECK(draw_batch(m, 15, 99) != draw_batch(m, 15, 100));
  }

  TEST_CASE("single-draw frequency follows the probability")
  {
    WeightedPairPool pool;
    pool.pairs = {os_pair(0, 1, 0.9), os_pair(2, 3, 0.1)};
    pool.probabilities = {0.9, 0.1};
    pool.empty = false;
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) hits += draw_batch(pool, 1, seed)[0] == PairKey(0, 1);
    CHECK(std::abs(hits / 10000.0 - 0.9) <= 0.02);
  }

  TEST_CASE("epsilon one ignores the under-segmentation pool")
  {
    oracle::Rng rng(52);
    const auto os = random_pool(PoolOrigin::OverSegmentation, 12, rng);
    const auto us1 = random_pool(PoolOrigin::UnderSegmentation, 5, rng);
    const auto us2 = random_pool(PoolOrigin::UnderSegmentation, 25, rng);
    for (std::uint64_t seed = 0; seed < 50; ++seed)
      CHECK(draw_batch(marginal(os, us1, 1.0), os.size(), seed) == draw_batch(marginal(os, us2, 1.0), os.size(), seed));
  }

  TEST_CASE("sequential drawer exhausts positive mass before zero mass")
  {
    WeightedPairPool pool;
    pool.pairs = {os_pair(0, 1, 1), os_pair(2, 3, 0), os_pair(4, 5, 1)};
    pool.probabilities = {0.5, 0.0, 0.5};
    pool.empty = false;
    SequentialDrawer d(pool, 3);
    std::set<std::size_t> first_two{*d.next(), *d.next()};
    CHECK(first_two == std::set<std::size_t>{0, 2});
    CHECK(*d.next() == 1);
    CHECK_FALSE(d.next().has_value());
    CHECK(d.remaining() == 0);
  }

  TEST_CASE("unit uniform lies in [0, 1)")
  {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10000; ++i)
    {
      const double u = unit_uniform(rng);
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
    }
  }
}

TEST_CASE("pair budget")
{
  CHECK(pair_budget(1000, 0.0002) == 99);
  CHECK(pair_budget(2, 0.5) == 0);
  CHECK(pair_budget(200, 0.0002) == 3);
  CHECK(pair_budget(300, 0.001) == 44);
  CHECK_THROWS_AS(pair_budget(1, 0.5), ValidationError);
  CHECK_THROWS_AS(pair_budget(10, 0.0), ValidationError);
  CHECK_THROWS_AS(pair_budget(10, 1.0), ValidationError);
}
