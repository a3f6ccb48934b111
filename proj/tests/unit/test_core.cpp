#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aas/constraint_store.hpp"
#include "aas/errors.hpp"
#include "aas/io.hpp"
#include "../support/oracles.hpp"

#include <filesystem>
#include <fstream>

using namespace aas;

namespace
{

Constraint ml(std::size_t a, std::size_t b, int cycle = 0)
{
  return {PairKey(a, b), Relation::MustLink, ConstraintSource::Oracle, cycle};
}

Constraint cl(std::size_t a, std::size_t b, int cycle = 0)
{
  return {PairKey(a, b), Relation::CannotLink, ConstraintSource::Oracle, cycle};
}

// Closure recomputed from scratch for one pair.
Relation brute_relation(std::size_t n, const std::vector<Constraint>& cs, std::size_t x, std::size_t y)
{
  std::vector<std::size_t> comp(n);
  std::iota(comp.begin(), comp.end(), 0);
  bool changed = true;
  while (changed)
  {
    changed = false;
    for (const auto& c : cs)
    {
      const auto ca = comp[c.pair.a()], cb = comp[c.pair.b()];
      if (c.relation != Relation::MustLink || ca == cb) continue;
      const auto lo = std::min(ca, cb);
      for (auto& v : comp)
        if (v == ca || v == cb) v = lo;
      changed = true;
    }
  }
  if (comp[x] == comp[y]) return Relation::MustLink;
  for (const auto& c : cs)
  {
    if (c.relation != Relation::CannotLink) continue;
    const auto ca = comp[c.pair.a()], cb = comp[c.pair.b()];
    if ((ca == comp[x] && cb == comp[y]) || (ca == comp[y] && cb == comp[x])) return Relation::CannotLink;
  }
  return Relation::Unknown;
}

std::vector<Constraint> to_constraints(const std::vector<oracle::RawConstraint>& raw)
{
  std::vector<Constraint> out;
  for (const auto& r : raw) out.push_back(r.must_link ? ml(r.a, r.b) : cl(r.a, r.b));
  return out;
}

std::filesystem::path temp_dir(const std::string& name)
{
  auto dir = std::filesystem::temp_directory_path() / ("aas_test_core_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace

TEST_CASE("pair keys are canonical")
{
  CHECK(PairKey(5, 2) == PairKey(2, 5));
  CHECK(PairKey(5, 2).a() == 2);
  CHECK(PairKey(5, 2).b() == 5);
  CHECK_THROWS_AS(PairKey(3, 3), ValidationError);
  CHECK(PairKeyHash{}(PairKey(1, 9)) == PairKeyHash{}(PairKey(9, 1)));
}

TEST_CASE("embedding set invariants")
{
  aas::RowMatrixF m(2, 2);
  m << 1, 0, 0, 1;
  CHECK_NOTHROW(EmbeddingSet({"a", "b"}, m));
  CHECK_THROWS_AS(EmbeddingSet({"a", "a"}, m), ValidationError);
  CHECK_THROWS_AS(EmbeddingSet({"a"}, m), ValidationError);
  CHECK_THROWS_AS(EmbeddingSet({"a", "b"}, m, std::vector<std::string>{"u"}), ValidationError);
  CHECK_THROWS_AS(EmbeddingSet({"a", "b"}, m, std::nullopt, std::vector<std::string>{"p"}), ValidationError);
  auto bad = m;
  bad(1, 1) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(EmbeddingSet({"a", "b"}, bad), ValidationError);
  CHECK_THROWS_AS(EmbeddingSet({}, aas::RowMatrixF(0, 2)), ValidationError);
  const EmbeddingSet set({"a", "b"}, m);
  CHECK(set.index_of("b") == 1);
  CHECK_THROWS_AS(set.index_of("zz"), ValidationError);
}

TEST_CASE("partition renumbering follows first occurrence")
{
  const Partition p({7, 3, 7, 9}, MethodTag::A);
  CHECK(p.num_clusters() == 3);
  CHECK(p.renumbered().labels == std::vector<int>{0, 1, 0, 2});
  CHECK(same_grouping(p, Partition({0, 1, 0, 2})));
  CHECK_FALSE(same_grouping(p, Partition({0, 0, 0, 2})));
}

TEST_CASE("run config defaults and validation")
{
  RunConfig c;
  CHECK(c.epsilon == 0.6);
  CHECK(c.k_max == 5);
  CHECK(c.s_min == 0.3);
  CHECK(c.budget_fraction_per_cycle == 0.0002);
  CHECK(c.num_cycles == 5);
  CHECK_NOTHROW(c.validate());
  c.epsilon = 1.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.budget_fraction_per_cycle = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.s_min = -2;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_SUITE("constraint store")
{
  TEST_CASE("must-link is transitive")
  {
    ConstraintStore s(4);
    s.add(ml(1, 2));
    s.add(ml(2, 3));
    CHECK(s.relation_of(PairKey(1, 3)) == Relation::MustLink);
  }

  TEST_CASE("cannot-link propagates through must-link")
  {
    ConstraintStore s(4);
    s.add(ml(1, 2));
    s.add(cl(2, 3));
    CHECK(s.relation_of(PairKey(1, 3)) == Relation::CannotLink);
  }

  TEST_CASE("direct conflict is a contradiction")
  {
    ConstraintStore s(3);
    s.add(ml(1, 2));
    CHECK_THROWS_AS(s.add(cl(1, 2)), ContradictionError);
    CHECK(s.relation_of(PairKey(1, 2)) == Relation::MustLink);
    ConstraintStore t(4);
    t.add(cl(0, 1));
    t.add(ml(1, 2));
    CHECK_THROWS_AS(t.add(ml(0, 2)), ContradictionError);
  }

  TEST_CASE("empty store knows nothing")
  {
    ConstraintStore s(2);
    CHECK(s.relation_of(PairKey(0, 1)) == Relation::Unknown);
  }

  TEST_CASE("closure over components")
  {
    ConstraintStore s(5);
    s.add(ml(0, 1));
    s.add(ml(1, 2));
    CHECK(s.relation_of(PairKey(0, 2)) == Relation::MustLink);
    ConstraintStore t(5);
    t.add(ml(0, 1));
    t.add(cl(1, 3));
    t.add(ml(3, 4));
    CHECK(t.relation_of(PairKey(0, 4)) == Relation::CannotLink);
    CHECK(t.relation_of(PairKey(0, 2)) == Relation::Unknown);
  }

  TEST_CASE("duplicates are idempotent")
  {
    ConstraintStore s(3);
    s.add(ml(0, 1));
    s.add(ml(1, 0, 3));
    CHECK(s.constraints().size() == 1);
    CHECK(s.num_components() == 2);
  }

  TEST_CASE("out-of-range and malformed constraints are rejected")
  {
    ConstraintStore s(3);
    CHECK_THROWS_AS(s.add(ml(0, 3)), ValidationError);
    CHECK_THROWS_AS(s.add({PairKey(0, 1), Relation::Unknown, ConstraintSource::Oracle, 0}), ValidationError);
    CHECK_THROWS_AS(s.add(ml(0, 1, -1)), ValidationError);
  }

  TEST_CASE("component count drops by one per merging must-link")
  {
    oracle::Rng rng(17);
    for (int trial = 0; trial < 50; ++trial)
    {
      const std::size_t n = 30;
      ConstraintStore s(n);
      for (const auto& c : to_constraints(oracle::random_constraints(n, 60, 4, rng)))
      {
        const auto before = s.num_components();
        const bool merging = c.relation == Relation::MustLink && s.component_of(c.pair.a()) != s.component_of(c.pair.b());
        s.add(c);
        CHECK(s.num_components() == before - (merging ? 1 : 0));
      }
    }
  }

  TEST_CASE("relation_of is symmetric and insertion-order independent")
  {
    oracle::Rng rng(99);
    const std::size_t n = 12;
    auto cs = to_constraints(oracle::random_constraints(n, 18, 3, rng));
    std::vector<Relation> reference;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y) reference.push_back(brute_relation(n, cs, x, y));
    for (int perm = 0; perm < 1000; ++perm)
    {
      std::shuffle(cs.begin(), cs.end(), rng);
      ConstraintStore s(n);
      for (const auto& c : cs) s.add(c);
      std::size_t k = 0;
      bool ok = true;
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = x + 1; y < n; ++y, ++k)
          ok = ok && s.relation_of(PairKey(x, y)) == reference[k] && s.relation_of(PairKey(y, x)) == reference[k];
      REQUIRE(ok);
    }
  }

  TEST_CASE("inferred constraints are exactly the closure minus explicit pairs")
  {
    ConstraintStore s(5);
    s.add(ml(0, 1));
    s.add(ml(1, 2));
    s.add(cl(2, 3));
    const auto inferred = s.inferred_constraints();
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& c : inferred)
    {
      CHECK(c.source == ConstraintSource::Inferred);
      got.emplace(c.pair.a(), c.pair.b());
    }
    // ml(0,2); cl(0,3), cl(1,3)
    CHECK(got == std::set<std::pair<std::size_t, std::size_t>>{{0, 2}, {0, 3}, {1, 3}});
  }
}

TEST_SUITE("io")
{
  TEST_CASE("embeddings round-trip with manifest")
  {
    const auto dir = temp_dir("emb");
    aas::RowMatrixF m(3, 2);
    m << 1.5f, -2, 0.25f, 4, 1e-7f, 3;
    const EmbeddingSet set({"p", "q", "r"}, m, std::vector<std::string>{"u1", "u2", "u3"},
                           std::vector<std::string>{"A", "B", "A"});
    io::save_embeddings(dir / "e.aase", set);
    const auto back = io::load_embeddings(dir / "e.aase");
    CHECK(back.ids() == set.ids());
    CHECK(back.vectors() == set.vectors());
    CHECK(*back.image_uris() == *set.image_uris());
    CHECK(*back.identities() == *set.identities());
    const auto bytes = io::read_text(dir / "e.aase");
    CHECK(bytes.substr(0, 4) == "AASE");
    CHECK(bytes.size() == 12 + 3 * 2 * 4);
  }

  TEST_CASE("malformed binary headers are rejected")
  {
    aas::RowMatrixF m(2, 2);
    m << 1, 2, 3, 4;
    auto bytes = io::encode_embeddings(m);
    auto wrong_magic = bytes;
    wrong_magic[0] = 'X';
    CHECK_THROWS_AS(io::decode_embeddings(wrong_magic), ValidationError);
    CHECK_THROWS_AS(io::decode_embeddings(bytes.substr(0, bytes.size() - 1)), ValidationError);
    CHECK_THROWS_AS(io::decode_embeddings(bytes + "x"), ValidationError);
    CHECK_THROWS_AS(io::decode_embeddings("AAS"), ValidationError);
    CHECK(io::decode_embeddings(bytes) == m);
  }

  TEST_CASE("manifest length mismatch is rejected")
  {
    const auto dir = temp_dir("manifest");
    aas::RowMatrixF m(2, 1);
    m << 1, 2;
    io::write_atomic(dir / "e.aase", io::encode_embeddings(m));
    io::write_atomic(dir / "e.aase.json", R"({"ids": ["a"], "image_uris": null, "identities": null})");
    CHECK_THROWS_AS(io::load_embeddings(dir / "e.aase"), ValidationError);
  }

  TEST_CASE("constraints file round-trip preserves every relation")
  {
    oracle::Rng rng(5);
    for (std::size_t n : {2, 7, 20, 50})
    {
      aas::RowMatrixF m = oracle::gaussian_matrix(n, 3, rng);
      const auto set = oracle::make_set(m);
      ConstraintStore s(n);
      for (const auto& c : to_constraints(oracle::random_constraints(n, n, 3, rng))) s.add(c);
      const auto text = io::encode_store(s, set, false);
      ConstraintStore back(n);
      for (const auto& c : io::decode_constraints(text, set)) back.add(c);
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = x + 1; y < n; ++y) REQUIRE(back.relation_of(PairKey(x, y)) == s.relation_of(PairKey(x, y)));
      // inferred lines are marked and reload to the same closure
      ConstraintStore with_inferred(n);
      for (const auto& c : io::decode_constraints(io::encode_store(s, set, true), set)) with_inferred.add(c);
      CHECK(with_inferred.count(Relation::MustLink) + with_inferred.count(Relation::CannotLink) >=
            s.constraints().size());
    }
  }

  TEST_CASE("constraint lines are validated")
  {
    aas::RowMatrixF m(2, 1);
    m << 1, 2;
    const auto set = oracle::make_set(m);
    CHECK_THROWS_AS(io::decode_constraints(R"({"a":"x0","b":"x9","relation":"ml","source":"oracle","cycle":0})", set),
                    ValidationError);
    CHECK_THROWS_AS(io::decode_constraints(R"({"a":"x0","b":"x1","relation":"maybe","source":"oracle","cycle":0})", set),
                    ValidationError);
    CHECK_THROWS_AS(io::decode_constraints("not json", set), ValidationError);
    const auto ok = io::decode_constraints(R"({"a":"x1","b":"x0","relation":"cl","source":"seed","cycle":2})"
                                           "\n\n",
                                           set);
    REQUIRE(ok.size() == 1);
    CHECK(ok[0].pair == PairKey(0, 1));
    CHECK(ok[0].source == ConstraintSource::Seed);
    CHECK(ok[0].cycle == 2);
  }

  TEST_CASE("partition CSV round-trip")
  {
    aas::RowMatrixF m(4, 1);
    m << 1, 2, 3, 4;
    const auto set = oracle::make_set(m);
    const Partition p({1, 0, 1, 2}, {false, false, false, true}, MethodTag::A);
    const auto text = io::encode_partition(p, set);
    CHECK(text.rfind("id,cluster,outlier\n", 0) == 0);
    const auto back = io::decode_partition(text, set);
    CHECK(back.labels == p.labels);
    CHECK(back.outliers == p.outliers);
    CHECK_THROWS_AS(io::decode_partition("id,cluster,outlier\nx0,-1,0\n", set), ValidationError);
    CHECK_THROWS_AS(io::decode_partition("wrong\n", set), ValidationError);
  }

  TEST_CASE("config round-trip and unknown keys")
  {
    RunConfig c;
    c.epsilon = 0.25;
    c.rng_seed = 18446744073709551615ull;
    c.strategy = SamplingStrategy::UniformRandom;
    c.base_view = BaseView::Finch;
    c.similarity_mode = SimilarityMode::Cosine;
    const auto back = io::decode_config(io::encode_config(c));
    CHECK(io::encode_config(back) == io::encode_config(c));
    CHECK(back.rng_seed == c.rng_seed);
    CHECK_THROWS_AS(io::decode_config(R"({"epsilonn": 0.5})"), ValidationError);
    CHECK_THROWS_AS(io::decode_config(R"({"epsilon": 3})"), ValidationError);
    CHECK(io::decode_config(R"({"knn_k": 7})").knn_k == 7);
  }

  TEST_CASE("atomic write leaves no temp file behind")
  {
    const auto dir = temp_dir("atomic");
    io::write_atomic(dir / "f.txt", "one");
    io::write_atomic(dir / "f.txt", "two");
    CHECK(io::read_text(dir / "f.txt") == "two");
    CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator()) == 1);
  }
}
