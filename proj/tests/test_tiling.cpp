#include <functional>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "common.hpp"

using namespace tilefreq;
using namespace tilefreq::test;

namespace {

const SubstitutionSystem& fib() { return corpus("fibonacci"); }
int id(const SubstitutionSystem& s, const char* label) { return *s.protos.id_of(label); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Parse;
}

}  // namespace

TEST(Tiling, FibonacciThirdSupertileLayout) {
  Patch s3 = supertile(fib(), id(fib(), "a"), 3);
  // a[0,phi], b[phi,phi+1], a[phi+1,2phi+1], a[2phi+1,3phi+1], b[3phi+1,3phi+2]
  std::set<std::pair<int, std::string>> got, want;
  for (const auto& t : s3.tiles) got.insert({t.proto, t.offset.to_string(2)});
  for (auto [p, off] : std::vector<std::pair<const char*, FieldElem>>{
           {"a", q(0)}, {"b", phi()}, {"a", phi() + q(1)}, {"a", q(2) * phi() + q(1)}, {"b", q(3) * phi() + q(1)}})
    want.insert({id(fib(), p), Vec(off).to_string(2)});
  EXPECT_EQ(got, want);
}

TEST(Tiling, ExtractBallPatch) {
  Host host(fib().protos, supertile(fib(), id(fib(), "a"), 3));
  Vec y(phi() + q(1, 2));
  Patch small = extract_ball_patch(host, y, q(1, 16));
  ASSERT_EQ(small.size(), 1u);
  EXPECT_EQ(small.tiles[0].proto, id(fib(), "b"));
  EXPECT_EQ(small.tiles[0].offset, Vec(q(-1, 2)));

  Patch three = extract_ball_patch(host, y, q(1, 4));
  ASSERT_EQ(three.size(), 3u);
  EXPECT_EQ(patch_key(fib().protos, three, false), patch_key(fib().protos, supertile(fib(), id(fib(), "a"), 2), false));

  EXPECT_EQ(kind_of([&] { extract_ball_patch(host, Vec(q(-1)), q(1, 16)); }), ErrorKind::BallNotCovered);
  EXPECT_EQ(kind_of([&] { extract_ball_patch(host, Vec(q(1, 2)), q(1)); }), ErrorKind::BallNotCovered);
}

TEST(Tiling, CoronaOf) {
  Host host(fib().protos, supertile(fib(), id(fib(), "a"), 3));
  Patch c = corona_of(host, {id(fib(), "a"), Vec(phi() + q(1))});
  ASSERT_EQ(c.size(), 3u);
  ASSERT_TRUE(c.center);
  EXPECT_EQ(c.tiles[*c.center].offset, Vec(q(0)));
  // Left to right: b, a (center), a.
  std::vector<Tile> order = c.tiles;
  std::sort(order.begin(), order.end(), [](const Tile& a, const Tile& b) { return a.offset[0] < b.offset[0]; });
  EXPECT_EQ(order[0].proto, id(fib(), "b"));
  EXPECT_EQ(order[1].proto, id(fib(), "a"));
  EXPECT_EQ(order[2].proto, id(fib(), "a"));

  Host single(fib().protos, supertile(fib(), 0, 0));
  EXPECT_EQ(kind_of([&] { corona_of(single, single.tile(0)); }), ErrorKind::BoundaryTile);
  EXPECT_EQ(kind_of([&] { corona_of(single, {1, Vec(q(5))}); }), ErrorKind::TileNotInHost);
}

TEST(Tiling, ChairCoronaNeighborsAreDisjointAndTouching) {
  const auto& chair = corpus("chair");
  Host host(chair.protos, supertile(chair, 0, 3));
  std::size_t interior = 0;
  for (std::size_t i = 0; i < host.size(); ++i) {
    if (!corona_complete(host, i)) continue;
    ++interior;
    Patch c = corona_at(host, i);
    ASSERT_TRUE(c.center);
    auto centre = tile_support(chair.protos, c.tiles[*c.center]);
    for (std::size_t a = 0; a < c.size(); ++a) {
      auto sa = tile_support(chair.protos, c.tiles[a]);
      EXPECT_TRUE(supports_meet(sa, centre));
      for (std::size_t b = a + 1; b < c.size(); ++b)
        EXPECT_TRUE(interiors_disjoint(sa, tile_support(chair.protos, c.tiles[b])));
    }
  }
  EXPECT_GT(interior, 0u);
}

TEST(Tiling, Occurrences) {
  const int a = id(fib(), "a"), b = id(fib(), "b");
  Patch s2 = supertile(fib(), a, 2);
  Host h2(fib().protos, s2);
  EXPECT_EQ(occurrences(Patch{{{a, Vec(q(0))}}, std::nullopt, std::nullopt}, h2).size(), 2u);
  auto self = occurrences(s2, h2);
  ASSERT_EQ(self.size(), 1u);
  EXPECT_TRUE(self[0].is_zero());
  Host h10(fib().protos, supertile(fib(), a, 10));
  EXPECT_TRUE(occurrences(Patch{{{b, Vec(q(0))}, {b, Vec(q(1))}}, std::nullopt, std::nullopt}, h10).empty());
}

TEST(Tiling, PatchEqualOnBall) {
  Seed seed = find_fixed_seed(fib(), 4);
  Patch p4 = seed_patch(fib(), seed, 2), p5 = seed_patch(fib(), seed, 3);
  p4.ref = p5.ref = Vec(q(0));
  EXPECT_TRUE(patch_equal_on_ball(fib().protos, p4, p4, q(1)));
  EXPECT_TRUE(patch_equal_on_ball(fib().protos, p4, p5, q(1, 4)));
  // abaab and ababa agree up to the fourth tile, which starts at 1 + 2 phi.
  auto spell = [](const std::string& w) {
    Patch p;
    FieldElem x;
    for (char c : w) {
      p.tiles.push_back({c == 'a' ? 0 : 1, Vec(x)});
      x += c == 'a' ? phi() : q(1);
    }
    return p.sort();
  };
  Patch u = spell("abaab"), w = spell("ababa");
  u.ref = w.ref = Vec(phi() * q(1, 2));
  EXPECT_TRUE(patch_equal_on_ball(fib().protos, u, w, q(1, 16)));
  u.ref = w.ref = Vec(q(1) + phi() * q(2));
  EXPECT_FALSE(patch_equal_on_ball(fib().protos, u, w, q(1, 16)));
}

TEST(Tiling, PeriodicWindow) {
  const auto& per = corpus("periodic1d");
  Patch line;
  for (long i = 0; i < 20; ++i) line.tiles.push_back({0, Vec(q(i))});
  line.ref = Vec(q(10));
  auto v = is_periodic_window(per.protos, line, q(4));
  ASSERT_TRUE(v);
  EXPECT_EQ(*v, Vec(q(1)));

  Patch fw = seed_window(fib(), find_fixed_seed(fib(), 4), q(400));
  fw.ref = Vec(q(0));
  EXPECT_FALSE(is_periodic_window(fib().protos, fw, q(36)));

  const auto& chair = corpus("chair");
  Patch cw = seed_window(chair, find_fixed_seed(chair, 4), q(100));
  cw.ref = Vec(q(0), q(0));
  EXPECT_FALSE(is_periodic_window(chair.protos, cw, q(9)));

  // Independent oracle: no translation by a tile offset difference of length
  // <= 6 maps the Fibonacci tiles within distance 8 of 0 into the window.
  Host fh(fib().protos, fw);
  std::vector<std::size_t> core;
  for (std::size_t i = 0; i < fh.size(); ++i)
    if ((norm2(fh.tile(i).offset) - q(64)).sign() <= 0) core.push_back(i);
  for (std::size_t i : core) {
    Vec v = fh.tile(i).offset - fh.tile(core.front()).offset;
    if (v.is_zero() || (norm2(v) - q(36)).sign() > 0) continue;
    bool all = true;
    for (std::size_t j : core) all = all && fh.find({fh.tile(j).proto, fh.tile(j).offset + v}).has_value();
    EXPECT_FALSE(all) << v.to_string(2);
  }
}

TEST(TilingProperty, KeysAreTranslationInvariant) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> d(-50, 50);
  Patch p = supertile(fib(), 0, 6);
  p.ref = Vec(phi());
  const PatchKey k = patch_key(fib().protos, p);
  for (int i = 0; i < 20; ++i) {
    Vec v(gq(d(rng), d(rng), 7));
    EXPECT_EQ(patch_key(fib().protos, p.translated(v)), k);
  }
  const auto& chair = corpus("chair");
  Patch c = supertile(chair, 2, 2);
  const PatchKey ck = patch_key(chair.protos, c);
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(patch_key(chair.protos, c.translated(Vec(q(d(rng), 3), q(d(rng), 5)))), ck);
}

TEST(TilingProperty, OccurrencesReproduceThePatch) {
  Seed seed = find_fixed_seed(fib(), 4);
  Host host(fib().protos, seed_window(fib(), seed, q(900)));
  for (long r2 : {1, 4, 9}) {
    Patch p = extract_ball_patch(host, Vec(q(0)), q(r2));
    const PatchKey k = patch_key(fib().protos, p, false);
    auto occ = occurrences(p, host);
    EXPECT_FALSE(occ.empty());
    for (const Vec& v : occ) {
      Patch moved;
      for (const auto& t : p.tiles) moved.tiles.push_back({t.proto, t.offset + v});
      EXPECT_EQ(patch_key(fib().protos, moved, false), k);
    }
  }
}

TEST(TilingProperty, BallPatchesAreNestedInRadius) {
  const auto& chair = corpus("chair");
  Host host(chair.protos, seed_window(chair, find_fixed_seed(chair, 4), q(144)));
  for (long x = -3; x <= 3; ++x) {
    Vec y(q(x, 3), q(1 - x, 2));
    Patch small = extract_ball_patch(host, y, q(1));
    Patch big = extract_ball_patch(host, y, q(9, 2));
    std::set<std::string> bigset;
    for (const auto& t : big.tiles) bigset.insert(std::to_string(t.proto) + t.offset.to_string(1));
    for (const auto& t : small.tiles) EXPECT_TRUE(bigset.count(std::to_string(t.proto) + t.offset.to_string(1)));
  }
}
