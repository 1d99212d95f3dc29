#include "doctest.h"
#include "support.hpp"

#include <set>
#include <sstream>

using namespace metatune;

TEST_SUITE("flagspace") {

TEST_CASE("canonical grid has 240 distinct entries in row-major order") {
  const auto grid = canonical_grid();
  REQUIRE(grid.size() == 240);

  // Independent enumeration of the same product.
  const std::array<Bound, 4> cbs{1u, 2u, 3u, kUnlimited};
  const std::array<Bound, 5> unwinds{1u, 8u, 32u, 128u, kUnlimited};
  const std::array<std::pair<Strategy, std::uint32_t>, 3> strategies{
      {{Strategy::None, 1}, {Strategy::Incr, 1}, {Strategy::Incr, 4}}};
  std::size_t i = 0;
  for (auto cb : cbs)
    for (auto uw : unwinds)
      for (auto [s, k] : strategies)
        for (bool por : {false, true})
          for (bool merge : {false, true}) {
            CAPTURE(i);
            const auto &c = grid[i++];
            CHECK(c.context_bound == cb);
            CHECK(c.unwind == uw);
            CHECK(c.strategy == s);
            CHECK(c.k_step == k);
            CHECK(c.no_por == por);
            CHECK(c.no_goto_merge == merge);
            CHECK_FALSE(c.state_hashing);
            CHECK_FALSE(c.add_symex_value_sets);
          }

  std::set<std::vector<double>> seen;
  for (const auto &c : grid) {
    const auto e = encode(c);
    seen.insert({e.begin(), e.end()});
  }
  CHECK(seen.size() == 240);
}

TEST_CASE("default configuration is in the grid") {
  const auto grid = canonical_grid();
  const auto idx = grid.index_of(default_config());
  REQUIRE(idx);
  CHECK(*idx == 228);
  CHECK(render_flags(default_config()).empty());
}

TEST_CASE("encoding of unlimited, strategy and booleans") {
  FlagConfiguration c;
  c.context_bound = 3;
  c.strategy = Strategy::Incr;
  c.k_step = 4;
  c.no_por = true;
  const auto e = encode(c);
  CHECK(e == EncodedFlags{3, 1, 4, -1, 1, 0, 0, 0});
  CHECK(encode(default_config()) == EncodedFlags{-1, 0, 1, -1, 0, 0, 0, 0});
  FlagConfiguration k;
  k.strategy = Strategy::KInduction;
  k.k_step = 2;
  CHECK(encode(k)[1] == 2.0);
}

TEST_CASE("decode inverts encode over the grid") {
  for (const auto &c : canonical_grid())
    CHECK(decode(encode(c)) == c);
}

TEST_CASE("decode rejects values outside the domain") {
  auto base = encode(default_config());
  auto bad = [&](std::size_t field, double v) {
    auto e = base;
    e[field] = v;
    CHECK_THROWS_AS(decode(e), FormatError);
  };
  bad(0, 0);
  bad(0, -2);
  bad(0, 1.5);
  bad(1, 3);
  bad(3, 0);
  bad(4, 2);
  bad(5, 0.5);
  bad(7, -1);
}

TEST_CASE("k_step is ignored without a strategy") {
  FlagConfiguration a, b;
  a.k_step = 1;
  b.k_step = 9;
  CHECK(a == b);
  CHECK(encode(b)[2] == 1.0);
  CHECK_THROWS_AS(FlagGrid({a, b}), FormatError);
}

TEST_CASE("rendering and parsing round trip over the grid") {
  for (const auto &c : canonical_grid()) {
    const auto args = render_flags(c);
    CHECK(parse_flag_args(args) == c);
  }
  FlagConfiguration c;
  c.context_bound = 2;
  c.strategy = Strategy::KInduction;
  c.k_step = 3;
  c.unwind = 8;
  c.no_goto_merge = true;
  c.state_hashing = true;
  c.add_symex_value_sets = true;
  const auto args = render_flags(c);
  CHECK(args == std::vector<std::string>{"--context-bound", "2", "--k-induction", "--k-step", "3", "--unwind", "8",
                                         "--no-goto-merge", "--state-hashing", "--add-symex-value-sets"});
  CHECK(parse_flag_args(args) == c);
}

TEST_CASE("parsing keeps unknown arguments aside") {
  const std::vector<std::string> args{"--unwind", "8", "prog.c", "--no-por", "--quiet"};
  std::vector<std::string> rest;
  const auto c = parse_flag_args(args, {}, &rest);
  CHECK(c.unwind == Bound(8));
  CHECK(c.no_por);
  CHECK(rest == std::vector<std::string>{"prog.c", "--quiet"});
  CHECK_THROWS_AS(parse_flag_args(std::vector<std::string>{"--unwind"}), FormatError);
  CHECK_THROWS_AS(parse_flag_args(std::vector<std::string>{"--unwind", "0"}), FormatError);
}

TEST_CASE("custom strategy spelling") {
  FlagSpelling sp{"--incremental", "--kind"};
  FlagConfiguration c;
  c.strategy = Strategy::Incr;
  const auto args = render_flags(c, sp);
  CHECK(args.front() == "--incremental");
  CHECK(parse_flag_args(args, sp) == c);
}

TEST_CASE("grid file round trip") {
  std::stringstream buf;
  write_grid(buf, canonical_grid());
  CHECK(read_grid(buf) == canonical_grid());
}

TEST_CASE("grid file errors carry line numbers") {
  std::istringstream in("# header\n1,0,1,U,0,0,0,0\n1,0,1,U,0,0,0\n");
  try {
    read_grid(in);
    FAIL("expected FormatError");
  } catch (const FormatError &e) {
    CHECK(e.line() == 3);
  }
  std::istringstream dup("1,0,1,U,0,0,0,0\n1,0,5,U,0,0,0,0\n");
  CHECK_THROWS_AS(read_grid(dup), FormatError);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(read_grid(empty), FormatError);
  std::istringstream unlimited_bool("1,0,1,U,U,0,0,0\n");
  CHECK_THROWS_AS(read_grid(unlimited_bool), FormatError);
}

TEST_CASE("config line format") {
  FlagConfiguration c;
  c.unwind = 32;
  c.strategy = Strategy::Incr;
  c.k_step = 4;
  const auto line = format_config_line(c);
  CHECK(line == "U,1,4,32,0,0,0,0");
  CHECK(parse_config_line(line) == c);
}

TEST_CASE("index_of finds every entry") {
  const auto grid = canonical_grid();
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(grid.index_of(grid[i]) == i);
  FlagConfiguration off;
  off.state_hashing = true;
  CHECK_FALSE(grid.index_of(off));
}

} // TEST_SUITE
