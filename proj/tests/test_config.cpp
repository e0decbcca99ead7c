#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "qid/config.hpp"

using namespace qid;

using Catch::Matchers::ContainsSubstring;

TEST_CASE("empty document resolves to the reference defaults") {
  RunConfig cfg = parse_config("");
  finalize_config(cfg);
  REQUIRE(cfg.model.j1 == 1.0);
  REQUIRE(cfg.model.j2 == 0.5);
  REQUIRE(cfg.model.d == 1.0);
  REQUIRE(cfg.model.a == 1e-3);
  REQUIRE(cfg.model.a0 == 1.0);
  REQUIRE(cfg.model.n == 1000);
  REQUIRE(cfg.model.zeta_decay == 5.0);
  REQUIRE_FALSE(cfg.zeta.has_value());
  REQUIRE(cfg.r_sites == 10);
  REQUIRE(cfg.source("j1") == Provenance::defaulted);
}

TEST_CASE("file values override defaults and are tracked") {
  RunConfig cfg = parse_config("d = 0\nr_sites = 20\n");
  finalize_config(cfg);
  REQUIRE(cfg.model.d == 0.0);
  REQUIRE(cfg.r_sites == 20);
  REQUIRE(cfg.source("d") == Provenance::file);
  REQUIRE(cfg.source("j1") == Provenance::defaulted);
}

TEST_CASE("electric field resolves the DMI constant") {
  SECTION("derived when d is absent") {
    RunConfig cfg = parse_config("e_y = 2\ng_me = 0.5\n");
    finalize_config(cfg);
    REQUIRE(cfg.model.d == 1.0);
    REQUIRE(cfg.source("d") == Provenance::derived);
  }
  SECTION("consistent explicit d is accepted") {
    RunConfig cfg = parse_config("d = 1\ne_y = 2\ng_me = 0.5\n");
    REQUIRE_NOTHROW(finalize_config(cfg));
  }
  SECTION("conflicting explicit d is rejected naming the keys") {
    RunConfig cfg = parse_config("d = 0.9\ne_y = 2\ng_me = 0.5\n");
    REQUIRE_THROWS_MATCHES(finalize_config(cfg), ConfigError,
                           Catch::Matchers::MessageMatches(
                               ContainsSubstring("e_y * g_me")));
  }
  SECTION("field alone multiplies the default coupling") {
    RunConfig cfg = parse_config("e_y = 2\n");
    finalize_config(cfg);
    REQUIRE(cfg.model.d == 2.0);  // g_me defaults to 1
  }
}

TEST_CASE("parse errors carry line numbers and key names") {
  REQUIRE_THROWS_MATCHES(
      parse_config("\n\nfoo = 1\n"), ConfigError,
      Catch::Matchers::MessageMatches(ContainsSubstring("line 3")));
  REQUIRE_THROWS_MATCHES(
      parse_config("foo = 1\n"), ConfigError,
      Catch::Matchers::MessageMatches(ContainsSubstring("'foo'")));
  REQUIRE_THROWS_MATCHES(
      parse_config("j1 = abc\n"), ConfigError,
      Catch::Matchers::MessageMatches(ContainsSubstring("'j1'")));
  REQUIRE_THROWS_MATCHES(
      parse_config("j1\n"), ConfigError,
      Catch::Matchers::MessageMatches(ContainsSubstring("key = value")));
  REQUIRE_THROWS_MATCHES(
      parse_config("j1 = 1\nj1 = 2\n"), ConfigError,
      Catch::Matchers::MessageMatches(ContainsSubstring("duplicate")));
}

TEST_CASE("sections are optional but enforced when present") {
  RunConfig cfg = parse_config(
      "# reference parameters\n"
      "[model]\n"
      "j1 = 2.0  # overrides the default\n"
      "d = 0.5\n"
      "[run]\n"
      "r_sites = 30\n");
  finalize_config(cfg);
  REQUIRE(cfg.model.j1 == 2.0);
  REQUIRE(cfg.model.d == 0.5);
  REQUIRE(cfg.r_sites == 30);

  REQUIRE_THROWS_MATCHES(
      parse_config("[model]\nr_sites = 5\n"), ConfigError,
      Catch::Matchers::MessageMatches(ContainsSubstring("[model]")));
  REQUIRE_THROWS_AS(parse_config("[weird]\n"), ConfigError);
}

TEST_CASE("flag layer wins over the file layer") {
  RunConfig cfg = parse_config("j1 = 2\nd = 0.25\n");
  set_key(cfg, "j1", "3", Provenance::flag, "flag --j1");
  finalize_config(cfg);
  REQUIRE(cfg.model.j1 == 3.0);
  REQUIRE(cfg.source("j1") == Provenance::flag);
  REQUIRE(cfg.source("d") == Provenance::file);
}

TEST_CASE("pairs syntax") {
  RunConfig cfg = parse_config("pairs = 1:4,1:14\n");
  finalize_config(cfg);
  REQUIRE(cfg.pairs.size() == 2);
  REQUIRE(cfg.pairs[0] == std::pair{0, 3});
  REQUIRE(cfg.pairs[1] == std::pair{0, 13});
  REQUIRE(render_key(cfg, "pairs") == "1:4,1:14");

  REQUIRE_THROWS_AS(parse_config("pairs = 3:3\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("pairs = 0:2\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("pairs = 1-2\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("pairs =\n"), ConfigError);
}

TEST_CASE("range validation at finalize") {
  const auto rejects = [](const std::string& text) {
    RunConfig cfg = parse_config(text);
    REQUIRE_THROWS_AS(finalize_config(cfg), ConfigError);
  };
  rejects("zeta = 0\n");
  rejects("zeta = 1.5\n");
  rejects("zeta_decay = -1\n");
  rejects("n = 1\n");
  rejects("j1 = 0\n");
  rejects("r_sites = 0\n");
  rejects("t_max = -2\n");
  rejects("dt = 0\n");
  rejects("d_min = -0.5\n");
  rejects("d_min = 2\nd_max = 1\n");
  rejects("d_steps = 0\n");
  rejects("n_sites = 3\n");
  rejects("n_sites = 129\n");
  rejects("displacement = 0\n");
  rejects("displacement = 16\n");  // default n_sites = 16
  rejects("pairs = 1:17\n");       // beyond default n_sites
  rejects("k_steps = 1\n");

  RunConfig ok = parse_config("zeta = 1\nn_sites = 32\ndisplacement = -5\n");
  REQUIRE_NOTHROW(finalize_config(ok));
}
