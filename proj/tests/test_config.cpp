#include "common.hpp"
#include "doctest.h"

#include "cyclores/config.hpp"
#include "cyclores/errors.hpp"
#include "cyclores/runner.hpp"
#include "cyclores/trajectory.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>

using namespace cyclores;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(CYCLORES_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

template <typename E>
E catch_as(auto&& f) {
  try {
    f();
  } catch (const E& e) {
    return e;
  }
  FAIL("expected exception not thrown");
  throw;
}

const char* kMinimal =
    "mode simulate\n"
    "b 1\nomega 1\nepsilon 0.35\n"
    "sin 1 1\ncos 2 -0.3333333333333333\n"
    "ratio 1/1\nq0 1 0\nv0 0 1.617\n";

}  // namespace

TEST_CASE("shipped configs") {
  const auto c = load_config(std::string(CYCLORES_CONFIG_DIR) + "/spiral.cfg");
  CHECK(c.mode == Mode::simulate);
  CHECK(c.params.epsilon == 0.35);
  CHECK(c.params.p_theta == doctest::Approx(test::spiral_p_theta()).epsilon(1e-15));
  CHECK_FALSE(c.p_theta_explicit);
  CHECK(c.params.pair == ResonancePair::from_ratio(1, 1));
  CHECK(c.samples == 3001);
  CHECK(c.tol.rel == 1e-11);
  CHECK(parse_config(serialize_config(c)) == c);
  CHECK(serialize_config(parse_config(serialize_config(c))) == serialize_config(c));

  const auto s = load_config(std::string(CYCLORES_CONFIG_DIR) + "/scan.cfg");
  CHECK(s.mode == Mode::scan);
  CHECK(s.ratios.size() == 4);
  CHECK(s.ratios[2] == std::pair<std::int64_t, std::int64_t>{1, 3});
  CHECK(parse_config(serialize_config(s)) == s);
}

TEST_CASE("syntax errors") {
  const auto e = catch_as<ParseError>([] { parse_config(""); });
  CHECK(e.line == 1);
  CHECK(e.column == 1);
  CHECK_THROWS_AS(parse_config("# only a comment\n\n"), ParseError);

  const auto many = catch_as<ParseError>([] {
    parse_config(std::string(kMinimal) + "epsilon 0.1\nbogus 3\nt1 abc\n");
  });
  CHECK(many.line == 10);
  const std::string msg = many.what();
  CHECK(msg.find("line 11") != std::string::npos);
  CHECK(msg.find("line 12") != std::string::npos);
  CHECK(msg.find("bogus") != std::string::npos);

  const auto col = catch_as<ParseError>([] { parse_config("mode simulate\nb   x\n"); });
  CHECK(col.line == 2);
  CHECK(col.column == 5);
}

TEST_CASE("validation errors") {
  const auto e = catch_as<ValidationError>([] {
    parse_config("mode simulate\nb 1\nomega 1\nepsilon 2\np_theta 1\nsin 1 1\ncos 2 -0.3333333333333333\n");
  });
  CHECK(std::string(e.what()).find("epsilon*max|f| >= p_theta") != std::string::npos);

  const auto all = catch_as<ValidationError>([] {
    parse_config("mode scan\nb -1\nomega 1\nepsilon 0.1\np_theta 1\nsin 1 1\nt0 5\nt1 1\n");
  });
  const std::string msg = all.what();
  CHECK(msg.find("b > 0") != std::string::npos);
  CHECK(msg.find("t1 > t0") != std::string::npos);
  CHECK(msg.find("ratios") != std::string::npos);

  CHECK_THROWS_AS(parse_config("mode simulate\nb 1\nomega 1\nepsilon 0.1\nsin 1 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "omega 2\n"), ParseError);  // duplicate
  CHECK_THROWS_AS(parse_config("mode simulate\nb 1\nomega 2\nepsilon 0.1\np_theta 1\nsin 1 1\nratio 1/1\n"),
                  ValidationError);
}

TEST_CASE("runs write their manifest") {
  const fs::path dir = scratch("simulate");
  auto c = parse_config(kMinimal);
  RunOverrides ov;
  ov.out = dir.string();
  ov.horizon = 20.0;
  c = apply_overrides(c, ov);
  CHECK(c.t1 == 20.0);
  const auto r = run(c);
  CHECK(fs::exists(r.manifest_path));
  std::ifstream is(r.manifest_path);
  const auto m = nlohmann::json::parse(is);
  CHECK(m["mode"] == "simulate");
  CHECK(m["params_digest"] == c.params.digest());
  for (const char* f : {"trajectory.csv", "actionangle.csv", "guiding.csv", "plot_q.csv", "plot_I.csv"}) {
    CHECK(fs::exists(dir / f));
  }
  CHECK(parse_config(m["config"].get<std::string>()) == c);

  // analyze refuses a trajectory produced with other parameters
  auto a = parse_config(std::string("mode analyze\nb 1\nomega 1\nepsilon 0.3\nsin 1 1\n"
                                    "cos 2 -0.3333333333333333\nratio 1/1\nq0 1 0\nv0 0 1.617\n"
                                    "trajectory ") + (dir / "trajectory.csv").string() +
                        "\nout " + scratch("analyze").string() + "\n");
  CHECK_THROWS_AS(run(a), ValidationError);

  const fs::path pm = scratch("periodmap");
  auto p = parse_config("mode periodmap\nb 1\nomega 1\nepsilon 0\np_theta 1\npm_h0 100 1000\nout " +
                        pm.string() + "\n");
  run(p);
  const auto t = CsvTable::read_file((pm / "periodmap.csv").string());
  CHECK(t.rows.size() == 2);

  write_error_record(pm.string(), ValidationError("x"));
  std::ifstream es(pm / "error.json");
  CHECK(nlohmann::json::parse(es)["error"] == "ValidationError");
  CHECK(error_kind(ParseError("y", 1, 1)) == "ParseError");
}
