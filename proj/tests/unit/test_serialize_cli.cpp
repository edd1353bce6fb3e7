#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "cli.hpp"
#include "quadm/error.hpp"
#include "quadm/serialize.hpp"

using namespace quadm;

namespace {
std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("quadm_unit_" + name)).string();
}

bool has(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}
}  // namespace

TEST_CASE("doubles print losslessly") {
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 5e-324}) CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(dump(Json{{"a", 0.5}, {"b", {1.0, 2.0}}}, 0) == "{\"a\":0.5,\"b\":[1, 2]}");
}

TEST_CASE("pointset JSON round trip is exact") {
  for (const auto& ps : {random_points(Manifold::torus(2), 13, 4), fibonacci(17), jittered(Manifold::torus(3), 8, 1)}) {
    const auto path = tmp("rt.json");
    save_pointset(ps, path);
    const auto back = load_pointset(path);
    CHECK(back.manifold == ps.manifold);
    REQUIRE(back.size() == ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
      CHECK(back.nodes[i] == ps.nodes[i]);
      CHECK(back.weights[i] == ps.weights[i]);
    }
    CHECK(dump(to_json(back)) == dump(to_json(ps)));
  }
}

TEST_CASE("malformed pointsets are rejected") {
  CHECK_THROWS_AS(pointset_from_json(Json::parse(R"({"nodes": [], "weights": []})")), InvalidArgument);
  CHECK_THROWS_AS(pointset_from_json(Json::parse(R"({"manifold": "torus:2", "nodes": [[0.1]], "weights": [1]})")),
                  InvalidArgument);
  CHECK_THROWS_AS(pointset_from_json(Json::parse(R"({"manifold": "torus:1", "nodes": [[0.1]], "weights": [0.7]})")),
                  InvalidArgument);
  const auto path = tmp("bad.json");
  write_text(path, "{not json");
  CHECK_THROWS_AS(load_pointset(path), InvalidArgument);
}

TEST_CASE("pointset csv") {
  const auto csv = pointset_csv(lattice(Manifold::torus(2), 2));
  CHECK(csv.rfind("x0,x1,weight\n", 0) == 0);
  CHECK(csv.find("0.5,0.5,0.25") != std::string::npos);
}

TEST_CASE("config validation") {
  cli::ExperimentConfig c;
  c.task = "wce";
  c.manifold = "torus:1";
  c.family = "random";
  c.n = {10};
  c.alpha = 0.4;
  CHECK(has(cli::validate(c), "alpha must exceed d/2 = 0.5"));
  c.alpha = 1.5;
  CHECK(cli::validate(c).empty());

  cli::ExperimentConfig g;
  g.task = "gen";
  g.manifold = "torus:2";
  g.family = "jittered";
  g.n = {6};
  CHECK(has(cli::validate(g), "N must be a perfect d-th power"));
  g.n = {16};
  CHECK(cli::validate(g).empty());

  cli::ExperimentConfig s;
  s.task = "scale";
  s.family = "random";
  s.n = {16, 64};
  s.alpha = 1.0;
  CHECK(has(cli::validate(s), "at least 3 sizes"));
  cli::ExperimentConfig t;
  t.task = "transfer";
  t.family = "random";
  t.n = {8};
  t.alpha = 1.5;
  t.beta = 2.0;
  CHECK(has(cli::validate(t), "beta must lie in (d/2, alpha]"));
  cli::ExperimentConfig u;
  u.task = "frobnicate";
  CHECK(has(cli::validate(u), "task"));
}

TEST_CASE("config JSON and hash") {
  std::vector<std::string> bad;
  const auto c = cli::from_json(Json::parse(R"({"task": "wce", "alpha": "1.5", "n": "4,8", "q": "inf", "colour": 1})"), &bad);
  CHECK(c.alpha == 1.5);
  CHECK(c.n == std::vector<std::size_t>{4, 8});
  CHECK(std::isinf(c.q));
  CHECK(has(bad, "colour: unknown field"));
  auto d = c;
  d.out = "elsewhere.json";
  CHECK(cli::hash_of(c) == cli::hash_of(d));
  d.alpha = 1.6;
  CHECK(cli::hash_of(c) != cli::hash_of(d));
  std::vector<std::string> none;
  const auto back = cli::from_json(cli::to_json(c), &none);
  CHECK(cli::hash_of(back) == cli::hash_of(c));
}

TEST_CASE("run writes identical artifacts twice") {
  cli::ExperimentConfig c;
  c.task = "scale";
  c.manifold = "torus:2";
  c.family = "jittered";
  c.n = {4, 16, 64};
  c.seeds = 2;
  c.alpha = 1.3;
  c.method = "kernel";
  std::string text[2];
  for (int k = 0; k < 2; ++k) {
    c.out = tmp("scale" + std::to_string(k) + ".json");
    c.csv = tmp("scale" + std::to_string(k) + ".csv");
    const auto r = cli::run(c);
    REQUIRE(r.status == 0);
    text[k] = read_text(c.out) + read_text(c.csv);
  }
  CHECK(text[0] == text[1]);
  const auto csv = read_text(c.csv);
  CHECK(csv.find("# quadm " + version() + " config " + cli::hash_of(c)) == 0);
  CHECK(csv.find("abscissa,seed,value\n") != std::string::npos);
  CHECK(read_text(c.out).find(cli::hash_of(c)) != std::string::npos);
}

TEST_CASE("run reports invalid input with status 2") {
  cli::ExperimentConfig c;
  c.task = "wce";
  c.in = tmp("missing.json");
  c.alpha = 1.0;
  CHECK(cli::run(c).status == 2);
}
