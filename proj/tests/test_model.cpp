#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "edml/json_io.hpp"
#include "edml/model.hpp"
#include "edml/rng.hpp"
#include "testsupport.hpp"

using namespace edml;

TEST_CASE("validate accepts a well-formed chain") {
  Network net = testing::chain_network();
  Parameterization params = testing::chain_params();
  CHECK(validate(net, params).ok());
}

TEST_CASE("validate reports a row off the simplex, naming the family") {
  Network net = testing::chain_network();
  Parameterization params = testing::chain_params();
  params[1].at(1, 1) = 0.9;  // row b|a1 now sums to 1.1
  ValidationReport report = validate(net, params);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].find("family b") != std::string::npos);
  CHECK(report.violations[0].find("row 1") != std::string::npos);
}

TEST_CASE("validate reports a parent cycle") {
  Variable a{"a", {"a0", "a1"}};
  Variable b{"b", {"b0", "b1"}};
  Network net({a, b}, {{1}, {0}});  // a -> b -> a
  Parameterization params;
  params.cpt.emplace_back(2, 2, 0.5);
  params.cpt.emplace_back(2, 2, 0.5);
  ValidationReport report = validate(net, params);
  REQUIRE_FALSE(report.ok());
  CHECK(report.violations[0].find("cycle") != std::string::npos);
}

TEST_CASE("uniform parameterization") {
  Rng rng(11);
  Network net = testing::random_network(rng, 3, 2, 3, 2);
  Parameterization params = uniform_parameterization(net);
  CHECK(params.cpt.size() == 3);
  for (int v = 0; v < net.num_variables(); ++v) {
    for (double p : params[v].v) {
      CHECK(p == doctest::Approx(1.0 / net.cardinality(v)));
    }
  }
  CHECK(validate(net, params).ok());
}

TEST_CASE("random parameterization is deterministic per seed and interior") {
  Rng rng(5);
  Network net = testing::random_network(rng, 6, 2, 3, 3);
  Parameterization a = random_parameterization(net, 42);
  Parameterization b = random_parameterization(net, 42);
  Parameterization c = random_parameterization(net, 43);
  CHECK(a == b);
  CHECK(a.max_abs_diff(c) > 0.0);
  CHECK(validate(net, a).ok());
  for (const Table& t : a.cpt) {
    for (double p : t.v) CHECK(p >= kInteriorFloor);
  }
}

TEST_CASE("dirichlet mode closed forms") {
  Network net = testing::chain_network();
  DirichletPrior prior = DirichletPrior::constant(net, 2.0);
  Parameterization mode = dirichlet_mode(prior);
  CHECK(mode[0].at(0, 0) == doctest::Approx(0.5));
  CHECK(mode[1].at(1, 0) == doctest::Approx(0.5));

  prior.psi[0].at(0, 0) = 3.0;  // psi = (3, 2)
  mode = dirichlet_mode(prior);
  CHECK(mode[0].at(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(mode[0].at(0, 1) == doctest::Approx(1.0 / 3.0));

  Variable t{"t", {"x", "y", "z"}};
  Network tri({t}, {{}});
  Parameterization tri_mode = dirichlet_mode(DirichletPrior::constant(tri, 2.0));
  for (double p : tri_mode[0].v) CHECK(p == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("dirichlet mode rejects exponents <= 1") {
  Network net = testing::chain_network();
  DirichletPrior prior = DirichletPrior::constant(net, 1.0);
  CHECK_THROWS_AS(dirichlet_mode(prior), std::invalid_argument);
}

TEST_CASE("dirichlet mode maximizes the prior density") {
  Rng rng(17);
  Network net = testing::random_network(rng, 4, 2, 3, 2);
  DirichletPrior prior = DirichletPrior::constant(net, 2.0);
  for (size_t v = 0; v < prior.psi.size(); ++v) {
    for (double& e : prior.psi[v].v) e = rng.uniform(1.1, 5.0);
  }
  Parameterization mode = dirichlet_mode(prior);
  double at_mode = prior_log_density(prior, mode);
  for (int trial = 0; trial < 100; ++trial) {
    Parameterization other = random_parameterization(net, 1000 + trial);
    CHECK(at_mode >= prior_log_density(prior, other));
  }
}

TEST_CASE("network, parameter and prior serialization round-trips") {
  Rng rng(23);
  Network net = testing::random_network(rng, 5, 2, 3, 2);
  Parameterization params = random_parameterization(net, 9);

  NetworkFile loaded = parse_network_json(network_json(net, params, "round"));
  CHECK(loaded.name == "round");
  CHECK(loaded.network.num_variables() == net.num_variables());
  for (int v = 0; v < net.num_variables(); ++v) {
    CHECK(loaded.network.variable(v).id == net.variable(v).id);
    CHECK(loaded.network.parents(v) == net.parents(v));
  }
  CHECK(loaded.params == params);

  Parameterization params2 = parse_params_json(net, params_json(net, params));
  CHECK(params2 == params);

  DirichletPrior prior = DirichletPrior::constant(net, 2.0);
  prior.psi[2].at(0, 0) = 3.5;
  DirichletPrior prior2 = parse_prior_json(net, prior_json(net, prior));
  CHECK(prior2.psi[2].at(0, 0) == 3.5);
  for (int v = 0; v < net.num_variables(); ++v) CHECK(prior2.psi[v] == prior.psi[v]);
}

TEST_CASE("row indexing: last parent varies fastest") {
  Variable a{"a", {"a0", "a1"}};
  Variable b{"b", {"b0", "b1", "b2"}};
  Variable c{"c", {"c0", "c1"}};
  Network net({a, b, c}, {{}, {}, {0, 1}});
  CHECK(net.num_rows(2) == 6);
  std::vector<int> assignment = {1, 2, 0};
  CHECK(net.row_of(2, assignment) == 1 * 3 + 2);
  CHECK(net.row_values(2, 5) == std::vector<int>{1, 2});
}
