#include "doctest.h"

#include <cmath>

#include "edml/infer.hpp"
#include "edml/rng.hpp"
#include "testsupport.hpp"

using namespace edml;

namespace {

double max_marginal_diff(const FamilyMarginals& a, const FamilyMarginals& b) {
  double worst = 0.0;
  for (size_t v = 0; v < a.joint.size(); ++v) {
    for (size_t j = 0; j < a.joint[v].v.size(); ++j) {
      worst = std::max(worst, std::fabs(a.joint[v].v[j] - b.joint[v].v[j]));
    }
    for (size_t r = 0; r < a.parent[v].size(); ++r) {
      worst = std::max(worst, std::fabs(a.parent[v][r] - b.parent[v][r]));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("calibrate on a chain with no evidence gives prior family marginals") {
  Network net = testing::chain_network();
  Parameterization params = testing::chain_params();
  FamilyMarginals m = calibrate(net, params, Evidence(2));
  // family of b: joint(a, b) = theta_a * theta_b|a
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      CHECK(m.joint[1].at(a, b) ==
            doctest::Approx(params[0].at(0, a) * params[1].at(a, b)).epsilon(1e-12));
    }
    CHECK(m.parent[1][a] == doctest::Approx(params[0].at(0, a)).epsilon(1e-12));
  }
  CHECK(m.log_evidence == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("calibrate with full evidence yields 0/1 family marginals") {
  Network net = testing::chain_network();
  Parameterization params = testing::chain_params();
  Evidence e(2);
  e.set(0, 1);
  e.set(1, 0);
  FamilyMarginals m = calibrate(net, params, e);
  CHECK(m.joint[0].at(0, 1) == 1.0);
  CHECK(m.joint[0].at(0, 0) == 0.0);
  CHECK(m.joint[1].at(1, 0) == 1.0);
  CHECK(m.joint[1].at(0, 0) == 0.0);
  CHECK(m.evidence_probability() == doctest::Approx(0.7 * 0.2).epsilon(1e-12));
}

TEST_CASE("calibrate agrees with the brute-force oracle on random problems") {
  Rng rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    Network net = testing::random_network(rng, 5 + static_cast<int>(rng.below(4)), 2, 3, 3);
    Parameterization params = random_parameterization(net, 500 + trial);
    Evidence e = testing::random_evidence(rng, net, 0.4);
    FamilyMarginals fast, slow;
    try {
      slow = brute_force_marginals(net, params, e);
    } catch (const ImpossibleEvidenceError&) {
      CHECK_THROWS_AS(calibrate(net, params, e), ImpossibleEvidenceError);
      continue;
    }
    fast = calibrate(net, params, e);
    CHECK(max_marginal_diff(fast, slow) < 1e-10);
    CHECK(fast.log_evidence == doctest::Approx(slow.log_evidence).epsilon(1e-10));
  }
}

TEST_CASE("brute force on a single variable with no evidence returns theta") {
  Variable x{"x", {"s0", "s1", "s2"}};
  Network net({x}, {{}});
  Parameterization params;
  params.cpt.emplace_back(1, 3);
  params[0].at(0, 0) = 0.2;
  params[0].at(0, 1) = 0.5;
  params[0].at(0, 2) = 0.3;
  FamilyMarginals m = brute_force_marginals(net, params, Evidence(1));
  CHECK(m.joint[0].at(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.parent[0][0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("brute force rejects oversized state spaces") {
  Rng rng(3);
  Network net = testing::random_network(rng, 30, 2, 2, 2);
  Parameterization params = uniform_parameterization(net);
  CHECK_THROWS_AS(brute_force_marginals(net, params, Evidence(30)), std::invalid_argument);
}

TEST_CASE("family consistency holds on random instances") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Network net = testing::random_network(rng, 6, 2, 3, 2);
    Parameterization params = random_parameterization(net, trial);
    Evidence e = testing::random_evidence(rng, net, 0.3);
    FamilyMarginals m;
    try {
      m = calibrate(net, params, e);
    } catch (const ImpossibleEvidenceError&) {
      continue;
    }
    for (int v = 0; v < net.num_variables(); ++v) {
      double total = 0.0;
      for (int r = 0; r < m.joint[v].rows; ++r) {
        double row = 0.0;
        for (int x = 0; x < m.joint[v].width; ++x) row += m.joint[v].at(r, x);
        CHECK(row == doctest::Approx(m.parent[v][r]).epsilon(1e-9));
        total += m.parent[v][r];
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("adding evidence never increases the evidence probability") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    Network net = testing::random_network(rng, 6, 2, 3, 2);
    Parameterization params = random_parameterization(net, 70 + trial);
    InferenceEngine engine(net);
    engine.set_params(params);
    Evidence e(net.num_variables());
    double previous = 0.0;  // log Pr(empty) = 0
    for (int v = 0; v < net.num_variables(); ++v) {
      e.set(v, static_cast<int>(rng.below(net.cardinality(v))));
      double now;
      try {
        now = engine.log_evidence(e);
      } catch (const ImpossibleEvidenceError&) {
        break;  // probability hit zero, which only confirms the monotone drop
      }
      CHECK(now <= previous + 1e-12);
      previous = now;
    }
  }
}

TEST_CASE("marginals are invariant to the rescaling schedule") {
  Rng rng(19);
  Network net = testing::random_network(rng, 7, 2, 3, 2);
  Parameterization params = random_parameterization(net, 3);
  Evidence e = testing::random_evidence(rng, net, 0.4);

  InferenceEngine never(net, {0.0});
  InferenceEngine always(net, {1.0});
  never.set_params(params);
  always.set_params(params);
  FamilyMarginals a = never.marginals(e);
  FamilyMarginals b = always.marginals(e);
  CHECK(max_marginal_diff(a, b) < 1e-9);
  CHECK(a.log_evidence == doctest::Approx(b.log_evidence).epsilon(1e-9));
}

TEST_CASE("log likelihood factorizes on complete data") {
  Network net = testing::chain_network();
  Parameterization params = testing::chain_params();
  Dataset ds;
  Evidence e1(2);
  e1.set(0, 0);
  e1.set(1, 1);
  Evidence e2(2);
  e2.set(0, 1);
  e2.set(1, 1);
  ds.examples = {e1, e2};
  double expected = std::log(0.3) + std::log(0.1) + std::log(0.7) + std::log(0.8);
  CHECK(log_likelihood(net, params, ds) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("log likelihood of empty-evidence examples is zero") {
  Network net = testing::chain_network();
  Parameterization params = testing::chain_params();
  Dataset ds;
  ds.examples = {Evidence(2), Evidence(2), Evidence(2)};
  CHECK(log_likelihood(net, params, ds) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("log likelihood matches brute-force summation on incomplete data") {
  Rng rng(29);
  Network net = testing::random_network(rng, 8, 2, 2, 3);
  Parameterization params = random_parameterization(net, 4);
  Dataset ds;
  for (int i = 0; i < 10; ++i) {
    ds.examples.push_back(testing::random_evidence(rng, net, 0.5));
  }
  double expected = 0.0;
  for (const Evidence& e : ds.examples) {
    expected += brute_force_marginals(net, params, e).log_evidence;
  }
  CHECK(log_likelihood(net, params, ds) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("impossible evidence error names the example") {
  Network net = testing::chain_network();
  Parameterization params = testing::chain_params();
  params[1].at(0, 0) = 0.0;  // b0 impossible under a0
  params[1].at(0, 1) = 1.0;
  Dataset ds;
  Evidence ok(2);
  ok.set(0, 1);
  Evidence bad(2);
  bad.set(0, 0);
  bad.set(1, 0);
  ds.examples = {ok, bad};
  try {
    log_likelihood(net, params, ds);
    FAIL("expected ImpossibleEvidenceError");
  } catch (const ImpossibleEvidenceError& e) {
    CHECK(e.example == 1);
  }
}

TEST_CASE("log posterior reduces to the likelihood under a flat prior") {
  Network net = testing::chain_network();
  Parameterization params = testing::chain_params();
  Dataset ds;
  Evidence e(2);
  e.set(0, 0);
  ds.examples = {e};
  DirichletPrior flat = DirichletPrior::constant(net, 1.0);
  CHECK(log_posterior(net, params, ds, flat) ==
        doctest::Approx(log_likelihood(net, params, ds)).epsilon(1e-12));
}

TEST_CASE("log posterior with an empty dataset is maximized by the prior mode") {
  Rng rng(31);
  Network net = testing::random_network(rng, 4, 2, 3, 2);
  DirichletPrior prior = DirichletPrior::constant(net, 3.0);
  Dataset empty;
  Parameterization mode = dirichlet_mode(prior);
  double at_mode = log_posterior(net, mode, empty, prior);
  for (int trial = 0; trial < 25; ++trial) {
    Parameterization other = random_parameterization(net, 800 + trial);
    CHECK(at_mode >= log_posterior(net, other, empty, prior));
  }
}

TEST_CASE("log posterior matches a direct evaluation of the formula") {
  Network net = testing::chain_network();
  Parameterization params = testing::chain_params();
  DirichletPrior prior = DirichletPrior::constant(net, 2.0);
  prior.psi[1].at(0, 1) = 4.0;
  Dataset ds;
  Evidence e(2);
  e.set(1, 0);
  ds.examples = {e};

  // Hand-rolled: prior term over every family entry plus log Pr(b = b0).
  double expected = 0.0;
  for (int v = 0; v < 2; ++v) {
    for (int r = 0; r < params[v].rows; ++r) {
      for (int x = 0; x < params[v].width; ++x) {
        expected += (prior[v].at(r, x) - 1.0) * std::log(params[v].at(r, x));
      }
    }
  }
  expected += std::log(0.3 * 0.9 + 0.7 * 0.2);
  CHECK(log_posterior(net, params, ds, prior) == doctest::Approx(expected).epsilon(1e-12));

  // Zero parameter with exponent > 1 reports the -infinity sentinel.
  Parameterization zeroed = params;
  zeroed[0].at(0, 0) = 0.0;
  zeroed[0].at(0, 1) = 1.0;
  CHECK(log_posterior(net, zeroed, ds, prior) == -std::numeric_limits<double>::infinity());
}
