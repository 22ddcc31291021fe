#ifndef EDML_TESTS_TESTSUPPORT_HPP
#define EDML_TESTS_TESTSUPPORT_HPP

#include <vector>

#include "edml/data.hpp"
#include "edml/model.hpp"
#include "edml/rng.hpp"

namespace edml::testing {

// Random DAG: variables v0..v{n-1}, edges only from lower to higher index,
// at most max_parents parents, cardinalities drawn in [min_card, max_card].
Network random_network(Rng& rng, int n, int min_card, int max_card, int max_parents);

// Observes each variable independently with probability p_observe.
Evidence random_evidence(Rng& rng, const Network& net, double p_observe);

// Independent evaluation of the island log objective:
//   sum_x (psi_x - 1) log theta_x + sum_i log sum_x lambda^i_x theta_x,
// with examples beyond lambdas.size() (up to n) neutral.
double island_log_objective(const std::vector<double>& theta,
                            const std::vector<std::vector<double>>& lambdas,
                            const std::vector<double>& psi, int n);

// Argmax over theta = (p, 1-p) of the island objective by grid scan.
double grid_search_binary_island(const std::vector<std::vector<double>>& lambdas,
                                 const std::vector<double>& psi, int n, double resolution);

struct RandomIsland {
  std::vector<double> psi;
  std::vector<std::vector<double>> lambdas;
  int n = 0;
};

// psi in (psi_low, psi_high], lambda entries in [0, 2) with occasional zeros,
// example count in [1, max_examples].
RandomIsland random_island(Rng& rng, int cardinality, int max_examples, double psi_low,
                           double psi_high);

// Two-variable chain a -> b, both binary, with fixed interior CPTs.
Network chain_network();
Parameterization chain_params();

}  // namespace edml::testing

#endif  // EDML_TESTS_TESTSUPPORT_HPP
