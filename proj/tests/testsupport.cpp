#include "testsupport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace edml::testing {

Network random_network(Rng& rng, int n, int min_card, int max_card, int max_parents) {
  std::vector<Variable> vars;
  vars.reserve(n);
  for (int v = 0; v < n; ++v) {
    Variable var;
    var.id = "v" + std::to_string(v);
    int card = min_card + static_cast<int>(rng.below(max_card - min_card + 1));
    for (int x = 0; x < card; ++x) var.values.push_back("s" + std::to_string(x));
    vars.push_back(std::move(var));
  }
  std::vector<std::vector<int>> parents(n);
  for (int v = 1; v < n; ++v) {
    int want = static_cast<int>(rng.below(std::min(max_parents, v) + 1));
    std::vector<int> pool(v);
    for (int j = 0; j < v; ++j) pool[j] = j;
    for (int j = 0; j < want; ++j) {
      int pick = j + static_cast<int>(rng.below(pool.size() - j));
      std::swap(pool[j], pool[pick]);
      parents[v].push_back(pool[j]);
    }
  }
  return Network(std::move(vars), std::move(parents));
}

Evidence random_evidence(Rng& rng, const Network& net, double p_observe) {
  Evidence e(net.num_variables());
  for (int v = 0; v < net.num_variables(); ++v) {
    if (rng.uniform01() < p_observe) {
      e.set(v, static_cast<int>(rng.below(net.cardinality(v))));
    }
  }
  return e;
}

double island_log_objective(const std::vector<double>& theta,
                            const std::vector<std::vector<double>>& lambdas,
                            const std::vector<double>& psi, int n) {
  double obj = 0.0;
  double theta_sum = 0.0;
  for (size_t x = 0; x < theta.size(); ++x) {
    theta_sum += theta[x];
    double w = psi[x] - 1.0;
    if (w != 0.0) {
      if (theta[x] <= 0.0) return -std::numeric_limits<double>::infinity();
      obj += w * std::log(theta[x]);
    }
  }
  for (const auto& lam : lambdas) {
    double s = 0.0;
    for (size_t x = 0; x < theta.size(); ++x) s += lam[x] * theta[x];
    if (s <= 0.0) return -std::numeric_limits<double>::infinity();
    obj += std::log(s);
  }
  double neutral = static_cast<double>(n) - static_cast<double>(lambdas.size());
  if (neutral > 0.0) obj += neutral * std::log(theta_sum);
  return obj;
}

double grid_search_binary_island(const std::vector<std::vector<double>>& lambdas,
                                 const std::vector<double>& psi, int n, double resolution) {
  double best_p = resolution, best_obj = -std::numeric_limits<double>::infinity();
  for (double p = resolution; p < 1.0; p += resolution) {
    double obj = island_log_objective({p, 1.0 - p}, lambdas, psi, n);
    if (obj > best_obj) {
      best_obj = obj;
      best_p = p;
    }
  }
  return best_p;
}

RandomIsland random_island(Rng& rng, int cardinality, int max_examples, double psi_low,
                           double psi_high) {
  RandomIsland island;
  island.n = 1 + static_cast<int>(rng.below(max_examples));
  for (int x = 0; x < cardinality; ++x) {
    island.psi.push_back(rng.uniform(psi_low, psi_high));
  }
  // A mix of genuinely soft, hard-ish and neutral-ish vectors.
  int explicit_count = static_cast<int>(rng.below(island.n + 1));
  for (int i = 0; i < explicit_count; ++i) {
    std::vector<double> lam(cardinality);
    double kind = rng.uniform01();
    if (kind < 0.15) {
      int keep = static_cast<int>(rng.below(cardinality));
      for (int x = 0; x < cardinality; ++x) lam[x] = x == keep ? rng.uniform(0.2, 2.0) : 0.0;
    } else {
      for (int x = 0; x < cardinality; ++x) lam[x] = rng.uniform(0.05, 2.0);
    }
    island.lambdas.push_back(std::move(lam));
  }
  return island;
}

Network chain_network() {
  Variable a{"a", {"a0", "a1"}};
  Variable b{"b", {"b0", "b1"}};
  return Network({a, b}, {{}, {0}});
}

Parameterization chain_params() {
  Parameterization p;
  p.cpt.emplace_back(1, 2);
  p.cpt[0].at(0, 0) = 0.3;
  p.cpt[0].at(0, 1) = 0.7;
  p.cpt.emplace_back(2, 2);
  p.cpt[1].at(0, 0) = 0.9;
  p.cpt[1].at(0, 1) = 0.1;
  p.cpt[1].at(1, 0) = 0.2;
  p.cpt[1].at(1, 1) = 0.8;
  return p;
}

}  // namespace edml::testing
