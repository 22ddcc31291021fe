#include "edml/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "edml/rng.hpp"

namespace edml {

int Variable::value_index(const std::string& label) const {
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] == label) return static_cast<int>(i);
  }
  return -1;
}

Network::Network(std::vector<Variable> variables, std::vector<std::vector<int>> parents)
    : variables_(std::move(variables)), parents_(std::move(parents)) {
  if (parents_.size() != variables_.size()) {
    throw std::invalid_argument("network: one parent list per variable required");
  }
  for (size_t v = 0; v < variables_.size(); ++v) {
    index_[variables_[v].id] = static_cast<int>(v);
    for (int p : parents_[v]) {
      if (p < 0 || p >= static_cast<int>(variables_.size())) {
        throw std::invalid_argument("network: parent index out of range for variable " +
                                    variables_[v].id);
      }
    }
  }
  if (index_.size() != variables_.size()) {
    throw std::invalid_argument("network: duplicate variable id");
  }
}

int Network::var_index(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

int Network::num_rows(int v) const {
  int rows = 1;
  for (int p : parents_[v]) rows *= cardinality(p);
  return rows;
}

int Network::row_of(int v, const std::vector<int>& assignment) const {
  int row = 0;
  for (int p : parents_[v]) row = row * cardinality(p) + assignment[p];
  return row;
}

std::vector<int> Network::row_values(int v, int row) const {
  const auto& ps = parents_[v];
  std::vector<int> vals(ps.size());
  for (int j = static_cast<int>(ps.size()) - 1; j >= 0; --j) {
    int c = cardinality(ps[j]);
    vals[j] = row % c;
    row /= c;
  }
  return vals;
}

std::optional<std::vector<int>> Network::topological_order() const {
  int n = num_variables();
  std::vector<int> remaining_parents(n, 0);
  std::vector<std::vector<int>> children(n);
  for (int v = 0; v < n; ++v) {
    remaining_parents[v] = static_cast<int>(parents_[v].size());
    for (int p : parents_[v]) children[p].push_back(v);
  }
  std::vector<int> order;
  order.reserve(n);
  std::vector<int> ready;
  for (int v = 0; v < n; ++v) {
    if (remaining_parents[v] == 0) ready.push_back(v);
  }
  // Kahn's algorithm; smallest index first for a deterministic order.
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end(), std::greater<int>());
    int v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (int c : children[v]) {
      if (--remaining_parents[c] == 0) ready.push_back(c);
    }
  }
  if (static_cast<int>(order.size()) != n) return std::nullopt;
  return order;
}

size_t Network::num_parameters() const {
  size_t total = 0;
  for (int v = 0; v < num_variables(); ++v) {
    total += static_cast<size_t>(num_rows(v)) * cardinality(v);
  }
  return total;
}

double Parameterization::max_abs_diff(const Parameterization& other) const {
  double worst = 0.0;
  for (size_t v = 0; v < cpt.size(); ++v) {
    for (size_t i = 0; i < cpt[v].v.size(); ++i) {
      worst = std::max(worst, std::fabs(cpt[v].v[i] - other.cpt[v].v[i]));
    }
  }
  return worst;
}

DirichletPrior DirichletPrior::constant(const Network& net, double value) {
  DirichletPrior prior;
  prior.psi.reserve(net.num_variables());
  for (int v = 0; v < net.num_variables(); ++v) {
    prior.psi.emplace_back(net.num_rows(v), net.cardinality(v), value);
  }
  return prior;
}

int Evidence::num_observed() const {
  int n = 0;
  for (int x : vals_) n += (x >= 0);
  return n;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& s : violations) os << s << "\n";
  return os.str();
}

ValidationReport validate(const Network& net, const Parameterization& params) {
  ValidationReport report;
  auto add = [&report](const std::string& s) { report.violations.push_back(s); };

  for (int v = 0; v < net.num_variables(); ++v) {
    const Variable& var = net.variable(v);
    if (var.cardinality() < 2) {
      add("variable " + var.id + ": cardinality must be at least 2");
    }
    std::vector<std::string> labels = var.values;
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
      add("variable " + var.id + ": duplicate value labels");
    }
  }
  if (!net.topological_order()) {
    add("network: parent relation has a cycle (no topological order exists)");
  }

  if (params.cpt.size() != static_cast<size_t>(net.num_variables())) {
    add("parameterization: expected " + std::to_string(net.num_variables()) +
        " parameter tables, found " + std::to_string(params.cpt.size()));
    return report;  // shapes unusable, stop here
  }
  for (int v = 0; v < net.num_variables(); ++v) {
    const Table& t = params[v];
    const std::string& id = net.variable(v).id;
    if (t.rows != net.num_rows(v) || t.width != net.cardinality(v) ||
        t.v.size() != static_cast<size_t>(t.rows) * t.width) {
      add("family " + id + ": table shape mismatch (want " + std::to_string(net.num_rows(v)) +
          "x" + std::to_string(net.cardinality(v)) + ")");
      continue;
    }
    for (int r = 0; r < t.rows; ++r) {
      double sum = 0.0;
      bool in_range = true;
      for (int x = 0; x < t.width; ++x) {
        double p = t.at(r, x);
        sum += p;
        if (!(p >= 0.0 && p <= 1.0)) in_range = false;
      }
      if (!in_range) {
        add("family " + id + " row " + std::to_string(r) + ": probability outside [0, 1]");
      }
      if (std::fabs(sum - 1.0) > kSimplexTolerance) {
        std::ostringstream os;
        os << "family " << id << " row " << r << ": probabilities sum to " << sum;
        add(os.str());
      }
    }
  }
  return report;
}

Parameterization uniform_parameterization(const Network& net) {
  Parameterization params;
  params.cpt.reserve(net.num_variables());
  for (int v = 0; v < net.num_variables(); ++v) {
    int k = net.cardinality(v);
    params.cpt.emplace_back(net.num_rows(v), k, 1.0 / k);
  }
  return params;
}

Parameterization random_parameterization(const Network& net, std::uint64_t seed) {
  Rng rng(seed);
  Parameterization params;
  params.cpt.reserve(net.num_variables());
  for (int v = 0; v < net.num_variables(); ++v) {
    int k = net.cardinality(v);
    Table t(net.num_rows(v), k);
    for (int r = 0; r < t.rows; ++r) {
      // Dirichlet(1) point, then pushed onto the floor-shrunk simplex so
      // every entry stays at least kInteriorFloor.
      double sum = 0.0;
      for (int x = 0; x < k; ++x) {
        double e = -std::log(1.0 - rng.uniform01());
        t.at(r, x) = e;
        sum += e;
      }
      double slack = 1.0 - k * kInteriorFloor;
      for (int x = 0; x < k; ++x) {
        t.at(r, x) = kInteriorFloor + slack * (t.at(r, x) / sum);
      }
    }
    params.cpt.push_back(std::move(t));
  }
  return params;
}

Parameterization dirichlet_mode(const DirichletPrior& prior) {
  Parameterization params;
  params.cpt.reserve(prior.psi.size());
  for (const Table& psi : prior.psi) {
    Table t(psi.rows, psi.width);
    for (int r = 0; r < psi.rows; ++r) {
      double total = 0.0;
      for (int x = 0; x < psi.width; ++x) {
        if (psi.at(r, x) <= 1.0) {
          throw std::invalid_argument("dirichlet_mode: exponents must be > 1");
        }
        total += psi.at(r, x);
      }
      double denom = total - psi.width;
      for (int x = 0; x < psi.width; ++x) {
        t.at(r, x) = (psi.at(r, x) - 1.0) / denom;
      }
    }
    params.cpt.push_back(std::move(t));
  }
  return params;
}

double prior_log_density(const DirichletPrior& prior, const Parameterization& params) {
  double logp = 0.0;
  for (size_t v = 0; v < prior.psi.size(); ++v) {
    const Table& psi = prior.psi[v];
    const Table& cpt = params.cpt[v];
    for (size_t i = 0; i < psi.v.size(); ++i) {
      double w = psi.v[i] - 1.0;
      if (w == 0.0) continue;
      if (cpt.v[i] <= 0.0) {
        if (w > 0.0) return -std::numeric_limits<double>::infinity();
        continue;
      }
      logp += w * std::log(cpt.v[i]);
    }
  }
  return logp;
}

}  // namespace edml
