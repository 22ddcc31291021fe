#include "edml/infer.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

namespace edml {

namespace {

// Number of fill-in edges eliminating v would add.
int fill_count(const std::vector<std::set<int>>& adj, int v) {
  int fill = 0;
  for (auto i = adj[v].begin(); i != adj[v].end(); ++i) {
    for (auto j = std::next(i); j != adj[v].end(); ++j) {
      if (!adj[*i].count(*j)) ++fill;
    }
  }
  return fill;
}

}  // namespace

CliqueTree::CliqueTree(const Network& net) {
  int n = net.num_variables();

  // Moral graph.
  std::vector<std::set<int>> adj(n);
  for (int v = 0; v < n; ++v) {
    const auto& ps = net.parents(v);
    for (int p : ps) {
      adj[v].insert(p);
      adj[p].insert(v);
    }
    for (size_t a = 0; a < ps.size(); ++a) {
      for (size_t b = a + 1; b < ps.size(); ++b) {
        adj[ps[a]].insert(ps[b]);
        adj[ps[b]].insert(ps[a]);
      }
    }
  }

  // Min-fill elimination, smallest variable index breaking ties.
  std::vector<bool> eliminated(n, false);
  std::vector<int> elim_step(n, -1);
  cliques_.reserve(n);
  for (int step = 0; step < n; ++step) {
    int best = -1, best_fill = std::numeric_limits<int>::max();
    for (int v = 0; v < n; ++v) {
      if (eliminated[v]) continue;
      int f = fill_count(adj, v);
      if (f < best_fill) {
        best_fill = f;
        best = v;
      }
    }
    std::vector<int> clique(adj[best].begin(), adj[best].end());
    clique.push_back(best);
    std::sort(clique.begin(), clique.end());
    cliques_.push_back(std::move(clique));
    elim_step[best] = step;

    for (auto i = adj[best].begin(); i != adj[best].end(); ++i) {
      for (auto j = std::next(i); j != adj[best].end(); ++j) {
        adj[*i].insert(*j);
        adj[*j].insert(*i);
      }
    }
    for (int u : adj[best]) adj[u].erase(best);
    adj[best].clear();
    eliminated[best] = true;
  }

  // Tree structure: clique at step i connects upward to the clique where the
  // earliest-eliminated separator variable is eliminated. Empty separators
  // attach to the root so the result is a single tree.
  int root = num_cliques() - 1;
  parent_.assign(num_cliques(), -1);
  sepset_.resize(num_cliques());
  children_.resize(num_cliques());
  std::vector<int> elim_var(num_cliques());
  for (int v = 0; v < n; ++v) elim_var[elim_step[v]] = v;
  for (int c = 0; c < num_cliques(); ++c) {
    if (c == root) continue;
    std::vector<int> sep;
    for (int v : cliques_[c]) {
      if (v != elim_var[c]) sep.push_back(v);
    }
    int up = root;
    if (!sep.empty()) {
      up = n;
      for (int v : sep) up = std::min(up, elim_step[v]);
    }
    parent_[c] = up;
    sepset_[c] = std::move(sep);
    children_[up].push_back(c);
  }

  // Families are covered by the elimination clique of their first-eliminated
  // member; pick that clique deterministically.
  family_clique_.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    std::vector<int> family = net.parents(v);
    family.push_back(v);
    int first = n;
    for (int u : family) first = std::min(first, elim_step[u]);
    family_clique_[v] = first;
  }
}

int CliqueTree::width() const {
  int w = 0;
  for (const auto& c : cliques_) w = std::max(w, static_cast<int>(c.size()));
  return w;
}

InferenceEngine::InferenceEngine(const Network& net, CalibrationOptions options)
    : net_(&net), options_(options), tree_(net) {}

void InferenceEngine::set_params(const Parameterization& params) {
  base_.assign(tree_.num_cliques(), Factor{});
  for (int c = 0; c < tree_.num_cliques(); ++c) {
    base_[c] = Factor(tree_.clique(c), *net_, 1.0);
  }
  for (int v = 0; v < net_->num_variables(); ++v) {
    int c = tree_.family_clique(v);
    base_[c] = multiply(base_[c], family_factor(*net_, params, v), *net_);
  }
  has_params_ = true;
}

std::vector<Factor> InferenceEngine::conditioned_potentials(const Evidence& evidence) const {
  if (!has_params_) throw std::logic_error("InferenceEngine: set_params() not called");
  std::vector<Factor> pot = base_;
  for (int v = 0; v < net_->num_variables(); ++v) {
    if (evidence.observed(v)) {
      if (evidence[v] >= net_->cardinality(v)) {
        throw std::invalid_argument("evidence value out of range for " + net_->variable(v).id);
      }
      condition(pot[tree_.family_clique(v)], v, evidence[v]);
    }
  }
  return pot;
}

void InferenceEngine::upward_pass(std::vector<Factor>& pot, std::vector<Factor>& up) const {
  int m = tree_.num_cliques();
  up.assign(m, Factor{});
  for (int c = 0; c < m - 1; ++c) {
    Factor prod = pot[c];
    for (int child : tree_.children(c)) {
      prod = multiply(prod, up[child], *net_);
    }
    up[c] = marginalize(prod, tree_.sepset(c), *net_);
    up[c].rescale(options_.rescale_threshold);
  }
}

double InferenceEngine::log_evidence(const Evidence& evidence) const {
  std::vector<Factor> pot = conditioned_potentials(evidence);
  std::vector<Factor> up;
  upward_pass(pot, up);

  int root = tree_.num_cliques() - 1;
  Factor belief = pot[root];
  for (int child : tree_.children(root)) belief = multiply(belief, up[child], *net_);
  double total = std::accumulate(belief.table.begin(), belief.table.end(), 0.0);
  if (total <= 0.0) throw ImpossibleEvidenceError();
  return std::log(total) + belief.log_scale;
}

FamilyMarginals InferenceEngine::marginals(const Evidence& evidence) const {
  std::vector<Factor> pot = conditioned_potentials(evidence);
  int m = tree_.num_cliques();
  std::vector<Factor> up;
  upward_pass(pot, up);

  // Downward messages, root first; parent index is always larger.
  std::vector<Factor> down(m);
  std::vector<char> has_down(m, 0);
  for (int c = m - 2; c >= 0; --c) {
    int p = tree_.parent(c);
    Factor prod = pot[p];
    if (has_down[p]) prod = multiply(prod, down[p], *net_);
    for (int sib : tree_.children(p)) {
      if (sib != c) prod = multiply(prod, up[sib], *net_);
    }
    down[c] = marginalize(prod, tree_.sepset(c), *net_);
    down[c].rescale(options_.rescale_threshold);
    has_down[c] = 1;
  }

  // Beliefs and evidence probability from the root.
  std::vector<Factor> belief(m);
  for (int c = 0; c < m; ++c) {
    Factor b = pot[c];
    if (has_down[c]) b = multiply(b, down[c], *net_);
    for (int child : tree_.children(c)) b = multiply(b, up[child], *net_);
    belief[c] = std::move(b);
  }
  int root = m - 1;
  double root_total =
      std::accumulate(belief[root].table.begin(), belief[root].table.end(), 0.0);
  if (root_total <= 0.0) throw ImpossibleEvidenceError();

  FamilyMarginals out;
  out.log_evidence = std::log(root_total) + belief[root].log_scale;
  out.joint.reserve(net_->num_variables());
  out.parent.reserve(net_->num_variables());

  std::vector<int> assignment(net_->num_variables(), 0);
  for (int v = 0; v < net_->num_variables(); ++v) {
    std::vector<int> family = net_->parents(v);
    family.push_back(v);
    std::sort(family.begin(), family.end());
    Factor marg = marginalize(belief[tree_.family_clique(v)], family, *net_);
    double total = std::accumulate(marg.table.begin(), marg.table.end(), 0.0);
    // Every calibrated belief carries the full evidence mass, so the family
    // conditional is a local normalization; scales cancel.
    double inv = 1.0 / total;

    int rows = net_->num_rows(v), k = net_->cardinality(v);
    Table joint(rows, k);
    std::vector<double> parent(rows, 0.0);
    const auto& ps = net_->parents(v);
    for (int r = 0; r < rows; ++r) {
      std::vector<int> pvals = net_->row_values(v, r);
      for (size_t j = 0; j < ps.size(); ++j) assignment[ps[j]] = pvals[j];
      double row_sum = 0.0;
      for (int x = 0; x < k; ++x) {
        assignment[v] = x;
        double p = marg.table[marg.index_of(assignment)] * inv;
        p = std::min(1.0, std::max(0.0, p));
        joint.at(r, x) = p;
        row_sum += p;
      }
      parent[r] = row_sum;
    }
    out.joint.push_back(std::move(joint));
    out.parent.push_back(std::move(parent));
  }
  return out;
}

FamilyMarginals calibrate(const Network& net, const Parameterization& params,
                          const Evidence& evidence) {
  InferenceEngine engine(net);
  engine.set_params(params);
  return engine.marginals(evidence);
}

FamilyMarginals brute_force_marginals(const Network& net, const Parameterization& params,
                                      const Evidence& evidence) {
  std::uint64_t states = 1;
  for (int v = 0; v < net.num_variables(); ++v) {
    states *= static_cast<std::uint64_t>(net.cardinality(v));
    if (states > (1ULL << 22)) {
      throw std::invalid_argument("brute_force_marginals: state space exceeds 2^22");
    }
  }

  FamilyMarginals out;
  out.joint.reserve(net.num_variables());
  out.parent.reserve(net.num_variables());
  for (int v = 0; v < net.num_variables(); ++v) {
    out.joint.emplace_back(net.num_rows(v), net.cardinality(v), 0.0);
    out.parent.emplace_back(net.num_rows(v), 0.0);
  }

  // Enumerate only the unobserved variables.
  std::vector<int> free_vars;
  std::vector<int> assignment(net.num_variables(), 0);
  for (int v = 0; v < net.num_variables(); ++v) {
    if (evidence.observed(v)) {
      assignment[v] = evidence[v];
    } else {
      free_vars.push_back(v);
    }
  }

  double pd = 0.0;
  bool done = false;
  while (!done) {
    double w = 1.0;
    for (int v = 0; v < net.num_variables(); ++v) {
      w *= params[v].at(net.row_of(v, assignment), assignment[v]);
    }
    if (w > 0.0) {
      pd += w;
      for (int v = 0; v < net.num_variables(); ++v) {
        int r = net.row_of(v, assignment);
        out.joint[v].at(r, assignment[v]) += w;
      }
    }
    done = true;
    for (int j = static_cast<int>(free_vars.size()) - 1; j >= 0; --j) {
      int v = free_vars[j];
      if (++assignment[v] < net.cardinality(v)) {
        done = false;
        break;
      }
      assignment[v] = 0;
    }
  }

  if (pd <= 0.0) throw ImpossibleEvidenceError();
  out.log_evidence = std::log(pd);
  for (int v = 0; v < net.num_variables(); ++v) {
    double inv = 1.0 / pd;
    for (int r = 0; r < out.joint[v].rows; ++r) {
      double row_sum = 0.0;
      for (int x = 0; x < out.joint[v].width; ++x) {
        out.joint[v].at(r, x) = std::min(1.0, out.joint[v].at(r, x) * inv);
        row_sum += out.joint[v].at(r, x);
      }
      out.parent[v][r] = row_sum;
    }
  }
  return out;
}

double log_likelihood(const Network& net, const Parameterization& params,
                      const Dataset& dataset) {
  InferenceEngine engine(net);
  engine.set_params(params);
  double total = 0.0;
  for (int i = 0; i < dataset.size(); ++i) {
    try {
      total += engine.log_evidence(dataset.examples[i]);
    } catch (const ImpossibleEvidenceError& e) {
      throw e.with_example(i);
    }
  }
  return total;
}

double log_posterior(const Network& net, const Parameterization& params,
                     const Dataset& dataset, const DirichletPrior& prior) {
  double lp = prior_log_density(prior, params);
  if (lp == -std::numeric_limits<double>::infinity()) return lp;
  return lp + log_likelihood(net, params, dataset);
}

}  // namespace edml
