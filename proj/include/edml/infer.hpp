#ifndef EDML_INFER_HPP
#define EDML_INFER_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "edml/data.hpp"
#include "edml/factor.hpp"
#include "edml/model.hpp"

namespace edml {

// Thrown when an example has probability zero under the current parameters.
// example is the dataset index when known, -1 otherwise.
class ImpossibleEvidenceError : public std::runtime_error {
 public:
  explicit ImpossibleEvidenceError(int example_index = -1)
      : std::runtime_error(example_index < 0
                               ? std::string("evidence has probability zero")
                               : "example " + std::to_string(example_index) +
                                     " has probability zero"),
        example(example_index) {}
  int example;

  ImpossibleEvidenceError with_example(int index) const {
    return ImpossibleEvidenceError(index);
  }
};

// Family-conditional marginals of a single example, in the CPT layout:
// joint[v](r, x) = Pr(x, u_r | d), parent[v][r] = Pr(u_r | d).
struct FamilyMarginals {
  std::vector<Table> joint;
  std::vector<std::vector<double>> parent;
  double log_evidence = 0.0;  // log Pr(d)

  double evidence_probability() const { return std::exp(log_evidence); }
};

struct CalibrationOptions {
  // Factors are rescaled when their max entry leaves [t, 1/t]. 0 disables
  // rescaling, 1 rescales after every message operation.
  double rescale_threshold = 1e-120;
};

// Clique tree over the moralized structure, built from a min-fill
// elimination order. Cliques are indexed by elimination step; the parent of
// every clique has a larger index, the last clique is the root. Each family
// is assigned to a clique covering it.
class CliqueTree {
 public:
  explicit CliqueTree(const Network& net);

  int num_cliques() const { return static_cast<int>(cliques_.size()); }
  const std::vector<int>& clique(int c) const { return cliques_[c]; }
  int parent(int c) const { return parent_[c]; }
  const std::vector<int>& sepset(int c) const { return sepset_[c]; }
  const std::vector<int>& children(int c) const { return children_[c]; }
  int family_clique(int v) const { return family_clique_[v]; }
  // Largest clique size (variable count), a proxy for calibration cost.
  int width() const;

 private:
  std::vector<std::vector<int>> cliques_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> sepset_;
  std::vector<std::vector<int>> children_;
  std::vector<int> family_clique_;
};

// Exact calibration engine. The clique tree is built once per network;
// set_params() refreshes the evidence-free clique potentials. marginals()
// and log_evidence() are const and safe to call from concurrent threads.
class InferenceEngine {
 public:
  explicit InferenceEngine(const Network& net, CalibrationOptions options = {});

  void set_params(const Parameterization& params);

  // Family marginals of one example via a single two-pass calibration.
  // Throws ImpossibleEvidenceError when Pr(d) = 0.
  FamilyMarginals marginals(const Evidence& evidence) const;

  // log Pr(d) only (single upward pass).
  double log_evidence(const Evidence& evidence) const;

  const Network& network() const { return *net_; }
  const CliqueTree& tree() const { return tree_; }

 private:
  std::vector<Factor> conditioned_potentials(const Evidence& evidence) const;
  void upward_pass(std::vector<Factor>& pot, std::vector<Factor>& up) const;

  const Network* net_;
  CalibrationOptions options_;
  CliqueTree tree_;
  std::vector<Factor> base_;  // evidence-free clique potentials
  bool has_params_ = false;
};

// One-shot convenience wrappers over InferenceEngine.
FamilyMarginals calibrate(const Network& net, const Parameterization& params,
                          const Evidence& evidence);

// Exact reference: enumerates the joint (state space capped at 2^22),
// conditions on the evidence and marginalizes.
FamilyMarginals brute_force_marginals(const Network& net, const Parameterization& params,
                                      const Evidence& evidence);

// Sum over examples of log Pr(d_i). Throws ImpossibleEvidenceError naming
// the offending example.
double log_likelihood(const Network& net, const Parameterization& params,
                      const Dataset& dataset);

// Unnormalized log posterior: prior log density plus log likelihood.
// Returns -infinity when a zero parameter has exponent > 1.
double log_posterior(const Network& net, const Parameterization& params,
                     const Dataset& dataset, const DirichletPrior& prior);

}  // namespace edml

#endif  // EDML_INFER_HPP
