#ifndef EDML_FACTOR_HPP
#define EDML_FACTOR_HPP

#include <vector>

#include "edml/model.hpp"

namespace edml {

// Non-negative table over a sorted variable scope, with an accumulated
// log-scaling constant so products of many small entries do not underflow.
// The represented value of entry i is table[i] * exp(log_scale).
struct Factor {
  std::vector<int> scope;  // variable ids, strictly ascending
  std::vector<int> cards;  // cardinalities, aligned with scope
  std::vector<double> table;
  double log_scale = 0.0;

  Factor() = default;
  // Scope must be sorted ascending; table initialized to fill.
  Factor(std::vector<int> scope_, const Network& net, double fill = 0.0);

  size_t size() const { return table.size(); }

  // Flat index of an assignment over all network variables (last scope
  // variable varies fastest).
  size_t index_of(const std::vector<int>& assignment) const;

  // Divide the table by its maximum entry and fold it into log_scale, but
  // only when the max has left [threshold, 1/threshold]. threshold <= 0
  // never rescales, threshold = 1 always does. All-zero tables are left
  // alone.
  void rescale(double threshold = 1.0);
};

// Pointwise product; scopes are merged (union). Scales add.
Factor multiply(const Factor& a, const Factor& b, const Network& net);

// Sum out every variable not in keep (keep must be a subset of the scope,
// sorted ascending). Scale is carried over.
Factor marginalize(const Factor& f, const std::vector<int>& keep, const Network& net);

// Zero every entry inconsistent with the observed value of var.
void condition(Factor& f, int var, int value);

// CPT of variable v as a factor over {v} union parents(v).
Factor family_factor(const Network& net, const Parameterization& params, int v);

}  // namespace edml

#endif  // EDML_FACTOR_HPP
