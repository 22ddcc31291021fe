#ifndef EDML_SWEEP_HPP
#define EDML_SWEEP_HPP

#include <vector>

#include "edml/infer.hpp"

namespace edml {

// Per-example soft evidence on every family. For variable v with R rows and
// k values, block (v, i) holds R*k entries laid out like the CPT; entry
// (r, x) is the lambda of child value x under parent instantiation r for
// example i. Only ratios within one (v, i, r) vector carry meaning.
class SoftEvidence {
 public:
  SoftEvidence() = default;
  SoftEvidence(const Network& net, int num_examples);

  int num_examples() const { return num_examples_; }
  int rows(int v) const { return rows_[v]; }
  int width(int v) const { return width_[v]; }

  double* vec(int v, int example, int row) {
    return data_[v].data() + (static_cast<size_t>(example) * rows_[v] + row) * width_[v];
  }
  const double* vec(int v, int example, int row) const {
    return data_[v].data() + (static_cast<size_t>(example) * rows_[v] + row) * width_[v];
  }

  bool same_shape(const SoftEvidence& other) const;

 private:
  std::vector<std::vector<double>> data_;
  std::vector<int> rows_, width_;
  int num_examples_ = 0;
};

// One E-step over the dataset: accumulated family expectations, the dataset
// log likelihood, and (optionally) per-example soft evidence, all computed
// from one calibration per example.
struct Expectations {
  double log_likelihood = 0.0;
  std::vector<Table> joint_sum;                 // per family: sum_i Pr(xu|d_i)
  std::vector<std::vector<double>> parent_sum;  // per family: sum_i Pr(u|d_i)
  SoftEvidence lambda;
  bool has_lambda = false;
};

// Serial reference implementation: examples processed and accumulated in
// dataset order.
Expectations expectation_sweep_serial(const InferenceEngine& engine,
                                      const Parameterization& params, const Dataset& dataset,
                                      bool want_soft_evidence);

// OpenMP implementation: per-example marginals are computed in parallel into
// indexed slots, then reduced sequentially in dataset order. Output is
// bitwise identical to the serial reference for any thread count.
Expectations expectation_sweep_parallel(const InferenceEngine& engine,
                                        const Parameterization& params, const Dataset& dataset,
                                        bool want_soft_evidence, int threads);

// Dispatches to the serial path for threads <= 1.
Expectations expectation_sweep(const InferenceEngine& engine, const Parameterization& params,
                               const Dataset& dataset, bool want_soft_evidence, int threads);

}  // namespace edml

#endif  // EDML_SWEEP_HPP
