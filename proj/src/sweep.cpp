#include "edml/sweep.hpp"

#include <algorithm>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace edml {

SoftEvidence::SoftEvidence(const Network& net, int num_examples)
    : num_examples_(num_examples) {
  int n = net.num_variables();
  data_.resize(n);
  rows_.resize(n);
  width_.resize(n);
  for (int v = 0; v < n; ++v) {
    rows_[v] = net.num_rows(v);
    width_[v] = net.cardinality(v);
    data_[v].assign(static_cast<size_t>(num_examples) * rows_[v] * width_[v], 1.0);
  }
}

bool SoftEvidence::same_shape(const SoftEvidence& other) const {
  return num_examples_ == other.num_examples_ && rows_ == other.rows_ &&
         width_ == other.width_;
}

namespace {

constexpr double kZeroParamGuard = 1e-12;
constexpr double kNegativeLambdaTolerance = 1e-9;

struct SweepAccumulator {
  explicit SweepAccumulator(const Network& net) {
    joint_sum.reserve(net.num_variables());
    parent_sum.reserve(net.num_variables());
    for (int v = 0; v < net.num_variables(); ++v) {
      joint_sum.emplace_back(net.num_rows(v), net.cardinality(v), 0.0);
      parent_sum.emplace_back(net.num_rows(v), 0.0);
    }
  }
  double log_likelihood = 0.0;
  std::vector<Table> joint_sum;
  std::vector<std::vector<double>> parent_sum;

  void add(const FamilyMarginals& m) {
    log_likelihood += m.log_evidence;
    for (size_t v = 0; v < joint_sum.size(); ++v) {
      for (size_t j = 0; j < joint_sum[v].v.size(); ++j) {
        joint_sum[v].v[j] += m.joint[v].v[j];
      }
      for (size_t r = 0; r < parent_sum[v].size(); ++r) {
        parent_sum[v][r] += m.parent[v][r];
      }
    }
  }
};

// Eq-style lambda: Pr(xu|d)/Pr(x|u) - Pr(u|d) + 1, with the quotient taken
// as 0 when the parameter is below the zero guard. Examples with no
// evidence are neutral by definition and get exact ones.
void fill_lambda(const Network& net, const Parameterization& params,
                 const FamilyMarginals& m, const Evidence& evidence, SoftEvidence& lambda,
                 int example) {
  if (evidence.empty()) return;  // constructor already filled with 1.0
  for (int v = 0; v < net.num_variables(); ++v) {
    const Table& theta = params[v];
    const Table& joint = m.joint[v];
    const auto& parent = m.parent[v];
    for (int r = 0; r < theta.rows; ++r) {
      double* lam = lambda.vec(v, example, r);
      for (int x = 0; x < theta.width; ++x) {
        double th = theta.at(r, x);
        double quotient = th < kZeroParamGuard ? 0.0 : joint.at(r, x) / th;
        double value = quotient - parent[r] + 1.0;
        if (value < 0.0) {
          if (value < -kNegativeLambdaTolerance) {
            throw std::logic_error("soft evidence: lambda is negative for family " +
                                   net.variable(v).id);
          }
          value = 0.0;
        }
        lam[x] = value;
      }
    }
  }
}

}  // namespace

Expectations expectation_sweep_serial(const InferenceEngine& engine,
                                      const Parameterization& params, const Dataset& dataset,
                                      bool want_soft_evidence) {
  const Network& net = engine.network();
  SweepAccumulator acc(net);
  Expectations out;
  if (want_soft_evidence) {
    out.lambda = SoftEvidence(net, dataset.size());
    out.has_lambda = true;
  }
  for (int i = 0; i < dataset.size(); ++i) {
    FamilyMarginals m;
    try {
      m = engine.marginals(dataset.examples[i]);
    } catch (const ImpossibleEvidenceError& e) {
      throw e.with_example(i);
    }
    acc.add(m);
    if (want_soft_evidence) {
      fill_lambda(net, params, m, dataset.examples[i], out.lambda, i);
    }
  }
  out.log_likelihood = acc.log_likelihood;
  out.joint_sum = std::move(acc.joint_sum);
  out.parent_sum = std::move(acc.parent_sum);
  return out;
}

Expectations expectation_sweep_parallel(const InferenceEngine& engine,
                                        const Parameterization& params, const Dataset& dataset,
                                        bool want_soft_evidence, int threads) {
  const Network& net = engine.network();
  int n = dataset.size();
  Expectations out;
  if (want_soft_evidence) {
    out.lambda = SoftEvidence(net, n);
    out.has_lambda = true;
  }

  std::vector<FamilyMarginals> per_example(n);
  std::vector<std::exception_ptr> errors(n);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      per_example[i] = engine.marginals(dataset.examples[i]);
      if (want_soft_evidence) {
        fill_lambda(net, params, per_example[i], dataset.examples[i], out.lambda, i);
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }

  // Report the first failing example, matching the serial path.
  for (int i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const ImpossibleEvidenceError& e) {
      throw e.with_example(i);
    }
  }

  // Sequential reduction in dataset order keeps float sums identical to the
  // serial reference.
  SweepAccumulator acc(net);
  for (int i = 0; i < n; ++i) acc.add(per_example[i]);
  out.log_likelihood = acc.log_likelihood;
  out.joint_sum = std::move(acc.joint_sum);
  out.parent_sum = std::move(acc.parent_sum);
  return out;
}

Expectations expectation_sweep(const InferenceEngine& engine, const Parameterization& params,
                               const Dataset& dataset, bool want_soft_evidence, int threads) {
  if (threads <= 1) {
    return expectation_sweep_serial(engine, params, dataset, want_soft_evidence);
  }
  return expectation_sweep_parallel(engine, params, dataset, want_soft_evidence, threads);
}

}  // namespace edml
