#ifndef EDML_LEARN_HPP
#define EDML_LEARN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "edml/sweep.hpp"

namespace edml {

enum class Algorithm { kEm, kEdml, kHybrid };
enum class Branch { kNone, kEm, kEdml };
enum class IslandSeedPolicy { kPreviousEstimates, kUniform };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct LearnerConfig {
  Algorithm algorithm = Algorithm::kEm;
  DirichletPrior prior;
  int global_max_iterations = 1000;
  // Error-vs-best threshold used when reporting iteration counts; the online
  // stopping rule below is what actually terminates a run.
  double global_tolerance = 1e-4;
  int local_max_iterations = 512;
  double local_tolerance = 1e-8;
  double damping = 0.5;  // gamma_d in [0, 1), applied to soft evidence and parameters
  std::uint64_t seed = 0;
  double stop_logpost_delta = 1e-7;
  double stop_param_delta = 1e-6;
  IslandSeedPolicy island_seed = IslandSeedPolicy::kPreviousEstimates;
  int threads = 1;  // execution knob only; results are thread-count independent
};

// One family's learning subproblem: estimate a single parameter set from n
// independent soft observations under a Dirichlet prior. Examples whose
// soft evidence is exactly hard or exactly neutral are folded into counts
// (their local-update contribution is an indicator resp. theta itself);
// only genuinely soft vectors are kept.
struct Island {
  std::vector<double> psi;
  int n_total = 0;
  std::vector<double> hard_counts;
  std::vector<std::vector<double>> soft;

  double neutral_count() const;
};

struct IslandResult {
  std::vector<double> theta;
  int iterations = 0;
  bool converged = false;
};

// One synchronous application of the local fixed-point update:
//   theta_x <- (psi_x - 1 + sum_i lambda_x theta_x / sum_x* lambda_x* theta_x*)
//              / (psi_X - |X| + n)
// Examples beyond lambdas.size() (up to n) are treated as neutral and
// contribute theta_x exactly.
std::vector<double> edml_local_update(const std::vector<double>& theta,
                                      const std::vector<std::vector<double>>& lambdas,
                                      const std::vector<double>& psi, int n);

std::vector<double> island_update(const std::vector<double>& theta, const Island& island);

// Iterates the local update from theta0 until the max-abs parameter change
// drops below tolerance or the iteration cap is hit.
IslandResult solve_island(const std::vector<double>& theta0,
                          const std::vector<std::vector<double>>& lambdas,
                          const std::vector<double>& psi, int n, double tolerance,
                          int max_iterations);

IslandResult solve_island(const std::vector<double>& theta0, const Island& island,
                          double tolerance, int max_iterations);

// MAP EM update: computes family marginals under params and applies
//   theta <- (psi - 1 + joint sums) / (psi_X - |X| + parent sums).
// Throws when a denominator is not positive (possible only with psi <= 1
// and an unreached parent instantiation).
Parameterization em_update(const Network& net, const Parameterization& params,
                           const Dataset& dataset, const DirichletPrior& prior);

// The same update from an already computed sweep.
Parameterization em_update_from(const Network& net, const Expectations& exps,
                                const DirichletPrior& prior);

// Soft evidence for every family and example under params (one calibration
// per example).
SoftEvidence soft_evidence(const Network& net, const Parameterization& params,
                           const Dataset& dataset);

struct EdmlStepResult {
  Parameterization params;
  std::vector<int> local_iterations;  // flat, variables in order, rows within
};

// One global iteration: soft evidence under params, damped against
// previous_lambda when given (both sides normalized to sum to the
// cardinality), per-family island solves seeded per config, then parameter
// damping against params. With config.damping = 0 this is the undamped
// update of the fixed-point theory. When damped_out is non-null it receives
// the damped lambda for the next iteration's damping.
EdmlStepResult edml_global_iteration(const Network& net, const Parameterization& params,
                                     const Dataset& dataset, const DirichletPrior& prior,
                                     const LearnerConfig& config,
                                     const SoftEvidence* previous_lambda = nullptr,
                                     SoftEvidence* damped_out = nullptr);

// The damping + island phase of a global iteration, starting from already
// computed raw soft evidence.
EdmlStepResult edml_step_from(const Network& net, const Parameterization& params,
                              SoftEvidence lambda, const DirichletPrior& prior,
                              const LearnerConfig& config,
                              const SoftEvidence* previous_lambda = nullptr,
                              SoftEvidence* damped_out = nullptr);

// Island solving over a classified soft-evidence set; exposed for the
// thread-equivalence tests and the kernel benchmark.
EdmlStepResult solve_islands_serial(const Network& net, const Parameterization& params,
                                    const SoftEvidence& lambda, const DirichletPrior& prior,
                                    const LearnerConfig& config);
EdmlStepResult solve_islands_parallel(const Network& net, const Parameterization& params,
                                      const SoftEvidence& lambda, const DirichletPrior& prior,
                                      const LearnerConfig& config, int threads);

struct HybridStepResult {
  Parameterization params;
  Branch branch = Branch::kNone;
  double log_posterior = 0.0;
  std::vector<int> local_iterations;
};

// Computes the EM update and the EDML global iteration from the same
// marginals, evaluates both posteriors, returns the better (ties go to EM).
HybridStepResult hybrid_step(const Network& net, const Parameterization& params,
                             const Dataset& dataset, const DirichletPrior& prior,
                             const LearnerConfig& config);

struct TraceIteration {
  Parameterization params;
  double log_posterior = 0.0;
  double elapsed_ms = 0.0;
  std::vector<int> local_iterations;
  Branch branch = Branch::kNone;
};

struct LearningTrace {
  Algorithm algorithm = Algorithm::kEm;
  std::vector<TraceIteration> iterations;  // entry 0 is the seed
  enum class Status { kConverged, kMaxIterations, kAborted } status = Status::kMaxIterations;
  std::string message;

  const Parameterization& final_params() const { return iterations.back().params; }
  double final_log_posterior() const { return iterations.back().log_posterior; }
  double best_log_posterior() const;

  // iterations, posteriors, timings, local counts, branch choices
  std::string to_json(int indent = -1) const;
};

// Parses the fields written by to_json; parameter snapshots are not part of
// the serialized form and come back empty.
LearningTrace trace_from_json(const std::string& text);

// Runs the configured learner from the seeded parameterization. Stops when
// both the log-posterior improvement and the max parameter change fall below
// the stop thresholds, or at the iteration cap. An impossible-evidence error
// aborts the run and is recorded in the trace status.
LearningTrace run(const Network& net, const Dataset& dataset, const LearnerConfig& config);

// Same, but starting from an explicit parameterization instead of the
// config seed.
LearningTrace run_from(const Network& net, const Dataset& dataset,
                       const LearnerConfig& config, const Parameterization& theta0);

// Max over family instantiations of |theta - em_update(theta)|; zero exactly
// at EM fixed points, which coincide with EDML fixed points.
double em_fixed_point_residual(const Network& net, const Parameterization& params,
                               const Dataset& dataset, const DirichletPrior& prior);

// Per-example Bayes factors kappa_i = lambda_0 / lambda_1 for one binary
// family. +infinity when lambda_1 = 0 with lambda_0 > 0; NaN marks the
// undefined 0/0 case.
std::vector<double> binary_bayes_factors(const SoftEvidence& lambda, int var, int row);

}  // namespace edml

#endif  // EDML_LEARN_HPP
