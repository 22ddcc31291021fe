#ifndef EDML_BENCH_HPP
#define EDML_BENCH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "edml/data.hpp"
#include "edml/json_io.hpp"
#include "edml/learn.hpp"

namespace edml {

// Shape-independent learner description; the concrete config (prior tables,
// seed) is materialized per network.
struct LearnerSpec {
  std::string name;
  Algorithm algorithm = Algorithm::kEm;
  double psi = 2.0;  // constant Dirichlet exponent (2 = Laplace smoothing)
  double damping = 0.5;
  int global_max_iterations = 1000;
  int local_max_iterations = 512;
  double local_tolerance = 1e-8;
  double stop_logpost_delta = 1e-7;
  double stop_param_delta = 1e-6;

  LearnerConfig config_for(const Network& net, std::uint64_t seed, int threads) const;
};

std::vector<LearnerSpec> default_learners();

struct ExperimentSpec {
  std::vector<std::string> network_files;
  int dataset_size = 1 << 10;
  std::vector<double> hiding = {0.10, 0.25, 0.35, 0.50, 0.70};
  HidingMode hiding_mode = HidingMode::kHiddenVariables;
  int replicates = 3;
  std::vector<LearnerSpec> learners = default_learners();
  std::uint64_t master_seed = 0;
  int threads = 1;
};

// One learning problem: a network, a hiding level and a generated dataset.
// All learners start from the same seed parameterization.
struct ProblemResult {
  std::string network;
  double hiding = 0.0;
  int replicate = 0;
  std::uint64_t param_seed = 0;
  std::vector<std::string> learner_names;
  std::vector<LearningTrace> traces;
  double best_log_posterior = 0.0;
};

struct ExperimentResult {
  std::vector<ProblemResult> problems;
};

// Runs every learner on every problem; fully deterministic given the master
// seed (wall-clock fields aside).
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Error of one learner at global iterations 0..upto: best log posterior on
// the problem minus the learner's log posterior, extended past the end of
// the trace with its final value (a stopped learner keeps its estimates).
std::vector<double> error_curve(const ProblemResult& problem, size_t learner, size_t upto);

struct SpeedupRow {
  std::string category;
  size_t wins_a = 0, wins_b = 0, compared = 0;
  double share_a = 0.0, share_b = 0.0;  // fractions of compared iterations
  double r_a = 0.0, r_b = 0.0;          // mean error-reduction factor while leading
  bool has_r_a = false, has_r_b = false;
};

struct IterationSpeedupTable {
  std::string learner_a, learner_b;
  std::vector<SpeedupRow> rows;  // by network, by hiding level, then average
  std::string to_text() const;
  std::string to_csv() const;
};

// Per-iteration comparison of two learners: the share of global iterations
// in which each has strictly less error than the other (ties count for
// neither), and the mean factor by which the leader reduces the other's
// error. Iterations are compared until both errors drop below error_cutoff.
IterationSpeedupTable iteration_speedup_table(const ExperimentResult& result,
                                              const std::string& learner_a,
                                              const std::string& learner_b,
                                              double error_cutoff = 1e-4);

struct TimeRaceRow {
  std::string category;
  int wins_a = 0, wins_b = 0;
  double share_a = 0.0, share_b = 0.0;  // fractions of problems
  double s_a = 0.0, s_b = 0.0;          // mean time-reduction factor when winning
  bool has_s_a = false, has_s_b = false;
};

struct TimeSpeedupTable {
  std::string learner_a, learner_b;  // a races to match b's final quality
  std::vector<TimeRaceRow> rows;     // by network, then average
  std::string to_text() const;
  std::string to_csv() const;
};

// The wall-clock race: learner_b (reference, typically EM) runs to
// convergence; learner_a wins a problem when it reaches b's final log
// posterior (within match_tolerance) in less elapsed time.
TimeSpeedupTable time_speedup_table(const ExperimentResult& result,
                                    const std::string& learner_a,
                                    const std::string& learner_b,
                                    double match_tolerance = 1e-9);

// One CSV per (problem, learner) with columns
// iteration,elapsed_ms,log_posterior,error.
void emit_curves(const ExperimentResult& result, const std::string& directory);

// curves/ + traces/ + tables/ + manifest.json under the directory.
void write_result_bundle(const ExperimentResult& result, const std::string& directory);

// Rebuilds a result (posteriors, timings; no parameter snapshots) from a
// bundle written by write_result_bundle, for re-deriving tables.
ExperimentResult load_result_bundle(const std::string& directory);

// Deterministic file stem for one (problem, learner) pair.
std::string problem_stem(const ProblemResult& problem, const std::string& learner);

}  // namespace edml

#endif  // EDML_BENCH_HPP
