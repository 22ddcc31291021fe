#include "edml/learn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace edml {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kEm: return "em";
    case Algorithm::kEdml: return "edml";
    case Algorithm::kHybrid: return "hybrid";
  }
  return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "em") return Algorithm::kEm;
  if (name == "edml") return Algorithm::kEdml;
  if (name == "hybrid") return Algorithm::kHybrid;
  throw std::invalid_argument("unknown algorithm: " + name);
}

double Island::neutral_count() const {
  double hard = std::accumulate(hard_counts.begin(), hard_counts.end(), 0.0);
  return n_total - hard - static_cast<double>(soft.size());
}

std::vector<double> island_update(const std::vector<double>& theta, const Island& island) {
  int k = static_cast<int>(theta.size());
  double psi_total = std::accumulate(island.psi.begin(), island.psi.end(), 0.0);
  double denom = psi_total - k + island.n_total;
  double neutral = island.neutral_count();

  std::vector<double> num(k);
  for (int x = 0; x < k; ++x) {
    num[x] = island.psi[x] - 1.0 +
             (island.hard_counts.empty() ? 0.0 : island.hard_counts[x]) + neutral * theta[x];
  }
  for (const auto& lam : island.soft) {
    double s = 0.0;
    for (int x = 0; x < k; ++x) s += lam[x] * theta[x];
    if (s <= 0.0) {
      throw std::runtime_error(
          "island update: soft evidence contradicts the current interior estimate");
    }
    double inv = 1.0 / s;
    for (int x = 0; x < k; ++x) num[x] += lam[x] * theta[x] * inv;
  }
  for (int x = 0; x < k; ++x) num[x] /= denom;
  return num;
}

std::vector<double> edml_local_update(const std::vector<double>& theta,
                                      const std::vector<std::vector<double>>& lambdas,
                                      const std::vector<double>& psi, int n) {
  Island island;
  island.psi = psi;
  island.n_total = n;
  island.hard_counts.assign(theta.size(), 0.0);
  island.soft = lambdas;
  return island_update(theta, island);
}

IslandResult solve_island(const std::vector<double>& theta0, const Island& island,
                          double tolerance, int max_iterations) {
  IslandResult result;
  result.theta = theta0;
  for (int t = 1; t <= max_iterations; ++t) {
    std::vector<double> next = island_update(result.theta, island);
    double change = 0.0;
    for (size_t x = 0; x < next.size(); ++x) {
      change = std::max(change, std::fabs(next[x] - result.theta[x]));
    }
    result.theta = std::move(next);
    result.iterations = t;
    if (change < tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

IslandResult solve_island(const std::vector<double>& theta0,
                          const std::vector<std::vector<double>>& lambdas,
                          const std::vector<double>& psi, int n, double tolerance,
                          int max_iterations) {
  Island island;
  island.psi = psi;
  island.n_total = n;
  island.hard_counts.assign(theta0.size(), 0.0);
  island.soft = lambdas;
  return solve_island(theta0, island, tolerance, max_iterations);
}

Parameterization em_update_from(const Network& net, const Expectations& exps,
                                const DirichletPrior& prior) {
  Parameterization out;
  out.cpt.reserve(net.num_variables());
  for (int v = 0; v < net.num_variables(); ++v) {
    int rows = net.num_rows(v), k = net.cardinality(v);
    Table t(rows, k);
    const Table& psi = prior[v];
    const Table& joint = exps.joint_sum[v];
    for (int r = 0; r < rows; ++r) {
      double psi_total = 0.0;
      for (int x = 0; x < k; ++x) psi_total += psi.at(r, x);
      double denom = psi_total - k + exps.parent_sum[v][r];
      if (denom <= 0.0) {
        throw std::runtime_error("em update: family " + net.variable(v).id + " row " +
                                 std::to_string(r) +
                                 " has a non-positive denominator; no example reaches this "
                                 "parent instantiation, use prior exponents > 1");
      }
      for (int x = 0; x < k; ++x) {
        t.at(r, x) = (psi.at(r, x) - 1.0 + joint.at(r, x)) / denom;
      }
    }
    out.cpt.push_back(std::move(t));
  }
  return out;
}

Parameterization em_update(const Network& net, const Parameterization& params,
                           const Dataset& dataset, const DirichletPrior& prior) {
  InferenceEngine engine(net);
  engine.set_params(params);
  Expectations exps = expectation_sweep_serial(engine, params, dataset, false);
  return em_update_from(net, exps, prior);
}

SoftEvidence soft_evidence(const Network& net, const Parameterization& params,
                           const Dataset& dataset) {
  InferenceEngine engine(net);
  engine.set_params(params);
  Expectations exps = expectation_sweep_serial(engine, params, dataset, true);
  return std::move(exps.lambda);
}

namespace {

// Scale each per-example vector to sum to the cardinality; neutral vectors
// stay exactly neutral. All-zero vectors are left alone (they fail later in
// the island solve, which owns that error).
void normalize_lambda(SoftEvidence& lambda, const Network& net) {
  for (int v = 0; v < net.num_variables(); ++v) {
    int rows = lambda.rows(v), k = lambda.width(v);
    for (int i = 0; i < lambda.num_examples(); ++i) {
      for (int r = 0; r < rows; ++r) {
        double* lam = lambda.vec(v, i, r);
        double sum = 0.0;
        for (int x = 0; x < k; ++x) sum += lam[x];
        if (sum <= 0.0 || sum == static_cast<double>(k)) continue;
        double scale = static_cast<double>(k) / sum;
        for (int x = 0; x < k; ++x) lam[x] *= scale;
      }
    }
  }
}

void damp_lambda(SoftEvidence& lambda, const SoftEvidence& previous, double gamma,
                 const Network& net) {
  if (gamma <= 0.0) return;
  if (!lambda.same_shape(previous)) {
    throw std::logic_error("damping: soft evidence shapes differ between iterations");
  }
  for (int v = 0; v < net.num_variables(); ++v) {
    int rows = lambda.rows(v), k = lambda.width(v);
    for (int i = 0; i < lambda.num_examples(); ++i) {
      for (int r = 0; r < rows; ++r) {
        double* cur = lambda.vec(v, i, r);
        const double* old = previous.vec(v, i, r);
        for (int x = 0; x < k; ++x) cur[x] = (1.0 - gamma) * cur[x] + gamma * old[x];
      }
    }
  }
}

Island build_island(const SoftEvidence& lambda, const Table& psi, int v, int r) {
  int k = lambda.width(v);
  Island island;
  island.psi.assign(psi.row(r), psi.row(r) + k);
  island.n_total = lambda.num_examples();
  island.hard_counts.assign(k, 0.0);
  for (int i = 0; i < lambda.num_examples(); ++i) {
    const double* lam = lambda.vec(v, i, r);
    bool neutral = true;
    int positives = 0, last_positive = -1;
    for (int x = 0; x < k; ++x) {
      if (lam[x] != 1.0) neutral = false;
      if (lam[x] > 0.0) {
        ++positives;
        last_positive = x;
      }
    }
    if (neutral) continue;  // contributes theta exactly; folded into n_total
    if (positives == 1) {
      island.hard_counts[last_positive] += 1.0;  // ratio term is exactly 1
    } else {
      island.soft.emplace_back(lam, lam + k);
    }
  }
  return island;
}

struct IslandSlot {
  int var;
  int row;
};

std::vector<IslandSlot> island_slots(const Network& net) {
  std::vector<IslandSlot> slots;
  for (int v = 0; v < net.num_variables(); ++v) {
    for (int r = 0; r < net.num_rows(v); ++r) slots.push_back({v, r});
  }
  return slots;
}

void solve_one_island(const Network& net, const Parameterization& params,
                      const SoftEvidence& lambda, const DirichletPrior& prior,
                      const LearnerConfig& config, int v, int r, Parameterization& out,
                      std::vector<int>& counts, int flat) {
  Island island = build_island(lambda, prior[v], v, r);
  int k = net.cardinality(v);
  std::vector<double> seed(k);
  if (config.island_seed == IslandSeedPolicy::kUniform) {
    std::fill(seed.begin(), seed.end(), 1.0 / k);
  } else {
    const double* row = params[v].row(r);
    seed.assign(row, row + k);
  }
  IslandResult res = solve_island(seed, island, config.local_tolerance,
                                  config.local_max_iterations);
  std::copy(res.theta.begin(), res.theta.end(), out[v].row(r));
  counts[flat] = res.iterations;
}

}  // namespace

EdmlStepResult solve_islands_serial(const Network& net, const Parameterization& params,
                                    const SoftEvidence& lambda, const DirichletPrior& prior,
                                    const LearnerConfig& config) {
  EdmlStepResult result;
  result.params = params;  // shape template; rows overwritten below
  std::vector<IslandSlot> slots = island_slots(net);
  result.local_iterations.assign(slots.size(), 0);
  for (size_t s = 0; s < slots.size(); ++s) {
    solve_one_island(net, params, lambda, prior, config, slots[s].var, slots[s].row,
                     result.params, result.local_iterations, static_cast<int>(s));
  }
  return result;
}

EdmlStepResult solve_islands_parallel(const Network& net, const Parameterization& params,
                                      const SoftEvidence& lambda, const DirichletPrior& prior,
                                      const LearnerConfig& config, int threads) {
  EdmlStepResult result;
  result.params = params;
  std::vector<IslandSlot> slots = island_slots(net);
  result.local_iterations.assign(slots.size(), 0);
  std::vector<std::exception_ptr> errors(slots.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
#endif
  for (int s = 0; s < static_cast<int>(slots.size()); ++s) {
    try {
      solve_one_island(net, params, lambda, prior, config, slots[s].var, slots[s].row,
                       result.params, result.local_iterations, s);
    } catch (...) {
      errors[s] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return result;
}

EdmlStepResult edml_step_from(const Network& net, const Parameterization& params,
                              SoftEvidence lambda, const DirichletPrior& prior,
                              const LearnerConfig& config,
                              const SoftEvidence* previous_lambda,
                              SoftEvidence* damped_out) {
  normalize_lambda(lambda, net);
  if (previous_lambda != nullptr) {
    damp_lambda(lambda, *previous_lambda, config.damping, net);
  }

  EdmlStepResult step =
      config.threads > 1
          ? solve_islands_parallel(net, params, lambda, prior, config, config.threads)
          : solve_islands_serial(net, params, lambda, prior, config);

  double gamma = config.damping;
  if (gamma > 0.0) {
    for (int v = 0; v < net.num_variables(); ++v) {
      Table& t = step.params[v];
      const Table& old = params[v];
      for (int r = 0; r < t.rows; ++r) {
        double sum = 0.0;
        for (int x = 0; x < t.width; ++x) {
          t.at(r, x) = (1.0 - gamma) * t.at(r, x) + gamma * old.at(r, x);
          sum += t.at(r, x);
        }
        for (int x = 0; x < t.width; ++x) t.at(r, x) /= sum;
      }
    }
  }
  if (damped_out != nullptr) *damped_out = std::move(lambda);
  return step;
}

EdmlStepResult edml_global_iteration(const Network& net, const Parameterization& params,
                                     const Dataset& dataset, const DirichletPrior& prior,
                                     const LearnerConfig& config,
                                     const SoftEvidence* previous_lambda,
                                     SoftEvidence* damped_out) {
  InferenceEngine engine(net);
  engine.set_params(params);
  Expectations exps = expectation_sweep(engine, params, dataset, true, config.threads);
  return edml_step_from(net, params, std::move(exps.lambda), prior, config, previous_lambda,
                        damped_out);
}

HybridStepResult hybrid_step(const Network& net, const Parameterization& params,
                             const Dataset& dataset, const DirichletPrior& prior,
                             const LearnerConfig& config) {
  InferenceEngine engine(net);
  engine.set_params(params);
  Expectations exps = expectation_sweep(engine, params, dataset, true, config.threads);

  Parameterization em_candidate = em_update_from(net, exps, prior);
  EdmlStepResult edml_candidate =
      edml_step_from(net, params, std::move(exps.lambda), prior, config, nullptr, nullptr);

  double lp_em = log_posterior(net, em_candidate, dataset, prior);
  double lp_edml = log_posterior(net, edml_candidate.params, dataset, prior);

  HybridStepResult out;
  if (lp_edml > lp_em) {
    out.params = std::move(edml_candidate.params);
    out.branch = Branch::kEdml;
    out.log_posterior = lp_edml;
    out.local_iterations = std::move(edml_candidate.local_iterations);
  } else {
    out.params = std::move(em_candidate);
    out.branch = Branch::kEm;
    out.log_posterior = lp_em;
  }
  return out;
}

double em_fixed_point_residual(const Network& net, const Parameterization& params,
                               const Dataset& dataset, const DirichletPrior& prior) {
  Parameterization next = em_update(net, params, dataset, prior);
  return params.max_abs_diff(next);
}

std::vector<double> binary_bayes_factors(const SoftEvidence& lambda, int var, int row) {
  if (lambda.width(var) != 2) {
    throw std::invalid_argument("binary_bayes_factors: family is not binary");
  }
  std::vector<double> kappa(lambda.num_examples());
  for (int i = 0; i < lambda.num_examples(); ++i) {
    const double* lam = lambda.vec(var, i, row);
    if (lam[1] > 0.0) {
      kappa[i] = lam[0] / lam[1];
    } else if (lam[0] > 0.0) {
      kappa[i] = std::numeric_limits<double>::infinity();
    } else {
      kappa[i] = kNaN;  // undefined: both sides are hard zero
    }
  }
  return kappa;
}

double LearningTrace::best_log_posterior() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& it : iterations) {
    if (!std::isnan(it.log_posterior)) best = std::max(best, it.log_posterior);
  }
  return best;
}

namespace {

class Learner {
 public:
  Learner(const Network& net, const Dataset& dataset, const LearnerConfig& config)
      : net_(net), dataset_(dataset), config_(config), engine_(net) {}

  LearningTrace run(const Parameterization* theta0) {
    start_ = Clock::now();
    trace_.algorithm = config_.algorithm;
    Parameterization seed =
        theta0 ? *theta0 : random_parameterization(net_, config_.seed);
    push(std::move(seed), kNaN, {}, Branch::kNone);
    try {
      if (config_.algorithm == Algorithm::kHybrid) {
        run_hybrid();
      } else {
        run_simple();
      }
    } catch (const ImpossibleEvidenceError& e) {
      trace_.status = LearningTrace::Status::kAborted;
      trace_.message = e.what();
    }
    fill_final_log_posterior();
    return std::move(trace_);
  }

 private:
  using Clock = std::chrono::steady_clock;

  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
  }

  void push(Parameterization params, double lp, std::vector<int> locals, Branch branch) {
    trace_.iterations.push_back(
        {std::move(params), lp, trace_.iterations.empty() ? 0.0 : elapsed_ms(),
         std::move(locals), branch});
  }

  double posterior_of_sweep(const Parameterization& params, const Expectations& exps) const {
    return prior_log_density(config_.prior, params) + exps.log_likelihood;
  }

  bool stop_reached(double lp_now, double lp_before, double param_change) const {
    return std::fabs(lp_now - lp_before) < config_.stop_logpost_delta &&
           param_change < config_.stop_param_delta;
  }

  // EM and EDML pay one sweep per global iteration; the log posterior of the
  // parameters produced at iteration k becomes known during iteration k+1's
  // sweep, so entries are filled one step behind.
  void run_simple() {
    bool want_lambda = config_.algorithm == Algorithm::kEdml;
    for (int k = 1; k <= config_.global_max_iterations; ++k) {
      const Parameterization& current = trace_.iterations[k - 1].params;
      engine_.set_params(current);
      Expectations exps =
          expectation_sweep(engine_, current, dataset_, want_lambda, config_.threads);
      trace_.iterations[k - 1].log_posterior = posterior_of_sweep(current, exps);

      if (k >= 2) {
        double lp_now = trace_.iterations[k - 1].log_posterior;
        double lp_before = trace_.iterations[k - 2].log_posterior;
        double change = current.max_abs_diff(trace_.iterations[k - 2].params);
        if (stop_reached(lp_now, lp_before, change)) {
          trace_.status = LearningTrace::Status::kConverged;
          return;
        }
      }

      if (config_.algorithm == Algorithm::kEm) {
        push(em_update_from(net_, exps, config_.prior), kNaN, {}, Branch::kNone);
      } else {
        SoftEvidence damped;
        EdmlStepResult step = edml_step_from(
            net_, current, std::move(exps.lambda), config_.prior, config_,
            has_prev_lambda_ ? &prev_lambda_ : nullptr, &damped);
        prev_lambda_ = std::move(damped);
        has_prev_lambda_ = true;
        push(std::move(step.params), kNaN, std::move(step.local_iterations), Branch::kNone);
      }
    }
    trace_.status = LearningTrace::Status::kMaxIterations;
  }

  // The hybrid evaluates both candidates each iteration; the winner's sweep
  // doubles as the next iteration's E-step, so posteriors are known eagerly.
  void run_hybrid() {
    engine_.set_params(trace_.iterations[0].params);
    Expectations current =
        expectation_sweep(engine_, trace_.iterations[0].params, dataset_, true,
                          config_.threads);
    trace_.iterations[0].log_posterior =
        posterior_of_sweep(trace_.iterations[0].params, current);

    for (int k = 1; k <= config_.global_max_iterations; ++k) {
      const Parameterization& params = trace_.iterations[k - 1].params;

      Parameterization em_candidate = em_update_from(net_, current, config_.prior);
      SoftEvidence damped;
      EdmlStepResult edml_candidate = edml_step_from(
          net_, params, std::move(current.lambda), config_.prior, config_,
          has_prev_lambda_ ? &prev_lambda_ : nullptr, &damped);
      prev_lambda_ = std::move(damped);
      has_prev_lambda_ = true;

      engine_.set_params(em_candidate);
      Expectations em_exps =
          expectation_sweep(engine_, em_candidate, dataset_, true, config_.threads);
      double lp_em = posterior_of_sweep(em_candidate, em_exps);

      engine_.set_params(edml_candidate.params);
      Expectations edml_exps = expectation_sweep(engine_, edml_candidate.params, dataset_,
                                                 true, config_.threads);
      double lp_edml = posterior_of_sweep(edml_candidate.params, edml_exps);

      if (lp_edml > lp_em) {
        push(std::move(edml_candidate.params), lp_edml,
             std::move(edml_candidate.local_iterations), Branch::kEdml);
        current = std::move(edml_exps);
      } else {
        push(std::move(em_candidate), lp_em, {}, Branch::kEm);
        current = std::move(em_exps);
      }

      double change =
          trace_.iterations[k].params.max_abs_diff(trace_.iterations[k - 1].params);
      if (stop_reached(trace_.iterations[k].log_posterior,
                       trace_.iterations[k - 1].log_posterior, change)) {
        trace_.status = LearningTrace::Status::kConverged;
        return;
      }
    }
    trace_.status = LearningTrace::Status::kMaxIterations;
  }

  // EM/EDML leave the last entry's posterior pending when the cap is hit.
  void fill_final_log_posterior() {
    if (trace_.iterations.empty()) return;
    TraceIteration& last = trace_.iterations.back();
    if (!std::isnan(last.log_posterior)) return;
    try {
      last.log_posterior =
          log_posterior(net_, last.params, dataset_, config_.prior);
    } catch (const ImpossibleEvidenceError&) {
      // leave NaN; the abort path already recorded the reason
    }
  }

  const Network& net_;
  const Dataset& dataset_;
  LearnerConfig config_;
  InferenceEngine engine_;
  LearningTrace trace_;
  SoftEvidence prev_lambda_;
  bool has_prev_lambda_ = false;
  Clock::time_point start_;
};

}  // namespace

LearningTrace run(const Network& net, const Dataset& dataset, const LearnerConfig& config) {
  return Learner(net, dataset, config).run(nullptr);
}

LearningTrace run_from(const Network& net, const Dataset& dataset,
                       const LearnerConfig& config, const Parameterization& theta0) {
  return Learner(net, dataset, config).run(&theta0);
}

namespace {

std::string status_name(LearningTrace::Status s) {
  switch (s) {
    case LearningTrace::Status::kConverged: return "converged";
    case LearningTrace::Status::kMaxIterations: return "max-iterations";
    case LearningTrace::Status::kAborted: return "aborted";
  }
  return "?";
}

LearningTrace::Status status_from_name(const std::string& s) {
  if (s == "converged") return LearningTrace::Status::kConverged;
  if (s == "max-iterations") return LearningTrace::Status::kMaxIterations;
  if (s == "aborted") return LearningTrace::Status::kAborted;
  throw std::invalid_argument("unknown trace status: " + s);
}

}  // namespace

std::string LearningTrace::to_json(int indent) const {
  nlohmann::json j;
  j["algorithm"] = algorithm_name(algorithm);
  j["status"] = status_name(status);
  j["message"] = message;
  nlohmann::json items = nlohmann::json::array();
  for (size_t k = 0; k < iterations.size(); ++k) {
    const TraceIteration& it = iterations[k];
    nlohmann::json e;
    e["iteration"] = k;
    e["log_posterior"] = it.log_posterior;
    e["elapsed_ms"] = it.elapsed_ms;
    e["local_iterations"] = it.local_iterations;
    if (it.branch == Branch::kNone) {
      e["branch"] = nullptr;
    } else {
      e["branch"] = it.branch == Branch::kEm ? "em" : "edml";
    }
    items.push_back(std::move(e));
  }
  j["iterations"] = std::move(items);
  return j.dump(indent);
}

LearningTrace trace_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  LearningTrace trace;
  trace.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
  trace.status = status_from_name(j.at("status").get<std::string>());
  trace.message = j.value("message", "");
  for (const auto& e : j.at("iterations")) {
    TraceIteration it;
    it.log_posterior = e.at("log_posterior").is_null()
                           ? kNaN
                           : e.at("log_posterior").get<double>();
    it.elapsed_ms = e.at("elapsed_ms").get<double>();
    it.local_iterations = e.at("local_iterations").get<std::vector<int>>();
    if (!e.at("branch").is_null()) {
      it.branch = e.at("branch").get<std::string>() == "em" ? Branch::kEm : Branch::kEdml;
    }
    trace.iterations.push_back(std::move(it));
  }
  return trace;
}

}  // namespace edml
