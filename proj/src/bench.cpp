#include "edml/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "edml/rng.hpp"

namespace edml {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

std::string full(double value) { return fmt("%.17g", value); }

}  // namespace

LearnerConfig LearnerSpec::config_for(const Network& net, std::uint64_t seed,
                                      int threads) const {
  LearnerConfig cfg;
  cfg.algorithm = algorithm;
  cfg.prior = DirichletPrior::constant(net, psi);
  cfg.global_max_iterations = global_max_iterations;
  cfg.local_max_iterations = local_max_iterations;
  cfg.local_tolerance = local_tolerance;
  cfg.damping = damping;
  cfg.seed = seed;
  cfg.stop_logpost_delta = stop_logpost_delta;
  cfg.stop_param_delta = stop_param_delta;
  cfg.threads = threads;
  return cfg;
}

std::vector<LearnerSpec> default_learners() {
  LearnerSpec em{"em", Algorithm::kEm};
  LearnerSpec edml{"edml", Algorithm::kEdml};
  LearnerSpec hybrid{"hybrid", Algorithm::kHybrid};
  return {em, edml, hybrid};
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.replicates < 1) throw std::invalid_argument("experiment: replicates must be >= 1");
  for (double h : spec.hiding) {
    if (h < 0.0 || h > 1.0) {
      throw std::invalid_argument("experiment: hiding percentage outside [0, 1]");
    }
  }
  if (spec.learners.empty()) throw std::invalid_argument("experiment: no learners");

  ExperimentResult result;
  for (size_t ni = 0; ni < spec.network_files.size(); ++ni) {
    NetworkFile nf = load_network_file(spec.network_files[ni]);
    for (size_t hi = 0; hi < spec.hiding.size(); ++hi) {
      for (int rep = 0; rep < spec.replicates; ++rep) {
        std::uint64_t pid = (ni * 1000 + hi) * 1000 + static_cast<std::uint64_t>(rep);
        std::uint64_t sample_seed = derive_seed(spec.master_seed, pid * 4);
        std::uint64_t hide_seed = derive_seed(spec.master_seed, pid * 4 + 1);
        std::uint64_t param_seed = derive_seed(spec.master_seed, pid * 4 + 2);

        Dataset dataset = forward_sample(nf.network, nf.params, spec.dataset_size, sample_seed);
        if (spec.hiding[hi] > 0.0) {
          dataset = hide(nf.network, dataset,
                         {spec.hiding_mode, spec.hiding[hi], hide_seed});
        }

        ProblemResult problem;
        problem.network = nf.name;
        problem.hiding = spec.hiding[hi];
        problem.replicate = rep;
        problem.param_seed = param_seed;
        for (const LearnerSpec& learner : spec.learners) {
          problem.learner_names.push_back(learner.name);
          LearnerConfig cfg = learner.config_for(nf.network, param_seed, spec.threads);
          problem.traces.push_back(run(nf.network, dataset, cfg));
        }
        double best = -std::numeric_limits<double>::infinity();
        for (const LearningTrace& t : problem.traces) {
          best = std::max(best, t.best_log_posterior());
        }
        problem.best_log_posterior = best;
        result.problems.push_back(std::move(problem));
      }
    }
  }
  return result;
}

std::vector<double> error_curve(const ProblemResult& problem, size_t learner, size_t upto) {
  const LearningTrace& trace = problem.traces[learner];
  std::vector<double> errors(upto + 1);
  for (size_t t = 0; t <= upto; ++t) {
    size_t idx = std::min(t, trace.iterations.size() - 1);
    errors[t] = problem.best_log_posterior - trace.iterations[idx].log_posterior;
  }
  return errors;
}

namespace {

int learner_index(const ProblemResult& problem, const std::string& name) {
  for (size_t j = 0; j < problem.learner_names.size(); ++j) {
    if (problem.learner_names[j] == name) return static_cast<int>(j);
  }
  return -1;
}

struct WinTally {
  size_t wins_a = 0, wins_b = 0, compared = 0;
  double factor_sum_a = 0.0, factor_sum_b = 0.0;

  void merge(const WinTally& o) {
    wins_a += o.wins_a;
    wins_b += o.wins_b;
    compared += o.compared;
    factor_sum_a += o.factor_sum_a;
    factor_sum_b += o.factor_sum_b;
  }
};

WinTally tally_problem(const ProblemResult& problem, int a, int b, double cutoff) {
  size_t ta = problem.traces[a].iterations.size() - 1;
  size_t tb = problem.traces[b].iterations.size() - 1;
  size_t upto = std::max(ta, tb);
  std::vector<double> ea = error_curve(problem, a, upto);
  std::vector<double> eb = error_curve(problem, b, upto);

  // Compare from iteration 1 (iteration 0 is the shared seed) until both
  // errors have dropped below the cutoff, inclusive of the crossing point.
  WinTally tally;
  for (size_t t = 1; t <= upto; ++t) {
    ++tally.compared;
    if (ea[t] < eb[t]) {
      ++tally.wins_a;
      tally.factor_sum_a += 1.0 - ea[t] / eb[t];
    } else if (eb[t] < ea[t]) {
      ++tally.wins_b;
      tally.factor_sum_b += 1.0 - eb[t] / ea[t];
    }
    if (ea[t] < cutoff && eb[t] < cutoff) break;
  }
  return tally;
}

SpeedupRow row_from(const std::string& category, const WinTally& t) {
  SpeedupRow row;
  row.category = category;
  row.wins_a = t.wins_a;
  row.wins_b = t.wins_b;
  row.compared = t.compared;
  if (t.compared > 0) {
    row.share_a = static_cast<double>(t.wins_a) / t.compared;
    row.share_b = static_cast<double>(t.wins_b) / t.compared;
  }
  if (t.wins_a > 0) {
    row.r_a = t.factor_sum_a / t.wins_a;
    row.has_r_a = true;
  }
  if (t.wins_b > 0) {
    row.r_b = t.factor_sum_b / t.wins_b;
    row.has_r_b = true;
  }
  return row;
}

std::vector<std::string> ordered_unique(const std::vector<std::string>& values) {
  std::vector<std::string> out;
  for (const auto& v : values) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

std::string hiding_label(double h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "hiding %g%%", h * 100.0);
  return buf;
}

}  // namespace

IterationSpeedupTable iteration_speedup_table(const ExperimentResult& result,
                                              const std::string& learner_a,
                                              const std::string& learner_b,
                                              double error_cutoff) {
  IterationSpeedupTable table;
  table.learner_a = learner_a;
  table.learner_b = learner_b;

  std::vector<std::string> networks;
  std::vector<double> hidings;
  for (const auto& p : result.problems) networks.push_back(p.network);
  networks = ordered_unique(networks);
  for (const auto& p : result.problems) {
    if (std::find(hidings.begin(), hidings.end(), p.hiding) == hidings.end()) {
      hidings.push_back(p.hiding);
    }
  }

  std::vector<WinTally> per_problem(result.problems.size());
  for (size_t i = 0; i < result.problems.size(); ++i) {
    const ProblemResult& p = result.problems[i];
    int a = learner_index(p, learner_a);
    int b = learner_index(p, learner_b);
    if (a < 0 || b < 0) {
      throw std::invalid_argument("iteration_speedup_table: problem lacks learner '" +
                                  (a < 0 ? learner_a : learner_b) + "'");
    }
    per_problem[i] = tally_problem(p, a, b, error_cutoff);
  }

  for (const std::string& net : networks) {
    WinTally t;
    for (size_t i = 0; i < result.problems.size(); ++i) {
      if (result.problems[i].network == net) t.merge(per_problem[i]);
    }
    table.rows.push_back(row_from(net, t));
  }
  if (hidings.size() > 1) {
    for (double h : hidings) {
      WinTally t;
      for (size_t i = 0; i < result.problems.size(); ++i) {
        if (result.problems[i].hiding == h) t.merge(per_problem[i]);
      }
      table.rows.push_back(row_from(hiding_label(h), t));
    }
  }
  WinTally total;
  for (const auto& t : per_problem) total.merge(t);
  table.rows.push_back(row_from("average", total));
  return table;
}

namespace {

std::string pct(double fraction) { return fmt("%.2f%%", fraction * 100.0); }

std::string r_cell(bool has, double value) { return has ? pct(value) : "-"; }

}  // namespace

std::string IterationSpeedupTable::to_text() const {
  std::ostringstream os;
  os << "Speedup results (iterations)\n";
  os << "category\t% " << learner_a << "\t% " << learner_b << "\tr(" << learner_a << ")\tr("
     << learner_b << ")\n";
  for (const auto& row : rows) {
    os << row.category << "\t" << pct(row.share_a) << "\t" << pct(row.share_b) << "\t"
       << r_cell(row.has_r_a, row.r_a) << "\t" << r_cell(row.has_r_b, row.r_b) << "\n";
  }
  return os.str();
}

std::string IterationSpeedupTable::to_csv() const {
  std::ostringstream os;
  os << "category,share_" << learner_a << ",share_" << learner_b << ",wins_" << learner_a
     << ",wins_" << learner_b << ",compared_iterations,r_" << learner_a << ",r_" << learner_b
     << "\n";
  for (const auto& row : rows) {
    os << row.category << "," << full(row.share_a) << "," << full(row.share_b) << ","
       << row.wins_a << "," << row.wins_b << "," << row.compared << ","
       << (row.has_r_a ? full(row.r_a) : "") << "," << (row.has_r_b ? full(row.r_b) : "")
       << "\n";
  }
  return os.str();
}

TimeSpeedupTable time_speedup_table(const ExperimentResult& result,
                                    const std::string& learner_a,
                                    const std::string& learner_b, double match_tolerance) {
  TimeSpeedupTable table;
  table.learner_a = learner_a;
  table.learner_b = learner_b;

  struct RaceTally {
    int wins_a = 0, wins_b = 0;
    double s_sum_a = 0.0, s_sum_b = 0.0;
    void merge(const RaceTally& o) {
      wins_a += o.wins_a;
      wins_b += o.wins_b;
      s_sum_a += o.s_sum_a;
      s_sum_b += o.s_sum_b;
    }
  };

  std::vector<std::string> networks;
  for (const auto& p : result.problems) networks.push_back(p.network);
  networks = ordered_unique(networks);

  std::vector<RaceTally> per_problem(result.problems.size());
  for (size_t i = 0; i < result.problems.size(); ++i) {
    const ProblemResult& p = result.problems[i];
    int a = learner_index(p, learner_a);
    int b = learner_index(p, learner_b);
    if (a < 0 || b < 0) {
      throw std::invalid_argument("time_speedup_table: problem lacks learner '" +
                                  (a < 0 ? learner_a : learner_b) + "'");
    }
    const LearningTrace& ref = p.traces[b];
    double target = ref.final_log_posterior();
    double time_b = ref.iterations.back().elapsed_ms;

    // First moment the racer reaches the reference quality.
    double time_a = -1.0;
    for (const auto& it : p.traces[a].iterations) {
      if (!std::isnan(it.log_posterior) && it.log_posterior >= target - match_tolerance) {
        time_a = it.elapsed_ms;
        break;
      }
    }

    RaceTally tally;
    if (time_a >= 0.0 && time_a < time_b) {
      tally.wins_a = 1;
      if (time_b > 0.0) tally.s_sum_a = 1.0 - time_a / time_b;
    } else {
      tally.wins_b = 1;
      double t_a = time_a >= 0.0 ? time_a : p.traces[a].iterations.back().elapsed_ms;
      if (t_a > 0.0) tally.s_sum_b = 1.0 - time_b / t_a;
    }
    per_problem[i] = tally;
  }

  auto row_of = [&](const std::string& category, const RaceTally& t) {
    TimeRaceRow row;
    row.category = category;
    row.wins_a = t.wins_a;
    row.wins_b = t.wins_b;
    int total = t.wins_a + t.wins_b;
    if (total > 0) {
      row.share_a = static_cast<double>(t.wins_a) / total;
      row.share_b = static_cast<double>(t.wins_b) / total;
    }
    if (t.wins_a > 0) {
      row.s_a = t.s_sum_a / t.wins_a;
      row.has_s_a = true;
    }
    if (t.wins_b > 0) {
      row.s_b = t.s_sum_b / t.wins_b;
      row.has_s_b = true;
    }
    return row;
  };

  for (const std::string& net : networks) {
    RaceTally t;
    for (size_t i = 0; i < result.problems.size(); ++i) {
      if (result.problems[i].network == net) t.merge(per_problem[i]);
    }
    table.rows.push_back(row_of(net, t));
  }
  RaceTally total;
  for (const auto& t : per_problem) total.merge(t);
  table.rows.push_back(row_of("average", total));
  return table;
}

std::string TimeSpeedupTable::to_text() const {
  std::ostringstream os;
  os << "Speedup results (time)\n";
  os << "network\t% " << learner_a << "\t% " << learner_b << "\ts\ts'\n";
  for (const auto& row : rows) {
    os << row.category << "\t" << pct(row.share_a) << "\t" << pct(row.share_b) << "\t"
       << r_cell(row.has_s_a, row.s_a) << "\t" << r_cell(row.has_s_b, row.s_b) << "\n";
  }
  return os.str();
}

std::string TimeSpeedupTable::to_csv() const {
  std::ostringstream os;
  os << "network,share_" << learner_a << ",share_" << learner_b << ",wins_" << learner_a
     << ",wins_" << learner_b << ",s_" << learner_a << ",s_" << learner_b << "\n";
  for (const auto& row : rows) {
    os << row.category << "," << full(row.share_a) << "," << full(row.share_b) << ","
       << row.wins_a << "," << row.wins_b << "," << (row.has_s_a ? full(row.s_a) : "") << ","
       << (row.has_s_b ? full(row.s_b) : "") << "\n";
  }
  return os.str();
}

std::string problem_stem(const ProblemResult& problem, const std::string& learner) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "h%02d_r%d",
                static_cast<int>(std::lround(problem.hiding * 100.0)), problem.replicate);
  return problem.network + "_" + buf + "_" + learner;
}

void emit_curves(const ExperimentResult& result, const std::string& directory) {
  fs::create_directories(directory);
  for (const auto& problem : result.problems) {
    for (size_t j = 0; j < problem.traces.size(); ++j) {
      fs::path path = fs::path(directory) / (problem_stem(problem, problem.learner_names[j]) +
                                             ".csv");
      std::ofstream f(path);
      if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
      f << "iteration,elapsed_ms,log_posterior,error\n";
      const LearningTrace& trace = problem.traces[j];
      for (size_t t = 0; t < trace.iterations.size(); ++t) {
        const TraceIteration& it = trace.iterations[t];
        f << t << "," << fmt("%.3f", it.elapsed_ms) << "," << full(it.log_posterior) << ","
          << full(problem.best_log_posterior - it.log_posterior) << "\n";
      }
    }
  }
}

void write_result_bundle(const ExperimentResult& result, const std::string& directory) {
  fs::create_directories(fs::path(directory) / "traces");
  fs::create_directories(fs::path(directory) / "tables");
  emit_curves(result, (fs::path(directory) / "curves").string());

  json manifest;
  manifest["problems"] = json::array();
  for (const auto& problem : result.problems) {
    json jp;
    jp["network"] = problem.network;
    jp["hiding"] = problem.hiding;
    jp["replicate"] = problem.replicate;
    jp["param_seed"] = problem.param_seed;
    jp["best_log_posterior"] = problem.best_log_posterior;
    jp["learners"] = problem.learner_names;
    json files = json::array();
    for (size_t j = 0; j < problem.traces.size(); ++j) {
      std::string rel =
          "traces/" + problem_stem(problem, problem.learner_names[j]) + ".json";
      files.push_back(rel);
      std::ofstream f(fs::path(directory) / rel);
      if (!f) throw std::runtime_error("cannot write trace file under " + directory);
      f << problem.traces[j].to_json(2) << "\n";
    }
    jp["trace_files"] = std::move(files);
    manifest["problems"].push_back(std::move(jp));
  }
  {
    std::ofstream f(fs::path(directory) / "manifest.json");
    if (!f) throw std::runtime_error("cannot write manifest under " + directory);
    f << manifest.dump(2) << "\n";
  }

  // Tables for the learner pairs that are present everywhere.
  auto have = [&](const std::string& name) {
    for (const auto& p : result.problems) {
      if (learner_index(p, name) < 0) return false;
    }
    return !result.problems.empty();
  };
  if (have("em") && have("edml")) {
    IterationSpeedupTable t = iteration_speedup_table(result, "edml", "em");
    std::ofstream(fs::path(directory) / "tables" / "iteration_speedup.txt") << t.to_text();
    std::ofstream(fs::path(directory) / "tables" / "iteration_speedup.csv") << t.to_csv();
  }
  if (have("em") && have("hybrid")) {
    TimeSpeedupTable t = time_speedup_table(result, "hybrid", "em");
    std::ofstream(fs::path(directory) / "tables" / "time_speedup.txt") << t.to_text();
    std::ofstream(fs::path(directory) / "tables" / "time_speedup.csv") << t.to_csv();
  }
}

ExperimentResult load_result_bundle(const std::string& directory) {
  std::ifstream f(fs::path(directory) / "manifest.json");
  if (!f) throw std::runtime_error("cannot open manifest.json under " + directory);
  json manifest = json::parse(f);

  ExperimentResult result;
  for (const auto& jp : manifest.at("problems")) {
    ProblemResult problem;
    problem.network = jp.at("network").get<std::string>();
    problem.hiding = jp.at("hiding").get<double>();
    problem.replicate = jp.at("replicate").get<int>();
    problem.param_seed = jp.at("param_seed").get<std::uint64_t>();
    problem.best_log_posterior = jp.at("best_log_posterior").get<double>();
    problem.learner_names = jp.at("learners").get<std::vector<std::string>>();
    for (const auto& rel : jp.at("trace_files")) {
      std::ifstream tf(fs::path(directory) / rel.get<std::string>());
      if (!tf) {
        throw std::runtime_error("cannot open trace file " + rel.get<std::string>());
      }
      std::ostringstream os;
      os << tf.rdbuf();
      problem.traces.push_back(trace_from_json(os.str()));
    }
    result.problems.push_back(std::move(problem));
  }
  return result;
}

}  // namespace edml
