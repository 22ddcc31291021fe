#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "edml/bench.hpp"
#include "edml/bif.hpp"
#include "edml/data.hpp"
#include "edml/json_io.hpp"
#include "edml/learn.hpp"

namespace {

using namespace edml;

HidingMode mode_from_name(const std::string& name) {
  if (name == "variables") return HidingMode::kHiddenVariables;
  if (name == "cells") return HidingMode::kPerCell;
  throw CLI::ValidationError("--mode", "expected 'variables' or 'cells'");
}

struct LearnArgs {
  std::string network, data, algorithm = "em";
  double psi = 2.0, damping = 0.5;
  std::uint64_t seed = 0;
  int max_iters = 1000, local_max_iters = 512, threads = 1;
  double local_tol = 1e-8, stop_lp = 1e-7, stop_param = 1e-6;
  std::string trace_out, params_out;
};

int cmd_learn(const LearnArgs& args) {
  NetworkFile nf = load_network_file(args.network);
  Dataset dataset = read_csv_file(nf.network, args.data);

  LearnerConfig cfg;
  cfg.algorithm = algorithm_from_name(args.algorithm);
  cfg.prior = DirichletPrior::constant(nf.network, args.psi);
  cfg.global_max_iterations = args.max_iters;
  cfg.local_max_iterations = args.local_max_iters;
  cfg.local_tolerance = args.local_tol;
  cfg.damping = args.damping;
  cfg.seed = args.seed;
  cfg.stop_logpost_delta = args.stop_lp;
  cfg.stop_param_delta = args.stop_param;
  cfg.threads = args.threads;

  LearningTrace trace = run(nf.network, dataset, cfg);

  const char* status = trace.status == LearningTrace::Status::kConverged ? "converged"
                       : trace.status == LearningTrace::Status::kAborted ? "aborted"
                                                                         : "max-iterations";
  std::printf("algorithm        %s\n", args.algorithm.c_str());
  std::printf("status           %s\n", status);
  if (!trace.message.empty()) std::printf("message          %s\n", trace.message.c_str());
  std::printf("global iterations %zu\n", trace.iterations.size() - 1);
  std::printf("log posterior    %.10f\n", trace.final_log_posterior());
  std::printf("elapsed ms       %.1f\n", trace.iterations.back().elapsed_ms);

  if (!args.trace_out.empty()) {
    std::ofstream f(args.trace_out);
    if (!f) throw std::runtime_error("cannot open for writing: " + args.trace_out);
    f << trace.to_json(2) << "\n";
  }
  if (!args.params_out.empty()) {
    std::ofstream f(args.params_out);
    if (!f) throw std::runtime_error("cannot open for writing: " + args.params_out);
    f << params_json(nf.network, trace.final_params()) << "\n";
  }
  return trace.status == LearningTrace::Status::kAborted ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAP parameter learning for discrete Bayesian networks (EM, EDML, hybrid)"};
  app.require_subcommand(1);

  // sample
  auto* sample = app.add_subcommand("sample", "Forward-sample a complete dataset");
  std::string s_network, s_out;
  int s_n = 1 << 10;
  std::uint64_t s_seed = 0;
  sample->add_option("--network", s_network, "network file (.json or .bif)")->required();
  sample->add_option("--n", s_n, "number of examples");
  sample->add_option("--seed", s_seed, "sampling seed");
  sample->add_option("--out", s_out, "output CSV path")->required();

  // hide
  auto* hide_cmd = app.add_subcommand("hide", "Hide values of a complete dataset");
  std::string h_network, h_data, h_out, h_mode = "variables";
  double h_pct = 0.25;
  std::uint64_t h_seed = 0;
  hide_cmd->add_option("--network", h_network, "network file")->required();
  hide_cmd->add_option("--data", h_data, "complete dataset CSV")->required();
  hide_cmd->add_option("--mode", h_mode, "variables | cells");
  hide_cmd->add_option("--percentage", h_pct, "fraction to hide, in [0, 1]");
  hide_cmd->add_option("--seed", h_seed, "hiding seed");
  hide_cmd->add_option("--out", h_out, "output CSV path")->required();

  // learn
  auto* learn_cmd = app.add_subcommand("learn", "Learn MAP parameters from a dataset");
  LearnArgs largs;
  learn_cmd->add_option("--network", largs.network, "network file")->required();
  learn_cmd->add_option("--data", largs.data, "dataset CSV")->required();
  learn_cmd->add_option("--algorithm", largs.algorithm, "em | edml | hybrid");
  learn_cmd->add_option("--psi", largs.psi, "constant Dirichlet exponent (2 = Laplace)");
  learn_cmd->add_option("--damping", largs.damping, "damping factor in [0, 1)");
  learn_cmd->add_option("--seed", largs.seed, "seed parameterization");
  learn_cmd->add_option("--max-iters", largs.max_iters, "global iteration cap");
  learn_cmd->add_option("--local-max-iters", largs.local_max_iters, "local iteration cap");
  learn_cmd->add_option("--local-tol", largs.local_tol, "local convergence tolerance");
  learn_cmd->add_option("--stop-lp", largs.stop_lp, "stop threshold on log-posterior change");
  learn_cmd->add_option("--stop-param", largs.stop_param, "stop threshold on parameter change");
  learn_cmd->add_option("--threads", largs.threads, "worker threads (results are identical)");
  learn_cmd->add_option("--trace", largs.trace_out, "write the learning trace JSON here");
  learn_cmd->add_option("--params-out", largs.params_out, "write learned parameters here");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run the benchmark sweep");
  std::vector<std::string> b_networks;
  std::vector<double> b_hiding = {0.10, 0.25, 0.35, 0.50, 0.70};
  std::vector<std::string> b_algorithms = {"em", "edml", "hybrid"};
  std::string b_out, b_mode = "variables";
  int b_size = 1 << 10, b_replicates = 3, b_max_iters = 1000, b_threads = 1;
  double b_psi = 2.0, b_damping = 0.5;
  std::uint64_t b_seed = 0;
  bench_cmd->add_option("--network", b_networks, "network file(s)")->required();
  bench_cmd->add_option("--size", b_size, "dataset size per problem");
  bench_cmd->add_option("--hiding", b_hiding, "hiding fractions");
  bench_cmd->add_option("--mode", b_mode, "variables | cells");
  bench_cmd->add_option("--replicates", b_replicates, "datasets per (network, hiding) cell");
  bench_cmd->add_option("--algorithms", b_algorithms, "learners to race");
  bench_cmd->add_option("--psi", b_psi, "constant Dirichlet exponent");
  bench_cmd->add_option("--damping", b_damping, "damping factor for edml/hybrid");
  bench_cmd->add_option("--max-iters", b_max_iters, "global iteration cap");
  bench_cmd->add_option("--seed", b_seed, "master seed");
  bench_cmd->add_option("--threads", b_threads, "worker threads");
  bench_cmd->add_option("--out", b_out, "output directory")->required();

  // tables
  auto* tables_cmd = app.add_subcommand("tables", "Recompute summary tables from a bundle");
  std::string t_in;
  double t_cutoff = 1e-4;
  tables_cmd->add_option("--in", t_in, "result bundle directory")->required();
  tables_cmd->add_option("--cutoff", t_cutoff, "error cutoff for iteration counting");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      NetworkFile nf = load_network_file(s_network);
      Dataset ds = forward_sample(nf.network, nf.params, s_n, s_seed);
      write_csv_file(nf.network, ds, s_out);
      std::printf("wrote %d examples to %s\n", ds.size(), s_out.c_str());
    } else if (*hide_cmd) {
      NetworkFile nf = load_network_file(h_network);
      Dataset ds = read_csv_file(nf.network, h_data);
      Dataset hidden = hide(nf.network, ds, {mode_from_name(h_mode), h_pct, h_seed});
      write_csv_file(nf.network, hidden, h_out);
      std::printf("wrote %d examples to %s\n", hidden.size(), h_out.c_str());
    } else if (*learn_cmd) {
      return cmd_learn(largs);
    } else if (*bench_cmd) {
      ExperimentSpec spec;
      spec.network_files = b_networks;
      spec.dataset_size = b_size;
      spec.hiding = b_hiding;
      spec.hiding_mode = mode_from_name(b_mode);
      spec.replicates = b_replicates;
      spec.master_seed = b_seed;
      spec.threads = b_threads;
      spec.learners.clear();
      for (const std::string& name : b_algorithms) {
        LearnerSpec ls;
        ls.name = name;
        ls.algorithm = algorithm_from_name(name);
        ls.psi = b_psi;
        ls.damping = b_damping;
        ls.global_max_iterations = b_max_iters;
        spec.learners.push_back(ls);
      }
      ExperimentResult result = run_experiment(spec);
      write_result_bundle(result, b_out);
      auto has = [&](const std::string& n) {
        return std::find(b_algorithms.begin(), b_algorithms.end(), n) != b_algorithms.end();
      };
      if (has("em") && has("edml")) {
        std::cout << iteration_speedup_table(result, "edml", "em").to_text() << "\n";
      }
      if (has("em") && has("hybrid")) {
        std::cout << time_speedup_table(result, "hybrid", "em").to_text() << "\n";
      }
      std::printf("result bundle written to %s\n", b_out.c_str());
    } else if (*tables_cmd) {
      ExperimentResult result = load_result_bundle(t_in);
      bool any = false;
      auto has = [&](const std::string& n) {
        for (const auto& p : result.problems) {
          if (std::find(p.learner_names.begin(), p.learner_names.end(), n) ==
              p.learner_names.end()) {
            return false;
          }
        }
        return !result.problems.empty();
      };
      if (has("em") && has("edml")) {
        std::cout << iteration_speedup_table(result, "edml", "em", t_cutoff).to_text() << "\n";
        any = true;
      }
      if (has("em") && has("hybrid")) {
        std::cout << time_speedup_table(result, "hybrid", "em").to_text() << "\n";
        any = true;
      }
      if (!any) {
        std::cerr << "bundle has no comparable learner pair (need em+edml or em+hybrid)\n";
        return 1;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
