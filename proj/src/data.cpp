#include "edml/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "edml/rng.hpp"

namespace edml {

bool Dataset::complete(const Network& net) const {
  for (const Evidence& e : examples) {
    if (e.num_observed() != net.num_variables()) return false;
  }
  return true;
}

Dataset forward_sample(const Network& net, const Parameterization& params, int n,
                       std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("forward_sample: n must be >= 1");
  auto order = net.topological_order();
  if (!order) throw std::invalid_argument("forward_sample: network is cyclic");

  Rng rng(seed);
  Dataset ds;
  ds.provenance.sample_seed = seed;
  ds.examples.reserve(n);
  std::vector<int> assignment(net.num_variables(), 0);
  for (int i = 0; i < n; ++i) {
    for (int v : *order) {
      const double* row = params[v].row(net.row_of(v, assignment));
      double u = rng.uniform01();
      int k = net.cardinality(v);
      int x = k - 1;  // absorbs any float residue in the row sum
      double cum = 0.0;
      for (int j = 0; j < k; ++j) {
        cum += row[j];
        if (u < cum) {
          x = j;
          break;
        }
      }
      assignment[v] = x;
    }
    Evidence e(net.num_variables());
    for (int v = 0; v < net.num_variables(); ++v) e.set(v, assignment[v]);
    ds.examples.push_back(std::move(e));
  }
  return ds;
}

Dataset hide(const Network& net, const Dataset& dataset, const HidingPolicy& policy) {
  if (policy.percentage < 0.0 || policy.percentage > 1.0) {
    throw std::invalid_argument("hide: percentage must be in [0, 1]");
  }
  if (!dataset.complete(net)) {
    throw std::invalid_argument("hide: input dataset must be complete");
  }

  Rng rng(policy.seed);
  Dataset out = dataset;
  out.provenance.hiding_percentage = policy.percentage;
  out.provenance.hiding_seed = policy.seed;

  if (policy.mode == HidingMode::kHiddenVariables) {
    out.provenance.hiding_mode = "hidden-variables";
    int nvars = net.num_variables();
    int k = static_cast<int>(std::lround(policy.percentage * nvars));
    std::vector<int> perm(nvars);
    for (int v = 0; v < nvars; ++v) perm[v] = v;
    for (int j = 0; j < k; ++j) {  // partial Fisher-Yates, first k slots
      int pick = j + static_cast<int>(rng.below(nvars - j));
      std::swap(perm[j], perm[pick]);
    }
    for (Evidence& e : out.examples) {
      for (int j = 0; j < k; ++j) e.clear(perm[j]);
    }
  } else {
    out.provenance.hiding_mode = "per-cell";
    for (Evidence& e : out.examples) {
      for (int v = 0; v < net.num_variables(); ++v) {
        if (rng.uniform01() < policy.percentage) e.clear(v);
      }
    }
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) cells.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

void write_csv(const Network& net, const Dataset& dataset, std::ostream& out) {
  for (int v = 0; v < net.num_variables(); ++v) {
    out << (v ? "," : "") << net.variable(v).id;
  }
  out << "\n";
  for (const Evidence& e : dataset.examples) {
    for (int v = 0; v < net.num_variables(); ++v) {
      if (v) out << ",";
      if (e.observed(v)) {
        out << net.variable(v).values[e[v]];
      } else {
        out << "?";
      }
    }
    out << "\n";
  }
}

void write_csv_file(const Network& net, const Dataset& dataset, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(net, dataset, f);
}

Dataset read_csv(const Network& net, std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing header row");
  std::vector<std::string> header = split_csv_line(line);
  std::vector<int> cols(header.size());
  for (size_t j = 0; j < header.size(); ++j) {
    cols[j] = net.var_index(header[j]);
    if (cols[j] < 0) throw std::runtime_error("csv: unknown variable '" + header[j] + "'");
  }

  Dataset ds;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " cells, found " +
                               std::to_string(cells.size()));
    }
    Evidence e(net.num_variables());
    for (size_t j = 0; j < cells.size(); ++j) {
      if (cells[j] == "?") continue;
      int val = net.variable(cols[j]).value_index(cells[j]);
      if (val < 0) {
        throw std::runtime_error("csv line " + std::to_string(lineno) + ": '" + cells[j] +
                                 "' is not a value of " + net.variable(cols[j]).id);
      }
      e.set(cols[j], val);
    }
    ds.examples.push_back(std::move(e));
  }
  return ds;
}

Dataset read_csv_file(const Network& net, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return read_csv(net, f);
}

}  // namespace edml
