#ifndef EDML_MODEL_HPP
#define EDML_MODEL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace edml {

// A discrete variable with named states.
struct Variable {
  std::string id;
  std::vector<std::string> values;

  int cardinality() const { return static_cast<int>(values.size()); }
  int value_index(const std::string& label) const;
};

// Dense rows-by-width block of doubles. Used for conditional probability
// tables, Dirichlet exponents and expected-count accumulators, all of which
// share the same per-family layout: one row per parent instantiation, one
// column per child value.
struct Table {
  int rows = 0;
  int width = 0;
  std::vector<double> v;

  Table() = default;
  Table(int rows_, int width_, double fill = 0.0)
      : rows(rows_), width(width_), v(static_cast<size_t>(rows_) * width_, fill) {}

  double& at(int r, int x) { return v[static_cast<size_t>(r) * width + x]; }
  double at(int r, int x) const { return v[static_cast<size_t>(r) * width + x]; }
  double* row(int r) { return v.data() + static_cast<size_t>(r) * width; }
  const double* row(int r) const { return v.data() + static_cast<size_t>(r) * width; }
  size_t size() const { return v.size(); }

  friend bool operator==(const Table&, const Table&) = default;
};

// Directed structure over discrete variables. Parents are kept in declared
// order; a CPT row index enumerates parent instantiations with the last
// parent varying fastest.
class Network {
 public:
  Network() = default;
  Network(std::vector<Variable> variables, std::vector<std::vector<int>> parents);

  int num_variables() const { return static_cast<int>(variables_.size()); }
  const Variable& variable(int v) const { return variables_[v]; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<int>& parents(int v) const { return parents_[v]; }
  int cardinality(int v) const { return variables_[v].cardinality(); }

  // Index of the variable with the given id, or -1.
  int var_index(const std::string& id) const;

  // Number of parent instantiations of v (product of parent cardinalities).
  int num_rows(int v) const;

  // Row index of v's parent instantiation within a full assignment.
  int row_of(int v, const std::vector<int>& assignment) const;

  // Decode a row index back into parent value indexes (declared order).
  std::vector<int> row_values(int v, int row) const;

  // Topological order of the parent relation, or nullopt on a cycle.
  std::optional<std::vector<int>> topological_order() const;

  // Total number of parameters, i.e. sum over families of rows * cardinality.
  size_t num_parameters() const;

 private:
  std::vector<Variable> variables_;
  std::vector<std::vector<int>> parents_;
  std::unordered_map<std::string, int> index_;
};

// One CPT per variable, aligned with the network's variable order.
struct Parameterization {
  std::vector<Table> cpt;

  const Table& operator[](int v) const { return cpt[v]; }
  Table& operator[](int v) { return cpt[v]; }
  size_t num_variables() const { return cpt.size(); }

  // Largest absolute entry-wise difference against another parameterization
  // of the same shape.
  double max_abs_diff(const Parameterization& other) const;

  friend bool operator==(const Parameterization&, const Parameterization&) = default;
};

// Dirichlet exponents, one table per variable in the same layout as the CPTs.
struct DirichletPrior {
  std::vector<Table> psi;

  const Table& operator[](int v) const { return psi[v]; }
  Table& operator[](int v) { return psi[v]; }

  // All exponents equal to value (value 2 gives Laplace smoothing).
  static DirichletPrior constant(const Network& net, double value);
};

// Partial assignment of variables to observed value indexes; -1 = missing.
class Evidence {
 public:
  Evidence() = default;
  explicit Evidence(int num_variables) : vals_(num_variables, -1) {}

  int operator[](int v) const { return vals_[v]; }
  void set(int v, int value) { vals_[v] = value; }
  void clear(int v) { vals_[v] = -1; }
  bool observed(int v) const { return vals_[v] >= 0; }
  int num_variables() const { return static_cast<int>(vals_.size()); }
  int num_observed() const;
  bool empty() const { return num_observed() == 0; }

  friend bool operator==(const Evidence&, const Evidence&) = default;

 private:
  std::vector<int> vals_;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Reports every violated structural or numeric invariant: bad cardinalities,
// cyclic parent relations, mis-shaped CPTs, rows off the simplex.
ValidationReport validate(const Network& net, const Parameterization& params);

// Every CPT entry equal to 1/cardinality of the child.
Parameterization uniform_parameterization(const Network& net);

// Each row drawn from the interior of its simplex (entries >= 1e-6),
// deterministic per seed.
Parameterization random_parameterization(const Network& net, std::uint64_t seed);

// Mode of the prior density, (psi_x - 1) / (psi_X - |X|) per row. Requires
// every exponent > 1.
Parameterization dirichlet_mode(const DirichletPrior& prior);

// Unnormalized log density of the prior at params: sum of (psi-1) * log theta.
// Returns -infinity when some theta is 0 with psi > 1.
double prior_log_density(const DirichletPrior& prior, const Parameterization& params);

constexpr double kSimplexTolerance = 1e-9;
constexpr double kInteriorFloor = 1e-6;

}  // namespace edml

#endif  // EDML_MODEL_HPP
