#ifndef EDML_DATA_HPP
#define EDML_DATA_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "edml/model.hpp"

namespace edml {

// How a dataset came to be; carried along so experiment outputs can name
// their inputs.
struct Provenance {
  std::uint64_t sample_seed = 0;
  std::string hiding_mode;  // empty until hide() has been applied
  double hiding_percentage = 0.0;
  std::uint64_t hiding_seed = 0;
};

struct Dataset {
  std::vector<Evidence> examples;
  Provenance provenance;

  int size() const { return static_cast<int>(examples.size()); }
  bool complete(const Network& net) const;
};

enum class HidingMode { kHiddenVariables, kPerCell };

struct HidingPolicy {
  HidingMode mode = HidingMode::kHiddenVariables;
  double percentage = 0.0;  // fraction in [0, 1]
  std::uint64_t seed = 0;
};

// n complete examples drawn i.i.d. from the network distribution by
// sampling variables in topological order. Deterministic per seed.
Dataset forward_sample(const Network& net, const Parameterization& params, int n,
                       std::uint64_t seed);

// Hidden-variables mode removes round(percentage * |variables|) variables,
// chosen once, from every example. Per-cell mode removes each cell
// independently with probability = percentage. Deterministic per seed.
// The input must be complete.
Dataset hide(const Network& net, const Dataset& dataset, const HidingPolicy& policy);

// CSV format: header row of variable ids, one row per example, value labels
// as cells, `?` for a missing value.
void write_csv(const Network& net, const Dataset& dataset, std::ostream& out);
void write_csv_file(const Network& net, const Dataset& dataset, const std::string& path);
Dataset read_csv(const Network& net, std::istream& in);
Dataset read_csv_file(const Network& net, const std::string& path);

}  // namespace edml

#endif  // EDML_DATA_HPP
