#ifndef EDML_JSON_IO_HPP
#define EDML_JSON_IO_HPP

#include <string>

#include "edml/model.hpp"

namespace edml {

// A network file bundles structure and parameters (and a display name).
struct NetworkFile {
  std::string name;
  Network network;
  Parameterization params;
};

// Canonical JSON schema:
//   {
//     "name": "...",
//     "variables": [
//       {"id": "a", "values": ["v0", "v1"], "parents": []},
//       {"id": "b", "values": ["v0", "v1"], "parents": ["a"]}
//     ],
//     "cpts": {
//       "a": [[0.3, 0.7]],
//       "b": [[0.9, 0.1], [0.2, 0.8]]
//     }
//   }
// CPT rows enumerate parent instantiations in declared parent order with the
// last parent varying fastest; entries within a row follow the declared
// value order of the child.
NetworkFile parse_network_json(const std::string& text);
NetworkFile load_network_json_file(const std::string& path);
std::string network_json(const Network& net, const Parameterization& params,
                         const std::string& name, int indent = 2);
void save_network_json_file(const Network& net, const Parameterization& params,
                            const std::string& name, const std::string& path);

// Parameterization alone: {"cpts": {...}} in the same row layout.
std::string params_json(const Network& net, const Parameterization& params, int indent = 2);
Parameterization parse_params_json(const Network& net, const std::string& text);

// Prior exponents: {"exponents": {...}} in the same row layout.
std::string prior_json(const Network& net, const DirichletPrior& prior, int indent = 2);
DirichletPrior parse_prior_json(const Network& net, const std::string& text);

// Loads .json or .bif by extension.
NetworkFile load_network_file(const std::string& path);

}  // namespace edml

#endif  // EDML_JSON_IO_HPP
