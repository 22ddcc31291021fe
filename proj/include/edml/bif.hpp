#ifndef EDML_BIF_HPP
#define EDML_BIF_HPP

#include <string>

#include "edml/json_io.hpp"

namespace edml {

// Importer for the BIF subset used by the common benchmark repositories:
// discrete variables and table CPTs only. Supported probability bodies are
// `table p0, p1, ...;` for root variables and `(label, ...) p0, p1, ...;`
// rows keyed by parent value labels. `property` lines are ignored.
NetworkFile parse_bif(const std::string& text);
NetworkFile load_bif_file(const std::string& path);

}  // namespace edml

#endif  // EDML_BIF_HPP
