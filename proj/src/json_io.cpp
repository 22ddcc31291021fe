#include "edml/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "edml/bif.hpp"

namespace edml {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

json tables_to_json(const Network& net, const std::vector<Table>& tables) {
  json out = json::object();
  for (int v = 0; v < net.num_variables(); ++v) {
    const Table& t = tables[v];
    json rows = json::array();
    for (int r = 0; r < t.rows; ++r) {
      json row = json::array();
      for (int x = 0; x < t.width; ++x) row.push_back(t.at(r, x));
      rows.push_back(std::move(row));
    }
    out[net.variable(v).id] = std::move(rows);
  }
  return out;
}

std::vector<Table> tables_from_json(const Network& net, const json& j,
                                    const std::string& what) {
  std::vector<Table> tables;
  tables.reserve(net.num_variables());
  for (int v = 0; v < net.num_variables(); ++v) {
    const std::string& id = net.variable(v).id;
    if (!j.contains(id)) {
      throw std::runtime_error(what + ": missing table for variable '" + id + "'");
    }
    const json& rows = j.at(id);
    Table t(net.num_rows(v), net.cardinality(v));
    if (static_cast<int>(rows.size()) != t.rows) {
      throw std::runtime_error(what + ": variable '" + id + "' expects " +
                               std::to_string(t.rows) + " rows, found " +
                               std::to_string(rows.size()));
    }
    for (int r = 0; r < t.rows; ++r) {
      const json& row = rows.at(r);
      if (static_cast<int>(row.size()) != t.width) {
        throw std::runtime_error(what + ": variable '" + id + "' row " + std::to_string(r) +
                                 " expects " + std::to_string(t.width) + " entries");
      }
      for (int x = 0; x < t.width; ++x) t.at(r, x) = row.at(x).get<double>();
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

}  // namespace

NetworkFile parse_network_json(const std::string& text) {
  json j = json::parse(text);
  NetworkFile out;
  out.name = j.value("name", "");

  std::vector<Variable> vars;
  std::vector<std::vector<std::string>> parent_names;
  for (const json& jv : j.at("variables")) {
    Variable var;
    var.id = jv.at("id").get<std::string>();
    var.values = jv.at("values").get<std::vector<std::string>>();
    vars.push_back(std::move(var));
    parent_names.push_back(jv.value("parents", std::vector<std::string>{}));
  }

  std::vector<std::vector<int>> parents(vars.size());
  {
    std::unordered_map<std::string, int> index;
    for (size_t v = 0; v < vars.size(); ++v) index[vars[v].id] = static_cast<int>(v);
    for (size_t v = 0; v < vars.size(); ++v) {
      for (const std::string& p : parent_names[v]) {
        auto it = index.find(p);
        if (it == index.end()) {
          throw std::runtime_error("network json: unknown parent '" + p + "' of '" +
                                   vars[v].id + "'");
        }
        parents[v].push_back(it->second);
      }
    }
  }
  out.network = Network(std::move(vars), std::move(parents));
  out.params.cpt = tables_from_json(out.network, j.at("cpts"), "cpts");
  return out;
}

NetworkFile load_network_json_file(const std::string& path) {
  try {
    return parse_network_json(read_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string network_json(const Network& net, const Parameterization& params,
                         const std::string& name, int indent) {
  json j;
  j["name"] = name;
  json vars = json::array();
  for (int v = 0; v < net.num_variables(); ++v) {
    json jv;
    jv["id"] = net.variable(v).id;
    jv["values"] = net.variable(v).values;
    std::vector<std::string> ps;
    for (int p : net.parents(v)) ps.push_back(net.variable(p).id);
    jv["parents"] = ps;
    vars.push_back(std::move(jv));
  }
  j["variables"] = std::move(vars);
  j["cpts"] = tables_to_json(net, params.cpt);
  return j.dump(indent);
}

void save_network_json_file(const Network& net, const Parameterization& params,
                            const std::string& name, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << network_json(net, params, name) << "\n";
}

std::string params_json(const Network& net, const Parameterization& params, int indent) {
  json j;
  j["cpts"] = tables_to_json(net, params.cpt);
  return j.dump(indent);
}

Parameterization parse_params_json(const Network& net, const std::string& text) {
  json j = json::parse(text);
  Parameterization p;
  p.cpt = tables_from_json(net, j.at("cpts"), "cpts");
  return p;
}

std::string prior_json(const Network& net, const DirichletPrior& prior, int indent) {
  json j;
  j["exponents"] = tables_to_json(net, prior.psi);
  return j.dump(indent);
}

DirichletPrior parse_prior_json(const Network& net, const std::string& text) {
  json j = json::parse(text);
  DirichletPrior prior;
  prior.psi = tables_from_json(net, j.at("exponents"), "exponents");
  return prior;
}

NetworkFile load_network_file(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "bif") return load_bif_file(path);
  return load_network_json_file(path);
}

}  // namespace edml
