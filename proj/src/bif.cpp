#include "edml/bif.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace edml {

namespace {

struct Token {
  std::string text;
  int line;
};

// Splits into identifiers/numbers and single-character punctuation, dropping
// comments. Identifiers may contain letters, digits, '_', '-', '.', '%'.
std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  int line = 1;
  size_t i = 0;
  auto word_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == '%' || c == '+';
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
      i += 2;
      while (i + 1 < text.size() && !(text[i] == '*' && text[i + 1] == '/')) {
        if (text[i] == '\n') ++line;
        ++i;
      }
      i += 2;
    } else if (c == '"') {
      size_t j = text.find('"', i + 1);
      if (j == std::string::npos) throw std::runtime_error("bif: unterminated string");
      tokens.push_back({text.substr(i + 1, j - i - 1), line});
      i = j + 1;
    } else if (word_char(c)) {
      size_t j = i;
      while (j < text.size() && word_char(text[j])) ++j;
      tokens.push_back({text.substr(i, j - i), line});
      i = j;
    } else {
      tokens.push_back({std::string(1, c), line});
      ++i;
    }
  }
  return tokens;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  NetworkFile parse() {
    NetworkFile out;
    std::vector<Variable> vars;
    std::unordered_map<std::string, int> index;
    std::vector<std::vector<std::string>> parent_names;
    struct RawCpt {
      std::string child;
      std::vector<std::string> parents;
      // rows keyed by parent label tuples; "table" rows use an empty key
      std::vector<std::pair<std::vector<std::string>, std::vector<double>>> entries;
      int line;
    };
    std::vector<RawCpt> cpts;

    while (!done()) {
      const Token& t = peek();
      if (t.text == "network") {
        next();
        if (peek().text != "{") out.name = next().text;
        skip_block();
      } else if (t.text == "variable") {
        next();
        std::string id = next().text;
        expect("{");
        Variable var;
        var.id = id;
        while (peek().text != "}") {
          if (peek().text == "type") {
            next();
            expect("discrete");
            expect("[");
            int count = std::stoi(next().text);
            expect("]");
            expect("{");
            while (peek().text != "}") {
              if (peek().text == ",") {
                next();
                continue;
              }
              var.values.push_back(next().text);
            }
            expect("}");
            expect(";");
            if (static_cast<int>(var.values.size()) != count) {
              fail("variable " + id + ": declared cardinality does not match value list");
            }
          } else if (peek().text == "property") {
            skip_statement();
          } else {
            fail("variable " + id + ": unsupported clause '" + peek().text + "'");
          }
        }
        expect("}");
        index[var.id] = static_cast<int>(vars.size());
        vars.push_back(std::move(var));
        parent_names.emplace_back();
      } else if (t.text == "probability") {
        next();
        expect("(");
        RawCpt raw;
        raw.line = t.line;
        raw.child = next().text;
        if (peek().text == "|") {
          next();
          while (peek().text != ")") {
            if (peek().text == ",") {
              next();
              continue;
            }
            raw.parents.push_back(next().text);
          }
        }
        expect(")");
        expect("{");
        while (peek().text != "}") {
          if (peek().text == "table") {
            next();
            raw.entries.push_back({{}, read_numbers_until_semicolon()});
          } else if (peek().text == "(") {
            next();
            std::vector<std::string> labels;
            while (peek().text != ")") {
              if (peek().text == ",") {
                next();
                continue;
              }
              labels.push_back(next().text);
            }
            expect(")");
            raw.entries.push_back({std::move(labels), read_numbers_until_semicolon()});
          } else if (peek().text == "property") {
            skip_statement();
          } else {
            fail("probability " + raw.child + ": unsupported clause '" + peek().text + "'");
          }
        }
        expect("}");
        cpts.push_back(std::move(raw));
      } else {
        fail("unsupported top-level token '" + t.text + "'");
      }
    }

    // Assemble the network, then scatter CPT rows by parent label tuples.
    std::vector<std::vector<int>> parents(vars.size());
    for (const RawCpt& raw : cpts) {
      auto it = index.find(raw.child);
      if (it == index.end()) fail("probability for undeclared variable " + raw.child);
      for (const std::string& p : raw.parents) {
        auto pit = index.find(p);
        if (pit == index.end()) fail("undeclared parent " + p + " of " + raw.child);
        parents[it->second].push_back(pit->second);
      }
    }
    out.network = Network(vars, std::move(parents));
    const Network& net = out.network;

    out.params.cpt.reserve(vars.size());
    for (int v = 0; v < net.num_variables(); ++v) {
      out.params.cpt.emplace_back(net.num_rows(v), net.cardinality(v), -1.0);
    }
    std::vector<bool> seen(vars.size(), false);
    for (const RawCpt& raw : cpts) {
      int v = index.at(raw.child);
      seen[v] = true;
      Table& t = out.params[v];
      for (const auto& [labels, numbers] : raw.entries) {
        if (static_cast<int>(numbers.size()) != t.width &&
            !(labels.empty() && static_cast<int>(numbers.size()) == t.rows * t.width)) {
          fail("probability " + raw.child + ": wrong entry count");
        }
        if (labels.empty()) {
          // `table` rows list the whole CPT, parent instantiations in
          // row-major order (last parent fastest), child value within.
          if (static_cast<int>(numbers.size()) == t.rows * t.width) {
            std::copy(numbers.begin(), numbers.end(), t.v.begin());
          } else {
            std::copy(numbers.begin(), numbers.end(), t.row(0));
          }
        } else {
          if (labels.size() != net.parents(v).size()) {
            fail("probability " + raw.child + ": wrong number of parent labels");
          }
          int row = 0;
          for (size_t j = 0; j < labels.size(); ++j) {
            int p = net.parents(v)[j];
            int val = net.variable(p).value_index(labels[j]);
            if (val < 0) {
              fail("probability " + raw.child + ": '" + labels[j] + "' is not a value of " +
                   net.variable(p).id);
            }
            row = row * net.cardinality(p) + val;
          }
          std::copy(numbers.begin(), numbers.end(), t.row(row));
        }
      }
    }
    for (int v = 0; v < net.num_variables(); ++v) {
      if (!seen[v]) fail("no probability block for variable " + vars[v].id);
      for (double p : out.params[v].v) {
        if (p < 0.0) fail("incomplete CPT for variable " + vars[v].id);
      }
    }
    return out;
  }

 private:
  bool done() const { return pos_ >= tokens_.size(); }
  const Token& peek() const {
    if (done()) throw std::runtime_error("bif: unexpected end of input");
    return tokens_[pos_];
  }
  const Token& next() {
    const Token& t = peek();
    ++pos_;
    return t;
  }
  void expect(const std::string& s) {
    const Token& t = next();
    if (t.text != s) {
      throw std::runtime_error("bif line " + std::to_string(t.line) + ": expected '" + s +
                               "', found '" + t.text + "'");
    }
  }
  [[noreturn]] void fail(const std::string& msg) const {
    int line = pos_ < tokens_.size() ? tokens_[pos_].line : 0;
    throw std::runtime_error("bif line " + std::to_string(line) + ": " + msg);
  }
  void skip_statement() {
    while (next().text != ";") {
    }
  }
  void skip_block() {
    while (next().text != "{") {
    }
    int depth = 1;
    while (depth > 0) {
      const std::string& s = next().text;
      if (s == "{") ++depth;
      if (s == "}") --depth;
    }
  }
  std::vector<double> read_numbers_until_semicolon() {
    std::vector<double> numbers;
    while (peek().text != ";") {
      if (peek().text == ",") {
        next();
        continue;
      }
      numbers.push_back(std::stod(next().text));
    }
    expect(";");
    return numbers;
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
};

}  // namespace

NetworkFile parse_bif(const std::string& text) {
  Parser parser(tokenize(text));
  NetworkFile out = parser.parse();
  return out;
}

NetworkFile load_bif_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  NetworkFile out = parse_bif(os.str());
  if (out.name.empty()) {
    auto slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = base.find_last_of('.');
    out.name = dot == std::string::npos ? base : base.substr(0, dot);
  }
  return out;
}

}  // namespace edml
