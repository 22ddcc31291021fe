#include "edml/factor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edml {

Factor::Factor(std::vector<int> scope_, const Network& net, double fill)
    : scope(std::move(scope_)) {
  cards.reserve(scope.size());
  size_t n = 1;
  for (int v : scope) {
    cards.push_back(net.cardinality(v));
    n *= static_cast<size_t>(cards.back());
  }
  table.assign(n, fill);
}

size_t Factor::index_of(const std::vector<int>& assignment) const {
  size_t idx = 0;
  for (size_t j = 0; j < scope.size(); ++j) {
    idx = idx * cards[j] + assignment[scope[j]];
  }
  return idx;
}

void Factor::rescale(double threshold) {
  if (threshold <= 0.0) return;
  double mx = 0.0;
  for (double x : table) mx = std::max(mx, x);
  if (mx <= 0.0 || mx == 1.0) return;
  if (mx >= threshold && mx * threshold <= 1.0) return;
  double inv = 1.0 / mx;
  for (double& x : table) x *= inv;
  log_scale += std::log(mx);
}

namespace {

// Strides of each scope variable of `from` inside the enumeration order of
// `into` (both sorted ascending); used to walk one factor's entries while
// enumerating another's assignments.
std::vector<size_t> strides_in(const Factor& from, const Factor& into) {
  std::vector<size_t> stride(into.scope.size(), 0);
  size_t s = 1;
  for (int j = static_cast<int>(from.scope.size()) - 1; j >= 0; --j) {
    auto it = std::lower_bound(into.scope.begin(), into.scope.end(), from.scope[j]);
    stride[it - into.scope.begin()] = s;
    s *= static_cast<size_t>(from.cards[j]);
  }
  return stride;
}

}  // namespace

Factor multiply(const Factor& a, const Factor& b, const Network& net) {
  std::vector<int> scope;
  std::set_union(a.scope.begin(), a.scope.end(), b.scope.begin(), b.scope.end(),
                 std::back_inserter(scope));
  Factor out(std::move(scope), net, 1.0);
  out.log_scale = a.log_scale + b.log_scale;

  std::vector<size_t> sa = strides_in(a, out);
  std::vector<size_t> sb = strides_in(b, out);
  std::vector<int> digit(out.scope.size(), 0);
  size_t ia = 0, ib = 0;
  for (size_t i = 0; i < out.table.size(); ++i) {
    out.table[i] = a.table[ia] * b.table[ib];
    for (int j = static_cast<int>(digit.size()) - 1; j >= 0; --j) {
      ia += sa[j];
      ib += sb[j];
      if (++digit[j] < out.cards[j]) break;
      ia -= static_cast<size_t>(out.cards[j]) * sa[j];
      ib -= static_cast<size_t>(out.cards[j]) * sb[j];
      digit[j] = 0;
    }
  }
  return out;
}

Factor marginalize(const Factor& f, const std::vector<int>& keep, const Network& net) {
  Factor out(keep, net, 0.0);
  out.log_scale = f.log_scale;

  // Stride of the out-index contributed by each variable of f; 0 for
  // variables being summed out.
  std::vector<size_t> fstride(f.scope.size(), 0);
  {
    size_t s = 1;
    std::vector<size_t> keep_stride(keep.size());
    for (int j = static_cast<int>(keep.size()) - 1; j >= 0; --j) {
      keep_stride[j] = s;
      s *= static_cast<size_t>(out.cards[j]);
    }
    for (size_t j = 0; j < f.scope.size(); ++j) {
      auto it = std::lower_bound(keep.begin(), keep.end(), f.scope[j]);
      if (it != keep.end() && *it == f.scope[j]) {
        fstride[j] = keep_stride[it - keep.begin()];
      }
    }
  }

  // Walk f's entries, adding each into its projection on keep.
  std::vector<int> digit(f.scope.size(), 0);
  size_t o = 0;
  for (size_t i = 0; i < f.table.size(); ++i) {
    out.table[o] += f.table[i];
    for (int j = static_cast<int>(digit.size()) - 1; j >= 0; --j) {
      o += fstride[j];
      if (++digit[j] < f.cards[j]) break;
      o -= static_cast<size_t>(f.cards[j]) * fstride[j];
      digit[j] = 0;
    }
  }
  return out;
}

void condition(Factor& f, int var, int value) {
  auto it = std::lower_bound(f.scope.begin(), f.scope.end(), var);
  if (it == f.scope.end() || *it != var) {
    throw std::invalid_argument("condition: variable not in factor scope");
  }
  size_t pos = it - f.scope.begin();
  size_t stride = 1;
  for (size_t j = pos + 1; j < f.scope.size(); ++j) stride *= f.cards[j];
  size_t block = stride * f.cards[pos];
  for (size_t base = 0; base < f.table.size(); base += block) {
    for (int x = 0; x < f.cards[pos]; ++x) {
      if (x == value) continue;
      size_t start = base + x * stride;
      std::fill(f.table.begin() + start, f.table.begin() + start + stride, 0.0);
    }
  }
}

Factor family_factor(const Network& net, const Parameterization& params, int v) {
  std::vector<int> scope = net.parents(v);
  scope.push_back(v);
  std::sort(scope.begin(), scope.end());
  Factor f(scope, net, 0.0);

  // Enumerate parent rows and child values, scatter into the sorted scope.
  std::vector<int> assignment(net.num_variables(), 0);
  const Table& cpt = params[v];
  for (int r = 0; r < cpt.rows; ++r) {
    std::vector<int> pvals = net.row_values(v, r);
    const auto& ps = net.parents(v);
    for (size_t j = 0; j < ps.size(); ++j) assignment[ps[j]] = pvals[j];
    for (int x = 0; x < cpt.width; ++x) {
      assignment[v] = x;
      f.table[f.index_of(assignment)] = cpt.at(r, x);
    }
  }
  return f;
}

}  // namespace edml
