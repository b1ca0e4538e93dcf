#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "qmlab/error.hpp"
#include "qmlab/tnet.hpp"

namespace qmlab {

void Graph::validate() const {
  require(vertices >= 0, ErrorCode::kInvalidArgument, "negative vertex count");
  for (const auto& [u, v] : edges)
    require(u >= 0 && v >= 0 && u < vertices && v < vertices, ErrorCode::kTargetOutOfRange,
            "edge endpoint out of range");
}

std::string Graph::to_json() const {
  nlohmann::json j;
  j["vertices"] = vertices;
  j["edges"] = nlohmann::json::array();
  for (const auto& [u, v] : edges) j["edges"].push_back({u, v});
  return j.dump();
}

Graph Graph::from_json(const std::string& text) {
  Graph g;
  try {
    const auto j = nlohmann::json::parse(text);
    g.vertices = j.at("vertices").get<int>();
    for (const auto& e : j.at("edges")) {
      require(e.is_array() && e.size() == 2, ErrorCode::kBadConfig, "edges must be [u, v] pairs");
      g.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("graph JSON: ") + e.what());
  }
  try {
    g.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kBadConfig, e.what());
  }
  return g;
}

namespace {

struct Factor {
  std::vector<int> vars;  // ascending
  std::vector<std::uint64_t> table;  // row-major over vars
};

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

}  // namespace

std::uint64_t count_colorings(const Graph& g, int colors, ContractionStats* stats) {
  g.validate();
  require(colors >= 1, ErrorCode::kInvalidArgument, "need at least one color");
  require(g.vertices * std::log2(static_cast<double>(colors)) < 63, ErrorCode::kInvalidArgument,
          "coloring count may overflow 64 bits");
  const auto d = static_cast<std::size_t>(colors);
  // Copy tensors at vertices identify all their legs, so each vertex acts as a
  // single summation index shared by its η edge factors.
  std::vector<Factor> factors;
  std::vector<int> in_factor(static_cast<std::size_t>(g.vertices), 0);
  for (const auto& [u, v] : g.edges) {
    Factor f;
    if (u == v) {
      f.vars = {u};
      f.table.assign(d, 0);
    } else {
      f.vars = {std::min(u, v), std::max(u, v)};
      f.table.assign(d * d, 0);
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) f.table[a * d + b] = a != b;
    }
    for (int x : f.vars) in_factor[static_cast<std::size_t>(x)] = 1;
    factors.push_back(std::move(f));
  }
  std::uint64_t result = 1;
  std::set<int> remaining;
  for (int v = 0; v < g.vertices; ++v) {
    if (in_factor[static_cast<std::size_t>(v)])
      remaining.insert(v);
    else
      result *= d;
  }

  while (!remaining.empty()) {
    int pick = -1;
    std::size_t best = SIZE_MAX;
    for (int v : remaining) {
      std::set<int> scope;
      for (const auto& f : factors)
        if (std::binary_search(f.vars.begin(), f.vars.end(), v)) scope.insert(f.vars.begin(), f.vars.end());
      if (scope.size() < best) {
        best = scope.size();
        pick = v;
      }
    }
    remaining.erase(pick);
    std::vector<Factor> touched, kept;
    for (auto& f : factors) (std::binary_search(f.vars.begin(), f.vars.end(), pick) ? touched : kept).push_back(std::move(f));
    std::set<int> scope_set;
    for (const auto& f : touched) scope_set.insert(f.vars.begin(), f.vars.end());
    const std::vector<int> scope(scope_set.begin(), scope_set.end());
    Factor out;
    for (int v : scope)
      if (v != pick) out.vars.push_back(v);
    out.table.assign(ipow(d, out.vars.size()), 0);

    // For each touched factor, the stride of every scope position in its table.
    std::vector<std::vector<std::size_t>> strides(touched.size(), std::vector<std::size_t>(scope.size(), 0));
    for (std::size_t t = 0; t < touched.size(); ++t) {
      const auto& vars = touched[t].vars;
      for (std::size_t k = 0; k < vars.size(); ++k) {
        const auto pos = static_cast<std::size_t>(std::lower_bound(scope.begin(), scope.end(), vars[k]) - scope.begin());
        strides[t][pos] = ipow(d, vars.size() - 1 - k);
      }
    }
    std::vector<std::size_t> out_stride(scope.size(), 0);
    for (std::size_t k = 0, o = 0; k < scope.size(); ++k)
      if (scope[k] != pick) out_stride[k] = ipow(d, out.vars.size() - 1 - o++);

    const std::size_t total = ipow(d, scope.size());
    std::vector<std::size_t> digit(scope.size(), 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::uint64_t prod = 1;
      for (std::size_t t = 0; t < touched.size() && prod; ++t) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < scope.size(); ++k) off += digit[k] * strides[t][k];
        prod *= touched[t].table[off];
      }
      if (prod) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < scope.size(); ++k) off += digit[k] * out_stride[k];
        out.table[off] += prod;
      }
      for (std::size_t k = scope.size(); k-- > 0;) {
        if (++digit[k] < d) break;
        digit[k] = 0;
      }
    }
    if (stats) stats->multiply_adds += total * touched.size();
    kept.push_back(std::move(out));
    factors = std::move(kept);
  }
  for (const auto& f : factors) result *= f.table.front();
  return result;
}

std::uint64_t count_colorings_brute_force(const Graph& g, int colors) {
  g.validate();
  require(colors >= 1, ErrorCode::kInvalidArgument, "need at least one color");
  std::vector<std::vector<int>> earlier(static_cast<std::size_t>(g.vertices));
  for (const auto& [u, v] : g.edges) {
    if (u == v) return 0;
    earlier[static_cast<std::size_t>(std::max(u, v))].push_back(std::min(u, v));
  }
  std::vector<int> color(static_cast<std::size_t>(g.vertices), -1);
  std::uint64_t total = 0;
  // Depth-first over vertices in index order, pruning on the first conflict.
  auto place = [&](auto&& self, int v) -> void {
    if (v == g.vertices) {
      ++total;
      return;
    }
    for (int c = 0; c < colors; ++c) {
      bool ok = true;
      for (int u : earlier[static_cast<std::size_t>(v)])
        if (color[static_cast<std::size_t>(u)] == c) {
          ok = false;
          break;
        }
      if (!ok) continue;
      color[static_cast<std::size_t>(v)] = c;
      self(self, v + 1);
    }
    color[static_cast<std::size_t>(v)] = -1;
  };
  place(place, 0);
  return total;
}

std::uint64_t canonical_code(const Graph& g) {
  g.validate();
  const int n = g.vertices;
  require(n <= 11, ErrorCode::kInvalidArgument, "canonical codes support at most 11 vertices");
  std::vector<std::vector<char>> adj(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  for (const auto& [u, v] : g.edges) {
    require(u != v, ErrorCode::kInvalidArgument, "canonical codes are for simple graphs");
    adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
    adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
  }
  // Colour refinement gives an isomorphism-invariant ordered partition.
  std::vector<int> color(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    for (int u = 0; u < n; ++u) color[static_cast<std::size_t>(v)] += adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)];
  std::size_t classes = 0;
  while (true) {
    std::vector<std::vector<int>> sig(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
      auto& s = sig[static_cast<std::size_t>(v)];
      s.push_back(color[static_cast<std::size_t>(v)]);
      std::vector<int> nb;
      for (int u = 0; u < n; ++u)
        if (adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)]) nb.push_back(color[static_cast<std::size_t>(u)]);
      std::sort(nb.begin(), nb.end());
      s.insert(s.end(), nb.begin(), nb.end());
    }
    std::vector<std::vector<int>> uniq = sig;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (int v = 0; v < n; ++v)
      color[static_cast<std::size_t>(v)] =
          static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), sig[static_cast<std::size_t>(v)]) - uniq.begin());
    if (uniq.size() == classes) break;
    classes = uniq.size();
  }
  std::map<int, std::vector<int>> cell_map;
  for (int v = 0; v < n; ++v) cell_map[color[static_cast<std::size_t>(v)]].push_back(v);
  std::vector<std::vector<int>> cells;
  for (auto& [c, vs] : cell_map) cells.push_back(vs);

  // Maximum upper-triangle code over all orderings that respect the cells.
  std::uint64_t best = 0;
  std::vector<int> order;
  while (true) {
    order.clear();
    for (const auto& c : cells) order.insert(order.end(), c.begin(), c.end());
    std::uint64_t code = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        code = (code << 1) | static_cast<std::uint64_t>(adj[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]
                                                           [static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]);
    best = std::max(best, code);
    std::size_t k = cells.size();
    while (k-- > 0) {
      if (std::next_permutation(cells[k].begin(), cells[k].end())) break;
    }
    if (k == SIZE_MAX) break;
  }
  return best;
}

std::vector<Graph> nonisomorphic_graphs(int n) {
  require(n >= 0 && n <= 9, ErrorCode::kInvalidArgument, "graph enumeration supports 0..9 vertices");
  std::vector<Graph> level{Graph{}};
  for (int k = 0; k < n; ++k) {
    // Every graph on k+1 vertices arises by adding vertex k to some class
    // representative on k vertices.
    std::set<std::uint64_t> seen;
    std::vector<Graph> next;
    for (const auto& g : level) {
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
        Graph h = g;
        h.vertices = k + 1;
        for (int u = 0; u < k; ++u)
          if (mask >> u & 1) h.edges.emplace_back(u, k);
        if (seen.insert(canonical_code(h)).second) next.push_back(std::move(h));
      }
    }
    level = std::move(next);
  }
  return level;
}

}  // namespace qmlab
