#include "bethe/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bethe/error.hpp"
#include "json_util.hpp"

namespace bethe {

Graph Graph::from_edges(int num_nodes, std::vector<Edge> edges) {
  if (num_nodes < 1) {
    throw InputError("graph: num_nodes must be positive, got " + std::to_string(num_nodes));
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    Edge& e = edges[k];
    if (e.u < 0 || e.u >= num_nodes || e.v < 0 || e.v >= num_nodes) {
      throw InputError("graph: edge " + std::to_string(k) + " has endpoint outside [0, " +
                       std::to_string(num_nodes) + ")");
    }
    if (e.u == e.v) {
      throw InputError("graph: edge " + std::to_string(k) + " is a self-loop on node " +
                       std::to_string(e.u));
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
    throw InputError("graph: duplicate edge (" + std::to_string(dup->u) + ", " +
                     std::to_string(dup->v) + ")");
  }

  Graph g;
  g.num_nodes_ = num_nodes;
  g.edges_ = std::move(edges);
  g.degrees_.assign(static_cast<std::size_t>(num_nodes), 0);
  for (const Edge& e : g.edges_) {
    ++g.degrees_[static_cast<std::size_t>(e.u)];
    ++g.degrees_[static_cast<std::size_t>(e.v)];
  }
  g.offsets_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  std::partial_sum(g.degrees_.begin(), g.degrees_.end(), g.offsets_.begin() + 1);
  g.adj_nodes_.resize(2 * g.edges_.size());
  g.adj_edges_.resize(2 * g.edges_.size());
  std::vector<int> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edges_[static_cast<std::size_t>(e)];
    auto put = [&](int from, int to) {
      auto slot = static_cast<std::size_t>(fill[static_cast<std::size_t>(from)]++);
      g.adj_nodes_[slot] = to;
      g.adj_edges_[slot] = e;
    };
    put(ed.u, ed.v);
    put(ed.v, ed.u);
  }
  // Edges are sorted, so each node's neighbor list is already increasing for
  // neighbors > i; sort the whole range to cover neighbors < i too.
  for (int i = 0; i < num_nodes; ++i) {
    auto b = static_cast<std::size_t>(g.offsets_[static_cast<std::size_t>(i)]);
    auto n = static_cast<std::size_t>(g.degrees_[static_cast<std::size_t>(i)]);
    std::vector<std::pair<int, int>> tmp(n);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = {g.adj_nodes_[b + k], g.adj_edges_[b + k]};
    std::sort(tmp.begin(), tmp.end());
    for (std::size_t k = 0; k < n; ++k) {
      g.adj_nodes_[b + k] = tmp[k].first;
      g.adj_edges_[b + k] = tmp[k].second;
    }
  }
  return g;
}

std::span<const int> Graph::neighbors(int i) const {
  auto b = static_cast<std::size_t>(offsets_.at(static_cast<std::size_t>(i)));
  auto n = static_cast<std::size_t>(degrees_[static_cast<std::size_t>(i)]);
  return std::span<const int>(adj_nodes_).subspan(b, n);
}

std::span<const int> Graph::incident_edges(int i) const {
  auto b = static_cast<std::size_t>(offsets_.at(static_cast<std::size_t>(i)));
  auto n = static_cast<std::size_t>(degrees_[static_cast<std::size_t>(i)]);
  return std::span<const int>(adj_edges_).subspan(b, n);
}

int Graph::find_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{a, b});
  if (it != edges_.end() && it->u == a && it->v == b) {
    return static_cast<int>(it - edges_.begin());
  }
  return -1;
}

bool Graph::is_connected() const {
  if (num_nodes_ == 0) return false;
  std::vector<char> seen(static_cast<std::size_t>(num_nodes_), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    for (int j : neighbors(i)) {
      if (!seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = 1;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count == num_nodes_;
}

bool Graph::is_tree() const { return num_edges() == num_nodes_ - 1 && is_connected(); }

Graph torus(int rows, int cols) {
  if (rows < 3) throw InputError("torus: rows must be >= 3, got " + std::to_string(rows));
  if (cols < 3) throw InputError("torus: cols must be >= 3, got " + std::to_string(cols));
  std::vector<Edge> edges;
  edges.reserve(2 * static_cast<std::size_t>(rows * cols));
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      edges.push_back({id(r, c), id(r, (c + 1) % cols)});
      edges.push_back({id(r, c), id((r + 1) % rows, c)});
    }
  }
  return Graph::from_edges(rows * cols, std::move(edges));
}

Graph cycle(int n) {
  if (n < 3) throw InputError("cycle: n must be >= 3, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return Graph::from_edges(n, std::move(edges));
}

Graph chain(int n) {
  if (n < 2) throw InputError("chain: n must be >= 2, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return Graph::from_edges(n, std::move(edges));
}

Graph complete(int n) {
  if (n < 2) throw InputError("complete: n must be >= 2, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
  return Graph::from_edges(n, std::move(edges));
}

namespace detail {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json parse_json(std::string_view text, std::string_view source) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    auto upto = std::min<std::size_t>(e.byte, text.size());
    int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    // nlohmann reports the byte after the offending token; a trailing newline
    // would otherwise push the line one past the error.
    if (upto > 0 && upto <= text.size() && text[upto - 1] == '\n') --line;
    throw ParseError(std::string(source) + ": malformed JSON", line);
  }
}

Graph graph_from_json(const nlohmann::json& j, std::string_view source) {
  const std::string src(source);
  if (!j.is_object()) throw ParseError(src + ": graph must be a JSON object", 0);
  if (!j.contains("num_nodes") || !j["num_nodes"].is_number_integer()) {
    throw ParseError(src + ": missing integer field 'num_nodes'", 0);
  }
  if (!j.contains("edges") || !j["edges"].is_array()) {
    throw ParseError(src + ": missing array field 'edges'", 0);
  }
  std::vector<Edge> edges;
  const auto& arr = j["edges"];
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const auto& e = arr[k];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      throw ParseError(src + ": edges[" + std::to_string(k) + "] must be a 2-element integer list", 0);
    }
    edges.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  try {
    return Graph::from_edges(j["num_nodes"].get<int>(), std::move(edges));
  } catch (const InputError& e) {
    throw ParseError(src + ": " + e.what(), 0);
  }
}

nlohmann::json graph_to_json_value(const Graph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.u, e.v});
  return {{"num_nodes", g.num_nodes()}, {"edges", std::move(edges)}};
}

}  // namespace detail

Graph parse_graph(std::string_view text, std::string_view source) {
  return detail::graph_from_json(detail::parse_json(text, source), source);
}

Graph load_graph(const std::string& path) { return parse_graph(detail::read_text_file(path), path); }

std::string graph_to_json(const Graph& g) { return detail::graph_to_json_value(g).dump() + "\n"; }

namespace {

int parse_int(std::string_view s, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("graph spec: cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

Graph graph_from_spec(std::string_view spec) {
  auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw InputError("graph spec '" + std::string(spec) + "' must look like kind:args");
  }
  std::string_view kind = spec.substr(0, colon);
  std::string_view args = spec.substr(colon + 1);
  if (kind == "torus") {
    auto x = args.find('x');
    if (x == std::string_view::npos) throw InputError("graph spec: torus expects RxC");
    return torus(parse_int(args.substr(0, x), "rows"), parse_int(args.substr(x + 1), "cols"));
  }
  if (kind == "cycle") return cycle(parse_int(args, "n"));
  if (kind == "chain") return chain(parse_int(args, "n"));
  if (kind == "complete") return complete(parse_int(args, "n"));
  if (kind == "file") return load_graph(std::string(args));
  throw InputError("graph spec: unknown kind '" + std::string(kind) + "'");
}

}  // namespace bethe
