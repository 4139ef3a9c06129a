#include "bethe/io.hpp"

#include "bethe/error.hpp"
#include "json_util.hpp"

namespace bethe {

namespace {

using nlohmann::json;

Graph graph_field(const json& j, const std::string& source) {
  const json& g = j.at("graph");
  if (g.is_string()) return load_graph(g.get<std::string>());
  return detail::graph_from_json(g, source + ": graph");
}

template <std::size_t N>
std::vector<std::array<double, N>> read_rows(const json& j, const char* key, std::size_t expected,
                                             const std::string& source) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw ParseError(source + ": missing array field '" + key + "'", 0);
  }
  const json& arr = j[key];
  if (arr.size() != expected) {
    throw ParseError(source + ": '" + key + "' has " + std::to_string(arr.size()) +
                         " rows, expected " + std::to_string(expected), 0);
  }
  std::vector<std::array<double, N>> out(expected);
  for (std::size_t r = 0; r < expected; ++r) {
    const json& row = arr[r];
    if (!row.is_array() || row.size() != N) {
      throw ParseError(source + ": " + key + "[" + std::to_string(r) + "] must have " +
                           std::to_string(N) + " numbers", 0);
    }
    for (std::size_t c = 0; c < N; ++c) {
      if (!row[c].is_number()) {
        throw ParseError(source + ": " + key + "[" + std::to_string(r) + "][" + std::to_string(c) +
                             "] is not a number", 0);
      }
      out[r][c] = row[c].get<double>();
    }
  }
  return out;
}

std::vector<double> read_vector(const json& j, const char* key, std::size_t expected,
                                const std::string& source) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw ParseError(source + ": missing array field '" + key + "'", 0);
  }
  const json& arr = j[key];
  if (arr.size() != expected) {
    throw ParseError(source + ": '" + key + "' has " + std::to_string(arr.size()) +
                         " entries, expected " + std::to_string(expected), 0);
  }
  std::vector<double> out(expected);
  for (std::size_t r = 0; r < expected; ++r) {
    if (!arr[r].is_number()) {
      throw ParseError(source + ": " + key + "[" + std::to_string(r) + "] is not a number", 0);
    }
    out[r] = arr[r].get<double>();
  }
  return out;
}

}  // namespace

ModelFile parse_model(const std::string& text, const std::string& source) {
  json j = detail::parse_json(text, source);
  if (!j.is_object() || !j.contains("graph")) {
    throw ParseError(source + ": model needs a 'graph' field", 0);
  }
  ModelFile m{graph_field(j, source), {}};
  m.theta.node = read_rows<2>(j, "theta_node", static_cast<std::size_t>(m.graph.num_nodes()), source);
  m.theta.edge = read_rows<4>(j, "theta_edge", static_cast<std::size_t>(m.graph.num_edges()), source);
  check_finite(m.theta);
  return m;
}

ModelFile load_model(const std::string& path) {
  return parse_model(detail::read_text_file(path), path);
}

std::string model_to_json(const Graph& g, const TablePotentials& theta) {
  check_sizes(theta, g);
  json j;
  j["graph"] = detail::graph_to_json_value(g);
  j["theta_node"] = theta.node;
  j["theta_edge"] = theta.edge;
  return j.dump(1) + "\n";
}

MarginalsFile parse_marginals(const std::string& text, const Graph* fallback,
                              const std::string& source) {
  json j = detail::parse_json(text, source);
  if (!j.is_object()) throw ParseError(source + ": marginals must be a JSON object", 0);
  MarginalsFile m;
  if (j.contains("graph")) {
    m.graph = graph_field(j, source);
  } else if (fallback != nullptr) {
    m.graph = *fallback;
  } else {
    throw InputError(source + ": marginals file has no 'graph' and none was given");
  }
  m.mu.node = read_vector(j, "mu_node", static_cast<std::size_t>(m.graph.num_nodes()), source);
  m.mu.edge = read_vector(j, "mu_edge", static_cast<std::size_t>(m.graph.num_edges()), source);
  if (auto bad = local_polytope_violation(m.mu, m.graph, 1e-12)) {
    throw PolytopeError(source + ": " + *bad);
  }
  return m;
}

MarginalsFile load_marginals(const std::string& path, const Graph* fallback) {
  return parse_marginals(detail::read_text_file(path), fallback, path);
}

std::string marginals_to_json(const Graph& g, const MinimalMarginals& mu) {
  check_sizes(mu, g);
  json j;
  j["graph"] = detail::graph_to_json_value(g);
  j["mu_node"] = mu.node;
  j["mu_edge"] = mu.edge;
  return j.dump(1) + "\n";
}

}  // namespace bethe
