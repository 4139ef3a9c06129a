#pragma once

#include <string>

#include "bethe/graph.hpp"
#include "bethe/model.hpp"

namespace bethe {

/// Model file: `graph` (inline object or path string), `theta_node` (N_V x 2),
/// `theta_edge` (N_E x 4) in canonical edge order.
struct ModelFile {
  Graph graph;
  TablePotentials theta;
};

ModelFile parse_model(const std::string& text, const std::string& source = "<model>");
ModelFile load_model(const std::string& path);
std::string model_to_json(const Graph& g, const TablePotentials& theta);

/// Marginals file: `mu_node` (N_V), `mu_edge` (N_E) in minimal form, with an
/// optional `graph` field. When the file has no graph, `fallback` is used.
struct MarginalsFile {
  Graph graph;
  MinimalMarginals mu;
};

MarginalsFile parse_marginals(const std::string& text, const Graph* fallback,
                              const std::string& source = "<marginals>");
MarginalsFile load_marginals(const std::string& path, const Graph* fallback);
std::string marginals_to_json(const Graph& g, const MinimalMarginals& mu);

}  // namespace bethe
