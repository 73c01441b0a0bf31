#include "dkflab/error.hpp"

#include <sstream>

namespace dkflab {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::asymmetric_input: return "AsymmetricInput";
    case Errc::non_square: return "NonSquare";
    case Errc::bad_length: return "BadLength";
    case Errc::not_positive_definite: return "NotPositiveDefinite";
    case Errc::directed_graph: return "DirectedGraph";
    case Errc::self_loop: return "SelfLoop";
    case Errc::negative_weight: return "NegativeWeight";
    case Errc::disconnected_graph: return "DisconnectedGraph";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::singular_covariance: return "SingularCovariance";
    case Errc::singular_innovation: return "SingularInnovation";
    case Errc::singular_local_information: return "SingularLocalInformation";
    case Errc::indefinite_information: return "IndefiniteInformation";
    case Errc::not_doubly_stochastic: return "NotDoublyStochastic";
    case Errc::singular_block: return "SingularBlock";
    case Errc::non_edge_message: return "NonEdgeMessage";
    case Errc::config_mismatch: return "ConfigMismatch";
    case Errc::config_error: return "ConfigError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

bool is_numeric_failure(Errc code) noexcept {
  switch (code) {
    case Errc::not_positive_definite:
    case Errc::singular_covariance:
    case Errc::singular_innovation:
    case Errc::singular_local_information:
    case Errc::indefinite_information:
    case Errc::singular_block:
      return true;
    default:
      return false;
  }
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

namespace {

std::string describe_components(const std::vector<std::vector<std::size_t>>& components) {
  std::ostringstream os;
  os << "graph has " << components.size() << " connected components:";
  for (const auto& c : components) {
    os << " {";
    for (std::size_t k = 0; k < c.size(); ++k) os << (k ? "," : "") << c[k];
    os << "}";
  }
  return os.str();
}

}  // namespace

DisconnectedGraphError::DisconnectedGraphError(std::vector<std::vector<std::size_t>> components)
    : Error(Errc::disconnected_graph, describe_components(components)),
      components_(std::move(components)) {}

ConfigError::ConfigError(std::string field, const std::string& message)
    : Error(Errc::config_error, field + ": " + message), field_(std::move(field)) {}

}  // namespace dkflab
