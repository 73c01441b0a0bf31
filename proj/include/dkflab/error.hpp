#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dkflab {

enum class Errc {
  asymmetric_input,
  non_square,
  bad_length,
  not_positive_definite,
  directed_graph,
  self_loop,
  negative_weight,
  disconnected_graph,
  index_out_of_range,
  dimension_mismatch,
  singular_covariance,
  singular_innovation,
  singular_local_information,
  indefinite_information,
  not_doubly_stochastic,
  singular_block,
  non_edge_message,
  config_mismatch,
  config_error,
  io_error,
};

std::string_view to_string(Errc code) noexcept;

/// True for failures caused by the numbers rather than by the inputs' shape or
/// the configuration (the CLI maps these to exit status 3).
bool is_numeric_failure(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }
  /// The message without the error-name prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

/// Raised when a connected graph is required; carries the component partition.
class DisconnectedGraphError : public Error {
 public:
  DisconnectedGraphError(std::vector<std::vector<std::size_t>> components);

  const std::vector<std::vector<std::size_t>>& components() const noexcept { return components_; }

 private:
  std::vector<std::vector<std::size_t>> components_;
};

/// Scenario validation failure; `field()` is a dotted path such as `filter.l_star`.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message);

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace dkflab
