#pragma once

#include "msmrf/estimator.hpp"
#include "msmrf/model.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace msmrf {

class ModelFormatError : public std::runtime_error {
 public:
  /// line == 0 when the problem is semantic rather than syntactic.
  ModelFormatError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Model parameter document `"msmrf-model": 1`. Tied (scalar) values stay
/// scalar, so a grid model can be re-instantiated at another size.
struct ModelDocument {
  std::optional<LatticeShape> grid;
  Index sites = 0;
  Index dim = 1;
  /// Explicit cliques for non-grid graphs.
  std::vector<Clique> cliques;
  RealVector ground;

  std::variant<double, std::vector<double>> alpha = 0.0;
  /// Tied beta over every pair clique, or per-pair values.
  std::variant<double, std::map<Clique, double>> beta = 0.0;
  std::map<Clique, double> chi;

  std::string family = "gaussian-auto";
  IsotropicGaussian gaussian;
  Box domain;

  SiteGraph graph() const;
  MixedStateModel model(const SiteGraph& graph) const;
  MixedStateModel model() const { return model(graph()); }
  /// Copy with the grid resized; requires a grid and tied alpha/beta.
  ModelDocument resized(Index height, Index width) const;
  /// Box per site from `domain`.
  std::vector<Box> boxes() const { return std::vector<Box>(static_cast<std::size_t>(sites), domain); }
};

ModelDocument parse_model(const std::string& text);
ModelDocument model_from_json(const nlohmann::json& doc);
nlohmann::ordered_json model_to_json(const ModelDocument& doc);
std::string format_model(const ModelDocument& doc);

/// Document with the estimates of `report` written into `base`'s layout.
/// Tied fits stay scalar.
ModelDocument document_from_fit(const ModelDocument& base, const FitReport& report, const FitOptions& options);

struct FitProvenance {
  std::uint64_t seed = 0;
  std::string data_file;
  std::string data_digest;
};

std::string format_fit_report(const ModelDocument& estimate, const FitReport& report, const FitProvenance& provenance);

/// FNV-1a 64-bit digest as "fnv1a64:<16 hex digits>".
std::string fnv1a_digest(const std::string& bytes);

}  // namespace msmrf
