#pragma once

#include "msmrf/model.hpp"
#include "msmrf/quadrature.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace msmrf {

class OracleError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Per-site states for exhaustive enumeration: the atom (weight 1) plus a
/// tensor Gauss-Legendre grid over the site's box. Nodes that coincide with
/// r_i are displaced so the grid never contains the atom.
class DiscretizedSpace {
 public:
  DiscretizedSpace(const SiteGraph& graph, std::vector<Box> boxes, const QuadratureSpec& quadrature);
  /// Same box for every site.
  DiscretizedSpace(const SiteGraph& graph, const Box& box, const QuadratureSpec& quadrature)
      : DiscretizedSpace(graph, std::vector<Box>(static_cast<std::size_t>(graph.size()), box), quadrature) {}

  Index size() const { return static_cast<Index>(rules_.size()); }
  const TensorRule& rule(Index i) const { return rules_[static_cast<std::size_t>(i)]; }
  const Box& box(Index i) const { return boxes_[static_cast<std::size_t>(i)]; }
  const std::vector<Box>& boxes() const { return boxes_; }
  const QuadratureSpec& quadrature() const { return quadrature_; }
  /// Atom plus nodes at site i.
  Index states(Index i) const { return rule(i).size() + 1; }
  /// Product of per-site state counts (as a double to survive overflow).
  double total_states() const;

  static constexpr double kMaxStates = 1e7;

 private:
  std::vector<Box> boxes_;
  QuadratureSpec quadrature_;
  std::vector<TensorRule> rules_;
};

/// log Z^m over the discretized space.
double exact_log_partition(const MixedStateModel& model, const DiscretizedSpace& space, int threads = 1);
double exact_partition(const MixedStateModel& model, const DiscretizedSpace& space, int threads = 1);

/// e^{V^m(v, x_i^c)} normalised by the mixed quadrature sum over site i's states.
/// An atom (or a real v equal to r_i) gives a probability; a real v a density.
double exact_conditional(Index i, const MixedValue& v, const Field& field, const MixedStateModel& model,
                         const DiscretizedSpace& space);

/// P(x_i = r_i) under the discretized joint.
double exact_marginal_atom_prob(Index i, const MixedStateModel& model, const DiscretizedSpace& space, int threads = 1);

/// Probability of every atom pattern (bit i set = site i off ground), 2^N entries.
std::vector<double> exact_pattern_probabilities(const MixedStateModel& model, const DiscretizedSpace& space,
                                                int threads = 1);

struct FactorizationCheck {
  double log_zm = 0.0;
  double log_zd = 0.0;
  double log_za = 0.0;
  /// log of the sum of p^d p^a over the grid.
  double log_z_direct = 0.0;
  /// |log(Z^m / (Z^d Z^a)) - log Z_direct|.
  double constant_residual = 0.0;
  /// max over grid states of |log p^m - (log p^d + log p^a - log Z)|.
  double state_residual = 0.0;

  double residual() const { return std::max(constant_residual, state_residual); }
};

FactorizationCheck check_factorization(const MixedStateModel& model, const DiscretizedSpace& space, int threads = 1);
/// Largest residual of check_factorization.
double verify_factorization(const MixedStateModel& model, const DiscretizedSpace& space, int threads = 1);

}  // namespace msmrf
