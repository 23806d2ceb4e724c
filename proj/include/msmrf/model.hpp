#pragma once

#include "msmrf/continuous_model.hpp"
#include "msmrf/discrete_params.hpp"
#include "msmrf/field.hpp"
#include "msmrf/quadrature.hpp"
#include "msmrf/site_graph.hpp"

#include <memory>
#include <stdexcept>
#include <vector>

namespace msmrf {

/// p^a(r_i | x_i^c) vanished or was not finite.
class PositivityError : public std::runtime_error {
 public:
  PositivityError(Index site, const std::string& what) : std::runtime_error(what), site_(site) {}
  Index site() const { return site_; }

 private:
  Index site_;
};

/// log(1 + e^x) without overflow.
inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

/// Mixed-state MRF: joint density e^{V^d + V^a} / Z^m with respect to the
/// product of per-site mixed measures.
class MixedStateModel {
 public:
  MixedStateModel(SiteGraph graph, DiscreteParams params, std::shared_ptr<const ContinuousModel> continuous);

  const SiteGraph& graph() const { return graph_; }
  const DiscreteParams& params() const { return params_; }
  const ContinuousModel& continuous() const { return *continuous_; }
  const std::shared_ptr<const ContinuousModel>& continuous_ptr() const { return continuous_; }
  Index size() const { return graph_.size(); }

  double discrete_energy(const Field& field) const;
  double continuous_energy(const Field& field) const { return continuous_->energy(field); }
  double mixed_energy(const Field& field) const { return discrete_energy(field) + continuous_energy(field); }
  /// log(p^m(x) Z^m), which is V^m(x).
  double log_joint_unnormalized(const Field& field) const { return mixed_energy(field); }

  double interaction_field(Index i, const Field& field) const;
  /// s_i = h_i - log p^a(r_i | x_i^c), so that rho_i = sigma(-s_i).
  double atom_logit(Index i, const Field& field) const;
  double atom_probability(Index i, const Field& field) const;
  /// log rho_i and log(1 - rho_i) evaluated stably.
  double log_atom_probability(Index i, const Field& field) const { return -softplus(atom_logit(i, field)); }
  double log_off_probability(Index i, const Field& field) const { return -softplus(-atom_logit(i, field)); }

  /// rho_i 1_{r_i}(v) + (1 - rho_i) 1*_{r_i}(v) p^a(v | x_i^c). A real v that
  /// equals r_i bit-for-bit is the atom.
  double conditional_ms_pdf(Index i, const MixedValue& v, const Field& field) const;
  double log_conditional_ms_pdf(Index i, const MixedValue& v, const Field& field) const;

  /// Extracted potential of clique `a` (order >= 1) at the field.
  double mixed_potential(const Clique& a, const Field& field) const;

 private:
  struct Term {
    double coefficient;
    std::vector<Index> others;
  };

  SiteGraph graph_;
  DiscreteParams params_;
  std::shared_ptr<const ContinuousModel> continuous_;
  std::vector<std::vector<Term>> incident_;
};

/// The three pieces of p^m = p^d p^a / Z on truncated per-site boxes, with the
/// normalizers behind them (all in log space).
struct FactorizedForm {
  double log_pd = 0.0;
  double log_pa = 0.0;
  double log_z = 0.0;
  double log_zm = 0.0;
  double log_zd = 0.0;
  double log_za = 0.0;

  /// log p^d + log p^a - log Z, which should equal V^m - log Z^m.
  double recombined() const { return log_pd + log_pa - log_z; }
};

class NormalizationTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Exact normalizers by summing over the 2^N atom patterns, each with a
/// tensor quadrature over the off-ground coordinates in `boxes`. The total
/// quadrature size is capped at `max_points`.
FactorizedForm factorized_form(const Field& field, const MixedStateModel& model, const std::vector<Box>& boxes,
                               const QuadratureSpec& quadrature, double max_points = 1e7);

}  // namespace msmrf
