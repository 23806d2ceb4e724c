#pragma once

#include "msmrf/field.hpp"
#include "msmrf/site_graph.hpp"

#include <map>
#include <vector>

namespace msmrf {

/// Coefficients of the discrete energy: alpha_i per site and one coefficient
/// per unordered clique of order >= 2 (beta for pairs, chi for triples, and so
/// on). Keys are canonical sorted cliques, so beta(i, j) and beta(j, i) read
/// the same stored value.
class DiscreteParams {
 public:
  DiscreteParams() = default;
  explicit DiscreteParams(Index sites) : alpha_(RealVector::Zero(sites)) {}

  Index size() const { return alpha_.size(); }

  double alpha(Index i) const { return alpha_[i]; }
  void set_alpha(Index i, double v) { alpha_[i] = v; }
  const RealVector& alphas() const { return alpha_; }
  RealVector& alphas() { return alpha_; }

  double beta(Index i, Index j) const { return coefficient({i, j}); }
  void set_beta(Index i, Index j, double v) { set_coefficient({i, j}, v); }
  double chi(Index i, Index j, Index k) const { return coefficient({i, j, k}); }
  void set_chi(Index i, Index j, Index k, double v) { set_coefficient({i, j, k}, v); }

  /// Coefficient of a clique of order >= 2; 0 when absent.
  double coefficient(Clique c) const;
  void set_coefficient(Clique c, double v);
  const std::map<Clique, double>& interactions() const { return terms_; }

 private:
  RealVector alpha_;
  std::map<Clique, double> terms_;
};

/// V^d: sum of alpha_i delta*_i plus every interaction coefficient times the
/// product of its members' delta* factors.
double discrete_energy(const Field& field, const DiscreteParams& params);

/// h_i: alpha_i plus the interaction terms containing i with i's own factor removed.
double interaction_field(Index i, const Field& field, const DiscreteParams& params);

}  // namespace msmrf
