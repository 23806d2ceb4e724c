#pragma once

#include "msmrf/continuous_model.hpp"
#include "msmrf/discrete_params.hpp"
#include "msmrf/field.hpp"
#include "msmrf/model.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace msmrf {

class EstimationError : public std::runtime_error {
 public:
  EstimationError(Index site, const std::string& what) : std::runtime_error(what), site_(site) {}
  Index site() const { return site_; }

 private:
  Index site_;
};

/// Sum over sites of log conditional_ms_pdf(i, x_i | x_i^c).
double pseudo_log_likelihood(const MixedStateModel& model, const Field& field);

/// Analytic PLL gradient for a model whose continuous part is an isotropic
/// Gaussian auto-model: d/d alpha_i for every site, d/d beta for every pair
/// clique of the graph (in graph order), then d/d (mean, precision, coupling).
RealVector pll_gradient(const MixedStateModel& model, const Field& field);

struct FitOptions {
  bool tie_alpha = true;
  bool tie_beta = true;
  bool fit_beta = true;
  /// Fit mean/precision/coupling when the continuous model is an isotropic Gaussian.
  bool fit_continuous = true;
  double tolerance = 1e-6;
  int max_iterations = 500;
  /// |parameter| beyond this is treated as a run to the boundary.
  double divergence_bound = 50.0;
};

struct FitInit {
  DiscreteParams params;
  std::shared_ptr<const ContinuousModel> continuous;
};

/// Objective over the packed free parameters. Packing order: alpha (1 or N),
/// beta (0, 1 or one per graph pair), then mean, precision and coupling when
/// the continuous part is fitted (coupling only if the graph has pairs).
class PllObjective {
 public:
  PllObjective(const SiteGraph& graph, const Field& field, const FitInit& init, const FitOptions& options);

  Index dimension() const { return dim_; }
  RealVector initial() const { return theta0_; }
  /// PLL at theta; -inf outside the feasible region (precision <= 0).
  double value(const RealVector& theta) const;
  double value_and_gradient(const RealVector& theta, RealVector& grad) const;
  FitInit unpack(const RealVector& theta) const;
  std::vector<std::string> names() const;
  bool fits_continuous() const { return fit_cont_; }

 private:
  const SiteGraph& graph_;
  const Field& field_;
  FitOptions options_;
  Index n_ = 0;
  std::vector<Clique> pairs_;
  std::vector<std::vector<std::pair<Index, std::size_t>>> pair_nb_;  // (neighbour, pair index)
  DiscreteParams higher_;                                               // fixed order >= 3 terms
  RealVector fixed_alpha_;
  RealVector fixed_beta_;
  std::shared_ptr<const ContinuousModel> fixed_cont_;
  bool fit_cont_ = false;
  bool has_coupling_ = false;
  // Fixed-continuous mode: log p^a(r_i|.) and log p^a(x_i|.) never change.
  RealVector fixed_c_, fixed_lp_;
  Index alpha_count_ = 0, beta_count_ = 0;
  Index dim_ = 0;
  RealVector theta0_;
};

struct FitReport {
  DiscreteParams params;
  std::shared_ptr<const ContinuousModel> continuous;
  double pll = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::string diagnosis;
  /// PLL after every accepted iteration, starting with the initial point.
  std::vector<double> trace;
};

/// Maximum pseudo-likelihood by BFGS with Armijo backtracking.
FitReport fit(const Field& field, const SiteGraph& graph, const FitInit& init, const FitOptions& options = {});

}  // namespace msmrf
