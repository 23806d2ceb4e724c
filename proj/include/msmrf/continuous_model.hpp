#pragma once

#include "msmrf/field.hpp"
#include "msmrf/quadrature.hpp"
#include "msmrf/rng.hpp"
#include "msmrf/site_graph.hpp"

#include <Eigen/Sparse>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace msmrf {

/// Absolutely continuous MRF p^a over the stacked site coordinates. Potentials
/// vanish as soon as one member coordinate sits at its ground value, and the
/// single-site conditionals must agree with them:
///   log p(x_i | rest) - log p(r_i | rest) = sum of Q_A over A containing i.
class ContinuousModel {
 public:
  virtual ~ContinuousModel() = default;

  virtual std::string family() const = 0;
  /// Cliques carrying a (possibly) nonzero potential.
  virtual const std::vector<Clique>& cliques() const = 0;
  /// Q^a_A at the field's current coordinates (grounded sites contribute r_i).
  virtual double potential(const Clique& a, const Field& field) const = 0;
  /// log p^a(v | x_i^c) for a real v at site i.
  virtual double log_conditional(Index i, const Eigen::Ref<const RealVector>& v, const Field& field) const = 0;
  virtual RealVector sample_conditional(Index i, const Field& field, Rng& rng) const = 0;
  virtual RealVector parameters() const = 0;

  /// V^a = sum of all clique potentials.
  virtual double energy(const Field& field) const;
  /// Sum of the potentials of cliques containing i.
  virtual double local_energy(Index i, const Field& field) const;
  double log_conditional_at_ground(Index i, const Field& field) const {
    return log_conditional(i, field.ground_coords(i), field);
  }
};

/// Tied scalar parameters of the isotropic Gaussian auto-model.
struct IsotropicGaussian {
  double mean = 0.0;
  double precision = 1.0;
  double coupling = 0.0;
};

struct GaussianOptions {
  /// Reject a precision matrix that is not positive definite.
  bool require_positive_definite = true;
};

/// Gaussian MRF with mean mu and sparse precision Lambda whose off-diagonal
/// blocks follow the graph's pair cliques. With y = x - r,
///   Q_i  = -1/2 y_i' L_ii y_i + y_i' [L (mu - r)]_i,
///   Q_ij = -y_i' L_ij y_j,
/// and the site conditionals are N(mu_i - L_ii^{-1} sum_j L_ij (x_j - mu_j), L_ii^{-1}).
class GaussianAutoModel : public ContinuousModel {
 public:
  using Options = GaussianOptions;

  /// `diagonal[i]` is L_ii; `coupling` maps pair cliques (i < j) to L_ij.
  GaussianAutoModel(const SiteGraph& graph, RealVector mean, std::vector<Eigen::MatrixXd> diagonal,
                    std::map<Clique, Eigen::MatrixXd> coupling, Options options);
  GaussianAutoModel(const SiteGraph& graph, RealVector mean, std::vector<Eigen::MatrixXd> diagonal,
                    std::map<Clique, Eigen::MatrixXd> coupling)
      : GaussianAutoModel(graph, std::move(mean), std::move(diagonal), std::move(coupling), Options{}) {}

  /// L_ii = precision I, L_ij = -coupling I on every pair clique of the graph.
  static std::shared_ptr<GaussianAutoModel> isotropic(const SiteGraph& graph, const IsotropicGaussian& p,
                                                      Options options = {});

  std::string family() const override { return "gaussian-auto"; }
  const std::vector<Clique>& cliques() const override { return cliques_; }
  double potential(const Clique& a, const Field& field) const override;
  double log_conditional(Index i, const Eigen::Ref<const RealVector>& v, const Field& field) const override;
  RealVector sample_conditional(Index i, const Field& field, Rng& rng) const override;
  /// Isotropic models: (mean, precision, coupling). Otherwise the stacked mean
  /// followed by the upper triangle of the precision's nonzero blocks.
  RealVector parameters() const override;
  double local_energy(Index i, const Field& field) const override;

  RealVector conditional_mean(Index i, const Field& field) const;
  const std::optional<IsotropicGaussian>& isotropic_params() const { return isotropic_; }
  const RealVector& mean() const { return mean_; }
  const Eigen::MatrixXd& diagonal(Index i) const { return diag_[static_cast<std::size_t>(i)]; }
  /// L_ij for i != j (zero block when the pair is not coupled).
  Eigen::MatrixXd block(Index i, Index j) const;
  Eigen::SparseMatrix<double> precision_matrix() const;

 private:
  struct Neighbor {
    Index site;
    Eigen::MatrixXd block;  // L_ij
  };

  std::shared_ptr<const SiteLayout> layout_;
  RealVector mean_;
  std::vector<Eigen::MatrixXd> diag_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> diag_llt_;
  std::vector<double> half_log_det_;
  std::vector<std::vector<Neighbor>> neighbors_;
  std::map<Clique, Eigen::MatrixXd> coupling_;
  RealVector linear_;  // L (mu - r)
  std::vector<Clique> cliques_;
  std::optional<IsotropicGaussian> isotropic_;
};

/// Independent uniform densities on per-site boxes; every potential is zero.
class UniformBoxModel : public ContinuousModel {
 public:
  UniformBoxModel(const SiteGraph& graph, std::vector<Box> boxes);

  std::string family() const override { return "uniform"; }
  const std::vector<Clique>& cliques() const override { return cliques_; }
  double potential(const Clique&, const Field&) const override { return 0.0; }
  double log_conditional(Index i, const Eigen::Ref<const RealVector>& v, const Field& field) const override;
  RealVector sample_conditional(Index i, const Field& field, Rng& rng) const override;
  RealVector parameters() const override { return RealVector(); }
  double energy(const Field&) const override { return 0.0; }
  double local_energy(Index, const Field&) const override { return 0.0; }

  const Box& box(Index i) const { return boxes_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<Box> boxes_;
  std::vector<Clique> cliques_;
};

}  // namespace msmrf
