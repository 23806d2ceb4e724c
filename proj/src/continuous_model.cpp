#include "msmrf/continuous_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace msmrf {

double ContinuousModel::energy(const Field& field) const {
  double v = 0.0;
  for (const auto& c : cliques()) v += potential(c, field);
  return v;
}

double ContinuousModel::local_energy(Index i, const Field& field) const {
  double v = 0.0;
  for (const auto& c : cliques()) {
    if (std::find(c.begin(), c.end(), i) != c.end()) v += potential(c, field);
  }
  return v;
}

GaussianAutoModel::GaussianAutoModel(const SiteGraph& graph, RealVector mean, std::vector<Eigen::MatrixXd> diagonal,
                                     std::map<Clique, Eigen::MatrixXd> coupling, Options options)
    : layout_(graph.layout()), mean_(std::move(mean)), diag_(std::move(diagonal)), coupling_(std::move(coupling)) {
  const Index n = graph.size();
  if (mean_.size() != graph.total_dim()) throw std::invalid_argument("mean has the wrong dimension");
  if (!all_finite(mean_)) throw std::invalid_argument("mean must be finite");
  if (static_cast<Index>(diag_.size()) != n) throw std::invalid_argument("one diagonal precision block per site");
  neighbors_.assign(static_cast<std::size_t>(n), {});
  for (Index i = 0; i < n; ++i) {
    const auto& d = diag_[static_cast<std::size_t>(i)];
    if (d.rows() != graph.dim(i) || d.cols() != graph.dim(i)) throw std::invalid_argument("diagonal block has the wrong shape");
    if (!d.allFinite() || !d.isApprox(d.transpose(), 0.0)) throw std::invalid_argument("diagonal block must be finite and symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(d);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("precision block of site " + std::to_string(i) + " is not positive definite");
    }
    half_log_det_.push_back(llt.matrixLLT().diagonal().array().log().sum());
    diag_llt_.push_back(std::move(llt));
    cliques_.push_back({i});
  }
  for (const auto& [c, b] : coupling_) {
    if (c.size() != 2 || c[0] >= c[1]) throw std::invalid_argument("coupling keys must be sorted pairs");
    if (!graph.has_clique(c)) throw std::invalid_argument("coupling on a pair that is not a clique of the graph");
    if (b.rows() != graph.dim(c[0]) || b.cols() != graph.dim(c[1])) throw std::invalid_argument("coupling block has the wrong shape");
    if (!b.allFinite()) throw std::invalid_argument("coupling block must be finite");
    neighbors_[static_cast<std::size_t>(c[0])].push_back({c[1], b});
    neighbors_[static_cast<std::size_t>(c[1])].push_back({c[0], b.transpose()});
    cliques_.push_back(c);
  }
  const auto prec = precision_matrix();
  if (options.require_positive_definite) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(prec);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("precision matrix is not positive definite");
  }
  linear_ = prec * (mean_ - layout_->ground);
}

std::shared_ptr<GaussianAutoModel> GaussianAutoModel::isotropic(const SiteGraph& graph, const IsotropicGaussian& p,
                                                                Options options) {
  if (!std::isfinite(p.mean) || !std::isfinite(p.coupling) || !(p.precision > 0.0) || !std::isfinite(p.precision)) {
    throw std::invalid_argument("isotropic Gaussian needs finite parameters and precision > 0");
  }
  std::vector<Eigen::MatrixXd> diag;
  for (Index i = 0; i < graph.size(); ++i) diag.push_back(p.precision * Eigen::MatrixXd::Identity(graph.dim(i), graph.dim(i)));
  std::map<Clique, Eigen::MatrixXd> coupling;
  for (const auto& c : graph.cliques()) {
    if (c.size() != 2) continue;
    if (graph.dim(c[0]) != graph.dim(c[1])) throw std::invalid_argument("isotropic coupling needs equal site dimensions");
    coupling[c] = -p.coupling * Eigen::MatrixXd::Identity(graph.dim(c[0]), graph.dim(c[1]));
  }
  auto model = std::make_shared<GaussianAutoModel>(graph, RealVector::Constant(graph.total_dim(), p.mean),
                                                   std::move(diag), std::move(coupling), options);
  model->isotropic_ = p;
  return model;
}

Eigen::MatrixXd GaussianAutoModel::block(Index i, Index j) const {
  if (i == j) return diagonal(i);
  const Index di = layout_->dims[static_cast<std::size_t>(i)];
  const Index dj = layout_->dims[static_cast<std::size_t>(j)];
  if (i < j) {
    auto it = coupling_.find({i, j});
    return it == coupling_.end() ? Eigen::MatrixXd::Zero(di, dj) : it->second;
  }
  auto it = coupling_.find({j, i});
  return it == coupling_.end() ? Eigen::MatrixXd::Zero(di, dj) : Eigen::MatrixXd(it->second.transpose());
}

Eigen::SparseMatrix<double> GaussianAutoModel::precision_matrix() const {
  const auto& L = *layout_;
  std::vector<Eigen::Triplet<double>> trip;
  const auto add = [&](Index oi, Index oj, const Eigen::MatrixXd& b) {
    for (Index r = 0; r < b.rows(); ++r)
      for (Index c = 0; c < b.cols(); ++c) trip.emplace_back(oi + r, oj + c, b(r, c));
  };
  for (Index i = 0; i < L.size(); ++i) add(L.offsets[i], L.offsets[i], diag_[static_cast<std::size_t>(i)]);
  for (const auto& [c, b] : coupling_) {
    add(L.offsets[c[0]], L.offsets[c[1]], b);
    add(L.offsets[c[1]], L.offsets[c[0]], b.transpose());
  }
  Eigen::SparseMatrix<double> m(L.total_dim, L.total_dim);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

double GaussianAutoModel::potential(const Clique& a, const Field& field) const {
  if (a.size() == 1) {
    const Index i = a[0];
    const RealVector y = field.coords(i) - field.ground_coords(i);
    const auto lin = linear_.segment(layout_->offsets[i], y.size());
    return -0.5 * y.dot(diag_[static_cast<std::size_t>(i)] * y) + y.dot(lin);
  }
  if (a.size() == 2) {
    auto it = coupling_.find(a);
    if (it == coupling_.end()) return 0.0;
    const RealVector yi = field.coords(a[0]) - field.ground_coords(a[0]);
    const RealVector yj = field.coords(a[1]) - field.ground_coords(a[1]);
    return -yi.dot(it->second * yj);
  }
  return 0.0;
}

double GaussianAutoModel::local_energy(Index i, const Field& field) const {
  double v = potential({i}, field);
  const RealVector yi = field.coords(i) - field.ground_coords(i);
  for (const auto& nb : neighbors_[static_cast<std::size_t>(i)]) {
    v -= yi.dot(nb.block * (field.coords(nb.site) - field.ground_coords(nb.site)));
  }
  return v;
}

RealVector GaussianAutoModel::conditional_mean(Index i, const Field& field) const {
  const Index d = layout_->dims[static_cast<std::size_t>(i)];
  RealVector s = RealVector::Zero(d);
  for (const auto& nb : neighbors_[static_cast<std::size_t>(i)]) {
    const Index dj = layout_->dims[static_cast<std::size_t>(nb.site)];
    s += nb.block * (field.coords(nb.site) - mean_.segment(layout_->offsets[nb.site], dj));
  }
  return mean_.segment(layout_->offsets[i], d) - diag_llt_[static_cast<std::size_t>(i)].solve(s);
}

double GaussianAutoModel::log_conditional(Index i, const Eigen::Ref<const RealVector>& v, const Field& field) const {
  const auto k = static_cast<std::size_t>(i);
  if (v.size() != layout_->dims[k]) throw std::invalid_argument("value dimension differs from the site dimension");
  const RealVector e = v - conditional_mean(i, field);
  const double n = static_cast<double>(v.size());
  return half_log_det_[k] - 0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * e.dot(diag_[k] * e);
}

RealVector GaussianAutoModel::sample_conditional(Index i, const Field& field, Rng& rng) const {
  const auto k = static_cast<std::size_t>(i);
  RealVector z(layout_->dims[k]);
  for (Index c = 0; c < z.size(); ++c) z[c] = rng.normal();
  return conditional_mean(i, field) + diag_llt_[k].matrixU().solve(z);
}

RealVector GaussianAutoModel::parameters() const {
  if (isotropic_) return (RealVector(3) << isotropic_->mean, isotropic_->precision, isotropic_->coupling).finished();
  std::vector<double> out(mean_.data(), mean_.data() + mean_.size());
  for (const auto& d : diag_)
    for (Index r = 0; r < d.rows(); ++r)
      for (Index c = r; c < d.cols(); ++c) out.push_back(d(r, c));
  for (const auto& [_, b] : coupling_) out.insert(out.end(), b.data(), b.data() + b.size());
  return Eigen::Map<RealVector>(out.data(), static_cast<Index>(out.size()));
}

UniformBoxModel::UniformBoxModel(const SiteGraph& graph, std::vector<Box> boxes) : boxes_(std::move(boxes)) {
  if (static_cast<Index>(boxes_.size()) != graph.size()) throw std::invalid_argument("one box per site is required");
  for (Index i = 0; i < graph.size(); ++i) {
    if (boxes_[static_cast<std::size_t>(i)].dim() != graph.dim(i)) throw std::invalid_argument("box dimension mismatch");
    cliques_.push_back({i});
  }
}

double UniformBoxModel::log_conditional(Index i, const Eigen::Ref<const RealVector>& v, const Field&) const {
  const auto& b = box(i);
  if (v.size() != b.dim()) throw std::invalid_argument("value dimension differs from the site dimension");
  return b.contains(v) ? -std::log(b.volume()) : -std::numeric_limits<double>::infinity();
}

RealVector UniformBoxModel::sample_conditional(Index i, const Field&, Rng& rng) const {
  const auto& b = box(i);
  RealVector x(b.dim());
  for (Index c = 0; c < x.size(); ++c) x[c] = b.lo[c] + (b.hi[c] - b.lo[c]) * rng.uniform();
  return x;
}

}  // namespace msmrf
