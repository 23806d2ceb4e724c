#include "msmrf/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace msmrf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logistic(double s) { return s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s)); }

const GaussianAutoModel* as_isotropic(const ContinuousModel* c) {
  auto g = dynamic_cast<const GaussianAutoModel*>(c);
  return g && g->isotropic_params() ? g : nullptr;
}

}  // namespace

double pseudo_log_likelihood(const MixedStateModel& model, const Field& field) {
  double sum = 0.0;
  for (Index i = 0; i < model.size(); ++i) {
    const double t = model.log_conditional_ms_pdf(i, field.value(i), field);
    if (!std::isfinite(t)) throw EstimationError(i, "non-finite pseudo-likelihood term at site " + std::to_string(i));
    sum += t;
  }
  return sum;
}

RealVector pll_gradient(const MixedStateModel& model, const Field& field) {
  if (!as_isotropic(&model.continuous())) {
    throw std::invalid_argument("analytic gradient needs an isotropic Gaussian continuous model");
  }
  FitOptions untied;
  untied.tie_alpha = false;
  untied.tie_beta = false;
  PllObjective obj(model.graph(), field, FitInit{model.params(), model.continuous_ptr()}, untied);
  RealVector g;
  obj.value_and_gradient(obj.initial(), g);
  if (!obj.fits_continuous() || g.size() == 0) return g;
  // Always report (mean, precision, coupling) even when the graph has no pairs.
  const Index pairs = static_cast<Index>(std::count_if(model.graph().cliques().begin(), model.graph().cliques().end(),
                                                       [](const Clique& c) { return c.size() == 2; }));
  if (pairs > 0) return g;
  RealVector out(g.size() + 1);
  out << g, 0.0;
  return out;
}

PllObjective::PllObjective(const SiteGraph& graph, const Field& field, const FitInit& init, const FitOptions& options)
    : graph_(graph), field_(field), options_(options), n_(graph.size()) {
  if (field.size() != n_) throw std::invalid_argument("field and graph differ in site count");
  if (init.params.size() != n_) throw std::invalid_argument("initial parameters and graph differ in site count");
  if (!init.continuous) throw std::invalid_argument("an initial continuous model is required");
  pair_nb_.assign(static_cast<std::size_t>(n_), {});
  for (const auto& c : graph.cliques()) {
    if (c.size() != 2) continue;
    pair_nb_[static_cast<std::size_t>(c[0])].push_back({c[1], pairs_.size()});
    pair_nb_[static_cast<std::size_t>(c[1])].push_back({c[0], pairs_.size()});
    pairs_.push_back(c);
  }
  higher_ = DiscreteParams(n_);
  for (const auto& [c, v] : init.params.interactions()) {
    if (!graph.has_clique(c)) throw std::invalid_argument("initial interaction is not a clique of the graph");
    if (c.size() > 2) higher_.set_coefficient(c, v);
  }
  fixed_alpha_ = init.params.alphas();
  fixed_beta_.resize(static_cast<Index>(pairs_.size()));
  for (std::size_t p = 0; p < pairs_.size(); ++p) fixed_beta_[static_cast<Index>(p)] = init.params.coefficient(pairs_[p]);

  const auto* iso = as_isotropic(init.continuous.get());
  fit_cont_ = options.fit_continuous && iso != nullptr;
  has_coupling_ = fit_cont_ && !pairs_.empty();
  fixed_cont_ = init.continuous;
  if (fit_cont_) {
    for (Index i = 0; i < n_; ++i) {
      if (graph.dim(i) != graph.dim(0)) throw std::invalid_argument("isotropic fitting needs equal site dimensions");
    }
  } else {
    fixed_c_.resize(n_);
    fixed_lp_.resize(n_);
    for (Index i = 0; i < n_; ++i) {
      fixed_c_[i] = fixed_cont_->log_conditional_at_ground(i, field);
      fixed_lp_[i] = field.is_ground(i) ? 0.0 : fixed_cont_->log_conditional(i, field.coords(i), field);
    }
  }

  alpha_count_ = options.tie_alpha ? 1 : n_;
  beta_count_ = (!options.fit_beta || pairs_.empty()) ? 0 : (options.tie_beta ? 1 : static_cast<Index>(pairs_.size()));
  dim_ = alpha_count_ + beta_count_ + (fit_cont_ ? 2 + (has_coupling_ ? 1 : 0) : 0);
  theta0_.resize(dim_);
  if (options.tie_alpha) theta0_[0] = fixed_alpha_.mean();
  else theta0_.head(n_) = fixed_alpha_;
  if (beta_count_ == 1) theta0_[alpha_count_] = fixed_beta_.mean();
  else if (beta_count_ > 1) theta0_.segment(alpha_count_, beta_count_) = fixed_beta_;
  if (fit_cont_) {
    const auto& p = *iso->isotropic_params();
    Index k = alpha_count_ + beta_count_;
    theta0_[k++] = p.mean;
    theta0_[k++] = p.precision;
    if (has_coupling_) theta0_[k] = p.coupling;
  }
}

std::vector<std::string> PllObjective::names() const {
  std::vector<std::string> out;
  if (options_.tie_alpha) out.push_back("alpha");
  else
    for (Index i = 0; i < n_; ++i) out.push_back("alpha[" + std::to_string(i) + "]");
  if (beta_count_ == 1) out.push_back("beta");
  else
    for (Index p = 0; p < beta_count_; ++p) {
      const auto& c = pairs_[static_cast<std::size_t>(p)];
      out.push_back("beta[" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "]");
    }
  if (fit_cont_) {
    out.push_back("mean");
    out.push_back("precision");
    if (has_coupling_) out.push_back("coupling");
  }
  return out;
}

double PllObjective::value(const RealVector& theta) const {
  RealVector g;
  return value_and_gradient(theta, g);
}

double PllObjective::value_and_gradient(const RealVector& theta, RealVector& grad) const {
  if (theta.size() != dim_) throw std::invalid_argument("parameter vector has the wrong length");
  grad = RealVector::Zero(dim_);
  const Index k_cont = alpha_count_ + beta_count_;
  double mu = 0, lam = 1, gam = 0;
  if (fit_cont_) {
    mu = theta[k_cont];
    lam = theta[k_cont + 1];
    gam = has_coupling_ ? theta[k_cont + 2] : 0.0;
    if (!(lam > 0.0) || !std::isfinite(lam) || !std::isfinite(mu) || !std::isfinite(gam)) return kNegInf;
  }
  if (!theta.allFinite()) return kNegInf;
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double total = 0.0;
  RealVector S, u, e;
  for (Index i = 0; i < n_; ++i) {
    const auto& nb = pair_nb_[static_cast<std::size_t>(i)];
    const bool ground = field_.is_ground(i);
    const Index ai = options_.tie_alpha ? 0 : i;
    double h = theta[ai];
    for (const auto& [j, p] : nb) {
      const double beta = beta_count_ == 0 ? fixed_beta_[static_cast<Index>(p)]
                                           : theta[alpha_count_ + (beta_count_ == 1 ? 0 : static_cast<Index>(p))];
      h += beta * field_.off_ground(j);
    }
    if (!higher_.interactions().empty()) h += interaction_field(i, field_, higher_) - higher_.alpha(i);

    double c, lp = 0.0;
    double dc_mu = 0, dc_lam = 0, dc_gam = 0, dlp_mu = 0, dlp_lam = 0, dlp_gam = 0;
    if (fit_cont_) {
      const Index n = graph_.dim(i);
      const double dn = static_cast<double>(n);
      S = RealVector::Zero(n);
      for (const auto& [j, p] : nb) S += (field_.coords(j).array() - mu).matrix();
      const double k = static_cast<double>(nb.size());
      const double base = 0.5 * dn * std::log(lam) - dn * half_log_2pi;
      const auto gauss = [&](const auto& x, double& lv, double& d_mu, double& d_lam, double& d_gam) {
        u = (x.array() - mu).matrix();
        e = lam * u - gam * S;
        const double ee = e.squaredNorm();
        lv = base - ee / (2.0 * lam);
        d_lam = dn / (2.0 * lam) - e.dot(u) / lam + ee / (2.0 * lam * lam);
        d_gam = e.dot(S) / lam;
        d_mu = (lam - gam * k) / lam * e.sum();
      };
      gauss(field_.ground_coords(i), c, dc_mu, dc_lam, dc_gam);
      if (!ground) gauss(field_.coords(i), lp, dlp_mu, dlp_lam, dlp_gam);
    } else {
      c = fixed_c_[i];
      lp = fixed_lp_[i];
      if (!std::isfinite(c)) throw EstimationError(i, "continuous density vanishes at the ground value of site " + std::to_string(i));
    }
    const double s = h - c;
    double dl_ds;
    if (ground) {
      total += -softplus(s);
      dl_ds = -logistic(s);
    } else {
      total += -softplus(-s) + lp;
      dl_ds = logistic(-s);
    }
    grad[ai] += dl_ds;
    if (beta_count_ > 0) {
      for (const auto& [j, p] : nb) {
        grad[alpha_count_ + (beta_count_ == 1 ? 0 : static_cast<Index>(p))] += dl_ds * field_.off_ground(j);
      }
    }
    if (fit_cont_) {
      grad[k_cont] += -dl_ds * dc_mu + dlp_mu;
      grad[k_cont + 1] += -dl_ds * dc_lam + dlp_lam;
      if (has_coupling_) grad[k_cont + 2] += -dl_ds * dc_gam + dlp_gam;
    }
  }
  return std::isfinite(total) ? total : kNegInf;
}

FitInit PllObjective::unpack(const RealVector& theta) const {
  DiscreteParams params = higher_;
  for (Index i = 0; i < n_; ++i) params.set_alpha(i, theta[options_.tie_alpha ? 0 : i]);
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const double b = beta_count_ == 0 ? fixed_beta_[static_cast<Index>(p)]
                                      : theta[alpha_count_ + (beta_count_ == 1 ? 0 : static_cast<Index>(p))];
    if (b != 0.0 || beta_count_ > 0) params.set_coefficient(pairs_[p], b);
  }
  std::shared_ptr<const ContinuousModel> cont = fixed_cont_;
  if (fit_cont_) {
    const Index k = alpha_count_ + beta_count_;
    IsotropicGaussian g{theta[k], theta[k + 1], has_coupling_ ? theta[k + 2] : 0.0};
    cont = GaussianAutoModel::isotropic(graph_, g, GaussianOptions{false});
  }
  return FitInit{std::move(params), std::move(cont)};
}

FitReport fit(const Field& field, const SiteGraph& graph, const FitInit& init, const FitOptions& options) {
  PllObjective obj(graph, field, init, options);
  const Index d = obj.dimension();
  FitReport report;
  RealVector x = obj.initial();
  RealVector g;
  double f = obj.value_and_gradient(x, g);
  if (!std::isfinite(f)) throw EstimationError(-1, "initial parameters give a non-finite pseudo-likelihood");
  report.trace.push_back(f);

  const Index ground = field.ground_count();
  std::string boundary;
  if (ground == field.size()) boundary = "boundary: every site is at ground, so the atom parameters have no interior optimum";
  else if (ground == 0) boundary = "boundary: no site is at ground, so the atom parameters have no interior optimum";

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(d, d);
  bool scaled = false;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (g.norm() < options.tolerance) break;
    // Ascent on the PLL: minimise -PLL with gradient -g.
    RealVector dir = H * g;
    if (!(dir.dot(g) > 0)) {
      H.setIdentity();
      dir = g;
    }
    const double slope = dir.dot(g);
    double t = 1.0, f_new = kNegInf;
    RealVector x_new, g_new;
    bool accepted = false;
    // Near the optimum the PLL change drops below its rounding noise; there a
    // step is judged by the (analytic, accurate) gradient instead.
    const double noise = 1e-12 * std::max(1.0, std::abs(f));
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      x_new = x + t * dir;
      f_new = obj.value_and_gradient(x_new, g_new);
      if (!std::isfinite(f_new)) continue;
      const bool armijo = f_new >= f + 1e-4 * t * slope;
      const bool flat = f_new >= f - noise && g_new.norm() < g.norm();
      if (armijo || flat) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      report.diagnosis = "line search failed to improve the pseudo-likelihood";
      break;
    }
    const RealVector s = x_new - x;
    const RealVector y = g - g_new;  // gradient change of -PLL
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const RealVector Hy = H * y;
      H += rho * rho * (sy + y.dot(Hy)) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
    }
    x = x_new;
    g = g_new;
    f = f_new;
    report.trace.push_back(f);
    if (x.cwiseAbs().maxCoeff() > options.divergence_bound) {
      ++it;
      report.diagnosis = boundary.empty() ? "boundary: parameters diverged beyond the search bound" : boundary;
      break;
    }
  }
  auto est = obj.unpack(x);
  report.params = std::move(est.params);
  report.continuous = std::move(est.continuous);
  report.iterations = it;
  report.gradient_norm = g.norm();
  report.converged = report.diagnosis.empty() && report.gradient_norm < options.tolerance && boundary.empty();
  if (report.diagnosis.empty()) {
    if (!boundary.empty()) report.diagnosis = boundary;
    else if (!report.converged) report.diagnosis = "iteration limit reached";
    else report.diagnosis = "converged";
  }
  report.pll = pseudo_log_likelihood(MixedStateModel(graph, report.params, report.continuous), field);
  return report;
}

}  // namespace msmrf
