#include "msmrf/instances.hpp"

#include <cmath>

namespace msmrf {

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

OracleInstance random_instance(Rng& rng, Index sites, const QuadratureSpec& quadrature, bool triples,
                               double half_width) {
  std::vector<RealVector> ground;
  for (Index i = 0; i < sites; ++i) ground.push_back(RealVector::Constant(1, uniform_in(rng, -0.5, 0.5)));
  std::vector<Clique> cliques;
  for (Index i = 0; i < sites; ++i)
    for (Index j = i + 1; j < sites; ++j) {
      cliques.push_back({i, j});
      if (triples)
        for (Index k = j + 1; k < sites; ++k) cliques.push_back({i, j, k});
    }
  SiteGraph graph(std::vector<Index>(static_cast<std::size_t>(sites), 1), ground, cliques);

  DiscreteParams params(sites);
  for (Index i = 0; i < sites; ++i) params.set_alpha(i, uniform_in(rng, -1, 1));
  for (const auto& c : graph.cliques()) params.set_coefficient(c, uniform_in(rng, -1, 1));

  RealVector mean(sites);
  std::vector<Eigen::MatrixXd> diag;
  double min_prec = 2.0;
  for (Index i = 0; i < sites; ++i) {
    mean[i] = uniform_in(rng, -0.5, 0.5);
    const double p = uniform_in(rng, 1.0, 2.0);
    min_prec = std::min(min_prec, p);
    diag.push_back(Eigen::MatrixXd::Constant(1, 1, p));
  }
  // Row sums of |L_ij| stay below 0.3 * min precision: diagonally dominant.
  const double bound = 0.3 * min_prec / static_cast<double>(std::max<Index>(1, sites - 1));
  std::map<Clique, Eigen::MatrixXd> coupling;
  for (const auto& c : graph.cliques()) {
    if (c.size() == 2) coupling[c] = Eigen::MatrixXd::Constant(1, 1, uniform_in(rng, -bound, bound));
  }
  auto cont = std::make_shared<GaussianAutoModel>(graph, mean, diag, coupling);
  MixedStateModel model(graph, std::move(params), std::move(cont));
  DiscretizedSpace space(model.graph(), Box::cube(1, -half_width, half_width), quadrature);
  return OracleInstance{std::move(model), std::move(space)};
}

Field random_field(Rng& rng, const SiteGraph& graph, double p_ground, double lo, double hi) {
  Field f(graph);
  for (Index i = 0; i < graph.size(); ++i) {
    if (rng.uniform() < p_ground) continue;
    RealVector v(graph.dim(i));
    for (Index k = 0; k < v.size(); ++k) v[k] = uniform_in(rng, lo, hi);
    f.set_real(i, v);
  }
  return f;
}

RandomFunction random_function(Rng& rng, std::size_t sites) {
  std::vector<MixedValue> r;
  for (std::size_t i = 0; i < sites; ++i) r.push_back(MixedValue::real(uniform_in(rng, -1, 1)));
  GroundVector ground(r);
  struct Term {
    double coef;
    std::vector<std::pair<std::size_t, int>> factors;  // (site, basis function)
  };
  std::vector<Term> terms;
  const int count = 1 + static_cast<int>(rng() % 6);
  for (int t = 0; t < count; ++t) {
    Term term{uniform_in(rng, -2, 2), {}};
    for (std::size_t i = 0; i < sites; ++i) {
      if (rng.uniform() < 0.6) term.factors.push_back({i, static_cast<int>(rng() % 5)});
    }
    if (term.factors.empty()) term.factors.push_back({rng() % sites, static_cast<int>(rng() % 5)});
    terms.push_back(std::move(term));
  }
  const auto basis = [](int k, double x) {
    switch (k) {
      case 0: return x;
      case 1: return std::sin(x);
      case 2: return x * x;
      case 3: return std::expm1(x);
      default: return std::tanh(x);
    }
  };
  auto g = [terms, basis](std::span<const MixedValue> x) {
    double s = 0.0;
    for (const auto& t : terms) {
      double p = t.coef;
      for (const auto& [i, k] : t.factors) p *= basis(k, x[i].as_real()[0]);
      s += p;
    }
    return s;
  };
  const double at_ground = g(ground.values());
  return RandomFunction{ground, [g, at_ground](std::span<const MixedValue> x) { return g(x) - at_ground; }};
}

Configuration random_configuration(Rng& rng, const GroundVector& r, double lo, double hi, double p_ground) {
  Configuration x;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (rng.uniform() < p_ground) x.push_back(r[i]);
    else x.push_back(MixedValue::real(uniform_in(rng, lo, hi)));
  }
  return x;
}

}  // namespace msmrf
