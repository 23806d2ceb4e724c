#pragma once

#include "reference.hpp"

#include "msmrf/continuous_model.hpp"
#include "msmrf/model.hpp"

#include <memory>
#include <random>

namespace support {

/// Library model equivalent to a reference scalar model on the complete graph.
inline msmrf::MixedStateModel to_library(const ref::ScalarModel& m) {
  using namespace msmrf;
  const int n = m.size();
  std::vector<RealVector> ground;
  for (int i = 0; i < n; ++i) ground.push_back(RealVector::Constant(1, m.ground[i]));
  std::vector<Clique> cliques;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) cliques.push_back({i, j});
  for (const auto& [t, c] : m.chi) cliques.push_back({t[0], t[1], t[2]});
  SiteGraph graph(std::vector<Index>(static_cast<std::size_t>(n), 1), ground, cliques);
  DiscreteParams params(n);
  for (int i = 0; i < n; ++i) params.set_alpha(i, m.alpha[i]);
  for (const auto& [p, b] : m.beta) params.set_beta(p.first, p.second, b);
  for (const auto& [t, c] : m.chi) params.set_chi(t[0], t[1], t[2], c);
  std::vector<Eigen::MatrixXd> diag;
  std::map<Clique, Eigen::MatrixXd> coupling;
  for (int i = 0; i < n; ++i) {
    diag.push_back(Eigen::MatrixXd::Constant(1, 1, m.L(i, i)));
    for (int j = i + 1; j < n; ++j) coupling[{i, j}] = Eigen::MatrixXd::Constant(1, 1, m.L(i, j));
  }
  auto cont = std::make_shared<GaussianAutoModel>(graph, m.mu, diag, coupling);
  return MixedStateModel(graph, params, cont);
}

/// Random reference model with a diagonally dominant precision.
inline ref::ScalarModel random_scalar_model(std::mt19937_64& gen, int n, bool triples = false) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ref::ScalarModel m;
  m.ground.resize(n);
  m.alpha.resize(n);
  m.mu.resize(n);
  m.L = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m.ground[i] = 0.5 * u(gen);
    m.alpha[i] = u(gen);
    m.mu[i] = 0.5 * u(gen);
    m.L(i, i) = 1.5 + 0.5 * u(gen);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      m.beta[{i, j}] = u(gen);
      m.L(i, j) = m.L(j, i) = 0.3 * u(gen) / std::max(1, n - 1);
    }
  if (triples)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = j + 1; k < n; ++k) m.chi[{i, j, k}] = u(gen);
  return m;
}

}  // namespace support
