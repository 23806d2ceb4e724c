#pragma once

#include "msmrf/clique_decomposition.hpp"
#include "msmrf/model.hpp"
#include "msmrf/oracle.hpp"
#include "msmrf/rng.hpp"

#include <vector>

namespace msmrf {

/// A small model together with the discretized space the oracle enumerates.
struct OracleInstance {
  MixedStateModel model;
  DiscretizedSpace space;
};

/// Random scalar-site model on `sites` fully connected sites: ground values in
/// [-0.5, 0.5], alpha and beta in [-1, 1], Gaussian means in [-0.5, 0.5],
/// precisions in [1, 2] and couplings small enough for a positive definite
/// precision. Triples get chi in [-1, 1] when requested.
OracleInstance random_instance(Rng& rng, Index sites, const QuadratureSpec& quadrature, bool triples = false,
                               double half_width = 8.0);

/// Configuration with each site at ground or at a real value in [lo, hi].
Field random_field(Rng& rng, const SiteGraph& graph, double p_ground, double lo, double hi);

/// Smooth random set function with f(r) = 0: sums of products of x, sin x,
/// x^2, exp(x) - 1 and tanh x over random site subsets, minus the same at r.
struct RandomFunction {
  GroundVector ground;
  ConfigFunction f;
};
RandomFunction random_function(Rng& rng, std::size_t sites);

/// Real configuration with coordinates uniform on [lo, hi]; each site is
/// grounded with probability p_ground.
Configuration random_configuration(Rng& rng, const GroundVector& r, double lo, double hi, double p_ground = 0.0);

double uniform_in(Rng& rng, double lo, double hi);

}  // namespace msmrf
