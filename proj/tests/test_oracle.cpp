#include "support.hpp"

#include "msmrf/instances.hpp"
#include "msmrf/mixed_measure.hpp"
#include "msmrf/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace msmrf;

namespace {

SiteGraph scalar_graph(Index n, std::vector<Clique> cliques) {
  return SiteGraph(std::vector<Index>(static_cast<std::size_t>(n), 1),
                   std::vector<RealVector>(static_cast<std::size_t>(n), RealVector::Zero(1)), std::move(cliques));
}

MixedStateModel independent(Index n, double alpha, IsotropicGaussian cont) {
  auto g = scalar_graph(n, {});
  DiscreteParams p(n);
  for (Index i = 0; i < n; ++i) p.set_alpha(i, alpha);
  return MixedStateModel(g, p, GaussianAutoModel::isotropic(g, cont));
}

const QuadratureSpec k41{1, 41};

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("one flat site has mass three on [-1, 1]") {
    auto g = scalar_graph(1, {});
    MixedStateModel m(g, DiscreteParams(1), std::make_shared<UniformBoxModel>(g, std::vector<Box>{Box::cube(1, -1, 1)}));
    DiscretizedSpace space(g, Box::cube(1, -1, 1), {1, 15});
    CHECK(exact_partition(m, space) == doctest::Approx(3.0).epsilon(1e-14));
  }

  TEST_CASE("space weights sum to the box volume") {
    auto g = scalar_graph(2, {});
    DiscretizedSpace space(g, {Box::cube(1, -8, 8), Box::cube(1, -1, 3)}, {3, 15});
    CHECK(std::abs(space.rule(0).weights.sum() - 16.0) < 1e-12);
    CHECK(std::abs(space.rule(1).weights.sum() - 4.0) < 1e-12);
    CHECK((space.rule(0).weights.array() > 0).all());
    CHECK(space.states(1) == 46);
  }

  TEST_CASE("independent sites multiply") {
    const auto one = independent(1, 0.3, {0.2, 1.5, 0.0});
    const auto two = independent(2, 0.3, {0.2, 1.5, 0.0});
    const double z1 = exact_partition(one, DiscretizedSpace(one.graph(), Box::cube(1, -8, 8), k41));
    const double z2 = exact_partition(two, DiscretizedSpace(two.graph(), Box::cube(1, -8, 8), k41));
    CHECK(std::abs(z2 / (z1 * z1) - 1.0) < 1e-12);
  }

  TEST_CASE("partition agrees with the reference integral and across resolutions") {
    std::mt19937_64 gen(5);
    for (int t = 0; t < 3; ++t) {
      const auto rm = support::random_scalar_model(gen, 2);
      const auto m = support::to_library(rm);
      const double z41 = exact_partition(m, DiscretizedSpace(m.graph(), Box::cube(1, -8, 8), k41));
      const double z81 = exact_partition(m, DiscretizedSpace(m.graph(), Box::cube(1, -8, 8), {1, 81}));
      CHECK(std::abs(z41 / z81 - 1.0) < 1e-7);
      CHECK(std::abs(z81 / rm.partition() - 1.0) < 1e-7);
    }
  }

  TEST_CASE("conditionals of an independent model are the standalone ms-pdf") {
    const auto m = independent(2, -0.4, {0.5, 2.0, 0.0});
    DiscretizedSpace space(m.graph(), Box::cube(1, -8, 8), {4, 20});
    Field f(m.graph());
    f.set_real(1, RealVector::Constant(1, 0.9));
    MixedDensitySpec site;
    const double p_ground = ref::normal_pdf(0.0, 0.5, 0.5);
    site.rho = 1.0 / (1.0 + std::exp(-0.4) / p_ground);
    site.atoms = {MixedValue::atom()};
    site.pi = RealVector::Ones(1);
    site.continuous = ContinuousDensity::gaussian(RealVector::Constant(1, 0.5), RealVector::Constant(1, std::sqrt(0.5)));
    site.domain = Box::cube(1, -8, 8);
    for (const auto& v : {MixedValue::atom(), MixedValue::real(-0.3), MixedValue::real(1.4)}) {
      CHECK(std::abs(exact_conditional(0, v, f, m, space) - eval_ms_pdf(v, site)) < 1e-9);
    }
  }

  TEST_CASE("oracle conditionals match the closed forms") {
    Rng rng(9);
    for (int t = 0; t < 5; ++t) {
      auto inst = random_instance(rng, 3, k41, t % 2 == 0);
      const auto& m = inst.model;
      const auto f = random_field(rng, m.graph(), 0.4, -1.5, 1.5);
      for (Index i = 0; i < 3; ++i) {
        CHECK(std::abs(exact_conditional(i, MixedValue::atom(), f, m, inst.space) - m.atom_probability(i, f)) < 1e-6);
        const auto v = MixedValue::real(uniform_in(rng, -2, 2));
        const double expect = m.conditional_ms_pdf(i, v, f);
        CHECK(std::abs(exact_conditional(i, v, f, m, inst.space) / expect - 1.0) < 1e-5);
      }
    }
  }

  TEST_CASE("oracle log ratios are sums of extracted potentials") {
    Rng rng(10);
    auto inst = random_instance(rng, 3, k41, true);
    const auto& m = inst.model;
    for (int k = 0; k < 10; ++k) {
      auto f = random_field(rng, m.graph(), 0.3, -1.5, 1.5);
      const Index i = k % 3;
      const RealVector v = RealVector::Constant(1, uniform_in(rng, -2, 2));
      const double ratio = std::log(exact_conditional(i, MixedValue::real(v), f, m, inst.space) /
                                    exact_conditional(i, MixedValue::atom(), f, m, inst.space));
      f.set_real(i, v);
      double pots = m.mixed_potential({i}, f);
      for (const auto& c : m.graph().cliques())
        if (std::find(c.begin(), c.end(), i) != c.end()) pots += m.mixed_potential(c, f);
      CHECK(std::abs(ratio - pots) < 1e-6);
    }
  }

  TEST_CASE("marginal atom probabilities") {
    const auto one = independent(1, 0.7, {0.1, 1.3, 0.0});
    DiscretizedSpace s1(one.graph(), Box::cube(1, -8, 8), {4, 20});
    CHECK(std::abs(exact_marginal_atom_prob(0, one, s1) - one.atom_probability(0, Field(one.graph()))) < 1e-10);

    auto g = scalar_graph(2, {{0, 1}});
    DiscreteParams p(2);
    p.set_alpha(0, 0.2);
    p.set_alpha(1, 0.2);
    p.set_beta(0, 1, -0.5);
    MixedStateModel sym(g, p, GaussianAutoModel::isotropic(g, {0.3, 1.2, 0.25}));
    DiscretizedSpace s2(g, Box::cube(1, -8, 8), k41);
    CHECK(std::abs(exact_marginal_atom_prob(0, sym, s2) - exact_marginal_atom_prob(1, sym, s2)) < 1e-10);

    DiscretizedSpace s81(g, Box::cube(1, -8, 8), {1, 81});
    CHECK(std::abs(exact_marginal_atom_prob(0, sym, s2) - exact_marginal_atom_prob(0, sym, s81)) < 1e-6);
  }

  TEST_CASE("pattern probabilities, ground identity and marginal mass") {
    Rng rng(12);
    auto inst = random_instance(rng, 3, {1, 21});
    const auto probs = exact_pattern_probabilities(inst.model, inst.space);
    double total = 0.0;
    for (double q : probs) total += q;
    CHECK(std::abs(total - 1.0) < 1e-12);
    // The all-ground state has energy zero, so its probability is 1/Z.
    CHECK(std::abs(probs[0] * exact_partition(inst.model, inst.space) - 1.0) < 1e-8);
    for (Index i = 0; i < 3; ++i) {
      double off = 0.0;
      for (std::size_t p = 0; p < probs.size(); ++p)
        if ((p >> i) & 1u) off += probs[p];
      CHECK(std::abs(exact_marginal_atom_prob(i, inst.model, inst.space) + off - 1.0) < 1e-8);
    }
  }

  TEST_CASE("factorization residuals") {
    auto g = scalar_graph(2, {});
    MixedStateModel flat(g, DiscreteParams(2), std::make_shared<UniformBoxModel>(g, std::vector<Box>(2, Box::cube(1, -1, 1))));
    CHECK(verify_factorization(flat, DiscretizedSpace(g, Box::cube(1, -1, 1), {1, 9})) < 1e-12);
    Rng rng(13);
    for (int t = 0; t < 3; ++t) {
      auto one = random_instance(rng, 1, {4, 20});
      CHECK(verify_factorization(one.model, one.space) < 1e-9);
      auto two = random_instance(rng, 2, k41);
      CHECK(verify_factorization(two.model, two.space) < 1e-6);
    }
  }

  TEST_CASE("enumeration is independent of the thread count") {
    Rng rng(14);
    auto inst = random_instance(rng, 3, {1, 41});
    const double a = exact_log_partition(inst.model, inst.space, 1);
    for (int t : {2, 5, 8}) CHECK(exact_log_partition(inst.model, inst.space, t) == a);
  }

  TEST_CASE("state count is bounded") {
    Rng rng(15);
    auto inst = random_instance(rng, 6, {1, 9});
    CHECK(inst.space.total_states() == doctest::Approx(1e6));
    CHECK_NOTHROW(exact_log_partition(inst.model, inst.space, 4));
    auto big = random_instance(rng, 6, {1, 15});
    CHECK_THROWS_AS(exact_log_partition(big.model, big.space), OracleError);
  }
}
