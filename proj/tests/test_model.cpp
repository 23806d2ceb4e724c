#include "support.hpp"

#include "msmrf/clique_decomposition.hpp"
#include "msmrf/mixed_measure.hpp"
#include "msmrf/model.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

using namespace msmrf;

namespace {

Field to_field(const SiteGraph& g, const ref::ScalarModel::State& s) {
  Field f(g);
  for (Index i = 0; i < g.size(); ++i)
    if (s[static_cast<std::size_t>(i)]) f.set_real(i, RealVector::Constant(1, *s[static_cast<std::size_t>(i)]));
  return f;
}

ref::ScalarModel::State random_state(std::mt19937_64& gen, int n, double p_ground = 0.4) {
  std::uniform_real_distribution<double> u(0, 1);
  ref::ScalarModel::State s(n);
  for (auto& v : s)
    if (u(gen) >= p_ground) v = 3.0 * u(gen) - 1.5;
  return s;
}

SiteGraph scalar_graph(Index n, std::vector<Clique> cliques) {
  return SiteGraph(std::vector<Index>(static_cast<std::size_t>(n), 1),
                   std::vector<RealVector>(static_cast<std::size_t>(n), RealVector::Zero(1)), std::move(cliques));
}

std::shared_ptr<UniformBoxModel> unit_boxes(const SiteGraph& g, double lo = -0.5) {
  return std::make_shared<UniformBoxModel>(g, std::vector<Box>(static_cast<std::size_t>(g.size()), Box::cube(1, lo, lo + 1)));
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("discrete energy counts off-ground factors") {
    auto g = scalar_graph(3, {{0, 1}, {1, 2}, {0, 1, 2}});
    DiscreteParams p(3);
    p.set_alpha(0, 0.5);
    p.set_alpha(1, -1.25);
    p.set_alpha(2, 2.0);
    p.set_beta(0, 1, 0.75);
    p.set_beta(1, 2, -0.3);
    p.set_chi(0, 1, 2, 0.1);
    Field f(g);
    CHECK(discrete_energy(f, p) == 0.0);
    f.set_real(1, RealVector::Constant(1, 0.2));
    CHECK(discrete_energy(f, p) == -1.25);
    f.set_real(0, RealVector::Constant(1, -3.0));
    CHECK(discrete_energy(f, p) == doctest::Approx(0.5 - 1.25 + 0.75));
    f.set_real(2, RealVector::Constant(1, 1.0));
    CHECK(discrete_energy(f, p) == doctest::Approx(0.5 - 1.25 + 2.0 + 0.75 - 0.3 + 0.1));
  }

  TEST_CASE("interaction field") {
    auto g = scalar_graph(3, {{0, 1}, {0, 2}, {1, 2}, {0, 1, 2}});
    DiscreteParams p(3);
    p.set_alpha(0, 0.4);
    p.set_beta(0, 1, 1.5);
    p.set_beta(0, 2, -0.7);
    p.set_chi(0, 1, 2, 0.25);
    Field f(g);
    CHECK(interaction_field(0, f, p) == 0.4);
    f.set_real(1, RealVector::Constant(1, 1.0));
    CHECK(interaction_field(0, f, p) == doctest::Approx(0.4 + 1.5));
    f.set_real(2, RealVector::Constant(1, 1.0));
    CHECK(interaction_field(0, f, p) == doctest::Approx(0.4 + 1.5 - 0.7 + 0.25));
    // Site 0's own state does not enter its field.
    f.set_real(0, RealVector::Constant(1, 1.0));
    CHECK(interaction_field(0, f, p) == doctest::Approx(0.4 + 1.5 - 0.7 + 0.25));
  }

  TEST_CASE("pair and triple coefficients are symmetric") {
    DiscreteParams p(4);
    p.set_beta(2, 1, 0.3);
    p.set_chi(3, 0, 2, -0.6);
    CHECK(p.beta(1, 2) == p.beta(2, 1));
    const std::vector<std::array<Index, 3>> perms{{0, 2, 3}, {0, 3, 2}, {2, 0, 3}, {2, 3, 0}, {3, 0, 2}, {3, 2, 0}};
    for (const auto& q : perms) CHECK(p.chi(q[0], q[1], q[2]) == -0.6);
    CHECK(p.interactions().size() == 2);
  }

  TEST_CASE("atom probability closed forms") {
    auto g = scalar_graph(1, {});
    MixedStateModel uniform(g, DiscreteParams(1), unit_boxes(g));
    Field f(g);
    CHECK(uniform.atom_probability(0, f) == 0.5);

    DiscreteParams strong(1);
    strong.set_alpha(0, -800.0);
    MixedStateModel forced(g, strong, unit_boxes(g));
    CHECK(forced.atom_probability(0, f) == 1.0);
    CHECK(std::isfinite(forced.log_off_probability(0, f)));

    MixedStateModel gauss(g, DiscreteParams(1), GaussianAutoModel::isotropic(g, {0.0, 1.0, 0.0}));
    const double p = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    CHECK(gauss.atom_probability(0, f) == doctest::Approx(p / (1.0 + p)).epsilon(1e-14));
    CHECK(gauss.atom_probability(0, f) == doctest::Approx(0.28517).epsilon(1e-5));
  }

  TEST_CASE("vanishing density at ground is a positivity error") {
    auto g = scalar_graph(1, {});
    MixedStateModel m(g, DiscreteParams(1), unit_boxes(g, 1.0));
    CHECK_THROWS_AS(m.atom_probability(0, Field(g)), PositivityError);
    CHECK_THROWS_AS(m.conditional_ms_pdf(0, MixedValue::atom(), Field(g)), PositivityError);
  }

  TEST_CASE("coefficients must sit on graph cliques") {
    auto g = scalar_graph(3, {{0, 1}});
    DiscreteParams p(3);
    p.set_beta(1, 2, 0.5);
    CHECK_THROWS(MixedStateModel(g, p, unit_boxes(g)));
  }

  TEST_CASE("conditional ms-pdf branches") {
    std::mt19937_64 gen(2);
    const auto rm = support::random_scalar_model(gen, 3);
    const auto m = support::to_library(rm);
    const auto f = to_field(m.graph(), random_state(gen, 3));
    const double rho = m.atom_probability(1, f);
    CHECK(m.conditional_ms_pdf(1, MixedValue::atom(), f) == rho);
    CHECK(m.conditional_ms_pdf(1, MixedValue::real(rm.ground[1]), f) == rho);
    const RealVector v = RealVector::Constant(1, 0.7);
    const double pa = std::exp(m.continuous().log_conditional(1, v, f));
    CHECK(m.conditional_ms_pdf(1, MixedValue::real(v), f) == doctest::Approx((1 - rho) * pa).epsilon(1e-14));
    CHECK_THROWS(m.conditional_ms_pdf(1, MixedValue::label(0), f));
  }

  TEST_CASE("independent model has neighbour-free atom probability") {
    auto g = SiteGraph::lattice(3, 3, 1, RealVector::Zero(1));
    DiscreteParams p(9);
    for (Index i = 0; i < 9; ++i) p.set_alpha(i, 0.3);
    MixedStateModel m(g, p, GaussianAutoModel::isotropic(g, {0.2, 1.3, 0.0}));
    std::mt19937_64 gen(4);
    const double rho = m.atom_probability(4, Field(g));
    for (int k = 0; k < 20; ++k) {
      Field f(g);
      std::uniform_real_distribution<double> u(-2, 2);
      for (Index i = 0; i < 9; ++i)
        if (i != 4 && u(gen) > 0) f.set_real(i, RealVector::Constant(1, u(gen)));
      CHECK(m.atom_probability(4, f) == doctest::Approx(rho).epsilon(1e-15));
    }
  }

  TEST_CASE("mixed energy splits into discrete and continuous parts") {
    std::mt19937_64 gen(6);
    const auto rm = support::random_scalar_model(gen, 2);
    const auto m = support::to_library(rm);
    CHECK(m.mixed_energy(Field(m.graph())) == 0.0);
    for (int k = 0; k < 20; ++k) {
      const auto s = random_state(gen, 2);
      const auto f = to_field(m.graph(), s);
      CHECK(m.mixed_energy(f) == doctest::Approx(rm.energy(s)).epsilon(1e-13));
      CHECK(m.log_joint_unnormalized(f) == m.mixed_energy(f));
      double pots = 0.0;
      for (const auto& c : m.continuous().cliques()) pots += m.continuous().potential(c, f);
      CHECK(m.mixed_energy(f) == m.discrete_energy(f) + pots);
    }
    auto g = scalar_graph(2, {{0, 1}});
    DiscreteParams p(2);
    p.set_alpha(0, 0.2);
    p.set_beta(0, 1, -0.4);
    MixedStateModel flat(g, p, unit_boxes(g));
    Field both(g);
    both.set_real(0, RealVector::Constant(1, 0.1));
    both.set_real(1, RealVector::Constant(1, 0.3));
    CHECK(flat.mixed_energy(both) == flat.discrete_energy(both));
  }

  TEST_CASE("two-site Gaussian energy is the sum of its clique terms") {
    std::mt19937_64 gen(8);
    const auto rm = support::random_scalar_model(gen, 2);
    const auto m = support::to_library(rm);
    const double x0 = 0.8, x1 = -0.4;
    const double r0 = rm.ground[0], r1 = rm.ground[1];
    const double y0 = x0 - r0, y1 = x1 - r1;
    const Eigen::Vector2d lin = rm.L * (rm.mu - rm.ground);
    const double q0 = -0.5 * rm.L(0, 0) * y0 * y0 + y0 * lin[0];
    const double q1 = -0.5 * rm.L(1, 1) * y1 * y1 + y1 * lin[1];
    const double q01 = -rm.L(0, 1) * y0 * y1;
    const auto f = to_field(m.graph(), {x0, x1});
    const double expected = rm.alpha[0] + rm.alpha[1] + rm.beta.at({0, 1}) + q0 + q1 + q01;
    CHECK(m.mixed_energy(f) == doctest::Approx(expected).epsilon(1e-13));
  }

  TEST_CASE("joint energy differences match the reference joint") {
    std::mt19937_64 gen(10);
    const auto rm = support::random_scalar_model(gen, 2);
    const auto m = support::to_library(rm);
    const double log_z = std::log(rm.partition());
    for (int k = 0; k < 10; ++k) {
      const auto a = random_state(gen, 2), b = random_state(gen, 2);
      const double ref_diff = (rm.energy(a) - log_z) - (rm.energy(b) - log_z);
      CHECK(std::abs(m.log_joint_unnormalized(to_field(m.graph(), a)) -
                     m.log_joint_unnormalized(to_field(m.graph(), b)) - ref_diff) < 1e-6);
    }
  }

  TEST_CASE("conditionals agree with the reference joint") {
    std::mt19937_64 gen(12);
    for (int t = 0; t < 5; ++t) {
      const auto rm = support::random_scalar_model(gen, 3, t % 2 == 1);
      const auto m = support::to_library(rm);
      const auto s = random_state(gen, 3);
      const auto f = to_field(m.graph(), s);
      for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(m.atom_probability(i, f) - rm.conditional(i, std::nullopt, s)) < 1e-6);
        for (double v : {-1.0, 0.1, 1.7}) {
          const double expect = rm.conditional(i, v, s);
          const double got = m.conditional_ms_pdf(i, MixedValue::real(v), f);
          CHECK(std::abs(got - expect) / expect < 1e-5);
        }
      }
    }
  }

  TEST_CASE("conditionals normalize over the site measure") {
    std::mt19937_64 gen(14);
    for (int t = 0; t < 10; ++t) {
      const auto rm = support::random_scalar_model(gen, 3);
      const auto m = support::to_library(rm);
      const auto f = to_field(m.graph(), random_state(gen, 3));
      for (int i = 0; i < 3; ++i) {
        MixedMeasureSpec measure{{MixedValue::atom()}, Box::cube(1, -8, 8), {16, 20}};
        const double total = integrate_mixed([&](const MixedValue& v) { return m.conditional_ms_pdf(i, v, f); }, measure);
        CHECK(std::abs(total - 1.0) < 1e-8);
      }
    }
  }

  TEST_CASE("continuous conditionals are consistent with the potentials") {
    std::mt19937_64 gen(16);
    const auto rm = support::random_scalar_model(gen, 3);
    const auto m = support::to_library(rm);
    const auto& c = m.continuous();
    for (int k = 0; k < 10; ++k) {
      auto f = to_field(m.graph(), random_state(gen, 3, 0.0));
      for (int i = 0; i < 3; ++i) {
        const double lhs = c.log_conditional(i, f.coords(i), f) - c.log_conditional_at_ground(i, f);
        CHECK(lhs == doctest::Approx(c.local_energy(i, f)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("extracted mixed potentials vanish at ground and match the model's") {
    std::mt19937_64 gen(18);
    const auto rm = support::random_scalar_model(gen, 3, true);
    const auto m = support::to_library(rm);
    const auto& g = m.graph();
    std::vector<MixedValue> r;
    for (Index i = 0; i < 3; ++i) r.push_back(MixedValue::atom());
    const auto energy = [&](std::span<const MixedValue> x) {
      Field f(g);
      for (Index i = 0; i < 3; ++i)
        if (x[static_cast<std::size_t>(i)].is_real()) f.set(i, x[static_cast<std::size_t>(i)]);
      return m.log_joint_unnormalized(f);
    };
    const auto pots = decompose(energy, GroundVector(r));
    for (int k = 0; k < 10; ++k) {
      const auto s = random_state(gen, 3, 0.0);
      Configuration x;
      for (const auto& v : s) x.push_back(MixedValue::real(*v));
      const auto f = to_field(g, s);
      for (auto a : subsets_of(SiteSubset::full(3))) {
        if (a.empty()) continue;
        Clique c;
        for (auto i : a.members()) c.push_back(static_cast<Index>(i));
        CHECK(pots.evaluate(a, x) == doctest::Approx(m.mixed_potential(c, f)).epsilon(1e-10));
        for (auto i : a.members()) {
          auto y = x;
          y[i] = MixedValue::atom();
          CHECK(std::abs(pots.evaluate(a, y)) < 1e-10);
        }
      }
    }
  }

  TEST_CASE("factorized form") {
    std::mt19937_64 gen(20);
    SUBCASE("zero parameters") {
      auto g = scalar_graph(2, {{0, 1}});
      MixedStateModel m(g, DiscreteParams(2), unit_boxes(g));
      const std::vector<Box> boxes(2, Box::cube(1, -0.5, 0.5));
      const auto ff = factorized_form(Field(g), m, boxes, {1, 5});
      CHECK(std::abs(ff.log_z - (ff.log_zm - ff.log_zd - ff.log_za)) < 1e-12);
      CHECK(std::abs(ff.log_zm - std::log(4.0)) < 1e-12);
      CHECK(std::abs(ff.recombined() - (0.0 - ff.log_zm)) < 1e-12);
    }
    SUBCASE("one site") {
      auto rm = support::random_scalar_model(gen, 1);
      const auto m = support::to_library(rm);
      const double log_zm = std::log(rm.partition(nullptr, 4000));
      const std::vector<Box> boxes(1, Box::cube(1, -8, 8));
      for (const auto& s : {ref::ScalarModel::State{std::nullopt}, ref::ScalarModel::State{0.4}}) {
        const auto ff = factorized_form(to_field(m.graph(), s), m, boxes, {16, 20});
        CHECK(std::abs(ff.recombined() - (rm.energy(s) - log_zm)) < 1e-9);
      }
    }
    SUBCASE("two sites") {
      auto rm = support::random_scalar_model(gen, 2);
      const auto m = support::to_library(rm);
      const double log_zm = std::log(rm.partition());
      const std::vector<Box> boxes(2, Box::cube(1, -8, 8));
      for (int k = 0; k < 5; ++k) {
        const auto s = random_state(gen, 2);
        const auto ff = factorized_form(to_field(m.graph(), s), m, boxes, {1, 41});
        CHECK(std::abs(ff.recombined() - (rm.energy(s) - log_zm)) < 1e-6);
      }
    }
    SUBCASE("too many points") {
      auto rm = support::random_scalar_model(gen, 3);
      const auto m = support::to_library(rm);
      CHECK_THROWS_AS(factorized_form(Field(m.graph()), m, std::vector<Box>(3, Box::cube(1, -8, 8)), {10, 41}, 1e5),
                      NormalizationTooLarge);
    }
  }

  TEST_CASE("stable atom probabilities at extreme fields") {
    auto g = scalar_graph(1, {});
    for (double a : {-1e3, -50.0, 0.0, 50.0, 1e3}) {
      DiscreteParams p(1);
      p.set_alpha(0, a);
      MixedStateModel m(g, p, GaussianAutoModel::isotropic(g, {0, 1, 0}));
      const double rho = m.atom_probability(0, Field(g));
      CHECK(rho >= 0.0);
      CHECK(rho <= 1.0);
      CHECK(std::isfinite(m.log_atom_probability(0, Field(g))));
      CHECK(std::isfinite(m.log_off_probability(0, Field(g))));
    }
  }
}
