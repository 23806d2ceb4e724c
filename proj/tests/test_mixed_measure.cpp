#include "reference.hpp"

#include "msmrf/mixed_measure.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace msmrf;

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

MixedDensitySpec single_atom(double rho) {
  MixedDensitySpec s;
  s.rho = rho;
  s.atoms = {MixedValue::real(0.0)};
  s.pi = RealVector::Ones(1);
  s.continuous = ContinuousDensity::gaussian(RealVector::Zero(1), RealVector::Ones(1));
  s.domain = Box::cube(1, -8, 8);
  return s;
}

const QuadratureSpec kFine{16, 20};

}  // namespace

TEST_SUITE("mixed_measure") {
  TEST_CASE("ms-pdf at an atom is rho times its weight") {
    auto s = single_atom(0.3);
    CHECK(eval_ms_pdf(MixedValue::real(0.0), s) == 0.3);
  }

  TEST_CASE("ms-pdf off the atoms is the scaled continuous density") {
    auto s = single_atom(0.0);
    s.atoms.clear();
    s.pi.resize(0);
    CHECK(eval_ms_pdf(MixedValue::real(0.0), s) == doctest::Approx(0.3989423).epsilon(1e-7));
    CHECK(eval_ms_pdf(MixedValue::real(0.0), s) == doctest::Approx(kInvSqrt2Pi).epsilon(1e-15));
    auto t = single_atom(0.25);
    CHECK(eval_ms_pdf(MixedValue::real(1.0), t) == doctest::Approx(0.75 * ref::normal_pdf(1.0, 0, 1)).epsilon(1e-14));
  }

  TEST_CASE("label atoms use their declaration index") {
    MixedDensitySpec s;
    s.labels = LabelSet({"a", "b"});
    s.rho = 0.5;
    s.atoms = {MixedValue::label(0), MixedValue::label(1)};
    s.pi = RealVector(2);
    s.pi << 0.25, 0.75;
    s.continuous = ContinuousDensity::gaussian(RealVector::Zero(1), RealVector::Ones(1));
    s.domain = Box::cube(1, -8, 8);
    CHECK(eval_ms_pdf(MixedValue::label(1), s) == 0.375);
    CHECK_THROWS(eval_ms_pdf(MixedValue::real(RealVector::Zero(2)), s));
  }

  TEST_CASE("integrating one over the mixed measure counts the atom") {
    MixedMeasureSpec m{{MixedValue::real(0.0)}, Box::cube(1, -1, 1), {1, 41}};
    CHECK(integrate_mixed([](const MixedValue&) { return 1.0; }, m) == doctest::Approx(3.0).epsilon(1e-14));
    const auto indicator = [](const MixedValue& v) { return v == MixedValue::real(0.0) ? 1.0 : 0.0; };
    CHECK(integrate_mixed(indicator, m) == 1.0);
  }

  TEST_CASE("normal pdf plus an atom integrates to 1 + 1/sqrt(2 pi)") {
    const auto f = [](const MixedValue& v) { return ref::normal_pdf(v.as_real()[0], 0, 1); };
    MixedMeasureSpec coarse{{MixedValue::real(0.0)}, Box::cube(1, -8, 8), {8, 20}};
    MixedMeasureSpec fine{{MixedValue::real(0.0)}, Box::cube(1, -8, 8), {16, 20}};
    const double a = integrate_mixed(f, coarse), b = integrate_mixed(f, fine);
    CHECK(std::abs(a - b) < 1e-9);
    CHECK(b == doctest::Approx(1.0 + kInvSqrt2Pi).epsilon(1e-12));
    CHECK(b == doctest::Approx(1.3989423).epsilon(1e-7));
  }

  TEST_CASE("normalization residuals") {
    auto pure = single_atom(1.0);
    CHECK(verify_normalization(pure, measure_for(pure, kFine)) == 0.0);

    MixedDensitySpec trunc;
    trunc.domain = Box::cube(1, -1, 2);
    trunc.continuous = ContinuousDensity::truncated_gaussian(RealVector::Zero(1), RealVector::Ones(1), trunc.domain);
    CHECK(verify_normalization(trunc, measure_for(trunc, kFine)) < 1e-9);

    auto mix = single_atom(0.4);
    CHECK(verify_normalization(mix, measure_for(mix, kFine)) < 1e-9);

    MixedDensitySpec uni;
    uni.rho = 0.2;
    uni.atoms = {MixedValue::atom()};
    uni.pi = RealVector::Ones(1);
    uni.domain = Box::cube(2, -1, 3);
    uni.continuous = ContinuousDensity::uniform(uni.domain);
    CHECK(verify_normalization(uni, measure_for(uni, {2, 10})) < 1e-12);
  }

  TEST_CASE("atoms never receive continuous density") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 50; ++k) {
      auto s = single_atom(u(gen));
      s.atoms = {MixedValue::real(u(gen)), MixedValue::real(-u(gen))};
      const double p = u(gen);
      s.pi = RealVector(2);
      s.pi << p, 1 - p;
      CHECK(eval_ms_pdf(s.atoms[0], s) == s.rho * p);
      CHECK(eval_ms_pdf(s.atoms[1], s) == s.rho * (1 - p));
    }
  }

  TEST_CASE("integration is linear") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-2, 2);
    MixedMeasureSpec m{{MixedValue::real(0.5), MixedValue::atom()}, Box::cube(1, -3, 3), {4, 15}};
    for (int k = 0; k < 50; ++k) {
      const double c1 = u(gen), c2 = u(gen), c3 = u(gen), a = u(gen), b = u(gen);
      const auto val = [](const MixedValue& v) { return v.is_real() ? v.as_real()[0] : 0.7; };
      const auto f = [&](const MixedValue& v) { return std::sin(c1 * val(v)) + c2; };
      const auto g = [&](const MixedValue& v) { return std::exp(-c3 * c3 * val(v) * val(v)); };
      const double lhs = integrate_mixed([&](const MixedValue& v) { return a * f(v) + b * g(v); }, m);
      const double rhs = a * integrate_mixed(f, m) + b * integrate_mixed(g, m);
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  }

  TEST_CASE("doubling the node count leaves smooth integrals unchanged") {
    const auto f = [](const MixedValue& v) {
      if (!v.is_real()) return 1.0;
      const auto& x = v.as_real();
      return std::exp(-0.5 * x.squaredNorm()) * (1 + std::sin(x[0]) * std::cos(x[1]));
    };
    MixedMeasureSpec a{{MixedValue::atom()}, Box::cube(2, -8, 8), {4, 20}};
    MixedMeasureSpec b{{MixedValue::atom()}, Box::cube(2, -8, 8), {8, 20}};
    CHECK(std::abs(integrate_mixed(f, a) - integrate_mixed(f, b)) < 1e-8);
  }

  TEST_CASE("integration is bit-reproducible") {
    const auto f = [](const MixedValue& v) { return v.is_real() ? std::cos(v.as_real()[0]) : 2.0; };
    MixedMeasureSpec m{{MixedValue::atom()}, Box::cube(1, -8, 8), {5, 13}};
    CHECK(integrate_mixed(f, m) == integrate_mixed(f, m));
  }

  TEST_CASE("non-finite integrands are reported with their point") {
    MixedMeasureSpec m{{MixedValue::real(0.0)}, Box::cube(1, -1, 1), {1, 5}};
    const auto f = [](const MixedValue& v) { return v.as_real()[0] > 0.5 ? NAN : 1.0; };
    try {
      integrate_mixed(f, m);
      FAIL("expected an integration error");
    } catch (const IntegrationError& e) {
      CHECK(e.point().is_real());
      CHECK(e.point().as_real()[0] > 0.5);
    }
  }

  TEST_CASE("invalid specs are rejected") {
    auto s = single_atom(0.3);
    s.pi[0] = 0.9;
    CHECK_THROWS(s.validate());
    auto d = single_atom(1.2);
    CHECK_THROWS(d.validate());
    MixedMeasureSpec dup{{MixedValue::real(0.0), MixedValue::real(0.0)}, Box::cube(1, -1, 1), {1, 5}};
    CHECK_THROWS(dup.validate());
  }

  TEST_CASE("density documents round-trip") {
    auto s = single_atom(0.4);
    const auto back = density_from_json(density_to_json(s));
    CHECK(back.rho == s.rho);
    CHECK(eval_ms_pdf(MixedValue::real(0.3), back) == eval_ms_pdf(MixedValue::real(0.3), s));
  }
}
