#include "msmrf/verify.hpp"

#include "msmrf/estimator.hpp"
#include "msmrf/instances.hpp"
#include "msmrf/mixed_measure.hpp"
#include "msmrf/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace msmrf {

VerifyLevel parse_level(const std::string& name) {
  if (name == "quick") return VerifyLevel::quick;
  if (name == "full") return VerifyLevel::full;
  throw std::invalid_argument("unknown level '" + name + "' (expected quick or full)");
}

std::string format_check(const CheckResult& c) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s %-40s residual=%.3e tol=%.1e", c.passed() ? "PASS" : "FAIL", c.name.c_str(),
                c.residual, c.tolerance);
  std::string s = buf;
  if (!c.detail.empty()) s += "  " + c.detail;
  return s;
}

namespace {

double worse(double a, double b) { return (std::isnan(b) || b > a) ? (std::isnan(b) ? INFINITY : b) : a; }

Field to_field(std::span<const MixedValue> x, const SiteGraph& g) {
  Field f(g);
  for (Index i = 0; i < g.size(); ++i) f.set(i, x[static_cast<std::size_t>(i)]);
  return f;
}

class Battery {
 public:
  explicit Battery(const VerifyOptions& o) : opt_(o), rng_(Rng::stream(o.seed, 0x5eed, 0)) {}

  void report(std::string name, double residual, double tol, std::string detail = {}) {
    CheckResult c{std::move(name), std::isnan(residual) ? INFINITY : residual, tol, std::move(detail)};
    if (opt_.on_check) opt_.on_check(c);
    out_.push_back(std::move(c));
  }

  bool full() const { return opt_.level == VerifyLevel::full; }
  int scale(int quick, int full_count) const { return full() ? full_count : quick; }
  Rng& rng() { return rng_; }
  const VerifyOptions& options() const { return opt_; }
  std::vector<CheckResult> take() { return std::move(out_); }

 private:
  VerifyOptions opt_;
  Rng rng_;
  std::vector<CheckResult> out_;
};

void measure_checks(Battery& b) {
  auto& rng = b.rng();
  double atom_err = 0.0, norm_err = 0.0, lin_err = 0.0;
  const Box dom = Box::cube(1, -8, 8);
  for (int t = 0; t < 10; ++t) {
    MixedDensitySpec s;
    s.rho = t == 0 ? 1.0 : (t == 1 ? 0.0 : rng.uniform());
    s.labels.intern("a");
    s.labels.intern("b");
    s.atoms = {MixedValue::real(uniform_in(rng, -1, 1)), MixedValue::label(0), MixedValue::label(1)};
    RealVector pi(3);
    for (Index k = 0; k < 3; ++k) pi[k] = 0.1 + rng.uniform();
    s.pi = pi / pi.sum();
    s.pi[2] = 1.0 - s.pi[0] - s.pi[1];
    s.domain = dom;
    s.continuous = ContinuousDensity::truncated_gaussian(RealVector::Constant(1, uniform_in(rng, -1, 1)),
                                                         RealVector::Constant(1, uniform_in(rng, 0.5, 2)), dom);
    s.validate();
    for (std::size_t l = 0; l < s.atoms.size(); ++l) {
      atom_err = worse(atom_err, std::abs(eval_ms_pdf(s.atoms[l], s) - s.rho * s.pi[static_cast<Index>(l)]));
    }
    norm_err = worse(norm_err, verify_normalization(s, measure_for(s, QuadratureSpec{4, 41})));
    MixedDensitySpec u = s;
    u.continuous = ContinuousDensity::uniform(dom);
    norm_err = worse(norm_err, verify_normalization(u, measure_for(u, QuadratureSpec{1, 41})));

    const auto m = measure_for(s, QuadratureSpec{1, 41});
    const double a = uniform_in(rng, -2, 2), c = uniform_in(rng, -2, 2);
    const auto f = [](const MixedValue& v) { return v.is_real() ? std::sin(v.as_real()[0]) : 0.5; };
    const auto g = [](const MixedValue& v) { return v.is_real() ? std::exp(-v.as_real()[0] * v.as_real()[0]) : 1.5; };
    const double lhs = integrate_mixed([&](const MixedValue& v) { return a * f(v) + c * g(v); }, m);
    lin_err = worse(lin_err, std::abs(lhs - a * integrate_mixed(f, m) - c * integrate_mixed(g, m)));
  }
  b.report("ms-pdf-atom-mass", atom_err, 0.0);
  b.report("ms-pdf-normalization", norm_err, 1e-9);
  b.report("mixed-integral-linearity", lin_err, 1e-12);
}

void decomposition_checks(Battery& b) {
  auto& rng = b.rng();
  const int functions = b.scale(40, 200), probes = b.scale(20, 100);
  double recon = 0, uniq = 0, vanish = 0, local = 0;
  for (int t = 0; t < functions; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t % 4);
    const auto rf = random_function(rng, n);
    const auto pots = decompose(rf.f, rf.ground);
    std::vector<Configuration> ps;
    for (int p = 0; p < probes; ++p) ps.push_back(random_configuration(rng, rf.ground, -2, 2, p % 5 == 0 ? 0.3 : 0.0));
    for (const auto& x : ps) {
      recon = worse(recon, std::abs(reconstruct(pots, x) - rf.f(x)));
      for (auto a : subsets_of(SiteSubset::full(n))) {
        for (auto i : a.members()) {
          const auto g = ground(x, a.without(i), rf.ground);
          vanish = worse(vanish, std::abs(pots.evaluate(a, g)));
        }
        // Perturb a coordinate outside a; the potential must not move at all.
        for (std::size_t j = 0; j < n; ++j) {
          if (a.contains(j)) continue;
          auto y = x;
          y[j] = MixedValue::real(uniform_in(rng, -2, 2));
          if (pots.evaluate(a, y) != pots.evaluate(a, x)) local = INFINITY;
        }
      }
    }
    uniq = worse(uniq, uniqueness_residual(rf.f, rf.ground, ps));
  }
  const std::string d = std::to_string(functions) + " functions x " + std::to_string(probes) + " probes";
  b.report("decomposition-reconstruction", recon, 1e-10, d);
  b.report("decomposition-uniqueness", uniq, 1e-10, d);
  b.report("decomposition-ground-vanishing", vanish, 1e-10, d);
  b.report("decomposition-locality", local, 0.0, d);
}

void symmetry_checks(Battery& b) {
  auto& rng = b.rng();
  const bool inject = b.options().inject_beta_asymmetry;
  double beta_err = 0, chi_err = 0;
  for (int t = 0; t < 5; ++t) {
    auto inst = random_instance(rng, 4, QuadratureSpec{1, 5}, true);
    const auto& m = inst.model;
    // Interaction field as a conditional specification; the hook breaks it on site 0.
    const auto h = [&](Index i, const Field& f) {
      double v = m.interaction_field(i, f);
      if (inject && i == 0 && !f.is_ground(1)) v += 0.25;
      return v;
    };
    const auto with_off = [&](std::initializer_list<Index> sites) {
      Field f(m.graph());
      for (auto s : sites) f.set_real(s, RealVector::Constant(1, 1.75));
      return f;
    };
    for (Index i = 0; i < 4; ++i)
      for (Index j = i + 1; j < 4; ++j) {
        const double bij = h(i, with_off({j})) - h(i, with_off({}));
        const double bji = h(j, with_off({i})) - h(j, with_off({}));
        beta_err = worse(beta_err, std::abs(bij - bji));
        if (m.params().beta(i, j) != m.params().beta(j, i)) beta_err = INFINITY;
        for (Index k = j + 1; k < 4; ++k) {
          const Index s[3] = {i, j, k};
          double c[3];
          for (int q = 0; q < 3; ++q) {
            const Index a = s[q], o1 = s[(q + 1) % 3], o2 = s[(q + 2) % 3];
            c[q] = h(a, with_off({o1, o2})) - h(a, with_off({o1})) - h(a, with_off({o2})) + h(a, with_off({}));
          }
          chi_err = worse(chi_err, std::max(std::abs(c[0] - c[1]), std::abs(c[0] - c[2])));
        }
      }
  }
  b.report("beta-symmetry", beta_err, 1e-12, inject ? "asymmetry injected on site 0" : "");
  b.report("chi-symmetry", chi_err, 1e-12);
}

void model_checks(Battery& b) {
  auto& rng = b.rng();
  double cond_err = 0, additivity = 0, extract_err = 0, vanish = 0, closed = 0;
  for (int t = 0; t < 10; ++t) {
    auto inst = random_instance(rng, 3, QuadratureSpec{1, 5}, true);
    const auto& m = inst.model;
    const auto& g = m.graph();
    for (int p = 0; p < 10; ++p) {
      const Field x = random_field(rng, g, 0.3, -2, 2);
      for (Index i = 0; i < g.size(); ++i) {
        const RealVector v = RealVector::Constant(1, uniform_in(rng, -2, 2));
        Field y = x;
        y.set_real(i, v);
        const double lhs = m.continuous().log_conditional(i, v, x) - m.continuous().log_conditional_at_ground(i, x);
        cond_err = worse(cond_err, std::abs(lhs - m.continuous().local_energy(i, y)));
      }
      double sum = m.discrete_energy(x);
      for (const auto& c : m.continuous().cliques()) sum += m.continuous().potential(c, x);
      additivity = worse(additivity, std::abs(m.mixed_energy(x) - sum));
    }
    GroundVector r(std::vector<MixedValue>(3, MixedValue::atom()));
    const auto pots = decompose([&](std::span<const MixedValue> x) { return m.log_joint_unnormalized(to_field(x, g)); }, r);
    for (int p = 0; p < 10; ++p) {
      const auto x = random_configuration(rng, r, -2, 2, 0.3);
      const Field f = to_field(x, g);
      for (auto a : subsets_of(SiteSubset::full(3))) {
        if (a.empty()) continue;
        Clique c;
        for (auto s : a.members()) c.push_back(static_cast<Index>(s));
        extract_err = worse(extract_err, std::abs(pots.evaluate(a, x) - m.mixed_potential(c, f)));
        for (auto i : a.members()) vanish = worse(vanish, std::abs(pots.evaluate(a, ground(x, a.without(i), r))));
      }
    }
  }
  {
    // h = 0 and p^a(r | .) = 1/sqrt(2 pi): rho = 0.3989423 / 1.3989423.
    SiteGraph g({1}, {RealVector::Zero(1)}, {});
    MixedStateModel m(g, DiscreteParams(1), GaussianAutoModel::isotropic(g, {0.0, 1.0, 0.0}));
    const double want = 1.0 / (1.0 + std::sqrt(2.0 * std::numbers::pi));
    closed = std::abs(m.atom_probability(0, Field(g)) - want);
  }
  b.report("continuous-conditional-consistency", cond_err, 1e-10);
  b.report("energy-additivity", additivity, 1e-12);
  b.report("mixed-potential-extraction", extract_err, 1e-10);
  b.report("mixed-potential-ground-vanishing", vanish, 1e-10);
  b.report("atom-probability-closed-form", closed, 1e-15);
}

void oracle_checks(Battery& b) {
  auto& rng = b.rng();
  const int threads = b.options().threads;
  const int models = b.scale(5, 20), probes = b.scale(10, 50);
  const QuadratureSpec q41{1, 41};
  double atom_err = 0, cont_err = 0, ratio_err = 0;
  for (int t = 0; t < models; ++t) {
    auto inst = random_instance(rng, 2, q41);
    const auto& m = inst.model;
    const auto& g = m.graph();
    GroundVector r(std::vector<MixedValue>(2, MixedValue::atom()));
    const auto pots = decompose([&](std::span<const MixedValue> x) { return m.log_joint_unnormalized(to_field(x, g)); }, r);
    for (int p = 0; p < probes; ++p) {
      const Field x = random_field(rng, g, 0.5, -2, 2);
      const Index i = p % 2;
      atom_err = worse(atom_err, std::abs(m.atom_probability(i, x) - exact_conditional(i, MixedValue::atom(), x, m, inst.space)));
      const auto v = MixedValue::real(uniform_in(rng, -2, 2));
      const double want = exact_conditional(i, v, x, m, inst.space);
      cont_err = worse(cont_err, std::abs(m.conditional_ms_pdf(i, v, x) - want) / want);
      const double ratio = std::log(want / exact_conditional(i, MixedValue::atom(), x, m, inst.space));
      Configuration cfg{x.value(0), x.value(1)};
      cfg[static_cast<std::size_t>(i)] = v;
      double sum = 0.0;
      for (auto a : subsets_of(SiteSubset::full(2)))
        if (a.contains(static_cast<std::size_t>(i))) sum += pots.evaluate(a, cfg);
      ratio_err = worse(ratio_err, std::abs(ratio - sum));
    }
  }
  const std::string d = std::to_string(models) + " two-site models, 41 nodes";
  b.report("atom-probability-vs-oracle", atom_err, 1e-6, d);
  b.report("continuous-branch-vs-oracle", cont_err, 1e-5, d + ", relative");
  b.report("oracle-conditional-potentials", ratio_err, 1e-6, d);

  double f1 = 0, f2 = 0, recomb = 0, ground_id = 0, mass = 0;
  for (int t = 0; t < b.scale(3, 10); ++t) {
    for (Index n : {1, 2}) {
      auto inst = random_instance(rng, n, q41);
      const auto& m = inst.model;
      const auto chk = check_factorization(m, inst.space, threads);
      (n == 1 ? f1 : f2) = worse(n == 1 ? f1 : f2, chk.residual());
      const Field x = random_field(rng, m.graph(), 0.5, -2, 2);
      const auto ff = factorized_form(x, m, inst.space.boxes(), q41);
      recomb = worse(recomb, std::abs(ff.recombined() - (m.log_joint_unnormalized(x) - chk.log_zm)));
      const auto pat = exact_pattern_probabilities(m, inst.space, threads);
      ground_id = worse(ground_id, std::abs(pat[0] * std::exp(chk.log_zm) - 1.0));
      double total = 0;
      for (double v : pat) total += v;
      mass = worse(mass, std::abs(total - 1.0));
      for (Index i = 0; i < n; ++i) {
        double atom = 0;
        for (std::size_t p = 0; p < pat.size(); ++p)
          if (!((p >> i) & 1u)) atom += pat[p];
        mass = worse(mass, std::abs(atom - exact_marginal_atom_prob(i, m, inst.space, threads)));
      }
    }
  }
  b.report("factorization-one-site", f1, 1e-9);
  b.report("factorization-two-site", f2, 1e-6);
  b.report("factorized-form-vs-oracle", recomb, 1e-6);
  b.report("partition-ground-identity", ground_id, 1e-8);
  b.report("marginal-mass", mass, 1e-8);

  double norm = 0;
  const int hoods = b.scale(100, 100);
  for (int t = 0; t < hoods; ++t) {
    auto inst = random_instance(rng, 3, QuadratureSpec{1, 3}, t % 2 == 1);
    const auto& m = inst.model;
    const Field x = random_field(rng, m.graph(), 0.4, -2, 2);
    const Index i = t % 3;
    MixedMeasureSpec meas{{MixedValue::real(RealVector(m.graph().ground(i)))}, Box::cube(1, -10, 10), QuadratureSpec{6, 41}};
    const double total = integrate_mixed(
        [&](const MixedValue& v) { return m.conditional_ms_pdf(i, v, x); }, meas);
    norm = worse(norm, std::abs(total - 1.0));
  }
  b.report("conditional-normalization", norm, 1e-8, std::to_string(hoods) + " neighbourhoods");

  if (b.full()) {
    double res = 0;
    for (int t = 0; t < 3; ++t) {
      Rng local = Rng::stream(b.options().seed, 0xabc, static_cast<std::uint64_t>(t));
      auto a = random_instance(local, 2, q41);
      Rng again = Rng::stream(b.options().seed, 0xabc, static_cast<std::uint64_t>(t));
      auto c = random_instance(again, 2, QuadratureSpec{1, 81});
      const double za = exact_log_partition(a.model, a.space, threads);
      const double zc = exact_log_partition(c.model, c.space, threads);
      res = worse(res, std::abs(std::expm1(za - zc)));
    }
    b.report("partition-resolution-41-vs-81", res, 1e-7, "relative");
  }
}

MixedStateModel isotropic_model(const SiteGraph& g, const RealVector& alpha, const RealVector& beta,
                                const IsotropicGaussian& iso) {
  DiscreteParams p(g.size());
  p.alphas() = alpha;
  Index k = 0;
  for (const auto& c : g.cliques())
    if (c.size() == 2) p.set_coefficient(c, beta[k++]);
  return MixedStateModel(g, std::move(p), GaussianAutoModel::isotropic(g, iso, GaussianOptions{false}));
}

void gradient_checks(Battery& b) {
  auto& rng = b.rng();
  const auto g = SiteGraph::lattice(3, 3, 1, RealVector::Zero(1));
  Index pairs = 0;
  for (const auto& c : g.cliques()) pairs += c.size() == 2;
  double err = 0;
  const int points = b.scale(10, 50);
  for (int t = 0; t < points; ++t) {
    RealVector alpha(g.size()), beta(pairs);
    for (Index i = 0; i < alpha.size(); ++i) alpha[i] = uniform_in(rng, -1, 1);
    for (Index i = 0; i < beta.size(); ++i) beta[i] = uniform_in(rng, -1, 1);
    IsotropicGaussian iso{uniform_in(rng, -1, 1), uniform_in(rng, 1, 2), uniform_in(rng, -0.2, 0.2)};
    const Field x = random_field(rng, g, 0.4, -2, 2);
    const RealVector grad = pll_gradient(isotropic_model(g, alpha, beta, iso), x);
    const double h = 1e-5;
    Index k = 0;
    const auto fd = [&](auto&& perturbed) {
      const double up = pseudo_log_likelihood(perturbed(h), x), down = pseudo_log_likelihood(perturbed(-h), x);
      err = worse(err, std::abs((up - down) / (2 * h) - grad[k++]));
    };
    for (Index i = 0; i < alpha.size(); ++i)
      fd([&](double d) { RealVector a = alpha; a[i] += d; return isotropic_model(g, a, beta, iso); });
    for (Index i = 0; i < beta.size(); ++i)
      fd([&](double d) { RealVector bb = beta; bb[i] += d; return isotropic_model(g, alpha, bb, iso); });
    fd([&](double d) { auto p = iso; p.mean += d; return isotropic_model(g, alpha, beta, p); });
    fd([&](double d) { auto p = iso; p.precision += d; return isotropic_model(g, alpha, beta, p); });
    fd([&](double d) { auto p = iso; p.coupling += d; return isotropic_model(g, alpha, beta, p); });
  }
  b.report("pll-gradient-vs-finite-differences", err, 1e-6, std::to_string(points) + " points");
}

void io_checks(Battery& b) {
  auto& rng = b.rng();
  const auto g = SiteGraph::lattice(4, 5, 2, RealVector::Zero(2));
  double bad = 0;
  for (int t = 0; t < 20; ++t) {
    Field f(g);
    for (Index i = 0; i < g.size(); ++i) {
      if (rng.uniform() < 0.3) continue;
      RealVector v(2);
      v << rng.normal() * std::pow(10.0, uniform_in(rng, -300, 300)), rng.normal();
      f.set_real(i, v);
    }
    if (!(parse_field(format_field(f, 4, 5), g) == f)) bad += 1;
  }
  b.report("field-roundtrip", bad, 0.0, "20 random fields, bit-exact");
}

void sampler_checks(Battery& b) {
  if (!b.full()) return;
  SiteGraph g({1, 1}, {RealVector::Zero(1), RealVector::Zero(1)}, {{0, 1}});
  DiscreteParams p(2);
  p.set_alpha(0, 0.3);
  p.set_alpha(1, -0.4);
  p.set_beta(0, 1, 0.5);
  auto cont = std::make_shared<GaussianAutoModel>(
      g, RealVector::Constant(2, 0.2),
      std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Constant(1, 1, 1.5), Eigen::MatrixXd::Constant(1, 1, 1.2)},
      std::map<Clique, Eigen::MatrixXd>{{{0, 1}, Eigen::MatrixXd::Constant(1, 1, -0.3)}});
  MixedStateModel m(g, p, cont);
  DiscretizedSpace space(g, Box::cube(1, -8, 8), QuadratureSpec{1, 41});
  const double want = exact_marginal_atom_prob(0, m, space);
  SamplerConfig cfg;
  cfg.seed = b.options().seed;
  cfg.burn_in = 1000;
  cfg.sweeps = 1000 + 200000;
  cfg.thinning = 1;
  std::int64_t hits = 0, n = 0;
  run_chain(Field(g), m, cfg, [&](std::int64_t, const Field& f) {
    hits += f.is_ground(0);
    ++n;
  });
  const double freq = static_cast<double>(hits) / static_cast<double>(n);
  const double sigma = std::sqrt(want * (1 - want) / static_cast<double>(n));
  std::ostringstream d;
  d << "empirical " << freq << " vs exact " << want << " over " << n << " sweeps";
  b.report("sampler-vs-oracle-atom-marginal", std::abs(freq - want) / sigma, 3.0, d.str() + " (residual in sigmas)");
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  Battery b(options);
  measure_checks(b);
  decomposition_checks(b);
  symmetry_checks(b);
  model_checks(b);
  oracle_checks(b);
  gradient_checks(b);
  io_checks(b);
  sampler_checks(b);
  return b.take();
}

}  // namespace msmrf
