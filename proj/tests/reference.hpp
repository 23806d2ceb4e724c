#pragma once

// Brute-force reference computations for small scalar-site models. Nothing
// here calls into the library's energies, conditionals or quadrature: the
// energy is written out from the model definition and integrals use
// composite Simpson on a fine grid.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace ref {

inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals = 4000) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int k = 1; k < intervals; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double normal_pdf(double x, double mean, double var) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

/// Mixed-state model on N scalar sites with Gaussian continuous part
/// p^a(x) ∝ exp(-(x - mu)' L (x - mu) / 2). A site state is nullopt at ground.
struct ScalarModel {
  Eigen::VectorXd ground;
  Eigen::VectorXd alpha;
  std::map<std::pair<int, int>, double> beta;  // i < j
  std::map<std::vector<int>, double> chi;      // sorted triples
  Eigen::VectorXd mu;
  Eigen::MatrixXd L;
  double lo = -8.0, hi = 8.0;

  int size() const { return static_cast<int>(ground.size()); }

  using State = std::vector<std::optional<double>>;

  double energy(const State& s) const {
    const int n = size();
    Eigen::VectorXd x(n), d(n);
    for (int i = 0; i < n; ++i) {
      d[i] = s[i] ? 1.0 : 0.0;
      x[i] = s[i] ? *s[i] : ground[i];
    }
    double v = alpha.dot(d);
    for (const auto& [p, b] : beta) v += b * d[p.first] * d[p.second];
    for (const auto& [t, c] : chi) v += c * d[t[0]] * d[t[1]] * d[t[2]];
    const Eigen::VectorXd u = x - mu, w = ground - mu;
    v += -0.5 * u.dot(L * u) + 0.5 * w.dot(L * w);
    return v;
  }

  /// Conditional ms-pdf at site i (atom mass or density) by direct integration.
  double conditional(int i, std::optional<double> v, State rest) const {
    rest[i] = std::nullopt;
    const double atom = std::exp(energy(rest));
    const double cont = simpson(
        [&](double t) {
          State s = rest;
          s[i] = t;
          return std::exp(energy(s));
        },
        lo, hi);
    rest[i] = v;
    return std::exp(energy(rest)) / (atom + cont);
  }

  /// Sum of e^V over the mixed measure: atom patterns and Simpson integrals
  /// over the off-ground coordinates. `pattern_mass` receives one entry per
  /// pattern (bit i set = site i off ground).
  double partition(std::vector<double>* pattern_mass = nullptr, int intervals = 400) const {
    const int n = size();
    double total = 0.0;
    if (pattern_mass) pattern_mass->assign(std::size_t{1} << n, 0.0);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      State s(n);
      std::function<double(int)> rec = [&](int k) -> double {
        if (k == n) return std::exp(energy(s));
        if (!((mask >> k) & 1u)) {
          s[k] = std::nullopt;
          return rec(k + 1);
        }
        return simpson(
            [&](double t) {
              s[k] = t;
              return rec(k + 1);
            },
            lo, hi, intervals);
      };
      const double m = rec(0);
      if (pattern_mass) (*pattern_mass)[mask] = m;
      total += m;
    }
    return total;
  }
};

/// Inclusion-exclusion written against plain vectors, for cross-checking the
/// decomposition: f_A(x) = sum over B subset of A of (-1)^{|A|-|B|} f(g_B(x)).
inline double moebius(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& r,
                      unsigned a, const std::vector<double>& x) {
  double sum = 0.0;
  for (unsigned b = a;; b = (b - 1) & a) {
    std::vector<double> g = r;
    for (std::size_t i = 0; i < r.size(); ++i)
      if ((b >> i) & 1u) g[i] = x[i];
    const int parity = __builtin_popcount(a) - __builtin_popcount(b);
    sum += (parity % 2 ? -1.0 : 1.0) * f(g);
    if (b == 0) break;
  }
  return sum;
}

}  // namespace ref
