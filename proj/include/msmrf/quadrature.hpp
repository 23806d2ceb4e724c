#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <utility>
#include <numbers>
#include <stdexcept>

namespace msmrf {

/// One-dimensional quadrature rule: nodes and positive weights.
template <typename Scalar>
struct Rule1D {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;

  Eigen::Index size() const { return nodes.size(); }

  template <typename F>
  Scalar integrate(F&& f) const {
    Scalar sum(0);
    for (Eigen::Index k = 0; k < nodes.size(); ++k) sum += weights[k] * f(nodes[k]);
    return sum;
  }
};

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence. Nodes are returned in ascending order and the
/// rule is exactly symmetric.
template <typename Scalar = double>
Rule1D<Scalar> gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("Gauss-Legendre order must be >= 1");
  Rule1D<Scalar> rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  // P_n(x) and P_n'(x) by the three-term recurrence.
  const auto legendre = [order](Scalar x) {
    Scalar prev(1), cur = x;
    for (int k = 2; k <= order; ++k) {
      const Scalar next = ((2 * k - 1) * x * cur - (k - 1) * prev) / Scalar(k);
      prev = cur;
      cur = next;
    }
    const Scalar deriv = order == 1 ? Scalar(1) : order * (x * cur - prev) / (x * x - Scalar(1));
    return std::pair<Scalar, Scalar>{cur, deriv};
  };
  const int half = (order + 1) / 2;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess for the i-th largest root.
    Scalar x = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(order) + Scalar(0.5)));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const Scalar dx = p / dp;
      x -= dx;
      if (std::abs(dx) <= std::numeric_limits<Scalar>::epsilon() * 4) break;
    }
    if (order % 2 == 1 && i == half - 1) x = Scalar(0);
    const Scalar dp = legendre(x).second;
    const Scalar w = Scalar(2) / ((Scalar(1) - x * x) * dp * dp);
    rule.nodes[order - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[order - 1 - i] = w;
    rule.weights[i] = w;
  }
  return rule;
}

/// Composite Gauss-Legendre rule over [lo, hi] with `panels` equal panels
/// of `order` points each.
template <typename Scalar = double>
Rule1D<Scalar> composite_gauss_legendre(Scalar lo, Scalar hi, int panels, int order) {
  if (!(hi > lo)) throw std::invalid_argument("quadrature interval must satisfy lo < hi");
  if (panels < 1) throw std::invalid_argument("panel count must be >= 1");
  const auto base = gauss_legendre<Scalar>(order);
  Rule1D<Scalar> rule;
  rule.nodes.resize(Eigen::Index(panels) * order);
  rule.weights.resize(Eigen::Index(panels) * order);
  const Scalar width = (hi - lo) / Scalar(panels);
  for (int p = 0; p < panels; ++p) {
    const Scalar a = lo + width * Scalar(p);
    const Scalar mid = a + width / Scalar(2);
    for (int k = 0; k < order; ++k) {
      rule.nodes[Eigen::Index(p) * order + k] = mid + width / Scalar(2) * base.nodes[k];
      rule.weights[Eigen::Index(p) * order + k] = width / Scalar(2) * base.weights[k];
    }
  }
  return rule;
}

/// Axis-aligned box used to truncate R^n for deterministic integration.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Box() = default;
  Box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static Box cube(Eigen::Index dim, double lo, double hi);

  Eigen::Index dim() const { return lo.size(); }
  double volume() const;
  Eigen::VectorXd center() const { return (lo + hi) / 2.0; }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Node count descriptor per dimension: composite GL with `panels` x `order`.
struct QuadratureSpec {
  int panels = 1;
  int order = 41;

  int nodes_per_dim() const { return panels * order; }
};

/// Tensor-product rule over a box; nodes are stored column-wise.
struct TensorRule {
  Eigen::MatrixXd nodes;    // dim x count
  Eigen::VectorXd weights;  // count

  Eigen::Index size() const { return weights.size(); }
  Eigen::Index dim() const { return nodes.rows(); }
};

TensorRule tensor_rule(const Box& box, const QuadratureSpec& spec);

/// Moves any node that equals `point` bit-for-bit to the next representable
/// value in its first coordinate, so a rule never lands on an atom.
void displace_nodes(TensorRule& rule, const Eigen::Ref<const Eigen::VectorXd>& point);

}  // namespace msmrf
