#include "msmrf/quadrature.hpp"

#include <cstring>
#include <limits>

namespace msmrf {

Box::Box(Eigen::VectorXd lower, Eigen::VectorXd upper) : lo(std::move(lower)), hi(std::move(upper)) {
  if (lo.size() != hi.size()) throw std::invalid_argument("box bounds differ in dimension");
  for (Eigen::Index k = 0; k < lo.size(); ++k) {
    if (!std::isfinite(lo[k]) || !std::isfinite(hi[k]) || !(hi[k] > lo[k])) {
      throw std::invalid_argument("box bounds must be finite with lo < hi");
    }
  }
}

Box Box::cube(Eigen::Index dim, double lo, double hi) {
  return Box(Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi));
}

double Box::volume() const { return (hi - lo).prod(); }

bool Box::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != lo.size()) return false;
  return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

TensorRule tensor_rule(const Box& box, const QuadratureSpec& spec) {
  const Eigen::Index dim = box.dim();
  std::vector<Rule1D<double>> axes;
  axes.reserve(static_cast<std::size_t>(dim));
  Eigen::Index count = 1;
  for (Eigen::Index d = 0; d < dim; ++d) {
    axes.push_back(composite_gauss_legendre(box.lo[d], box.hi[d], spec.panels, spec.order));
    if (count > std::numeric_limits<Eigen::Index>::max() / axes.back().size()) {
      throw std::length_error("tensor quadrature too large");
    }
    count *= axes.back().size();
  }
  TensorRule rule;
  rule.nodes.resize(dim, count);
  rule.weights.resize(count);
  // Row-major enumeration: the last dimension varies fastest.
  std::vector<Eigen::Index> digit(static_cast<std::size_t>(dim), 0);
  for (Eigen::Index c = 0; c < count; ++c) {
    double w = 1.0;
    for (Eigen::Index d = 0; d < dim; ++d) {
      const auto& ax = axes[static_cast<std::size_t>(d)];
      rule.nodes(d, c) = ax.nodes[digit[d]];
      w *= ax.weights[digit[d]];
    }
    rule.weights[c] = w;
    for (Eigen::Index d = dim - 1; d >= 0; --d) {
      if (++digit[d] < axes[static_cast<std::size_t>(d)].size()) break;
      digit[d] = 0;
    }
  }
  return rule;
}

void displace_nodes(TensorRule& rule, const Eigen::Ref<const Eigen::VectorXd>& point) {
  if (point.size() != rule.dim()) throw std::invalid_argument("point dimension differs from the rule");
  const Eigen::VectorXd p = point;
  for (Eigen::Index c = 0; c < rule.size(); ++c) {
    const Eigen::VectorXd x = rule.nodes.col(c);
    if (std::memcmp(x.data(), p.data(), sizeof(double) * static_cast<std::size_t>(p.size())) == 0) {
      rule.nodes(0, c) = std::nextafter(x[0], std::numeric_limits<double>::infinity());
    }
  }
}

}  // namespace msmrf
