#include "msmrf/discrete_params.hpp"

#include <stdexcept>

namespace msmrf {

namespace {

Clique sorted_interaction(Clique c, Index sites) {
  if (c.size() < 2) throw std::invalid_argument("interaction coefficients need at least two sites");
  return canonical_clique(std::move(c), sites);
}

}  // namespace

double DiscreteParams::coefficient(Clique c) const {
  auto it = terms_.find(sorted_interaction(std::move(c), size()));
  return it == terms_.end() ? 0.0 : it->second;
}

void DiscreteParams::set_coefficient(Clique c, double v) {
  terms_[sorted_interaction(std::move(c), size())] = v;
}

double discrete_energy(const Field& field, const DiscreteParams& params) {
  if (field.size() != params.size()) throw std::invalid_argument("parameters and field differ in site count");
  double v = 0.0;
  for (Index i = 0; i < field.size(); ++i) v += params.alpha(i) * field.off_ground(i);
  for (const auto& [c, coef] : params.interactions()) {
    double prod = coef;
    for (auto j : c) prod *= field.off_ground(j);
    v += prod;
  }
  return v;
}

double interaction_field(Index i, const Field& field, const DiscreteParams& params) {
  double h = params.alpha(i);
  for (const auto& [c, coef] : params.interactions()) {
    bool member = false;
    double prod = coef;
    for (auto j : c) {
      if (j == i) member = true;
      else prod *= field.off_ground(j);
    }
    if (member) h += prod;
  }
  return h;
}

}  // namespace msmrf
