#include "msmrf/model.hpp"

#include "msmrf/logsumexp.hpp"

#include <cmath>
#include <limits>

namespace msmrf {

MixedStateModel::MixedStateModel(SiteGraph graph, DiscreteParams params,
                                 std::shared_ptr<const ContinuousModel> continuous)
    : graph_(std::move(graph)), params_(std::move(params)), continuous_(std::move(continuous)) {
  if (!continuous_) throw std::invalid_argument("a continuous model is required");
  if (params_.size() != graph_.size()) throw std::invalid_argument("discrete parameters and graph differ in site count");
  if (!all_finite(params_.alphas())) throw std::invalid_argument("alpha must be finite");
  incident_.assign(static_cast<std::size_t>(graph_.size()), {});
  for (const auto& [c, coef] : params_.interactions()) {
    if (!graph_.has_clique(c)) {
      std::string s;
      for (auto i : c) s += (s.empty() ? "" : ",") + std::to_string(i);
      throw std::invalid_argument("interaction {" + s + "} is not a clique of the graph");
    }
    if (!std::isfinite(coef)) throw std::invalid_argument("interaction coefficients must be finite");
    for (auto i : c) {
      Term t{coef, {}};
      for (auto j : c)
        if (j != i) t.others.push_back(j);
      incident_[static_cast<std::size_t>(i)].push_back(std::move(t));
    }
  }
  for (const auto& c : continuous_->cliques()) {
    if (c.size() > 1 && !graph_.has_clique(c)) throw std::invalid_argument("continuous potential on a non-clique");
  }
}

double MixedStateModel::discrete_energy(const Field& field) const { return msmrf::discrete_energy(field, params_); }

double MixedStateModel::interaction_field(Index i, const Field& field) const {
  double h = params_.alpha(i);
  for (const auto& t : incident_[static_cast<std::size_t>(i)]) {
    double prod = t.coefficient;
    for (auto j : t.others) prod *= field.off_ground(j);
    h += prod;
  }
  return h;
}

double MixedStateModel::atom_logit(Index i, const Field& field) const {
  const double c = continuous_->log_conditional_at_ground(i, field);
  if (std::isnan(c) || c == -std::numeric_limits<double>::infinity()) {
    throw PositivityError(i, "continuous conditional density vanishes at the ground value of site " + std::to_string(i));
  }
  return interaction_field(i, field) - c;
}

double MixedStateModel::atom_probability(Index i, const Field& field) const {
  const double s = atom_logit(i, field);
  if (s > 0) {
    const double e = std::exp(-s);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(s));
}

double MixedStateModel::log_conditional_ms_pdf(Index i, const MixedValue& v, const Field& field) const {
  if (v.is_label()) throw std::invalid_argument("labels are not states of a real mixed-state field");
  if (v.is_atom() || bit_equal(v.as_real(), field.ground_coords(i))) return log_atom_probability(i, field);
  return log_off_probability(i, field) + continuous_->log_conditional(i, v.as_real(), field);
}

double MixedStateModel::conditional_ms_pdf(Index i, const MixedValue& v, const Field& field) const {
  if (v.is_label()) throw std::invalid_argument("labels are not states of a real mixed-state field");
  if (v.is_atom() || bit_equal(v.as_real(), field.ground_coords(i))) return atom_probability(i, field);
  return (1.0 - atom_probability(i, field)) * std::exp(continuous_->log_conditional(i, v.as_real(), field));
}

double MixedStateModel::mixed_potential(const Clique& a, const Field& field) const {
  double d = a.size() == 1 ? params_.alpha(a[0]) : params_.coefficient(a);
  for (auto i : a) d *= field.off_ground(i);
  return d + continuous_->potential(a, field);
}

FactorizedForm factorized_form(const Field& field, const MixedStateModel& model, const std::vector<Box>& boxes,
                               const QuadratureSpec& quadrature, double max_points) {
  const Index n = model.size();
  if (static_cast<Index>(boxes.size()) != n) throw std::invalid_argument("one box per site is required");
  if (n > 20) throw NormalizationTooLarge("exact normalization is limited to small models; use the oracle limits");
  std::vector<TensorRule> rules;
  double points = 1.0;
  for (Index i = 0; i < n; ++i) {
    if (boxes[static_cast<std::size_t>(i)].dim() != model.graph().dim(i)) throw std::invalid_argument("box dimension mismatch");
    rules.push_back(tensor_rule(boxes[static_cast<std::size_t>(i)], quadrature));
    displace_nodes(rules.back(), model.graph().ground(i));
    points *= 1.0 + static_cast<double>(rules.back().size());
  }
  if (points > max_points) {
    throw NormalizationTooLarge("exact normalization needs " + std::to_string(points) + " states, above the limit of " +
                                std::to_string(max_points) + "; reduce sites or nodes per oracle limits");
  }

  LogSumExp zm, zd, za;
  Field x(model.graph());
  const std::uint64_t patterns = std::uint64_t{1} << n;
  for (std::uint64_t p = 0; p < patterns; ++p) {
    std::vector<Index> off;
    for (Index i = 0; i < n; ++i) {
      x.set_ground(i);
      if ((p >> i) & 1u) off.push_back(i);
    }
    // Lebesgue volume of the off-ground block, as the rules see it.
    double log_vol = 0.0;
    for (auto i : off) log_vol += std::log(rules[static_cast<std::size_t>(i)].weights.sum());
    // Mark the pattern with the first node of every off-ground site so delta* is right.
    for (auto i : off) x.set_real(i, rules[static_cast<std::size_t>(i)].nodes.col(0));
    const double vd = model.discrete_energy(x);
    zd.add(vd + log_vol);

    LogSumExp ia;
    std::vector<Index> digit(off.size(), 0);
    while (true) {
      double log_w = 0.0;
      for (std::size_t k = 0; k < off.size(); ++k) {
        const auto& r = rules[static_cast<std::size_t>(off[k])];
        x.set_real(off[k], r.nodes.col(digit[k]));
        log_w += std::log(r.weights[digit[k]]);
      }
      ia.add(log_w + model.continuous_energy(x));
      bool carry = true;
      for (std::size_t k = off.size(); carry && k-- > 0;) {
        if (++digit[k] < rules[static_cast<std::size_t>(off[k])].size()) carry = false;
        else digit[k] = 0;
      }
      if (carry) break;
    }
    za.add(ia.value());
    zm.add(vd + ia.value());
  }

  FactorizedForm out;
  out.log_zm = zm.value();
  out.log_zd = zd.value();
  out.log_za = za.value();
  out.log_z = out.log_zm - out.log_zd - out.log_za;
  out.log_pd = model.discrete_energy(field) - out.log_zd;
  out.log_pa = model.continuous_energy(field) - out.log_za;
  return out;
}

}  // namespace msmrf
