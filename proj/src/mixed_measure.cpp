#include "msmrf/mixed_measure.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace msmrf {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

ContinuousDensity ContinuousDensity::gaussian(RealVector mean, RealVector sd) {
  if (mean.size() != sd.size() || mean.size() == 0) {
    throw std::invalid_argument("gaussian mean/sd dimension mismatch");
  }
  if (!all_finite(mean) || !(sd.array() > 0.0).all() || !all_finite(sd)) {
    throw std::invalid_argument("gaussian requires finite mean and sd > 0");
  }
  ContinuousDensity d;
  d.family_ = Family::gaussian;
  d.dim_ = mean.size();
  d.mean_ = std::move(mean);
  d.sd_ = std::move(sd);
  d.log_norm_ = -double(d.dim_) * kLogSqrt2Pi - d.sd_.array().log().sum();
  return d;
}

ContinuousDensity ContinuousDensity::truncated_gaussian(RealVector mean, RealVector sd, const Box& box) {
  auto d = gaussian(std::move(mean), std::move(sd));
  if (box.dim() != d.dim_) throw std::invalid_argument("truncation box dimension mismatch");
  double log_mass = 0.0;
  for (Index k = 0; k < d.dim_; ++k) {
    const double mass =
        normal_cdf((box.hi[k] - d.mean_[k]) / d.sd_[k]) - normal_cdf((box.lo[k] - d.mean_[k]) / d.sd_[k]);
    if (!(mass > 0.0)) throw std::invalid_argument("truncation box carries no gaussian mass");
    log_mass += std::log(mass);
  }
  d.truncated_ = true;
  d.support_ = box;
  d.log_norm_ -= log_mass;
  return d;
}

ContinuousDensity ContinuousDensity::uniform(const Box& box) {
  ContinuousDensity d;
  d.family_ = Family::uniform;
  d.dim_ = box.dim();
  d.support_ = box;
  d.truncated_ = true;
  d.log_norm_ = -std::log(box.volume());
  return d;
}

ContinuousDensity ContinuousDensity::custom(Index dim, std::function<double(const RealVector&)> pdf) {
  if (!pdf) throw std::invalid_argument("custom density requires a function");
  ContinuousDensity d;
  d.family_ = Family::custom;
  d.dim_ = dim;
  d.pdf_ = std::move(pdf);
  return d;
}

double ContinuousDensity::operator()(const Eigen::Ref<const RealVector>& x) const {
  if (x.size() != dim_) throw std::invalid_argument("continuous density dimension mismatch");
  switch (family_) {
    case Family::gaussian: {
      if (truncated_ && !support_.contains(x)) return 0.0;
      const double q = ((x - mean_).array() / sd_.array()).square().sum();
      return std::exp(log_norm_ - 0.5 * q);
    }
    case Family::uniform:
      return support_.contains(x) ? std::exp(log_norm_) : 0.0;
    case Family::custom: {
      const double p = pdf_(RealVector(x));
      if (!(p >= 0.0)) throw std::domain_error("continuous density returned a negative or NaN value");
      return p;
    }
  }
  return 0.0;
}

void MixedDensitySpec::validate() const {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
  if (static_cast<Index>(atoms.size()) != pi.size()) {
    throw std::invalid_argument("atom weights must match the atom list");
  }
  if (!atoms.empty()) {
    if ((pi.array() < 0.0).any()) throw std::invalid_argument("atom weights must be nonnegative");
    if (std::abs(pi.sum() - 1.0) > 1e-12) throw std::invalid_argument("atom weights must sum to 1");
  } else if (rho != 0.0) {
    throw std::invalid_argument("rho > 0 requires at least one atom");
  }
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    const auto& v = atoms[a];
    if (v.is_label() && !labels.contains(v.as_label())) throw std::invalid_argument("atom label not declared");
    if (v.is_real() && v.as_real().size() != continuous.dim()) {
      throw std::invalid_argument("real atom dimension differs from the continuous part");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (atoms[b] == v) throw std::invalid_argument("duplicate atom " + v.to_string());
    }
  }
  if (domain.dim() != continuous.dim()) throw std::invalid_argument("domain dimension mismatch");
}

void MixedMeasureSpec::validate() const {
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      if (atoms[b] == atoms[a]) throw std::invalid_argument("duplicate atom " + atoms[a].to_string());
    }
  }
  if (domain.dim() == 0) throw std::invalid_argument("measure domain must have dimension >= 1");
  if (quadrature.panels < 1 || quadrature.order < 1) throw std::invalid_argument("invalid quadrature");
}

std::optional<std::size_t> matching_atom(const MixedValue& v, const std::vector<MixedValue>& atoms) {
  for (std::size_t l = 0; l < atoms.size(); ++l) {
    if (atoms[l] == v) return l;
  }
  return std::nullopt;
}

RealVector continuous_argument(const MixedValue& v, const MixedDensitySpec& spec) {
  if (v.is_real()) return v.as_real();
  return spec.domain.center();
}

double eval_ms_pdf(const MixedValue& v, const MixedDensitySpec& spec) {
  const auto hit = matching_atom(v, spec.atoms);
  if (!v.is_real() && !hit) throw std::invalid_argument("value " + v.to_string() + " is not an atom of this density");
  if (v.is_real() && v.as_real().size() != spec.continuous.dim()) {
    throw std::invalid_argument("value dimension differs from the continuous part");
  }
  // 1*_A kills the continuous term on atoms.
  if (hit) return spec.rho * spec.pi[static_cast<Index>(*hit)];
  return (1.0 - spec.rho) * spec.continuous(continuous_argument(v, spec));
}

double integrate_mixed(const MeasurableFunction& f, const MixedMeasureSpec& measure) {
  measure.validate();
  const auto check = [](double y, const MixedValue& at) {
    if (!std::isfinite(y)) throw IntegrationError("non-finite integrand at " + at.to_string(), at);
    return y;
  };
  double atom_sum = 0.0;
  for (const auto& a : measure.atoms) atom_sum += check(f(a), a);

  const auto rule = tensor_rule(measure.domain, measure.quadrature);
  double lebesgue = 0.0;
  RealVector x(rule.dim());
  for (Index c = 0; c < rule.size(); ++c) {
    x = rule.nodes.col(c);
    auto v = MixedValue::real(x);
    if (matching_atom(v, measure.atoms)) {
      x[0] = std::nextafter(x[0], std::numeric_limits<double>::infinity());
      v = MixedValue::real(x);
    }
    lebesgue += rule.weights[c] * check(f(v), v);
  }
  return atom_sum + lebesgue;
}

double verify_normalization(const MixedDensitySpec& spec, const MixedMeasureSpec& measure) {
  spec.validate();
  if (spec.atoms.size() != measure.atoms.size()) throw std::invalid_argument("measure atoms do not match density atoms");
  for (std::size_t l = 0; l < spec.atoms.size(); ++l) {
    if (!(spec.atoms[l] == measure.atoms[l])) throw std::invalid_argument("measure atoms do not match density atoms");
  }
  const double total = integrate_mixed([&](const MixedValue& v) { return eval_ms_pdf(v, spec); }, measure);
  return std::abs(total - 1.0);
}

MixedMeasureSpec measure_for(const MixedDensitySpec& spec, QuadratureSpec quadrature) {
  return MixedMeasureSpec{spec.atoms, spec.domain, quadrature};
}

// JSON document

namespace {

using nlohmann::json;

json vector_json(const RealVector& v) {
  json arr = json::array();
  for (Index k = 0; k < v.size(); ++k) arr.push_back(v[k]);
  return arr;
}

RealVector vector_from(const json& j, const char* what) {
  if (j.is_number()) return RealVector::Constant(1, j.get<double>());
  if (!j.is_array() || j.empty()) throw std::invalid_argument(std::string(what) + " must be a number or array");
  RealVector v(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Index>(k)] = j.at(k).get<double>();
  return v;
}

}  // namespace

nlohmann::json density_to_json(const MixedDensitySpec& spec) {
  json doc;
  doc["msmrf-density"] = 1;
  doc["rho"] = spec.rho;
  json atoms = json::array();
  for (const auto& a : spec.atoms) {
    if (a.is_atom()) atoms.push_back(nullptr);
    else if (a.is_label()) atoms.push_back(spec.labels.name(a.as_label().index));
    else atoms.push_back(vector_json(a.as_real()));
  }
  doc["atoms"] = atoms;
  doc["pi"] = vector_json(spec.pi);
  json cont;
  switch (spec.continuous.family()) {
    case ContinuousDensity::Family::gaussian:
      cont["family"] = "gaussian";
      cont["params"] = {{"mean", vector_json(spec.continuous.mean())},
                        {"sd", vector_json(spec.continuous.sd())},
                        {"truncated", spec.continuous.truncated()}};
      break;
    case ContinuousDensity::Family::uniform:
      cont["family"] = "uniform";
      cont["params"] = json::object();
      break;
    case ContinuousDensity::Family::custom:
      throw std::invalid_argument("custom densities cannot be serialized");
  }
  doc["continuous"] = cont;
  json domain = json::array();
  for (Index k = 0; k < spec.domain.dim(); ++k) domain.push_back({spec.domain.lo[k], spec.domain.hi[k]});
  doc["domain"] = domain;
  return doc;
}

MixedDensitySpec density_from_json(const nlohmann::json& doc) {
  if (doc.value("msmrf-density", 0) != 1) throw std::invalid_argument("expected \"msmrf-density\": 1");
  MixedDensitySpec spec;
  const auto& domain = doc.at("domain");
  RealVector lo(static_cast<Index>(domain.size())), hi(static_cast<Index>(domain.size()));
  for (std::size_t k = 0; k < domain.size(); ++k) {
    lo[static_cast<Index>(k)] = domain.at(k).at(0).get<double>();
    hi[static_cast<Index>(k)] = domain.at(k).at(1).get<double>();
  }
  spec.domain = Box(lo, hi);
  spec.rho = doc.at("rho").get<double>();
  for (const auto& a : doc.at("atoms")) {
    if (a.is_null()) spec.atoms.push_back(MixedValue::atom());
    else if (a.is_string()) spec.atoms.push_back(MixedValue::label(spec.labels.intern(a.get<std::string>())));
    else spec.atoms.push_back(MixedValue::real(vector_from(a, "atom")));
  }
  spec.pi = doc.at("pi").empty() ? RealVector() : vector_from(doc.at("pi"), "pi");
  const auto& cont = doc.at("continuous");
  const auto family = cont.at("family").get<std::string>();
  const json params = cont.value("params", json::object());
  if (family == "gaussian") {
    auto mean = vector_from(params.at("mean"), "mean");
    auto sd = vector_from(params.at("sd"), "sd");
    spec.continuous = params.value("truncated", false)
                          ? ContinuousDensity::truncated_gaussian(mean, sd, spec.domain)
                          : ContinuousDensity::gaussian(mean, sd);
  } else if (family == "uniform") {
    spec.continuous = ContinuousDensity::uniform(spec.domain);
  } else {
    throw std::invalid_argument("unknown continuous family '" + family + "'");
  }
  spec.validate();
  return spec;
}

}  // namespace msmrf
