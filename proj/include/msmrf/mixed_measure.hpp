#pragma once

#include "msmrf/mixed_value.hpp"
#include "msmrf/quadrature.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace msmrf {

/// Absolutely continuous part p^a of a mixed-state density.
class ContinuousDensity {
 public:
  enum class Family { gaussian, uniform, custom };

  /// Product of independent normals; `truncate_to` renormalizes on a box.
  static ContinuousDensity gaussian(RealVector mean, RealVector sd);
  static ContinuousDensity truncated_gaussian(RealVector mean, RealVector sd, const Box& box);
  static ContinuousDensity uniform(const Box& box);
  static ContinuousDensity custom(Index dim, std::function<double(const RealVector&)> pdf);

  double operator()(const Eigen::Ref<const RealVector>& x) const;

  Index dim() const { return dim_; }
  Family family() const { return family_; }
  const RealVector& mean() const { return mean_; }
  const RealVector& sd() const { return sd_; }
  bool truncated() const { return truncated_; }
  const Box& support() const { return support_; }

 private:
  Family family_ = Family::custom;
  Index dim_ = 0;
  RealVector mean_, sd_;
  bool truncated_ = false;
  Box support_;
  double log_norm_ = 0.0;
  std::function<double(const RealVector&)> pdf_;
};

/// Mixed-state density rho * sum_l pi_l 1_{atom_l} + (1 - rho) 1* p^a.
struct MixedDensitySpec {
  double rho = 0.0;
  std::vector<MixedValue> atoms;  // Atom, Label or Real locations
  RealVector pi;                  // one weight per atom, summing to 1
  ContinuousDensity continuous;
  Box domain;
  LabelSet labels;

  /// Throws std::invalid_argument when an invariant fails.
  void validate() const;
};

/// Reference measure: counting on the atoms plus Lebesgue on a box.
struct MixedMeasureSpec {
  std::vector<MixedValue> atoms;
  Box domain;
  QuadratureSpec quadrature;

  void validate() const;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, MixedValue point)
      : std::runtime_error(what), point_(std::move(point)) {}
  const MixedValue& point() const { return point_; }

 private:
  MixedValue point_;
};

using MeasurableFunction = std::function<double(const MixedValue&)>;

/// Index of the atom that `v` hits, if any.
std::optional<std::size_t> matching_atom(const MixedValue& v, const std::vector<MixedValue>& atoms);

/// Argument handed to p^a: the value itself when real, else the domain center.
RealVector continuous_argument(const MixedValue& v, const MixedDensitySpec& spec);

/// Radon-Nikodym derivative of the mixed law with respect to the mixed measure.
double eval_ms_pdf(const MixedValue& v, const MixedDensitySpec& spec);

/// Sum over the atoms plus tensor Gauss-Legendre quadrature of the Lebesgue part.
/// Quadrature nodes that coincide bit-for-bit with a real atom are moved to the
/// next representable value so the Lebesgue part never sees an atom.
double integrate_mixed(const MeasurableFunction& f, const MixedMeasureSpec& measure);

/// |integral of eval_ms_pdf over the measure - 1|.
double verify_normalization(const MixedDensitySpec& spec, const MixedMeasureSpec& measure);

/// Measure matching a density's atoms and domain.
MixedMeasureSpec measure_for(const MixedDensitySpec& spec, QuadratureSpec quadrature);

/// Versioned JSON document for density specs.
nlohmann::json density_to_json(const MixedDensitySpec& spec);
MixedDensitySpec density_from_json(const nlohmann::json& doc);

}  // namespace msmrf
