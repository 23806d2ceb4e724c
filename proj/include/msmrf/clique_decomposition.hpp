#pragma once

#include "msmrf/mixed_value.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace msmrf {

/// Subset of the sites {0, ..., N-1}, N <= 64, stored as a bit mask.
class SiteSubset {
 public:
  static constexpr std::size_t kMaxSites = 64;

  constexpr SiteSubset() = default;
  constexpr explicit SiteSubset(std::uint64_t bits) : bits_(bits) {}
  static SiteSubset of(std::initializer_list<std::size_t> sites);
  static SiteSubset full(std::size_t n);

  bool contains(std::size_t i) const { return i < kMaxSites && ((bits_ >> i) & 1u); }
  std::size_t size() const;
  bool empty() const { return bits_ == 0; }
  std::uint64_t bits() const { return bits_; }
  SiteSubset with(std::size_t i) const;
  SiteSubset without(std::size_t i) const;
  bool is_subset_of(SiteSubset other) const { return (bits_ & ~other.bits_) == 0; }
  /// Members in ascending order.
  std::vector<std::size_t> members() const;
  std::string to_string() const;

  /// Orders by cardinality, then by ascending member list.
  friend std::strong_ordering operator<=>(SiteSubset a, SiteSubset b);
  friend bool operator==(SiteSubset a, SiteSubset b) = default;

 private:
  std::uint64_t bits_ = 0;
};

/// All subsets of `set` (including empty and `set`), in increasing bit order.
std::vector<SiteSubset> subsets_of(SiteSubset set);

using Configuration = std::vector<MixedValue>;
using ConfigFunction = std::function<double(std::span<const MixedValue>)>;

/// Per-site ground values r_i.
class GroundVector {
 public:
  GroundVector() = default;
  explicit GroundVector(std::vector<MixedValue> values);
  std::size_t size() const { return values_.size(); }
  const MixedValue& operator[](std::size_t i) const { return values_[i]; }
  std::span<const MixedValue> values() const { return values_; }

 private:
  std::vector<MixedValue> values_;
};

class DecompositionError : public std::runtime_error {
 public:
  enum class Kind { nonzero_at_ground, order_exceeded, invalid_argument };
  DecompositionError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// g_A: keeps coordinates in A, grounds the rest.
Configuration ground(std::span<const MixedValue> x, SiteSubset keep, const GroundVector& r);

/// Clique functions f_A keyed by subset; the empty set always maps to 0.
/// Each term is evaluated on a full-length configuration and must read only
/// the coordinates in its subset.
class PotentialSet {
 public:
  PotentialSet() = default;
  explicit PotentialSet(std::size_t site_count) : site_count_(site_count) {}

  void set(SiteSubset subset, ConfigFunction term);
  bool has(SiteSubset subset) const { return terms_.contains(subset); }
  double evaluate(SiteSubset subset, std::span<const MixedValue> x) const;
  std::vector<SiteSubset> subsets() const;
  std::size_t site_count() const { return site_count_; }

 private:
  std::size_t site_count_ = 0;
  std::map<SiteSubset, ConfigFunction> terms_;
};

struct DecomposeOptions {
  /// 0 means "all orders up to N".
  std::size_t max_order = 0;
  /// Probe configurations on which subsets above max_order must vanish.
  std::vector<Configuration> probes;
  double tolerance = 1e-10;
  double ground_tolerance = 1e-12;
};

/// Moebius inclusion-exclusion: f_A(x) = sum_{B subset A} (-1)^{|A|-|B|} f(g_B(x)).
PotentialSet decompose(ConfigFunction f, const GroundVector& r, const DecomposeOptions& options = {});

/// sum_A f_A(x_A).
double reconstruct(const PotentialSet& potentials, std::span<const MixedValue> x);

/// Potentials of every subset at one configuration, built by subtracting all
/// lower-order cliques from f(g_A(x)) in increasing order of |A|.
std::map<SiteSubset, double> recursive_potentials(const ConfigFunction& f, const GroundVector& r,
                                                  std::span<const MixedValue> x);

/// True iff the inclusion-exclusion and recursive-subtraction constructions
/// agree on every probe within `tolerance`.
bool verify_uniqueness(const ConfigFunction& f, const GroundVector& r, std::span<const Configuration> probes,
                       double tolerance = 1e-10);

/// Largest disagreement between the two constructions over the probes.
double uniqueness_residual(const ConfigFunction& f, const GroundVector& r, std::span<const Configuration> probes);

/// Values of f_A over the product of its members' grids (others grounded),
/// row-major with the lowest site index varying slowest.
struct PotentialTable {
  SiteSubset subset;
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

std::vector<PotentialTable> tabulate(const PotentialSet& potentials, const GroundVector& r,
                                     const std::vector<std::vector<MixedValue>>& grids);

/// Text export: header line, then one record per subset.
std::string format_potential_tables(const std::vector<PotentialTable>& tables, std::size_t site_count);

}  // namespace msmrf
