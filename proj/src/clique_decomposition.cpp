#include "msmrf/clique_decomposition.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <sstream>

namespace msmrf {

SiteSubset SiteSubset::of(std::initializer_list<std::size_t> sites) {
  SiteSubset s;
  for (auto i : sites) s = s.with(i);
  return s;
}

SiteSubset SiteSubset::full(std::size_t n) {
  if (n > kMaxSites) throw std::out_of_range("site subsets support at most 64 sites");
  return SiteSubset(n == kMaxSites ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
}

std::size_t SiteSubset::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

SiteSubset SiteSubset::with(std::size_t i) const {
  if (i >= kMaxSites) throw std::out_of_range("site index out of range");
  return SiteSubset(bits_ | (std::uint64_t{1} << i));
}

SiteSubset SiteSubset::without(std::size_t i) const {
  if (i >= kMaxSites) throw std::out_of_range("site index out of range");
  return SiteSubset(bits_ & ~(std::uint64_t{1} << i));
}

std::vector<std::size_t> SiteSubset::members() const {
  std::vector<std::size_t> out;
  for (std::uint64_t b = bits_; b; b &= b - 1) out.push_back(static_cast<std::size_t>(std::countr_zero(b)));
  return out;
}

std::string SiteSubset::to_string() const {
  std::string s = "{";
  bool first = true;
  for (auto i : members()) {
    s += (first ? "" : ",") + std::to_string(i);
    first = false;
  }
  return s + "}";
}

std::strong_ordering operator<=>(SiteSubset a, SiteSubset b) {
  if (auto c = a.size() <=> b.size(); c != 0) return c;
  // Same cardinality: ascending member lists compare lexicographically.
  return a.members() <=> b.members();
}

std::vector<SiteSubset> subsets_of(SiteSubset set) {
  std::vector<SiteSubset> out;
  const std::uint64_t full = set.bits();
  std::uint64_t sub = 0;
  do {
    out.emplace_back(sub);
    sub = (sub - full) & full;
  } while (sub != 0);
  return out;
}

GroundVector::GroundVector(std::vector<MixedValue> values) : values_(std::move(values)) {
  if (values_.size() > SiteSubset::kMaxSites) throw std::out_of_range("at most 64 sites supported");
}

Configuration ground(std::span<const MixedValue> x, SiteSubset keep, const GroundVector& r) {
  if (x.size() != r.size()) throw std::invalid_argument("configuration and ground vector differ in length");
  if (!keep.is_subset_of(SiteSubset::full(r.size()))) throw std::out_of_range("subset index out of range");
  Configuration out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!keep.contains(i)) out[i] = r[i];
  }
  return out;
}

void PotentialSet::set(SiteSubset subset, ConfigFunction term) {
  if (subset.empty()) throw std::invalid_argument("the empty-set potential is fixed at 0");
  if (!subset.is_subset_of(SiteSubset::full(site_count_))) throw std::out_of_range("subset index out of range");
  terms_[subset] = std::move(term);
}

double PotentialSet::evaluate(SiteSubset subset, std::span<const MixedValue> x) const {
  if (subset.empty()) return 0.0;
  auto it = terms_.find(subset);
  return it == terms_.end() ? 0.0 : it->second(x);
}

std::vector<SiteSubset> PotentialSet::subsets() const {
  std::vector<SiteSubset> out;
  out.reserve(terms_.size());
  for (const auto& [s, _] : terms_) out.push_back(s);
  return out;
}

namespace {

double moebius_term(const ConfigFunction& f, const GroundVector& r, SiteSubset a, std::span<const MixedValue> x) {
  double sum = 0.0;
  const std::size_t order = a.size();
  for (auto b : subsets_of(a)) {
    const auto g = ground(x, b, r);
    const double sign = ((order - b.size()) % 2 == 0) ? 1.0 : -1.0;
    sum += sign * f(g);
  }
  return sum;
}

}  // namespace

PotentialSet decompose(ConfigFunction f, const GroundVector& r, const DecomposeOptions& options) {
  const std::size_t n = r.size();
  const std::size_t max_order = options.max_order == 0 ? n : options.max_order;
  if (max_order > n) throw DecompositionError(DecompositionError::Kind::invalid_argument, "max_order exceeds site count");
  const double at_ground = f(r.values());
  if (!(std::abs(at_ground) <= options.ground_tolerance)) {
    throw DecompositionError(DecompositionError::Kind::nonzero_at_ground,
                             "f(r) = " + std::to_string(at_ground) + " must vanish at the ground vector");
  }
  if (max_order < n && options.probes.empty()) {
    throw DecompositionError(DecompositionError::Kind::invalid_argument,
                             "a truncated decomposition needs probe configurations");
  }

  auto shared_f = std::make_shared<const ConfigFunction>(std::move(f));
  auto shared_r = std::make_shared<const GroundVector>(r);
  PotentialSet out(n);
  for (auto a : subsets_of(SiteSubset::full(n))) {
    if (a.empty()) continue;
    if (a.size() <= max_order) {
      out.set(a, [shared_f, shared_r, a](std::span<const MixedValue> x) {
        return moebius_term(*shared_f, *shared_r, a, x);
      });
      continue;
    }
    for (const auto& probe : options.probes) {
      const double v = moebius_term(*shared_f, r, a, probe);
      if (!(std::abs(v) <= options.tolerance)) {
        throw DecompositionError(DecompositionError::Kind::order_exceeded,
                                 "potential on " + a.to_string() + " is " + std::to_string(v) +
                                     ", beyond max_order " + std::to_string(max_order));
      }
    }
  }
  return out;
}

double reconstruct(const PotentialSet& potentials, std::span<const MixedValue> x) {
  double sum = 0.0;
  for (auto a : potentials.subsets()) sum += potentials.evaluate(a, x);
  return sum;
}

std::map<SiteSubset, double> recursive_potentials(const ConfigFunction& f, const GroundVector& r,
                                                  std::span<const MixedValue> x) {
  const std::size_t n = r.size();
  auto all = subsets_of(SiteSubset::full(n));
  std::sort(all.begin(), all.end());  // by cardinality, so lower orders come first
  std::map<SiteSubset, double> table;
  for (auto a : all) {
    if (a.empty()) {
      table[a] = 0.0;
      continue;
    }
    double value = f(ground(x, a, r));
    for (auto b : subsets_of(a)) {
      if (b != a) value -= table.at(b);
    }
    table[a] = value;
  }
  return table;
}

double uniqueness_residual(const ConfigFunction& f, const GroundVector& r, std::span<const Configuration> probes) {
  const auto pots = decompose(f, r);
  double worst = 0.0;
  for (const auto& x : probes) {
    const auto rec = recursive_potentials(f, r, x);
    for (const auto& [a, v] : rec) {
      const double diff = std::abs(pots.evaluate(a, x) - v);
      if (!(diff <= worst)) worst = std::isnan(diff) ? INFINITY : diff;
    }
  }
  return worst;
}

bool verify_uniqueness(const ConfigFunction& f, const GroundVector& r, std::span<const Configuration> probes,
                       double tolerance) {
  return uniqueness_residual(f, r, probes) <= tolerance;
}

std::vector<PotentialTable> tabulate(const PotentialSet& potentials, const GroundVector& r,
                                     const std::vector<std::vector<MixedValue>>& grids) {
  if (grids.size() != r.size()) throw std::invalid_argument("one grid per site is required");
  std::vector<PotentialTable> out;
  auto all = subsets_of(SiteSubset::full(r.size()));
  std::sort(all.begin(), all.end());
  for (auto a : all) {
    if (a.empty()) continue;
    PotentialTable table{a, {}, {}};
    const auto members = a.members();
    std::size_t count = 1;
    for (auto i : members) {
      table.shape.push_back(grids[i].size());
      count *= grids[i].size();
    }
    Configuration x(r.values().begin(), r.values().end());
    std::vector<std::size_t> digit(members.size(), 0);
    for (std::size_t c = 0; c < count; ++c) {
      for (std::size_t m = 0; m < members.size(); ++m) x[members[m]] = grids[members[m]][digit[m]];
      table.values.push_back(potentials.evaluate(a, x));
      for (std::size_t m = members.size(); m-- > 0;) {
        if (++digit[m] < grids[members[m]].size()) break;
        digit[m] = 0;
      }
    }
    out.push_back(std::move(table));
  }
  return out;
}

std::string format_potential_tables(const std::vector<PotentialTable>& tables, std::size_t site_count) {
  std::ostringstream os;
  os << "msmrf-potentials 1 " << site_count << "\n";
  char buf[64];
  for (const auto& t : tables) {
    os << "clique";
    for (auto i : t.subset.members()) os << ' ' << i;
    os << " shape";
    for (auto s : t.shape) os << ' ' << s;
    os << "\n";
    for (std::size_t k = 0; k < t.values.size(); ++k) {
      auto res = std::to_chars(buf, buf + sizeof(buf), t.values[k]);
      os << (k ? " " : "") << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace msmrf
