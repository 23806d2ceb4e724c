#include "msmrf/mixed_value.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace msmrf {

LabelSet::LabelSet(std::vector<std::string> names) {
  for (auto& n : names) {
    if (find(n)) throw std::invalid_argument("duplicate label '" + n + "'");
    names_.push_back(std::move(n));
  }
}

std::size_t LabelSet::intern(std::string_view name) {
  if (auto idx = find(name)) return *idx;
  names_.emplace_back(name);
  return names_.size() - 1;
}

std::optional<std::size_t> LabelSet::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

const std::string& LabelSet::name(std::size_t index) const {
  if (index >= names_.size()) throw std::out_of_range("label index out of range");
  return names_[index];
}

MixedValue MixedValue::real(RealVector value) {
  if (!all_finite(value)) throw std::invalid_argument("real mixed value must be finite");
  return MixedValue(Storage(std::move(value)));
}

MixedValue MixedValue::real(double value) { return real(RealVector::Constant(1, value)); }

bool operator==(const MixedValue& a, const MixedValue& b) {
  if (a.value_.index() != b.value_.index()) return false;
  if (a.is_atom()) return true;
  if (a.is_label()) return a.as_label() == b.as_label();
  return bit_equal(a.as_real(), b.as_real());
}

std::string MixedValue::to_string() const {
  if (is_atom()) return "G";
  if (is_label()) return "L" + std::to_string(as_label().index);
  std::ostringstream os;
  os.precision(17);
  const auto& v = as_real();
  os << "(";
  for (Index k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
  os << ")";
  return os.str();
}

bool bit_equal(const Eigen::Ref<const RealVector>& a, const Eigen::Ref<const RealVector>& b) {
  if (a.size() != b.size()) return false;
  for (Index k = 0; k < a.size(); ++k) {
    const double x = a[k], y = b[k];
    if (std::memcmp(&x, &y, sizeof(double)) != 0) return false;
  }
  return true;
}

bool all_finite(const Eigen::Ref<const RealVector>& v) {
  return std::all_of(v.data(), v.data() + v.size(), [](double x) { return std::isfinite(x); });
}

}  // namespace msmrf
