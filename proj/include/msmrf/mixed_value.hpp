#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace msmrf {

using Index = std::ptrdiff_t;
using RealVector = Eigen::VectorXd;

/// The probability atom of a site: its ground value r_i.
struct Atom {
  bool operator==(const Atom&) const = default;
};

/// Symbolic label, identified by its declaration index in a LabelSet.
struct Label {
  std::size_t index = 0;
  bool operator==(const Label&) const = default;
};

/// Interned label names; declaration order fixes the label index.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> names);

  /// Returns the index of `name`, adding it if absent.
  std::size_t intern(std::string_view name);
  std::optional<std::size_t> find(std::string_view name) const;
  const std::string& name(std::size_t index) const;
  std::size_t size() const { return names_.size(); }
  bool contains(const Label& label) const { return label.index < names_.size(); }

 private:
  std::vector<std::string> names_;
};

/// One site's state: the ground atom, a label, or a finite real vector.
class MixedValue {
 public:
  MixedValue() : value_(Atom{}) {}

  static MixedValue atom() { return MixedValue(Atom{}); }
  static MixedValue label(std::size_t index) { return MixedValue(Label{index}); }
  /// Throws std::invalid_argument if any component is NaN or infinite.
  static MixedValue real(RealVector value);
  static MixedValue real(double value);

  bool is_atom() const { return std::holds_alternative<Atom>(value_); }
  bool is_label() const { return std::holds_alternative<Label>(value_); }
  bool is_real() const { return std::holds_alternative<RealVector>(value_); }

  const Label& as_label() const { return std::get<Label>(value_); }
  const RealVector& as_real() const { return std::get<RealVector>(value_); }

  /// Exact comparison; real vectors compare bit-for-bit.
  friend bool operator==(const MixedValue& a, const MixedValue& b);

  std::string to_string() const;

 private:
  using Storage = std::variant<Atom, Label, RealVector>;
  explicit MixedValue(Storage v) : value_(std::move(v)) {}
  Storage value_;
};

/// Bitwise equality of two real vectors (0.0 and -0.0 differ).
bool bit_equal(const Eigen::Ref<const RealVector>& a, const Eigen::Ref<const RealVector>& b);

bool all_finite(const Eigen::Ref<const RealVector>& v);

}  // namespace msmrf
