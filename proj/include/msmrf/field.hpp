#pragma once

#include "msmrf/mixed_value.hpp"
#include "msmrf/site_graph.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace msmrf {

/// Assignment of a mixed value to every site of a graph. Grounded sites keep
/// their ground coordinates r_i in the stacked coordinate vector, so the
/// continuous model always sees a point of R^{total_dim}.
class Field {
 public:
  /// All sites at ground.
  explicit Field(const SiteGraph& graph) : Field(graph.layout()) {}
  explicit Field(std::shared_ptr<const SiteLayout> layout);

  Index size() const { return layout_->size(); }
  Index dim(Index i) const { return layout_->dims[static_cast<std::size_t>(i)]; }
  const SiteLayout& layout() const { return *layout_; }

  bool is_ground(Index i) const { return ground_[static_cast<std::size_t>(i)] != 0; }
  /// delta*_i: 1 off ground, 0 at ground.
  double off_ground(Index i) const { return is_ground(i) ? 0.0 : 1.0; }
  auto coords(Index i) const { return coords_.segment(layout_->offsets[static_cast<std::size_t>(i)], dim(i)); }
  auto ground_coords(Index i) const {
    return layout_->ground.segment(layout_->offsets[static_cast<std::size_t>(i)], dim(i));
  }
  const RealVector& coordinates() const { return coords_; }

  void set_ground(Index i);
  /// A value bit-identical to r_i is the atom.
  void set_real(Index i, const Eigen::Ref<const RealVector>& x);
  /// Atom or Real; labels are not site states of a real mixed-state field.
  void set(Index i, const MixedValue& v);
  MixedValue value(Index i) const;

  Index ground_count() const;

  friend bool operator==(const Field& a, const Field& b);

 private:
  std::shared_ptr<const SiteLayout> layout_;
  std::vector<std::uint8_t> ground_;
  RealVector coords_;
};

class FieldFormatError : public std::runtime_error {
 public:
  FieldFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Text snapshot: `msmrf-field 1 <H> <W> <n>` then H rows of W tokens, each
/// `G` or comma-joined shortest round-trip decimals.
void write_field(std::ostream& os, const Field& field, Index height, Index width);
std::string format_field(const Field& field, Index height, Index width);

struct FieldHeader {
  Index height = 0;
  Index width = 0;
  Index dim = 0;
};

/// Parses a snapshot into `graph`'s layout; the header must match it.
Field read_field(std::istream& is, const SiteGraph& graph);
/// Reads just the header (for building a graph from data).
FieldHeader read_field_header(std::istream& is);
Field parse_field(const std::string& text, const SiteGraph& graph);

}  // namespace msmrf
