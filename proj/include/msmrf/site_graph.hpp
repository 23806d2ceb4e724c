#pragma once

#include "msmrf/mixed_value.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace msmrf {

/// Sorted ascending site indices of one clique.
using Clique = std::vector<Index>;

/// Per-site continuous dimensions, coordinate offsets and ground values.
struct SiteLayout {
  std::vector<Index> dims;
  std::vector<Index> offsets;
  RealVector ground;  // stacked r_i
  Index total_dim = 0;

  Index size() const { return static_cast<Index>(dims.size()); }
};

struct LatticeShape {
  Index height = 0;
  Index width = 0;
  bool operator==(const LatticeShape&) const = default;
};

/// Sites, their ground values and the cliques that may carry potentials.
class SiteGraph {
 public:
  SiteGraph(std::vector<Index> dims, std::vector<RealVector> ground, std::vector<Clique> cliques,
            std::optional<LatticeShape> lattice = std::nullopt);

  /// H x W lattice with 4-neighbour pair cliques; sites in row-major order.
  static SiteGraph lattice(Index height, Index width, Index dim, const RealVector& ground);
  /// N sites with every pair (and optionally every triple) as a clique.
  static SiteGraph complete(Index n, Index dim, const RealVector& ground, bool triples = false);

  Index size() const { return layout_->size(); }
  Index dim(Index i) const { return layout_->dims[static_cast<std::size_t>(i)]; }
  Index offset(Index i) const { return layout_->offsets[static_cast<std::size_t>(i)]; }
  Index total_dim() const { return layout_->total_dim; }
  auto ground(Index i) const { return layout_->ground.segment(offset(i), dim(i)); }
  const std::shared_ptr<const SiteLayout>& layout() const { return layout_; }

  const std::vector<Clique>& cliques() const { return cliques_; }
  bool has_clique(const Clique& c) const;
  /// Indices into cliques() of the cliques containing site i.
  const std::vector<std::size_t>& incident(Index i) const { return incident_[static_cast<std::size_t>(i)]; }
  /// Sites sharing at least one clique with i, ascending.
  const std::vector<Index>& neighbors(Index i) const { return neighbors_[static_cast<std::size_t>(i)]; }
  Index max_clique_order() const;

  const std::optional<LatticeShape>& lattice_shape() const { return lattice_; }
  /// True for a lattice whose cliques are exactly 4-neighbour pairs.
  bool is_pairwise_lattice() const;
  /// Row-major (row, col) of site i on the lattice; (0, i) otherwise.
  std::pair<Index, Index> coords(Index i) const;
  Index layout_height() const { return lattice_ ? lattice_->height : 1; }
  Index layout_width() const { return lattice_ ? lattice_->width : size(); }

 private:
  std::shared_ptr<const SiteLayout> layout_;
  std::vector<Clique> cliques_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<std::vector<Index>> neighbors_;
  std::optional<LatticeShape> lattice_;
};

/// Sorts and validates a clique against the site count.
Clique canonical_clique(Clique c, Index site_count);

}  // namespace msmrf
