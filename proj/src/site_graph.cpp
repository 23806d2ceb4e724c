#include "msmrf/site_graph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace msmrf {

Clique canonical_clique(Clique c, Index site_count) {
  std::sort(c.begin(), c.end());
  if (c.empty()) throw std::invalid_argument("cliques must be nonempty");
  if (std::adjacent_find(c.begin(), c.end()) != c.end()) throw std::invalid_argument("clique repeats a site");
  if (c.front() < 0 || c.back() >= site_count) throw std::out_of_range("clique site index out of range");
  return c;
}

SiteGraph::SiteGraph(std::vector<Index> dims, std::vector<RealVector> ground, std::vector<Clique> cliques,
                     std::optional<LatticeShape> lattice)
    : lattice_(lattice) {
  if (dims.size() != ground.size()) throw std::invalid_argument("one ground value per site is required");
  if (dims.empty()) throw std::invalid_argument("a site graph needs at least one site");
  auto layout = std::make_shared<SiteLayout>();
  layout->dims = std::move(dims);
  Index offset = 0;
  for (std::size_t i = 0; i < layout->dims.size(); ++i) {
    if (layout->dims[i] < 1) throw std::invalid_argument("continuous dimension must be >= 1");
    if (ground[i].size() != layout->dims[i]) throw std::invalid_argument("ground value dimension mismatch");
    if (!all_finite(ground[i])) throw std::invalid_argument("ground value must be finite");
    layout->offsets.push_back(offset);
    offset += layout->dims[i];
  }
  layout->total_dim = offset;
  layout->ground.resize(offset);
  for (std::size_t i = 0; i < ground.size(); ++i) {
    layout->ground.segment(layout->offsets[i], layout->dims[i]) = ground[i];
  }
  const Index n = layout->size();
  if (lattice_ && lattice_->height * lattice_->width != n) {
    throw std::invalid_argument("lattice shape does not match the site count");
  }
  layout_ = std::move(layout);

  std::set<Clique> seen;
  for (auto& c : cliques) {
    auto canon = canonical_clique(std::move(c), n);
    if (!seen.insert(canon).second) throw std::invalid_argument("duplicate clique");
  }
  cliques_.assign(seen.begin(), seen.end());
  std::stable_sort(cliques_.begin(), cliques_.end(),
                   [](const Clique& a, const Clique& b) { return a.size() < b.size(); });

  incident_.assign(static_cast<std::size_t>(n), {});
  neighbors_.assign(static_cast<std::size_t>(n), {});
  for (std::size_t k = 0; k < cliques_.size(); ++k) {
    for (auto i : cliques_[k]) {
      incident_[static_cast<std::size_t>(i)].push_back(k);
      for (auto j : cliques_[k]) {
        if (j != i) neighbors_[static_cast<std::size_t>(i)].push_back(j);
      }
    }
  }
  for (auto& nb : neighbors_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

SiteGraph SiteGraph::lattice(Index height, Index width, Index dim, const RealVector& ground) {
  if (height < 1 || width < 1) throw std::invalid_argument("lattice dimensions must be positive");
  const Index n = height * width;
  std::vector<Clique> cliques;
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) {
      const Index i = r * width + c;
      if (c + 1 < width) cliques.push_back({i, i + 1});
      if (r + 1 < height) cliques.push_back({i, i + width});
    }
  }
  return SiteGraph(std::vector<Index>(static_cast<std::size_t>(n), dim),
                   std::vector<RealVector>(static_cast<std::size_t>(n), ground), std::move(cliques),
                   LatticeShape{height, width});
}

SiteGraph SiteGraph::complete(Index n, Index dim, const RealVector& ground, bool triples) {
  std::vector<Clique> cliques;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      cliques.push_back({i, j});
      if (!triples) continue;
      for (Index k = j + 1; k < n; ++k) cliques.push_back({i, j, k});
    }
  }
  return SiteGraph(std::vector<Index>(static_cast<std::size_t>(n), dim),
                   std::vector<RealVector>(static_cast<std::size_t>(n), ground), std::move(cliques));
}

bool SiteGraph::has_clique(const Clique& c) const {
  return std::find(cliques_.begin(), cliques_.end(), c) != cliques_.end();
}

Index SiteGraph::max_clique_order() const {
  Index m = 1;
  for (const auto& c : cliques_) m = std::max(m, static_cast<Index>(c.size()));
  return m;
}

bool SiteGraph::is_pairwise_lattice() const {
  if (!lattice_) return false;
  const Index w = lattice_->width;
  for (const auto& c : cliques_) {
    if (c.size() != 2) return false;
    const Index d = c[1] - c[0];
    const bool horizontal = d == 1 && c[0] / w == c[1] / w;
    const bool vertical = d == w;
    if (!horizontal && !vertical) return false;
  }
  return true;
}

std::pair<Index, Index> SiteGraph::coords(Index i) const {
  if (!lattice_) return {0, i};
  return {i / lattice_->width, i % lattice_->width};
}

}  // namespace msmrf
