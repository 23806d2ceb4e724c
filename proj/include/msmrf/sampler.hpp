#pragma once

#include "msmrf/field.hpp"
#include "msmrf/model.hpp"
#include "msmrf/rng.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace msmrf {

enum class Schedule { raster, checkerboard };

Schedule parse_schedule(const std::string& name);
std::string to_string(Schedule s);

struct SamplerConfig {
  std::uint64_t seed = 0;
  std::int64_t sweeps = 0;
  Schedule schedule = Schedule::raster;
  std::int64_t burn_in = 0;
  /// Snapshot every `thinning` sweeps after burn-in; 0 keeps only the last sweep.
  std::int64_t thinning = 1;
  /// Worker cap for checkerboard sweeps; results do not depend on it.
  int threads = 1;

  void validate(const SiteGraph& graph) const;
};

class SamplerError : public std::runtime_error {
 public:
  SamplerError(Index site, Index row, Index col, const std::string& what)
      : std::runtime_error("site " + std::to_string(site) + " (row " + std::to_string(row) + ", col " +
                           std::to_string(col) + "): " + what),
        site_(site), row_(row), col_(col) {}
  Index site() const { return site_; }
  Index row() const { return row_; }
  Index col() const { return col_; }

 private:
  Index site_, row_, col_;
};

/// Atom with probability rho_i (one uniform variate), else a draw from
/// p^a(. | x_i^c). A continuous draw identical to r_i would be the atom; it
/// is redrawn so the two branches stay disjoint.
MixedValue sample_conditional(Index i, const Field& field, const MixedStateModel& model, Rng& rng);

/// Updates site i of `field` in place from its own substream for (sweep, i).
void update_site(Index i, Field& field, const MixedStateModel& model, std::uint64_t seed, std::uint64_t sweep);

/// One full sweep. Checkerboard updates all sites of one colour, then the other.
void sweep(Field& field, const MixedStateModel& model, const SamplerConfig& config, std::uint64_t index);

/// Called with (sweep number, snapshot) for every retained snapshot.
using SnapshotObserver = std::function<void(std::int64_t, const Field&)>;

/// Runs the chain from `field0`. With zero sweeps the only snapshot is field0.
void run_chain(const Field& field0, const MixedStateModel& model, const SamplerConfig& config,
               const SnapshotObserver& observer);
std::vector<Field> run_chain(const Field& field0, const MixedStateModel& model, const SamplerConfig& config);

}  // namespace msmrf
