#include "msmrf/sampler.hpp"

#include <algorithm>
#include <thread>

namespace msmrf {

Schedule parse_schedule(const std::string& name) {
  if (name == "raster") return Schedule::raster;
  if (name == "checkerboard") return Schedule::checkerboard;
  throw std::invalid_argument("unknown schedule '" + name + "' (expected raster or checkerboard)");
}

std::string to_string(Schedule s) { return s == Schedule::raster ? "raster" : "checkerboard"; }

void SamplerConfig::validate(const SiteGraph& graph) const {
  if (sweeps < 0 || burn_in < 0 || thinning < 0) throw std::invalid_argument("sweeps, burn-in and thinning must be >= 0");
  if (threads < 1) throw std::invalid_argument("thread count must be >= 1");
  if (schedule == Schedule::checkerboard && !graph.is_pairwise_lattice()) {
    throw std::invalid_argument("checkerboard schedule needs a pairwise nearest-neighbour lattice");
  }
}

MixedValue sample_conditional(Index i, const Field& field, const MixedStateModel& model, Rng& rng) {
  const double rho = model.atom_probability(i, field);
  if (rng.uniform() < rho) return MixedValue::atom();
  const auto ground = field.ground_coords(i);
  while (true) {
    RealVector v = model.continuous().sample_conditional(i, field, rng);
    if (!bit_equal(v, ground)) return MixedValue::real(std::move(v));
  }
}

void update_site(Index i, Field& field, const MixedStateModel& model, std::uint64_t seed, std::uint64_t sweep) {
  Rng rng = Rng::stream(seed, sweep, static_cast<std::uint64_t>(i));
  try {
    field.set(i, sample_conditional(i, field, model, rng));
  } catch (const std::exception& e) {
    const auto [row, col] = model.graph().coords(i);
    throw SamplerError(i, row, col, e.what());
  }
}

namespace {

void update_colour(Field& field, const MixedStateModel& model, const SamplerConfig& config, std::uint64_t index,
                   const std::vector<Index>& sites) {
  const int workers = std::max(1, std::min<int>(config.threads, static_cast<int>(sites.size() / 64) + 1));
  if (workers == 1) {
    for (auto i : sites) update_site(i, field, model, config.seed, index);
    return;
  }
  // Same-colour sites share no clique, so each update reads only the other
  // colour and writes only its own site.
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  const std::size_t chunk = (sites.size() + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = w * chunk, hi = std::min(sites.size(), lo + chunk);
      try {
        for (std::size_t k = lo; k < hi; ++k) update_site(sites[k], field, model, config.seed, index);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void sweep(Field& field, const MixedStateModel& model, const SamplerConfig& config, std::uint64_t index) {
  const Index n = model.size();
  if (config.schedule == Schedule::raster) {
    for (Index i = 0; i < n; ++i) update_site(i, field, model, config.seed, index);
    return;
  }
  std::vector<Index> colours[2];
  for (Index i = 0; i < n; ++i) {
    const auto [r, c] = model.graph().coords(i);
    colours[(r + c) % 2].push_back(i);
  }
  update_colour(field, model, config, index, colours[0]);
  update_colour(field, model, config, index, colours[1]);
}

void run_chain(const Field& field0, const MixedStateModel& model, const SamplerConfig& config,
               const SnapshotObserver& observer) {
  config.validate(model.graph());
  if (field0.size() != model.size()) throw std::invalid_argument("initial field does not match the model");
  if (config.sweeps == 0) {
    observer(0, field0);
    return;
  }
  Field field = field0;
  for (std::int64_t s = 1; s <= config.sweeps; ++s) {
    sweep(field, model, config, static_cast<std::uint64_t>(s));
    if (s <= config.burn_in) continue;
    const bool keep = config.thinning == 0 ? s == config.sweeps : (s - config.burn_in) % config.thinning == 0;
    if (keep) observer(s, field);
  }
}

std::vector<Field> run_chain(const Field& field0, const MixedStateModel& model, const SamplerConfig& config) {
  std::vector<Field> out;
  run_chain(field0, model, config, [&](std::int64_t, const Field& f) { out.push_back(f); });
  return out;
}

}  // namespace msmrf
