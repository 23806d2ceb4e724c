#include "msmrf/oracle.hpp"

#include "msmrf/logsumexp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace msmrf {

DiscretizedSpace::DiscretizedSpace(const SiteGraph& graph, std::vector<Box> boxes, const QuadratureSpec& quadrature)
    : boxes_(std::move(boxes)), quadrature_(quadrature) {
  if (static_cast<Index>(boxes_.size()) != graph.size()) throw std::invalid_argument("one box per site is required");
  for (Index i = 0; i < graph.size(); ++i) {
    const auto& b = boxes_[static_cast<std::size_t>(i)];
    if (b.dim() != graph.dim(i)) throw std::invalid_argument("box dimension differs from site " + std::to_string(i));
    rules_.push_back(tensor_rule(b, quadrature));
    displace_nodes(rules_.back(), graph.ground(i));
    const auto& w = rules_.back().weights;
    if ((w.array() <= 0.0).any()) throw std::logic_error("quadrature weights must be positive");
    if (std::abs(w.sum() - b.volume()) > 1e-12 * std::max(1.0, b.volume())) {
      throw std::logic_error("quadrature weights do not sum to the box volume");
    }
  }
}

double DiscretizedSpace::total_states() const {
  double t = 1.0;
  for (Index i = 0; i < size(); ++i) t *= static_cast<double>(states(i));
  return t;
}

namespace {

void check_space(const MixedStateModel& model, const DiscretizedSpace& space) {
  if (space.size() != model.size()) throw std::invalid_argument("space and model differ in site count");
  const double t = space.total_states();
  if (t > DiscretizedSpace::kMaxStates) {
    throw OracleError("oracle enumeration needs " + std::to_string(static_cast<long long>(t)) +
                      " states, above the limit of 1e7");
  }
}

/// Places site i in state k (0 = atom, k >= 1 = node k - 1) and returns log weight.
double place(Field& x, const DiscretizedSpace& space, Index i, Index k) {
  if (k == 0) {
    x.set_ground(i);
    return 0.0;
  }
  const auto& r = space.rule(i);
  x.set_real(i, r.nodes.col(k - 1));
  return std::log(r.weights[k - 1]);
}

/// Enumerates every joint state in a fixed number of chunks. Each chunk owns
/// an accumulator; chunks are merged by the caller in index order, so the
/// result does not depend on the thread count.
template <class Acc, class Visit>
std::vector<Acc> enumerate(const MixedStateModel& model, const DiscretizedSpace& space, int threads, const Acc& init,
                           Visit visit) {
  check_space(model, space);
  const Index n = model.size();
  std::vector<Index> radix(static_cast<std::size_t>(n));
  std::uint64_t total = 1;
  for (Index i = 0; i < n; ++i) {
    radix[static_cast<std::size_t>(i)] = space.states(i);
    total *= static_cast<std::uint64_t>(space.states(i));
  }
  const std::uint64_t chunks = std::min<std::uint64_t>(64, total);
  std::vector<Acc> acc(chunks, init);
  std::atomic<std::uint64_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(1, threads)));

  const auto work = [&](int w) {
    try {
      Field x(model.graph());
      std::vector<Index> digit(static_cast<std::size_t>(n));
      std::vector<double> logw(static_cast<std::size_t>(n));
      for (std::uint64_t c; (c = next.fetch_add(1)) < chunks;) {
        const std::uint64_t lo = total * c / chunks, hi = total * (c + 1) / chunks;
        std::uint64_t rem = lo;
        for (Index i = n; i-- > 0;) {
          const auto r = static_cast<std::uint64_t>(radix[static_cast<std::size_t>(i)]);
          digit[static_cast<std::size_t>(i)] = static_cast<Index>(rem % r);
          rem /= r;
          logw[static_cast<std::size_t>(i)] = place(x, space, i, digit[static_cast<std::size_t>(i)]);
        }
        for (std::uint64_t s = lo; s < hi; ++s) {
          double lw = 0.0;
          for (auto v : logw) lw += v;
          visit(acc[c], x, lw, digit);
          // Odometer step, last site fastest.
          for (Index i = n; i-- > 0;) {
            auto& d = digit[static_cast<std::size_t>(i)];
            d = (d + 1) % radix[static_cast<std::size_t>(i)];
            logw[static_cast<std::size_t>(i)] = place(x, space, i, d);
            if (d != 0) break;
          }
        }
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(chunks)));
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return acc;
}

LogSumExp merged(const std::vector<LogSumExp>& parts) {
  LogSumExp out;
  for (const auto& p : parts) out.merge(p);
  return out;
}

}  // namespace

double exact_log_partition(const MixedStateModel& model, const DiscretizedSpace& space, int threads) {
  auto parts = enumerate(model, space, threads, LogSumExp{},
                         [&](LogSumExp& a, const Field& x, double lw, const std::vector<Index>&) {
                           a.add(lw + model.mixed_energy(x));
                         });
  return merged(parts).value();
}

double exact_partition(const MixedStateModel& model, const DiscretizedSpace& space, int threads) {
  return std::exp(exact_log_partition(model, space, threads));
}

double exact_conditional(Index i, const MixedValue& v, const Field& field, const MixedStateModel& model,
                         const DiscretizedSpace& space) {
  if (space.size() != model.size() || field.size() != model.size()) throw std::invalid_argument("size mismatch");
  if (v.is_label()) throw std::invalid_argument("labels are not states of a real mixed-state field");
  Field x = field;
  LogSumExp norm;
  for (Index k = 0; k < space.states(i); ++k) {
    const double lw = place(x, space, i, k);
    norm.add(lw + model.mixed_energy(x));
  }
  x.set(i, v);
  return std::exp(model.mixed_energy(x) - norm.value());
}

double exact_marginal_atom_prob(Index i, const MixedStateModel& model, const DiscretizedSpace& space, int threads) {
  struct Acc {
    LogSumExp all, atom;
  };
  auto parts = enumerate(model, space, threads, Acc{}, [&](Acc& a, const Field& x, double lw, const std::vector<Index>& d) {
    const double t = lw + model.mixed_energy(x);
    a.all.add(t);
    if (d[static_cast<std::size_t>(i)] == 0) a.atom.add(t);
  });
  LogSumExp all, atom;
  for (const auto& p : parts) {
    all.merge(p.all);
    atom.merge(p.atom);
  }
  return std::exp(atom.value() - all.value());
}

std::vector<double> exact_pattern_probabilities(const MixedStateModel& model, const DiscretizedSpace& space,
                                                int threads) {
  const Index n = model.size();
  if (n > 20) throw OracleError("too many sites for pattern enumeration");
  const std::size_t patterns = std::size_t{1} << n;
  auto parts = enumerate(model, space, threads, std::vector<LogSumExp>(patterns),
                         [&](std::vector<LogSumExp>& a, const Field& x, double lw, const std::vector<Index>& d) {
                           std::size_t p = 0;
                           for (Index i = 0; i < n; ++i)
                             if (d[static_cast<std::size_t>(i)] != 0) p |= std::size_t{1} << i;
                           a[p].add(lw + model.mixed_energy(x));
                         });
  std::vector<LogSumExp> per(patterns);
  LogSumExp all;
  for (const auto& part : parts) {
    for (std::size_t p = 0; p < patterns; ++p) {
      per[p].merge(part[p]);
      all.merge(part[p]);
    }
  }
  std::vector<double> out(patterns);
  for (std::size_t p = 0; p < patterns; ++p) out[p] = std::exp(per[p].value() - all.value());
  return out;
}

FactorizationCheck check_factorization(const MixedStateModel& model, const DiscretizedSpace& space, int threads) {
  struct Sums {
    LogSumExp zm, zd, za;
  };
  auto first = enumerate(model, space, threads, Sums{}, [&](Sums& a, const Field& x, double lw, const std::vector<Index>&) {
    const double vd = model.discrete_energy(x), va = model.continuous_energy(x);
    a.zm.add(lw + vd + va);
    a.zd.add(lw + vd);
    a.za.add(lw + va);
  });
  LogSumExp zm, zd, za;
  for (const auto& p : first) {
    zm.merge(p.zm);
    zd.merge(p.zd);
    za.merge(p.za);
  }
  FactorizationCheck out;
  out.log_zm = zm.value();
  out.log_zd = zd.value();
  out.log_za = za.value();
  const double log_z = out.log_zm - out.log_zd - out.log_za;

  struct Second {
    LogSumExp direct;
    double worst = 0.0;
  };
  auto second = enumerate(model, space, threads, Second{}, [&](Second& a, const Field& x, double lw, const std::vector<Index>&) {
    const double vd = model.discrete_energy(x), va = model.continuous_energy(x);
    const double log_pd = vd - out.log_zd, log_pa = va - out.log_za;
    a.direct.add(lw + log_pd + log_pa);
    const double lhs = model.log_joint_unnormalized(x) - out.log_zm;
    const double r = std::abs(lhs - (log_pd + log_pa - log_z));
    if (!(r <= a.worst)) a.worst = std::isnan(r) ? INFINITY : r;
  });
  LogSumExp direct;
  for (const auto& p : second) {
    direct.merge(p.direct);
    out.state_residual = std::max(out.state_residual, p.worst);
  }
  out.log_z_direct = direct.value();
  out.constant_residual = std::abs(log_z - out.log_z_direct);
  return out;
}

double verify_factorization(const MixedStateModel& model, const DiscretizedSpace& space, int threads) {
  return check_factorization(model, space, threads).residual();
}

}  // namespace msmrf
