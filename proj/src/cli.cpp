#include "msmrf/cli.hpp"

#include "msmrf/clique_decomposition.hpp"
#include "msmrf/estimator.hpp"
#include "msmrf/expression.hpp"
#include "msmrf/field.hpp"
#include "msmrf/model_io.hpp"
#include "msmrf/sampler.hpp"
#include "msmrf/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace msmrf {

namespace {

/// Bad flags, unreadable paths or malformed documents.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_readable(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
}

void check_writable(const std::string& path) {
  if (path.empty()) return;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw InputError("output directory '" + parent.string() + "' does not exist");
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

ModelDocument preset(const std::string& name) {
  ModelDocument doc;
  doc.grid = LatticeShape{64, 64};
  doc.sites = 64 * 64;
  doc.dim = 1;
  doc.ground = RealVector::Zero(1);
  doc.domain = Box::cube(1, -8, 8);
  doc.gaussian = {0.0, 1.0, 0.0};
  if (name == "independent") {
    doc.alpha = 0.0;
    doc.beta = 0.0;
  } else if (name == "pairwise") {
    doc.alpha = -1.5;
    doc.beta = 0.5;
    doc.gaussian = {0.3, 1.0, 0.1};
  } else {
    throw InputError("unknown preset '" + name + "' (expected independent or pairwise)");
  }
  return doc;
}

struct SampleArgs {
  std::string model, preset, out, schedule = "raster";
  std::optional<Index> width, height;
  std::int64_t sweeps = 100, burn_in = 0, thin = 0;
  std::uint64_t seed = 1;
  int threads = 1;
};

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  if (a.model.empty() == a.preset.empty()) throw InputError("sample needs exactly one of --model or --preset");
  if (!a.model.empty()) check_readable(a.model);
  check_writable(a.out);
  ModelDocument doc = a.model.empty() ? preset(a.preset) : parse_model(read_file(a.model));
  if (a.width || a.height) {
    if (!doc.grid) throw InputError("--width/--height need a grid model");
    try {
      doc = doc.resized(a.height.value_or(doc.grid->height), a.width.value_or(doc.grid->width));
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
  SamplerConfig cfg;
  cfg.seed = a.seed;
  cfg.sweeps = a.sweeps;
  cfg.burn_in = a.burn_in;
  cfg.thinning = a.thin;
  cfg.threads = a.threads;
  try {
    cfg.schedule = parse_schedule(a.schedule);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  std::optional<MixedStateModel> model;
  try {
    const auto graph = doc.graph();
    cfg.validate(graph);
    model.emplace(doc.model(graph));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const auto& g = model->graph();
  std::optional<Field> last;
  std::int64_t snapshots = 0;
  double atom_sum = 0.0;
  run_chain(Field(g), *model, cfg, [&](std::int64_t, const Field& f) {
    ++snapshots;
    atom_sum += static_cast<double>(f.ground_count()) / static_cast<double>(f.size());
    last = f;
  });
  double sum = 0.0, sq = 0.0;
  Index count = 0;
  for (Index i = 0; i < last->size(); ++i) {
    if (last->is_ground(i)) continue;
    for (Index k = 0; k < last->dim(i); ++k) {
      const double v = last->coords(i)[k];
      sum += v;
      sq += v * v;
      ++count;
    }
  }
  const double mean = count ? sum / static_cast<double>(count) : 0.0;
  const double var = count > 1 ? (sq - static_cast<double>(count) * mean * mean) / static_cast<double>(count - 1) : 0.0;
  if (!a.out.empty()) write_file(a.out, format_field(*last, g.layout_height(), g.layout_width()));
  out << "sample: " << g.layout_height() << "x" << g.layout_width() << " sites, " << cfg.sweeps << " sweeps, schedule "
      << to_string(cfg.schedule) << ", seed " << cfg.seed << "\n";
  out << "snapshots " << snapshots << "\n";
  out << "atom_fraction " << fmt(last->ground_count() / static_cast<double>(last->size())) << "\n";
  out << "mean_atom_fraction " << fmt(atom_sum / static_cast<double>(snapshots)) << "\n";
  out << "continuous_count " << count << "\n";
  out << "continuous_mean " << fmt(mean) << "\n";
  out << "continuous_variance " << fmt(var) << "\n";
  return kExitOk;
}

struct FitArgs {
  std::string data, model, out;
  std::uint64_t seed = 0;
  bool untied_alpha = false, untied_beta = false, no_beta = false, fixed_continuous = false;
  int max_iterations = 500;
  double tolerance = 1e-6;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  check_readable(a.data);
  if (!a.model.empty()) check_readable(a.model);
  check_writable(a.out);
  const std::string data = read_file(a.data);
  FieldHeader header;
  {
    std::istringstream in(data);
    header = read_field_header(in);
  }
  ModelDocument doc;
  if (a.model.empty()) {
    doc = preset("independent");
    doc.dim = header.dim;
    doc.ground = RealVector::Zero(header.dim);
    doc.domain = Box::cube(header.dim, -8, 8);
  } else {
    doc = parse_model(read_file(a.model));
  }
  if (doc.dim != header.dim) throw InputError("data dimension " + std::to_string(header.dim) + " differs from the model's");
  if (doc.grid) {
    if (doc.grid->height != header.height || doc.grid->width != header.width) {
      try {
        doc = doc.resized(header.height, header.width);
      } catch (const std::invalid_argument& e) {
        throw InputError(std::string("model does not match the data shape: ") + e.what());
      }
    }
  } else if (header.height * header.width != doc.sites) {
    throw InputError("data site count differs from the model's");
  }
  std::optional<SiteGraph> graph;
  std::optional<MixedStateModel> init;
  try {
    graph.emplace(doc.graph());
    init.emplace(doc.model(*graph));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const Field field = parse_field(data, *graph);

  FitOptions opt;
  opt.tie_alpha = !a.untied_alpha;
  opt.tie_beta = !a.untied_beta;
  opt.fit_beta = !a.no_beta;
  opt.fit_continuous = !a.fixed_continuous;
  opt.max_iterations = a.max_iterations;
  opt.tolerance = a.tolerance;
  const auto report = fit(field, *graph, FitInit{init->params(), init->continuous_ptr()}, opt);
  const auto estimate = document_from_fit(doc, report, opt);
  if (!a.out.empty()) {
    write_file(a.out, format_fit_report(estimate, report, FitProvenance{a.seed, a.data, fnv1a_digest(data)}));
  }
  out << "fit: " << header.height << "x" << header.width << " sites, " << field.ground_count() << " at ground\n";
  if (const auto* v = std::get_if<double>(&estimate.alpha)) out << "alpha " << fmt(*v) << "\n";
  if (const auto* v = std::get_if<double>(&estimate.beta)) out << "beta " << fmt(*v) << "\n";
  if (estimate.family == "gaussian-auto") {
    out << "mean " << fmt(estimate.gaussian.mean) << "\n";
    out << "precision " << fmt(estimate.gaussian.precision) << "\n";
    out << "coupling " << fmt(estimate.gaussian.coupling) << "\n";
  }
  out << "pll " << fmt(report.pll) << "\n";
  out << "iterations " << report.iterations << "\n";
  out << "gradient_norm " << fmt(report.gradient_norm) << "\n";
  out << "converged " << (report.converged ? "yes" : "no") << "\n";
  out << "diagnosis " << report.diagnosis << "\n";
  return report.converged ? kExitOk : kExitNotConverged;
}

struct VerifyArgs {
  std::string level = "quick", inject;
  std::uint64_t seed = 1;
  int threads = 1;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  VerifyOptions opt;
  try {
    opt.level = parse_level(a.level);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (!a.inject.empty() && a.inject != "beta-asymmetry") throw InputError("unknown injection '" + a.inject + "'");
  opt.inject_beta_asymmetry = a.inject == "beta-asymmetry";
  opt.seed = a.seed;
  opt.threads = a.threads;
  opt.on_check = [&](const CheckResult& c) { out << format_check(c) << "\n" << std::flush; };
  const auto results = run_verification(opt);
  std::size_t failed = 0;
  for (const auto& c : results) failed += !c.passed();
  out << "verify: " << results.size() << " checks, " << failed << " failed (level " << a.level << ", seed " << a.seed
      << ")\n";
  for (const auto& c : results)
    if (!c.passed()) out << "failed: " << c.name << "\n";
  return failed ? kExitVerifyFailed : kExitOk;
}

struct DecomposeArgs {
  std::string spec, out;
};

int cmd_decompose(const DecomposeArgs& a, std::ostream& out) {
  check_readable(a.spec);
  check_writable(a.out);
  const std::string text = read_file(a.spec);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) line += text[k] == '\n';
    throw InputError("line " + std::to_string(line) + ": malformed JSON: " + e.what());
  }
  const auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.is_object() || !j.contains(key)) throw InputError(std::string("function spec needs '") + key + "'");
    return j[key];
  };
  if (!j.is_object() || !j.contains("msmrf-function") || j["msmrf-function"] != 1) {
    throw InputError("missing or unsupported \"msmrf-function\" version (expected 1)");
  }
  const auto& js = need("sites");
  if (!js.is_number_integer() || js.get<int>() < 1 || js.get<int>() > 4) throw InputError("'sites' must be 1..4");
  const auto n = js.get<std::size_t>();
  std::vector<double> r(n, 0.0);
  if (j.contains("ground")) {
    const auto& g = j["ground"];
    if (g.is_number()) r.assign(n, g.get<double>());
    else if (g.is_array() && g.size() == n && std::all_of(g.begin(), g.end(), [](const auto& v) { return v.is_number(); }))
      for (std::size_t i = 0; i < n; ++i) r[i] = g[i].get<double>();
    else throw InputError("'ground' must be a number or one number per site");
  }
  const auto& jg = need("grids");
  std::vector<std::vector<MixedValue>> grids;
  const auto parse_grid = [](const nlohmann::json& l) {
    if (!l.is_array() || l.empty()) throw InputError("'grids' entries must be nonempty lists of numbers");
    std::vector<MixedValue> out;
    for (const auto& v : l) {
      if (!v.is_number()) throw InputError("'grids' entries must be nonempty lists of numbers");
      out.push_back(MixedValue::real(v.get<double>()));
    }
    return out;
  };
  if (!jg.is_array() || jg.empty()) throw InputError("'grids' must be a list");
  if (jg[0].is_number()) grids.assign(n, parse_grid(jg));
  else {
    if (jg.size() != n) throw InputError("'grids' needs one list per site");
    for (const auto& l : jg) grids.push_back(parse_grid(l));
  }
  const auto& jf = need("function");
  if (!jf.is_string()) throw InputError("'function' must be an expression string");
  Expression expr;
  try {
    expr = Expression::parse(jf.get<std::string>(), n);
  } catch (const ExpressionError& e) {
    throw InputError(std::string("function: ") + e.what());
  }

  std::vector<MixedValue> rv;
  for (double v : r) rv.push_back(MixedValue::real(v));
  GroundVector ground(rv);
  ConfigFunction f = [expr, n](std::span<const MixedValue> x) {
    double buf[4];
    for (std::size_t i = 0; i < n; ++i) buf[i] = x[i].as_real()[0];
    return expr(std::span<const double>(buf, n));
  };
  PotentialSet pots;
  try {
    pots = decompose(f, ground);
  } catch (const DecompositionError& e) {
    if (e.kind() == DecompositionError::Kind::nonzero_at_ground) throw InputError(e.what());
    throw;
  }
  // Reconstruction over the full product grid before anything is written.
  double worst = 0.0;
  Configuration x(rv.begin(), rv.end());
  std::vector<std::size_t> digit(n, 0);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) x[i] = grids[i][digit[i]];
    const double d = std::abs(reconstruct(pots, x) - f(x));
    worst = std::isnan(d) || d > worst ? (std::isnan(d) ? INFINITY : d) : worst;
    bool carry = true;
    for (std::size_t k = n; carry && k-- > 0;) {
      if (++digit[k] < grids[k].size()) carry = false;
      else digit[k] = 0;
    }
    if (carry) break;
  }
  const auto tables = tabulate(pots, ground, grids);
  out << "decompose: " << n << " sites, " << tables.size() << " cliques, reconstruction residual " << fmt(worst) << "\n";
  for (const auto& t : tables) {
    double m = 0.0;
    for (double v : t.values) m = std::max(m, std::abs(v));
    out << "clique " << t.subset.to_string() << " max_abs " << fmt(m) << "\n";
  }
  if (!(worst <= 1e-10)) {
    out << "reconstruction residual exceeds 1e-10; nothing written\n";
    return kExitRuntimeError;
  }
  if (!a.out.empty()) write_file(a.out, format_potential_tables(tables, n));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed-state Markov random fields: sampling, fitting, verification and decomposition"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "msmrf 1.0");

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Gibbs-sample a field from a model");
  sample->add_option("--model", sa.model, "Model document");
  sample->add_option("--preset", sa.preset, "Built-in model: independent or pairwise");
  sample->add_option("--out", sa.out, "Write the final snapshot here");
  sample->add_option("--width", sa.width, "Grid width override");
  sample->add_option("--height", sa.height, "Grid height override");
  sample->add_option("--sweeps", sa.sweeps, "Number of sweeps")->capture_default_str();
  sample->add_option("--burn-in", sa.burn_in, "Sweeps discarded before snapshots")->capture_default_str();
  sample->add_option("--thin", sa.thin, "Snapshot every N sweeps after burn-in; 0 keeps the last")->capture_default_str();
  sample->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
  sample->add_option("--schedule", sa.schedule, "raster or checkerboard")->capture_default_str();
  sample->add_option("--threads", sa.threads, "Worker cap")->capture_default_str();

  FitArgs fa;
  auto* fitc = app.add_subcommand("fit", "Maximum pseudo-likelihood fit to a field");
  fitc->add_option("--data", fa.data, "Field file")->required();
  fitc->add_option("--model", fa.model, "Initial model document");
  fitc->add_option("--out", fa.out, "Write the fit report here");
  fitc->add_option("--seed", fa.seed, "Seed recorded in the report");
  fitc->add_flag("--untied-alpha", fa.untied_alpha, "One alpha per site");
  fitc->add_flag("--untied-beta", fa.untied_beta, "One beta per pair");
  fitc->add_flag("--no-beta", fa.no_beta, "Keep beta at its initial value");
  fitc->add_flag("--fixed-continuous", fa.fixed_continuous, "Keep the continuous parameters fixed");
  fitc->add_option("--max-iter", fa.max_iterations, "Iteration cap")->capture_default_str();
  fitc->add_option("--tol", fa.tolerance, "Gradient norm tolerance")->capture_default_str();
  std::optional<Index> ignored_w, ignored_h;
  fitc->add_option("--width", ignored_w, "Accepted for symmetry with sample; the data header decides");
  fitc->add_option("--height", ignored_h, "Accepted for symmetry with sample; the data header decides");
  int fit_threads = 1;
  fitc->add_option("--threads", fit_threads, "Worker cap");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run the oracle and property battery");
  verify->add_option("--level", va.level, "quick or full")->capture_default_str();
  verify->add_option("--seed", va.seed, "Random seed")->capture_default_str();
  verify->add_option("--threads", va.threads, "Worker cap")->capture_default_str();
  verify->add_option("--inject", va.inject)->group("");

  DecomposeArgs da;
  auto* dec = app.add_subcommand("decompose", "Clique decomposition of a function vanishing at ground");
  dec->add_option("--spec", da.spec, "Function spec document")->required();
  dec->add_option("--out", da.out, "Write the potential tables here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "msmrf 1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (*sample) return cmd_sample(sa, out);
    if (*fitc) return cmd_fit(fa, out);
    if (*verify) return cmd_verify(va, out);
    if (*dec) return cmd_decompose(da, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const FieldFormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ModelFormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitInputError;
}

}  // namespace msmrf
