#include "msmrf/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace msmrf {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ModelFormatError(0, what); }

double number(const json& j, const std::string& key) {
  if (!j.is_number()) fail("'" + key + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail("'" + key + "' must be finite");
  return v;
}

Index positive_int(const json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 1) fail("'" + key + "' must be a positive integer");
  return j.get<Index>();
}

Clique parse_key(const std::string& key, std::size_t order, const std::string& table) {
  Clique c;
  const char* p = key.data();
  const char* end = p + key.size();
  while (p < end) {
    Index v = 0;
    auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc()) fail("bad site key '" + key + "' in '" + table + "'");
    c.push_back(v);
    p = res.ptr;
    if (p < end) {
      if (*p != ',') fail("bad site key '" + key + "' in '" + table + "'");
      ++p;
    }
  }
  if (c.size() != order) fail("key '" + key + "' in '" + table + "' must list " + std::to_string(order) + " sites");
  return c;
}

std::string key_of(const Clique& c) {
  std::string s;
  for (auto i : c) s += (s.empty() ? "" : ",") + std::to_string(i);
  return s;
}

std::map<Clique, double> coefficient_table(const json& j, std::size_t order, const std::string& name, Index sites) {
  if (!j.is_object()) fail("'" + name + "' must be a number or an object keyed by site tuples");
  std::map<Clique, double> out;
  for (const auto& [k, v] : j.items()) {
    Clique c;
    try {
      c = canonical_clique(parse_key(k, order, name), sites);
    } catch (const std::invalid_argument& e) {
      fail("key '" + k + "' in '" + name + "': " + e.what());
    } catch (const std::out_of_range& e) {
      fail("key '" + k + "' in '" + name + "': " + e.what());
    }
    if (!out.emplace(c, number(v, name + "[" + k + "]")).second) fail("duplicate key '" + k + "' in '" + name + "'");
  }
  return out;
}

RealVector vector_of(const json& j, Index dim, const std::string& key) {
  if (j.is_number()) return RealVector::Constant(dim, number(j, key));
  if (!j.is_array() || static_cast<Index>(j.size()) != dim) fail("'" + key + "' must be a number or " + std::to_string(dim) + " numbers");
  RealVector v(dim);
  for (Index k = 0; k < dim; ++k) v[k] = number(j[static_cast<std::size_t>(k)], key);
  return v;
}

Box parse_domain(const json& j, Index dim) {
  if (!j.is_array() || j.empty()) fail("'domain' must be a list of [lo, hi] pairs");
  std::vector<std::pair<double, double>> bounds;
  if (j[0].is_number()) {
    if (j.size() != 2) fail("'domain' must be [lo, hi] or a list of [lo, hi] pairs");
    bounds.assign(static_cast<std::size_t>(dim), {number(j[0], "domain"), number(j[1], "domain")});
  } else {
    if (static_cast<Index>(j.size()) != dim) fail("'domain' needs one [lo, hi] pair per dimension");
    for (const auto& b : j) {
      if (!b.is_array() || b.size() != 2) fail("'domain' entries must be [lo, hi] pairs");
      bounds.emplace_back(number(b[0], "domain"), number(b[1], "domain"));
    }
  }
  RealVector lo(dim), hi(dim);
  for (Index k = 0; k < dim; ++k) {
    lo[k] = bounds[static_cast<std::size_t>(k)].first;
    hi[k] = bounds[static_cast<std::size_t>(k)].second;
  }
  try {
    return Box(lo, hi);
  } catch (const std::invalid_argument& e) {
    fail(std::string("'domain': ") + e.what());
  }
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) line += text[k] == '\n';
  return line;
}

}  // namespace

ModelDocument model_from_json(const json& j) {
  if (!j.is_object()) fail("model document must be a JSON object");
  if (!j.contains("msmrf-model") || j["msmrf-model"] != 1) fail("missing or unsupported \"msmrf-model\" version (expected 1)");
  static const std::vector<std::string> known = {"msmrf-model", "grid", "graph", "ground", "alpha", "beta",
                                                 "chi", "continuous", "domain", "fit"};
  for (const auto& [k, _] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) fail("unknown key '" + k + "'");
  }
  ModelDocument doc;
  if (j.contains("grid") == j.contains("graph")) fail("exactly one of 'grid' or 'graph' is required");
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    if (!g.is_object() || !g.contains("height") || !g.contains("width")) fail("'grid' needs height and width");
    doc.grid = LatticeShape{positive_int(g["height"], "grid.height"), positive_int(g["width"], "grid.width")};
    doc.dim = g.contains("dim") ? positive_int(g["dim"], "grid.dim") : 1;
    doc.sites = doc.grid->height * doc.grid->width;
  } else {
    const auto& g = j["graph"];
    if (!g.is_object() || !g.contains("sites")) fail("'graph' needs a site count");
    doc.sites = positive_int(g["sites"], "graph.sites");
    doc.dim = g.contains("dim") ? positive_int(g["dim"], "graph.dim") : 1;
    if (g.contains("cliques")) {
      if (!g["cliques"].is_array()) fail("'graph.cliques' must be a list of site lists");
      for (const auto& c : g["cliques"]) {
        if (!c.is_array()) fail("'graph.cliques' entries must be lists of site indices");
        Clique cl;
        for (const auto& s : c) {
          if (!s.is_number_integer()) fail("'graph.cliques' entries must be lists of site indices");
          cl.push_back(s.get<Index>());
        }
        try {
          doc.cliques.push_back(canonical_clique(cl, doc.sites));
        } catch (const std::exception& e) {
          fail(std::string("'graph.cliques': ") + e.what());
        }
      }
    }
  }
  doc.ground = j.contains("ground") ? vector_of(j["ground"], doc.dim, "ground") : RealVector::Zero(doc.dim);

  if (j.contains("alpha")) {
    const auto& a = j["alpha"];
    if (a.is_number()) {
      doc.alpha = number(a, "alpha");
    } else {
      if (!a.is_array() || static_cast<Index>(a.size()) != doc.sites) fail("'alpha' must be a number or one value per site");
      std::vector<double> v;
      for (const auto& x : a) v.push_back(number(x, "alpha"));
      doc.alpha = std::move(v);
    }
  }
  if (j.contains("beta")) {
    if (j["beta"].is_number()) doc.beta = number(j["beta"], "beta");
    else doc.beta = coefficient_table(j["beta"], 2, "beta", doc.sites);
  }
  if (j.contains("chi")) doc.chi = coefficient_table(j["chi"], 3, "chi", doc.sites);

  if (j.contains("continuous")) {
    const auto& c = j["continuous"];
    if (!c.is_object() || !c.contains("family") || !c["family"].is_string()) fail("'continuous' needs a family name");
    doc.family = c["family"].get<std::string>();
    if (doc.family == "gaussian-auto") {
      const json p = c.contains("params") ? c["params"] : json::object();
      if (!p.is_object()) fail("'continuous.params' must be an object");
      for (const auto& [k, _] : p.items()) {
        if (k != "mean" && k != "precision" && k != "coupling") fail("unknown gaussian-auto parameter '" + k + "'");
      }
      if (p.contains("mean")) doc.gaussian.mean = number(p["mean"], "continuous.params.mean");
      if (p.contains("precision")) doc.gaussian.precision = number(p["precision"], "continuous.params.precision");
      if (p.contains("coupling")) doc.gaussian.coupling = number(p["coupling"], "continuous.params.coupling");
      if (!(doc.gaussian.precision > 0)) fail("'continuous.params.precision' must be positive");
    } else if (doc.family != "uniform") {
      fail("unknown continuous family '" + doc.family + "' (expected gaussian-auto or uniform)");
    }
  }
  doc.domain = j.contains("domain") ? parse_domain(j["domain"], doc.dim) : Box::cube(doc.dim, -8.0, 8.0);
  if (doc.family == "uniform" && !doc.domain.contains(doc.ground)) fail("uniform family needs the ground value inside 'domain'");
  // Coefficients on non-cliques, sites out of range, non-PD precision.
  try {
    (void)doc.model();
  } catch (const std::logic_error& e) {
    fail(e.what());
  }
  return doc;
}

ModelDocument parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelFormatError(line_of(text, e.byte == 0 ? 0 : e.byte - 1), "malformed JSON: " + std::string(e.what()));
  }
  return model_from_json(j);
}

SiteGraph ModelDocument::graph() const {
  const auto dims = std::vector<Index>(static_cast<std::size_t>(sites), dim);
  const auto grounds = std::vector<RealVector>(static_cast<std::size_t>(sites), ground);
  std::vector<Clique> all;
  if (grid) {
    const auto lat = SiteGraph::lattice(grid->height, grid->width, dim, ground);
    all = lat.cliques();
  } else {
    all = cliques;
  }
  const auto add = [&](const Clique& c) {
    if (std::find(all.begin(), all.end(), c) == all.end()) all.push_back(c);
  };
  if (const auto* m = std::get_if<std::map<Clique, double>>(&beta)) {
    for (const auto& [c, _] : *m) add(c);
  }
  for (const auto& [c, _] : chi) add(c);
  return SiteGraph(dims, grounds, std::move(all), grid);
}

MixedStateModel ModelDocument::model(const SiteGraph& g) const {
  if (g.size() != sites) throw std::invalid_argument("graph and model document differ in site count");
  DiscreteParams params(sites);
  if (const auto* a = std::get_if<double>(&alpha)) params.alphas().setConstant(*a);
  else params.alphas() = Eigen::Map<const RealVector>(std::get<std::vector<double>>(alpha).data(), sites);
  if (const auto* b = std::get_if<double>(&beta)) {
    if (*b != 0.0)
      for (const auto& c : g.cliques())
        if (c.size() == 2) params.set_coefficient(c, *b);
  } else {
    for (const auto& [c, v] : std::get<std::map<Clique, double>>(beta)) params.set_coefficient(c, v);
  }
  for (const auto& [c, v] : chi) params.set_coefficient(c, v);
  std::shared_ptr<const ContinuousModel> cont;
  if (family == "uniform") cont = std::make_shared<UniformBoxModel>(g, std::vector<Box>(static_cast<std::size_t>(sites), domain));
  else cont = GaussianAutoModel::isotropic(g, gaussian);
  return MixedStateModel(g, std::move(params), std::move(cont));
}

ModelDocument ModelDocument::resized(Index height, Index width) const {
  if (!grid) throw std::invalid_argument("only grid models can be resized");
  if (!std::holds_alternative<double>(alpha) || !std::holds_alternative<double>(beta) || !chi.empty()) {
    throw std::invalid_argument("resizing needs tied alpha and beta and no triple terms");
  }
  if (height < 1 || width < 1) throw std::invalid_argument("grid dimensions must be positive");
  ModelDocument out = *this;
  out.grid = LatticeShape{height, width};
  out.sites = height * width;
  return out;
}

nlohmann::ordered_json model_to_json(const ModelDocument& doc) {
  nlohmann::ordered_json j;
  j["msmrf-model"] = 1;
  if (doc.grid) {
    j["grid"] = {{"height", doc.grid->height}, {"width", doc.grid->width}, {"dim", doc.dim}};
  } else {
    nlohmann::ordered_json cl = nlohmann::ordered_json::array();
    for (const auto& c : doc.cliques) cl.push_back(c);
    j["graph"] = {{"sites", doc.sites}, {"dim", doc.dim}, {"cliques", cl}};
  }
  if (doc.dim == 1) j["ground"] = doc.ground[0];
  else j["ground"] = std::vector<double>(doc.ground.data(), doc.ground.data() + doc.ground.size());
  if (const auto* a = std::get_if<double>(&doc.alpha)) j["alpha"] = *a;
  else j["alpha"] = std::get<std::vector<double>>(doc.alpha);
  if (const auto* b = std::get_if<double>(&doc.beta)) {
    j["beta"] = *b;
  } else {
    nlohmann::ordered_json t = nlohmann::ordered_json::object();
    for (const auto& [c, v] : std::get<std::map<Clique, double>>(doc.beta)) t[key_of(c)] = v;
    j["beta"] = t;
  }
  if (!doc.chi.empty()) {
    nlohmann::ordered_json t = nlohmann::ordered_json::object();
    for (const auto& [c, v] : doc.chi) t[key_of(c)] = v;
    j["chi"] = t;
  }
  if (doc.family == "uniform") {
    j["continuous"] = {{"family", "uniform"}};
  } else {
    j["continuous"] = {{"family", "gaussian-auto"},
                       {"params", {{"mean", doc.gaussian.mean},
                                   {"precision", doc.gaussian.precision},
                                   {"coupling", doc.gaussian.coupling}}}};
  }
  nlohmann::ordered_json dom = nlohmann::ordered_json::array();
  for (Index k = 0; k < doc.dim; ++k) dom.push_back({doc.domain.lo[k], doc.domain.hi[k]});
  j["domain"] = dom;
  return j;
}

std::string format_model(const ModelDocument& doc) { return model_to_json(doc).dump(2) + "\n"; }

ModelDocument document_from_fit(const ModelDocument& base, const FitReport& report, const FitOptions& options) {
  ModelDocument out = base;
  const auto& p = report.params;
  if (options.tie_alpha) {
    out.alpha = p.alpha(0);
  } else {
    out.alpha = std::vector<double>(p.alphas().data(), p.alphas().data() + p.size());
  }
  if (options.fit_beta) {
    std::map<Clique, double> pairs;
    for (const auto& [c, v] : p.interactions())
      if (c.size() == 2) pairs[c] = v;
    if (options.tie_beta) out.beta = pairs.empty() ? 0.0 : pairs.begin()->second;
    else out.beta = pairs;
  }
  if (const auto* g = dynamic_cast<const GaussianAutoModel*>(report.continuous.get())) {
    if (g->isotropic_params()) out.gaussian = *g->isotropic_params();
  }
  return out;
}

std::string fnv1a_digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_fit_report(const ModelDocument& estimate, const FitReport& report, const FitProvenance& provenance) {
  auto j = model_to_json(estimate);
  j["fit"] = {{"pll", report.pll},
              {"iterations", report.iterations},
              {"converged", report.converged},
              {"gradient_norm", report.gradient_norm},
              {"diagnosis", report.diagnosis},
              {"seed", provenance.seed},
              {"data_file", provenance.data_file},
              {"data_digest", provenance.data_digest}};
  return j.dump(2) + "\n";
}

}  // namespace msmrf
