#include "cli.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "quadm/analysis.hpp"
#include "quadm/error.hpp"
#include "quadm/pointsets.hpp"
#include "quadm/quadrature.hpp"
#include "quadm/special.hpp"

namespace quadm::cli {

namespace {

const std::vector<std::string> kKeys = {"manifold", "family", "method", "in",     "out",   "csv",
                                        "alpha",    "beta",   "q",      "r",      "r2",    "tol",
                                        "eps",      "n",      "rs",     "radii",  "levels", "seeds",
                                        "centers",  "grid",   "budget", "seed",   "steps"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

double as_double(const Json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return INFINITY;
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == s.size() && !s.empty()) return x;
  }
  throw InvalidArgument(key + ": expected a number");
}

std::vector<double> as_list(const Json& v, const std::string& key) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(as_double(e, key));
  } else if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(as_double(Json(item), key));
  } else {
    out.push_back(as_double(v, key));
  }
  return out;
}

std::size_t as_size(const Json& v, const std::string& key) {
  const double x = as_double(v, key);
  if (!(x >= 0.0) || x != std::floor(x) || x > 1e15) throw InvalidArgument(key + ": expected a nonnegative integer");
  return static_cast<std::size_t>(x);
}

bool perfect_power(std::size_t n, int d) {
  const auto root = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), 1.0 / d)));
  std::size_t p = 1;
  for (int a = 0; a < d; ++a) p *= root;
  return p == n;
}

PointSet make_points(const ExperimentConfig& c, std::size_t n, std::uint64_t seed) {
  const Manifold m = Manifold::parse(c.manifold);
  GenerateParams gp;
  gp.n = n;
  gp.seed = seed;
  return generate(m, parse_family(c.family), gp);
}

PointSet input_points(const ExperimentConfig& c) {
  if (!c.in.empty()) return load_pointset(c.in);
  return make_points(c, c.n.front(), c.seed);
}

Json envelope(const ExperimentConfig& c, Json report) {
  Json j;
  j["version"] = version();
  j["config_hash"] = hash_of(c);
  j["task"] = c.task;
  j["config"] = to_json(c);
  j["report"] = std::move(report);
  return j;
}

std::string csv_comment(const ExperimentConfig& c) { return "# quadm " + version() + " config " + hash_of(c) + "\n"; }

std::string csv_head(const ExperimentConfig& c, const std::string& columns) { return csv_comment(c) + columns + "\n"; }

void write_json(const std::string& path, const Json& j) {
  if (!path.empty()) write_text(path, dump(j) + "\n");
}

// Manifold of the run: the input file's when one is given.
Manifold run_manifold(const ExperimentConfig& c) {
  if (!c.in.empty()) return load_pointset(c.in).manifold;
  return Manifold::parse(c.manifold);
}

std::vector<WceMethod> methods_of(const std::string& m) {
  if (m == "all") return {WceMethod::Spectral, WceMethod::Kernel, WceMethod::Heat};
  return {parse_method(m)};
}

WceReport wce_with(const PointSet& ps, double alpha, const std::string& method, double tol) {
  if (method == "auto") return wce_auto(ps, alpha);
  WceOptions opt;
  opt.tol = tol;
  return wce(ps, alpha, parse_method(method), opt);
}

}  // namespace

const std::vector<std::string>& tasks() {
  static const std::vector<std::string> t = {"gen", "wce",      "disc",    "rule", "qnorm",
                                             "bound", "transfer", "perturb", "scale"};
  return t;
}

ExperimentConfig from_json(const Json& j, std::vector<std::string>* violations) {
  ExperimentConfig c;
  if (!j.is_object()) {
    if (violations) violations->push_back("config: expected a JSON object");
    return c;
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const Json& v = it.value();
    try {
      if (k == "task") c.task = v.get<std::string>();
      else if (k == "manifold") c.manifold = v.get<std::string>();
      else if (k == "family") c.family = v.get<std::string>();
      else if (k == "method") c.method = v.get<std::string>();
      else if (k == "in") c.in = v.get<std::string>();
      else if (k == "out") c.out = v.get<std::string>();
      else if (k == "csv") c.csv = v.get<std::string>();
      else if (k == "alpha") c.alpha = as_double(v, k);
      else if (k == "beta") c.beta = as_double(v, k);
      else if (k == "q") c.q = as_double(v, k);
      else if (k == "r") c.r = as_double(v, k);
      else if (k == "r2") c.r2 = as_double(v, k);
      else if (k == "tol") c.tol = as_double(v, k);
      else if (k == "eps") c.eps = as_double(v, k);
      else if (k == "n") {
        c.n.clear();
        for (double x : as_list(v, k)) c.n.push_back(as_size(Json(x), k));
      } else if (k == "rs") c.rs = as_list(v, k);
      else if (k == "radii") c.radii = as_list(v, k);
      else if (k == "levels") c.levels = as_list(v, k);
      else if (k == "seeds") c.seeds = as_size(v, k);
      else if (k == "centers") c.centers = as_size(v, k);
      else if (k == "grid") c.grid = as_size(v, k);
      else if (k == "budget") c.budget = as_size(v, k);
      else if (k == "seed") c.seed = as_size(v, k);
      else if (k == "steps") c.steps = static_cast<int>(as_size(v, k));
      else if (violations) violations->push_back(k + ": unknown field");
    } catch (const std::exception& e) {
      if (violations) violations->push_back(dynamic_cast<const InvalidArgument*>(&e) ? e.what() : k + ": wrong type");
    }
  }
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["task"] = c.task;
  j["manifold"] = c.manifold;
  if (!c.family.empty()) j["family"] = c.family;
  j["method"] = c.method;
  if (!c.in.empty()) {
    j["in"] = c.in;
    try {
      j["in_digest"] = config_hash(read_text(c.in));
    } catch (const std::exception&) {
    }
  }
  auto put = [&](const char* k, double v) {
    if (!std::isnan(v)) j[k] = std::isinf(v) ? Json("inf") : Json(v);
  };
  put("alpha", c.alpha);
  put("beta", c.beta);
  put("q", c.q);
  put("r", c.r);
  put("r2", c.r2);
  put("tol", c.tol);
  put("eps", c.eps);
  j["n"] = c.n;
  j["rs"] = c.rs;
  j["radii"] = c.radii;
  j["levels"] = c.levels;
  j["seeds"] = c.seeds;
  j["centers"] = c.centers;
  j["grid"] = c.grid;
  j["budget"] = c.budget;
  j["seed"] = c.seed;
  j["steps"] = c.steps;
  return j;
}

std::string hash_of(const ExperimentConfig& c) { return config_hash(dump(to_json(c), 0)); }

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> v;
  const auto& t = tasks();
  if (std::find(t.begin(), t.end(), c.task) == t.end()) {
    v.push_back("task: must be one of gen, wce, disc, rule, qnorm, bound, transfer, perturb, scale");
    return v;
  }
  Manifold m;
  try {
    m = c.in.empty() || c.task == "gen" || c.task == "rule" || c.task == "scale" ? Manifold::parse(c.manifold)
                                                                                   : run_manifold(c);
  } catch (const std::exception& e) {
    v.push_back((c.in.empty() ? "manifold: " : "in: ") + std::string(e.what()));
    return v;
  }
  const int d = m.dim;
  const double half = 0.5 * d;
  auto need_alpha = [&] {
    if (std::isnan(c.alpha)) v.push_back("alpha: required");
    else if (!(c.alpha > half)) v.push_back("alpha must exceed d/2 = " + num(half));
  };
  auto check_family = [&](bool allow_rule) {
    if (c.family.empty()) {
      v.push_back("family: required");
      return false;
    }
    if (allow_rule && c.family == "exact_rule") return true;
    try {
      const Family f = parse_family(c.family);
      if ((f == Family::Fibonacci || f == Family::LpsOrbit) && !m.is_sphere())
        v.push_back("family: " + c.family + " needs the sphere");
      if (f == Family::Lattice && !m.is_torus()) v.push_back("family: lattice needs a torus");
      for (std::size_t n : c.n) {
        if (f == Family::LpsOrbit && n > 8) v.push_back("n: lps_orbit word length must be at most 8");
        if (f != Family::LpsOrbit && n < 1) v.push_back("n: must be at least 1");
        if (f == Family::Jittered && m.is_torus() && !perfect_power(n, d))
          v.push_back("N must be a perfect d-th power (torus cube partition), got " + std::to_string(n));
      }
    } catch (const InvalidArgument& e) {
      v.push_back(std::string("family: ") + e.what());
      return false;
    }
    return true;
  };
  auto need_points = [&] {
    if (!c.in.empty()) return;
    if (c.n.empty()) v.push_back("n: required when no --in file is given");
    check_family(false);
  };
  auto check_method = [&](bool allow_all) {
    if (c.method == "auto" || (allow_all && c.method == "all")) return;
    try {
      parse_method(c.method);
    } catch (const InvalidArgument&) {
      v.push_back("method: must be spectral, kernel, heat" + std::string(allow_all ? ", all" : "") + " or auto");
    }
  };
  if (!(c.tol > 0.0)) v.push_back("tol: must be positive");

  if (c.task == "gen") {
    if (c.n.empty()) v.push_back("n: required");
    check_family(false);
    if (c.steps > 0) need_alpha();
  } else if (c.task == "wce") {
    need_points();
    need_alpha();
    check_method(true);
  } else if (c.task == "disc") {
    need_points();
    if (c.radii.empty() && c.levels.empty()) v.push_back("radii or levels: one is required");
    if (!c.radii.empty() && !c.levels.empty()) v.push_back("radii and levels: give only one");
    for (double s : c.radii) {
      if (m.is_torus() && !(s > 0.0 && s <= 0.5)) v.push_back("radii: torus radii must lie in (0, 1/2]");
      if (m.is_sphere() && !(s > 0.0 && s < kPi)) v.push_back("radii: sphere radii must lie in (0, pi)");
    }
    if (!c.levels.empty()) {
      if (!m.is_sphere()) v.push_back("levels: level-set discrepancy needs the sphere; use radii on the torus");
      if (!(c.alpha > 0.0)) v.push_back("alpha: must be positive for level sets");
    }
    if (c.centers < 1) v.push_back("centers: must be at least 1");
  } else if (c.task == "rule") {
    const bool has_r = !std::isnan(c.r), has_r2 = !std::isnan(c.r2);
    if (has_r == has_r2) v.push_back("r or r2: give exactly one");
    if (has_r && !(c.r > 0.0)) v.push_back("r: must be positive");
    if (has_r2 && !(c.r2 > 0.0)) v.push_back("r2: must be positive");
  } else if (c.task == "qnorm") {
    need_points();
    if (!(c.q >= 1.0)) v.push_back("q: must lie in [1, inf]");
    const double need = std::isinf(c.q) ? d : d * (1.0 - 1.0 / c.q);
    if (std::isnan(c.alpha)) v.push_back("alpha: required");
    else if (!(c.alpha > need)) v.push_back("alpha must exceed d(1 - 1/q) = " + num(need));
    const std::size_t floor = m.is_torus() ? 8 : 64;
    if (c.grid < floor) v.push_back("grid: must be at least " + std::to_string(floor));
  } else if (c.task == "bound") {
    need_points();
    if (!m.is_torus()) v.push_back("manifold: adversarial bound needs a torus");
    need_alpha();
    if (!(c.eps > 0.0 && c.eps <= 0.25)) v.push_back("eps: must lie in (0, 1/4]");
  } else if (c.task == "transfer") {
    need_points();
    need_alpha();
    if (std::isnan(c.beta)) v.push_back("beta: required");
    else if (!(c.beta > half && c.beta <= c.alpha)) v.push_back("beta must lie in (d/2, alpha]");
  } else if (c.task == "perturb") {
    need_points();
    need_alpha();
    if (std::isnan(c.beta) || !(c.beta > c.alpha)) v.push_back("beta must exceed alpha");
    if (!(c.r > 0.0)) v.push_back("r: band of the input rule required");
  } else if (c.task == "scale") {
    need_alpha();
    check_method(false);
    if (c.family == "exact_rule") {
      if (c.rs.size() < 3) v.push_back("rs: at least 3 bands required");
      for (double x : c.rs)
        if (!(x > 0.0)) v.push_back("rs: bands must be positive");
    } else {
      check_family(true);
      if (c.n.size() < 3) v.push_back("n: at least 3 sizes required");
    }
    if (c.seeds < 1) v.push_back("seeds: must be at least 1");
  }
  return v;
}

RunResult run(const ExperimentConfig& c) {
  RunResult res;
  const auto violations = validate(c);
  if (!violations.empty()) {
    res.status = 2;
    res.summary = "invalid config: " + violations.front();
    res.report = {{"violations", violations}};
    return res;
  }
  const std::string hash = hash_of(c);
  try {
    std::ostringstream sum;
    sum.precision(6);
    if (c.task == "gen") {
      PointSet ps = make_points(c, c.n.front(), c.seed);
      if (c.steps > 0) ps = minimize_energy(ps, c.alpha, c.steps).best;
      ps.provenance["config_hash"] = hash;
      ps.provenance["version"] = version();
      res.report = to_json(ps);
      write_json(c.out, res.report);
      if (!c.csv.empty()) write_text(c.csv, csv_comment(c) + pointset_csv(ps));
      sum << "gen family=" << c.family << " N=" << ps.size() << " hash=" << hash;
    } else if (c.task == "rule") {
      const Manifold m = Manifold::parse(c.manifold);
      RuleOptions opt;
      opt.tol = c.tol;
      opt.seed = c.seed;
      opt.candidate_budget = c.budget;
      PointSet ps = std::isnan(c.r) ? build_exact_rule_sq(m, c.r2, opt) : build_exact_rule(m, c.r, opt);
      ps.provenance["config_hash"] = hash;
      ps.provenance["version"] = version();
      res.report = to_json(ps);
      write_json(c.out, res.report);
      if (!c.csv.empty()) write_text(c.csv, csv_comment(c) + pointset_csv(ps));
      sum << "rule N=" << ps.size() << " residual=" << ps.provenance.value("residual", 0.0) << " hash=" << hash;
    } else if (c.task == "wce") {
      const PointSet ps = input_points(c);
      Json reps = Json::array();
      std::vector<WceReport> all;
      if (c.method == "all" || c.method == "auto") {
        for (auto meth : (c.method == "all" ? methods_of("all") : std::vector<WceMethod>{}))
          all.push_back(wce(ps, c.alpha, meth, WceOptions{c.tol, 400'000}));
        if (c.method == "auto") all.push_back(wce_auto(ps, c.alpha));
      } else {
        all.push_back(wce_with(ps, c.alpha, c.method, c.tol));
      }
      for (const auto& r : all) reps.push_back(to_json(r));
      Json rep{{"reports", reps}};
      const bool agree = routes_agree(all);
      if (all.size() > 1) rep["agree"] = agree;
      res.report = envelope(c, rep);
      write_json(c.out, res.report);
      if (!c.csv.empty()) {
        std::string t = csv_head(c, "method,value,tail_bound");
        for (const auto& r : all)
          t += method_name(r.method) + "," + format_double(r.value) + "," + format_double(r.tail_bound) + "\n";
        write_text(c.csv, t);
      }
      for (const auto& r : all)
        sum << "wce method=" << method_name(r.method) << " value=" << r.value << " tail=" << r.tail_bound << " ";
      if (all.size() > 1) sum << "agree=" << (agree ? "yes" : "no") << " ";
      sum << "hash=" << hash;
      if (all.size() > 1 && !agree) res.status = 1;
    } else if (c.task == "disc") {
      const PointSet ps = input_points(c);
      std::vector<double> radii;
      std::vector<double> sup;
      Json rep;
      if (!c.levels.empty()) {
        const auto ls = levelset_discrepancy(ps, c.alpha, c.levels, c.centers);
        rep = to_json(ls);
        radii = ls.cap_radius;
        sup = ls.per_level.sup_disc;
        sum << "disc levels=" << c.levels.size() << " integrated=" << ls.integrated << " regime=" << ls.regime;
      } else {
        const auto d = cap_discrepancy(ps, c.centers, c.radii);
        rep = to_json(d);
        if (!std::isnan(c.r)) rep["l7_constant"] = l7_constant(d, ps.manifold.dim, c.r);
        radii = d.radii;
        sup = d.sup_disc;
        sum << "disc max=" << *std::max_element(sup.begin(), sup.end());
        if (!std::isnan(c.r)) sum << " C=" << rep["l7_constant"].get<double>();
      }
      res.report = envelope(c, rep);
      write_json(c.out, res.report);
      if (!c.csv.empty()) {
        std::string t = csv_head(c, "radius,sup_disc");
        for (std::size_t k = 0; k < radii.size(); ++k) t += format_double(radii[k]) + "," + format_double(sup[k]) + "\n";
        write_text(c.csv, t);
      }
      sum << " hash=" << hash;
    } else if (c.task == "qnorm") {
      const auto q = qnorm_energy(input_points(c), c.alpha, c.q, c.grid);
      res.report = envelope(c, to_json(q));
      write_json(c.out, res.report);
      sum << "qnorm value=" << q.value << " refinement_delta=" << q.refinement_delta << " hash=" << hash;
    } else if (c.task == "bound") {
      const auto a = adversarial_bound(input_points(c), c.alpha, c.eps, c.seed);
      res.report = envelope(c, to_json(a));
      write_json(c.out, res.report);
      sum << "bound error=" << a.error << " norm=" << a.sobolev_norm << " ratio=" << a.ratio << " hash=" << hash;
    } else if (c.task == "transfer") {
      const auto t = alpha_transfer_check(input_points(c), c.alpha, c.beta);
      res.report = envelope(c, to_json(t));
      write_json(c.out, res.report);
      sum << "transfer constant=" << t.constant << " monotone=" << (t.monotone ? "yes" : "no") << " hash=" << hash;
    } else if (c.task == "perturb") {
      const auto p = perturbation_experiment(input_points(c), c.alpha, c.beta, c.r);
      res.report = envelope(c, to_json(p));
      write_json(c.out, res.report);
      sum << "perturb delta=" << p.delta << (p.clamped ? " (clamped)" : "") << " wce_beta=" << p.wce_beta
          << " hash=" << hash;
    } else if (c.task == "scale") {
      const Manifold m = Manifold::parse(c.manifold);
      const bool rules = c.family == "exact_rule";
      std::vector<double> abscissa;
      if (rules) abscissa = c.rs;
      else
        for (std::size_t n : c.n) abscissa.push_back(static_cast<double>(n));
      std::string t = csv_head(c, "abscissa,seed,value");
      std::vector<double> means;
      std::vector<std::uint64_t> seeds;
      for (std::size_t s = 0; s < c.seeds; ++s) seeds.push_back(c.seed + s);
      for (std::size_t i = 0; i < abscissa.size(); ++i) {
        std::vector<double> vals;
        for (auto sd : seeds) {
          PointSet ps;
          if (rules) {
            RuleOptions opt;
            opt.tol = c.tol;
            opt.seed = sd;
            opt.candidate_budget = c.budget;
            ps = build_exact_rule(m, abscissa[i], opt);
          } else {
            ps = make_points(c, c.n[i], sd);
          }
          const double v = wce_with(ps, c.alpha, c.method, c.tol).value;
          vals.push_back(v);
          t += format_double(abscissa[i]) + "," + std::to_string(sd) + "," + format_double(v) + "\n";
        }
        means.push_back(pairwise_sum(vals) / static_cast<double>(vals.size()));
      }
      auto fit = scaling_fit(abscissa, means);
      fit.seeds = seeds;
      res.report = envelope(c, to_json(fit));
      write_json(c.out, res.report);
      if (!c.csv.empty()) write_text(c.csv, t);
      sum << "scale slope=" << fit.slope << " se=" << fit.slope_se << " hash=" << hash;
    }
    res.summary = sum.str();
  } catch (const InvalidArgument& e) {
    res.status = 2;
    res.summary = std::string("invalid input: ") + e.what();
  } catch (const ResourceError& e) {
    res.status = 1;
    res.summary = std::string("resource limit: ") + e.what() + " (achieved " + num(e.achieved()) + ")";
  } catch (const InfeasibleError& e) {
    res.status = 1;
    res.summary = std::string("infeasible: ") + e.what() + " (residual " + num(e.residual()) + ")";
  } catch (const std::exception& e) {
    res.status = 1;
    res.summary = std::string("failure: ") + e.what();
  }
  return res;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"quad: quadrature error experiments on the torus and the sphere"};
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::string> config_file;
  const std::map<std::string, std::string> about = {
      {"gen", "generate a point set"},
      {"wce", "worst-case error by the spectral, kernel or heat route"},
      {"disc", "cap/ball or kernel level-set discrepancy"},
      {"rule", "positive exact quadrature rule below a band"},
      {"qnorm", "L^q norm of the error representer on a grid"},
      {"bound", "adversarial lower-bound function on the torus"},
      {"transfer", "WCE at a lower smoothness from an exact rule"},
      {"perturb", "move one node of an exact rule and remeasure"},
      {"scale", "WCE over sizes or bands with a log-log fit"}};
  for (const auto& task : tasks()) {
    auto* sub = app.add_subcommand(task, about.at(task));
    auto& vals = raw[task];
    sub->add_option("--config", config_file[task], "JSON config; flags override it");
    for (const auto& k : kKeys) sub->add_option("--" + k, vals[k]);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  const auto* sub = app.get_subcommands().front();
  const std::string task = sub->get_name();
  Json j = Json::object();
  std::vector<std::string> violations;
  if (!config_file[task].empty()) {
    try {
      j = Json::parse(read_text(config_file[task]));
    } catch (const std::exception& e) {
      std::cerr << "error: config: " << e.what() << "\n";
      return 2;
    }
    if (!j.is_object()) j = Json::object();
  }
  for (const auto& k : kKeys)
    if (sub->get_option("--" + k)->count() > 0) j[k] = raw[task][k];
  j["task"] = task;
  const ExperimentConfig c = from_json(j, &violations);
  for (const auto& v : validate(c)) violations.push_back(v);
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "error: " << v << "\n";
    return 2;
  }
  const RunResult r = run(c);
  (r.status == 0 ? std::cout : std::cerr) << r.summary << "\n";
  return r.status;
}

}  // namespace quadm::cli
