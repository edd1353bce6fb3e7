#include "quadm/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "quadm/error.hpp"

namespace quadm {

std::string version() { return QUADM_VERSION; }

std::string format_double(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "NaN" : (x > 0 ? "Infinity" : "-Infinity");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void emit(const Json& j, int indent, int depth, std::string& out) {
  const auto pad = [&](int k) {
    if (indent > 0) out += '\n' + std::string(static_cast<std::size_t>(indent * k), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        pad(depth + 1);
        out += Json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        emit(it.value(), indent, depth + 1, out);
      }
      pad(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // numeric arrays stay on one line
      bool flat = true;
      for (const auto& v : j) flat = flat && v.is_primitive();
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) pad(depth + 1);
        emit(v, indent, depth + 1, out);
      }
      if (!flat) pad(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      // non-finite values are not JSON; store them as strings
      out += std::isfinite(x) ? format_double(x) : Json(format_double(x)).dump();
      return;
    }
    default:
      out += j.dump();
  }
}

void check_array(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    throw InvalidArgument(std::string("PointSet JSON needs array field '") + key + "'");
}

}  // namespace

std::string dump(const Json& j, int indent) {
  std::string out;
  emit(j, indent, 0, out);
  return out;
}

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json manifold_json(const Manifold& m) {
  return {{"kind", m.is_torus() ? "torus" : "sphere"}, {"dim", m.dim}};
}

Manifold manifold_from_json(const Json& j) {
  if (j.is_string()) return Manifold::parse(j.get<std::string>());
  if (!j.is_object() || !j.contains("kind")) throw InvalidArgument("manifold needs {kind, dim}");
  const auto kind = j.at("kind").get<std::string>();
  const int dim = j.value("dim", kind == "sphere" ? 2 : 1);
  return Manifold::parse(kind + ":" + std::to_string(dim));
}

Json to_json(const PointSet& ps) {
  Json j;
  j["manifold"] = manifold_json(ps.manifold);
  Json nodes = Json::array();
  for (const auto& p : ps.nodes) {
    Json row = Json::array();
    for (int a = 0; a < ps.manifold.coords(); ++a) row.push_back(p[a]);
    nodes.push_back(row);
  }
  j["nodes"] = nodes;
  j["weights"] = ps.weights;
  j["provenance"] = ps.provenance;
  return j;
}

PointSet pointset_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("manifold")) throw InvalidArgument("PointSet JSON needs 'manifold'");
  const Manifold m = manifold_from_json(j["manifold"]);
  check_array(j, "nodes");
  check_array(j, "weights");
  std::vector<Point> nodes;
  for (const auto& row : j["nodes"]) {
    if (!row.is_array() || static_cast<int>(row.size()) != m.coords())
      throw InvalidArgument("node has " + std::to_string(row.size()) + " coordinates, expected " +
                            std::to_string(m.coords()));
    std::vector<double> c;
    for (const auto& v : row) c.push_back(v.get<double>());
    Point p;
    for (int a = 0; a < m.coords(); ++a) p[a] = c[static_cast<std::size_t>(a)];
    validate_point(m, p);
    nodes.push_back(p);
  }
  std::vector<double> w = j["weights"].get<std::vector<double>>();
  PointSet ps = make_pointset(m, std::move(nodes), std::move(w));
  if (j.contains("provenance")) ps.provenance = j["provenance"];
  return ps;
}

std::string pointset_csv(const PointSet& ps) {
  std::string out;
  const char* names[3] = {"x0", "x1", "x2"};
  for (int a = 0; a < ps.manifold.coords(); ++a) out += std::string(names[a]) + ",";
  out += "weight\n";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (int a = 0; a < ps.manifold.coords(); ++a) out += format_double(ps.nodes[i][a]) + ",";
    out += format_double(ps.weights[i]) + "\n";
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write '" + path + "'");
  f << text;
  if (!f) throw InvalidArgument("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot read '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void save_pointset(const PointSet& ps, const std::string& path) { write_text(path, dump(to_json(ps)) + "\n"); }

PointSet load_pointset(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
  }
  return pointset_from_json(j);
}

Json to_json(const Partition& p) {
  Json cells = Json::array();
  for (const auto& c : p.cells) {
    Json rep = Json::array();
    for (int a = 0; a < p.manifold.coords(); ++a) rep.push_back(c.representative[a]);
    cells.push_back({{"representative", rep},
                     {"measure", c.measure},
                     {"diameter", c.diameter},
                     {"lo", c.lo},
                     {"hi", c.hi}});
  }
  Json j{{"manifold", manifold_json(p.manifold)},
         {"diameter_constant", p.diameter_constant},
         {"per_axis", p.per_axis},
         {"collar_theta", p.collar_theta},
         {"collar_count", p.collar_count},
         {"collar_first", p.collar_first},
         {"cells", cells}};
  return j;
}

Json to_json(const SpectrumSlice& s) {
  Json shells = Json::array();
  for (const auto& sh : s.shells) {
    Json reps = Json::array();
    for (const auto& k : sh.reps) reps.push_back(k);
    shells.push_back({{"lambda", sh.lambda}, {"key", sh.key}, {"multiplicity", sh.multiplicity}, {"reps", reps}});
  }
  return {{"manifold", manifold_json(s.manifold)},
          {"cutoff", s.cutoff},
          {"cutoff_sq", s.cutoff_sq},
          {"basis_size", s.basis_size},
          {"shells", shells}};
}

Json to_json(const WceReport& r) {
  return {{"alpha", r.alpha},         {"method", method_name(r.method)}, {"value", r.value},
          {"value_sq", r.value_sq},   {"lower_sq", r.lower_sq},          {"upper_sq", r.upper_sq},
          {"cutoff", r.cutoff},       {"tail_bound", r.tail_bound},      {"N", r.n},
          {"terms", r.terms}};
}

Json to_json(const QnormReport& r) {
  return {{"alpha", r.alpha},
          {"q", std::isinf(r.q) ? Json("inf") : Json(r.q)},
          {"value", r.value},
          {"grid", r.grid},
          {"coarse_value", r.coarse_value},
          {"coarse_grid", r.coarse_grid},
          {"refinement_delta", r.refinement_delta}};
}

Json to_json(const DiscrepancyReport& r) {
  return {{"family", r.family},
          {"centers", r.centers},
          {"radii", r.radii},
          {"sup_disc", r.sup_disc},
          {"lower_estimate", r.lower_estimate}};
}

Json to_json(const LevelSetReport& r) {
  return {{"per_level", to_json(r.per_level)}, {"levels", r.levels},         {"cap_radius", r.cap_radius},
          {"integrated", r.integrated},        {"q", r.q},                   {"regime", r.regime},
          {"expected_rate", r.expected_rate}};
}

Json to_json(const AdversarialReport& r) {
  return {{"error", r.error},   {"sobolev_norm", r.sobolev_norm},     {"ratio", r.ratio},
          {"balls", r.balls},   {"radius", r.radius},                 {"grid", r.grid},
          {"aliasing_delta", r.aliasing_delta}, {"shifts_tried", r.shifts_tried}};
}

Json to_json(const TransferReport& r) {
  return {{"alpha", r.alpha},
          {"beta", r.beta},
          {"wce_alpha", r.wce_alpha},
          {"wce_beta", r.wce_beta},
          {"partial_alpha", r.partial_alpha},
          {"partial_beta", r.partial_beta},
          {"monotone", r.monotone},
          {"r_equiv", r.r_equiv},
          {"constant", r.constant}};
}

Json to_json(const PerturbReport& r) {
  return {{"alpha", r.alpha},         {"beta", r.beta},           {"r", r.r},
          {"delta", r.delta},         {"clamped", r.clamped},     {"wce_alpha", r.wce_alpha},
          {"wce_beta", r.wce_beta},   {"base_alpha", r.base_alpha}, {"base_beta", r.base_beta}};
}

Json to_json(const ScalingResult& r) {
  return {{"abscissa", r.abscissa}, {"values", r.values},       {"slope", r.slope},
          {"slope_se", r.slope_se}, {"intercept", r.intercept}, {"seeds", r.seeds}};
}

}  // namespace quadm
