#include <cmath>
#include <optional>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "quadm/analysis.hpp"
#include "quadm/error.hpp"
#include "quadm/kernels.hpp"
#include "quadm/pointsets.hpp"
#include "quadm/quadrature.hpp"
#include "quadm/serialize.hpp"

namespace py = pybind11;
using namespace quadm;

namespace {

py::object to_py(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null:
      return py::none();
    case Json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case Json::value_t::number_integer:
      return py::int_(j.get<long long>());
    case Json::value_t::number_unsigned:
      return py::int_(j.get<unsigned long long>());
    case Json::value_t::number_float:
      return py::float_(j.get<double>());
    case Json::value_t::string:
      return py::str(j.get<std::string>());
    case Json::value_t::array: {
      py::list l;
      for (const auto& v : j) l.append(to_py(v));
      return l;
    }
    default: {
      py::dict d;
      for (auto it = j.begin(); it != j.end(); ++it) d[py::str(it.key())] = to_py(it.value());
      return d;
    }
  }
}

template <class R>
py::dict report(const R& r) {
  return py::dict(to_py(to_json(r)));
}

Manifold manifold_of(const std::string& s) { return Manifold::parse(s); }

PointSet from_arrays(const std::string& manifold, py::array_t<double, py::array::c_style | py::array::forcecast> nodes,
                     std::vector<double> weights) {
  const Manifold m = manifold_of(manifold);
  const int c = m.coords();
  if (nodes.ndim() == 1 && c == 1) nodes = nodes.reshape({nodes.shape(0), py::ssize_t{1}});
  if (nodes.ndim() != 2 || nodes.shape(1) != c)
    throw InvalidArgument("nodes must have shape (N, " + std::to_string(c) + ")");
  auto a = nodes.unchecked<2>();
  std::vector<Point> pts;
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    Point p;
    for (int k = 0; k < c; ++k) p[k] = a(i, k);
    pts.push_back(p);
  }
  if (weights.empty() && !pts.empty()) weights.assign(pts.size(), 1.0 / static_cast<double>(pts.size()));
  return make_pointset(m, std::move(pts), std::move(weights));
}

py::array_t<double> node_array(const PointSet& ps) {
  const int c = ps.manifold.coords();
  py::array_t<double> out({static_cast<py::ssize_t>(ps.size()), static_cast<py::ssize_t>(c)});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (int k = 0; k < c; ++k) a(static_cast<py::ssize_t>(i), k) = ps.nodes[i][k];
  return out;
}

Point point_of(const Manifold& m, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != m.coords())
    throw InvalidArgument("point needs " + std::to_string(m.coords()) + " coordinates");
  return make_point(m, x);
}

}  // namespace

PYBIND11_MODULE(_quadm, m) {
  m.doc() = "Quadrature worst-case errors on tori and the sphere";
  m.attr("__version__") = version();

  static py::exception<ResourceError> resource_exc(m, "ResourceError", PyExc_RuntimeError);
  static py::exception<InfeasibleError> infeasible_exc(m, "InfeasibleError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ResourceError& e) {
      resource_exc(e.what());
    } catch (const InfeasibleError& e) {
      infeasible_exc(e.what());
    }
  });

  py::class_<PointSet>(m, "PointSet")
      .def(py::init(&from_arrays), py::arg("manifold"), py::arg("nodes"), py::arg("weights") = std::vector<double>{})
      .def_property_readonly("manifold", [](const PointSet& p) { return p.manifold.name(); })
      .def_property_readonly("nodes", &node_array)
      .def_property_readonly("weights", [](const PointSet& p) { return p.weights; })
      .def_property_readonly("provenance", [](const PointSet& p) { return to_py(p.provenance); })
      .def("__len__", &PointSet::size)
      .def("to_json", [](const PointSet& p) { return dump(to_json(p)); })
      .def("to_csv", &pointset_csv)
      .def_static("from_json", [](const std::string& s) { return pointset_from_json(Json::parse(s)); })
      .def("save", [](const PointSet& p, const std::string& path) { save_pointset(p, path); })
      .def_static("load", &load_pointset)
      .def("__repr__", [](const PointSet& p) {
        return "<PointSet " + p.manifold.name() + " N=" + std::to_string(p.size()) + ">";
      });

  m.def(
      "generate",
      [](const std::string& manifold, const std::string& family, std::size_t n, std::uint64_t seed) {
        GenerateParams gp;
        gp.n = n;
        gp.seed = seed;
        return generate(manifold_of(manifold), parse_family(family), gp);
      },
      py::arg("manifold"), py::arg("family"), py::arg("n"), py::arg("seed") = 0);
  m.def(
      "minimize_energy",
      [](const PointSet& ps, double alpha, int steps) {
        auto r = minimize_energy(ps, alpha, steps);
        return py::make_tuple(r.best, r.energies);
      },
      py::arg("ps"), py::arg("alpha"), py::arg("steps"));
  m.def("discrete_energy", &discrete_energy, py::arg("ps"), py::arg("alpha"));

  m.def(
      "build_exact_rule",
      [](const std::string& manifold, std::optional<double> r, std::optional<double> r2, double tol,
         std::uint64_t seed, std::size_t budget) {
        if (r.has_value() == r2.has_value()) throw InvalidArgument("give exactly one of r and r2");
        RuleOptions opt;
        opt.tol = tol;
        opt.seed = seed;
        opt.candidate_budget = budget;
        const Manifold mm = manifold_of(manifold);
        return r ? build_exact_rule(mm, *r, opt) : build_exact_rule_sq(mm, *r2, opt);
      },
      py::arg("manifold"), py::arg("r") = py::none(), py::arg("r2") = py::none(), py::arg("tol") = 1e-10,
      py::arg("seed") = 0, py::arg("budget") = 0);
  m.def(
      "exactness_residual",
      [](const PointSet& ps, std::optional<double> r, std::optional<double> r2) {
        if (r.has_value() == r2.has_value()) throw InvalidArgument("give exactly one of r and r2");
        return r ? exactness_residual(ps, *r) : exactness_residual_sq(ps, *r2);
      },
      py::arg("ps"), py::arg("r") = py::none(), py::arg("r2") = py::none());

  m.def(
      "bessel_eval",
      [](const std::string& manifold, double alpha, const std::vector<double>& x, const std::vector<double>& y) {
        const Manifold mm = manifold_of(manifold);
        return bessel_eval(mm, alpha, point_of(mm, x), point_of(mm, y));
      },
      py::arg("manifold"), py::arg("alpha"), py::arg("x"), py::arg("y"));
  m.def(
      "heat_eval",
      [](const std::string& manifold, double t, const std::vector<double>& x, const std::vector<double>& y) {
        const Manifold mm = manifold_of(manifold);
        return heat_eval(mm, t, point_of(mm, x), point_of(mm, y));
      },
      py::arg("manifold"), py::arg("t"), py::arg("x"), py::arg("y"));

  m.def(
      "wce",
      [](const PointSet& ps, double alpha, const std::string& method, double tol) {
        if (method == "auto") return report(wce_auto(ps, alpha));
        WceOptions opt;
        opt.tol = tol;
        return report(wce(ps, alpha, parse_method(method), opt));
      },
      py::arg("ps"), py::arg("alpha"), py::arg("method") = "auto", py::arg("tol") = 1e-10);
  m.def(
      "qnorm_energy",
      [](const PointSet& ps, double alpha, double q, std::size_t grid) { return report(qnorm_energy(ps, alpha, q, grid)); },
      py::arg("ps"), py::arg("alpha"), py::arg("q") = 2.0, py::arg("grid") = 4096);
  m.def(
      "cap_discrepancy",
      [](const PointSet& ps, const std::vector<double>& radii, std::size_t centers) {
        return report(cap_discrepancy(ps, centers, radii));
      },
      py::arg("ps"), py::arg("radii"), py::arg("centers") = 64);
  m.def(
      "levelset_discrepancy",
      [](const PointSet& ps, double alpha, const std::vector<double>& levels, std::size_t centers) {
        return report(levelset_discrepancy(ps, alpha, levels, centers));
      },
      py::arg("ps"), py::arg("alpha"), py::arg("levels"), py::arg("centers") = 64);
  m.def(
      "adversarial_bound",
      [](const PointSet& ps, double alpha, double eps, std::uint64_t seed) {
        return report(adversarial_bound(ps, alpha, eps, seed));
      },
      py::arg("ps"), py::arg("alpha"), py::arg("eps") = 0.25, py::arg("seed") = 0);
  m.def(
      "alpha_transfer_check",
      [](const PointSet& ps, double alpha, double beta) { return report(alpha_transfer_check(ps, alpha, beta)); },
      py::arg("ps"), py::arg("alpha"), py::arg("beta"));
  m.def(
      "perturbation_experiment",
      [](const PointSet& ps, double alpha, double beta, double r) {
        return report(perturbation_experiment(ps, alpha, beta, r));
      },
      py::arg("ps"), py::arg("alpha"), py::arg("beta"), py::arg("r"));
  m.def(
      "scaling_fit",
      [](const std::vector<double>& x, const std::vector<double>& y) { return report(scaling_fit(x, y)); },
      py::arg("abscissa"), py::arg("values"));
  m.def("jitter_expectation",
        [](const std::string& manifold, std::size_t n, double alpha) {
          return jitter_expectation(manifold_of(manifold), n, alpha);
        },
        py::arg("manifold"), py::arg("n"), py::arg("alpha"));
}
