#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nfpe/errors.hpp"
#include "nfpe/particles.hpp"
#include "nfpe/runner.hpp"
#include "nfpe/semigroup.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_numpy(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

nfpe::DensityField density(const nfpe::SpatialGrid& g, const Array& a) {
  if (static_cast<std::size_t>(a.size()) != g.size())
    throw nfpe::UsageError("array length " + std::to_string(a.size()) + " does not match grid size " +
                           std::to_string(g.size()));
  return {g, std::vector<double>(a.data(), a.data() + a.size())};
}

nfpe::ResolventConfig resolvent_config(double tol, int max_iter) {
  nfpe::ResolventConfig rc;
  rc.tol = tol;
  rc.max_iter = max_iter;
  return rc;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Nonlinear Fokker-Planck solver core";

  static py::exception<nfpe::Error> base(m, "NfpeError", PyExc_RuntimeError);
  static py::exception<nfpe::UsageError> usage(m, "UsageError", base.ptr());
  static py::exception<nfpe::DomainError> domain(m, "DomainError", base.ptr());
  static py::exception<nfpe::NumericError> numeric(m, "NumericError", base.ptr());
  static py::exception<nfpe::ConvergenceError> convergence(m, "ConvergenceError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const nfpe::UsageError& e) {
      py::set_error(usage, e.what());
    } catch (const nfpe::DomainError& e) {
      py::set_error(domain, e.what());
    } catch (const nfpe::NumericError& e) {
      py::set_error(numeric, e.what());
    } catch (const nfpe::ConvergenceError& e) {
      py::set_error(convergence, e.what());
    } catch (const nfpe::Error& e) {
      py::set_error(base, e.what());
    }
  });

  py::class_<nfpe::SpatialGrid>(m, "Grid")
      .def(py::init<int, double, int>(), py::arg("dim"), py::arg("L"), py::arg("N"))
      .def_property_readonly("dim", &nfpe::SpatialGrid::dim)
      .def_property_readonly("L", &nfpe::SpatialGrid::half_width)
      .def_property_readonly("N", &nfpe::SpatialGrid::cells_per_axis)
      .def_property_readonly("spacing", &nfpe::SpatialGrid::spacing)
      .def_property_readonly("cell_volume", &nfpe::SpatialGrid::cell_volume)
      .def("__len__", &nfpe::SpatialGrid::size)
      .def("centers", [](const nfpe::SpatialGrid& g) {
        py::array_t<double> out({static_cast<py::ssize_t>(g.size()), static_cast<py::ssize_t>(g.dim())});
        auto r = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const auto c = g.center(i);
          r(static_cast<py::ssize_t>(i), 0) = c.x;
          if (g.dim() == 2) r(static_cast<py::ssize_t>(i), 1) = c.y;
        }
        return out;
      });

  py::class_<nfpe::ModelSpec>(m, "Model")
      .def_readonly("id", &nfpe::ModelSpec::id)
      .def_readonly("lambda0", &nfpe::ModelSpec::lambda0)
      .def_readonly("omega_empirical", &nfpe::ModelSpec::omega_empirical)
      .def_readonly("energy_floor_constant", &nfpe::ModelSpec::energy_floor_constant)
      .def("beta", [](const nfpe::ModelSpec& s, double r) { return s.beta(r); })
      .def("b", [](const nfpe::ModelSpec& s, double r) { return s.b(r); })
      .def("phi", [](const nfpe::ModelSpec& s, double x, double y) { return s.potential.phi({x, y}); },
           py::arg("x"), py::arg("y") = 0.0);

  m.def("preset_ids", &nfpe::preset_ids);
  m.def("preset", &nfpe::preset, py::arg("id"));

  m.def("validate", [](const nfpe::ModelSpec& spec) {
    const auto rep = nfpe::validate_hypotheses(spec, {0.0, 10.0}, 2001);
    return py::module_::import("json").attr("loads")(nfpe::validation_to_json(rep).dump());
  });

  m.def(
      "gaussian_density",
      [](const nfpe::SpatialGrid& g, std::vector<double> mean, double variance) {
        if (mean.empty() || mean.size() > 2) throw nfpe::UsageError("mean needs one or two entries");
        return to_numpy(nfpe::gaussian_density(g, {mean[0], mean.size() > 1 ? mean[1] : 0.0}, variance).values);
      },
      py::arg("grid"), py::arg("mean"), py::arg("variance"));
  m.def("uniform_density", [](const nfpe::SpatialGrid& g) { return to_numpy(nfpe::uniform_density(g).values); });

  m.def("mass", [](const nfpe::SpatialGrid& g, const Array& u) { return nfpe::discrete_mass(density(g, u)); });
  m.def("hminus_norm", [](const nfpe::SpatialGrid& g, const Array& v) {
    return nfpe::hminus_norm(nfpe::as_scalar(density(g, v)));
  });

  m.def("apply_A", [](const nfpe::ModelSpec& s, const nfpe::SpatialGrid& g, const Array& u) {
    return to_numpy(nfpe::apply_A(s, g, density(g, u)).values);
  });
  m.def("gradient", [](const nfpe::ModelSpec& s, const nfpe::SpatialGrid& g, const Array& u) {
    return to_numpy(nfpe::gradient(s, g, density(g, u)).values);
  });

  m.def(
      "resolvent_step",
      [](const nfpe::ModelSpec& s, const nfpe::SpatialGrid& g, const Array& f, double lam, double tol,
         int max_iter) {
        auto rc = resolvent_config(tol, max_iter);
        rc.lambda = lam;
        const auto res = nfpe::resolvent_step(s, g, density(g, f), rc);
        py::dict d;
        d["u"] = to_numpy(res.u.values);
        d["iterations"] = res.iterations;
        d["residual"] = res.final_residual;
        d["mass_drift"] = res.mass_drift;
        d["used_picard"] = res.used_picard;
        return d;
      },
      py::arg("model"), py::arg("grid"), py::arg("f"), py::arg("lam"), py::arg("tol") = 1e-10,
      py::arg("max_iter") = 200);

  m.def(
      "evolve",
      [](const nfpe::ModelSpec& s, const nfpe::SpatialGrid& g, const Array& u0, double T, double h,
         int record_every, double tol) {
        nfpe::EvolutionConfig cfg;
        cfg.T = T;
        cfg.h = h;
        cfg.record_every = record_every;
        cfg.resolvent.tol = tol;
        const auto tr = nfpe::evolve(s, g, density(g, u0), cfg);
        py::array_t<double> states({static_cast<py::ssize_t>(tr.states.size()), static_cast<py::ssize_t>(g.size())});
        auto st = states.mutable_unchecked<2>();
        std::vector<double> mass, minv, E, Psi, gm;
        for (std::size_t k = 0; k < tr.states.size(); ++k) {
          for (std::size_t i = 0; i < g.size(); ++i)
            st(static_cast<py::ssize_t>(k), static_cast<py::ssize_t>(i)) = tr.states[k][i];
          mass.push_back(tr.diagnostics[k].mass);
          minv.push_back(tr.diagnostics[k].min_value);
          E.push_back(tr.diagnostics[k].energy);
          Psi.push_back(tr.diagnostics[k].dissipation);
          gm.push_back(tr.diagnostics[k].gradient_metric_norm_sq);
        }
        py::dict d;
        d["times"] = to_numpy(tr.times);
        d["states"] = states;
        d["mass"] = to_numpy(mass);
        d["min"] = to_numpy(minv);
        d["energy"] = to_numpy(E);
        d["dissipation"] = to_numpy(Psi);
        d["grad_norm_sq"] = to_numpy(gm);
        return d;
      },
      py::arg("model"), py::arg("grid"), py::arg("u0"), py::arg("T"), py::arg("h"),
      py::arg("record_every") = 1, py::arg("tol") = 1e-10);

  m.def(
      "exp_formula",
      [](const nfpe::ModelSpec& s, const nfpe::SpatialGrid& g, const Array& u0, double t, int n, double tol) {
        return to_numpy(nfpe::exp_formula(s, g, density(g, u0), t, n, resolvent_config(tol, 200)).values);
      },
      py::arg("model"), py::arg("grid"), py::arg("u0"), py::arg("t"), py::arg("n"), py::arg("tol") = 1e-10);

  m.def(
      "steady_state",
      [](const nfpe::ModelSpec& s, const nfpe::SpatialGrid& g, double tol, double h, double T_max) {
        nfpe::SteadyStateOptions opts;
        opts.tol = tol;
        opts.h = h;
        opts.T_max = T_max;
        return to_numpy(nfpe::steady_state(s, g, opts).u.values);
      },
      py::arg("model"), py::arg("grid"), py::arg("tol") = 1e-6, py::arg("h") = 0.05, py::arg("T_max") = 100.0);

  m.def("eta", &nfpe::eta, py::arg("model"), py::arg("r"));
  m.def("energy", [](const nfpe::ModelSpec& s, const nfpe::SpatialGrid& g, const Array& u) {
    const auto rep = nfpe::energy(s, g, density(g, u));
    py::dict d;
    d["entropy_part"] = rep.entropy_part;
    d["potential_part"] = rep.potential_part;
    d["total"] = rep.total;
    d["dissipation"] = rep.dissipation;
    d["gradient_metric_norm_sq"] = rep.gradient_metric_norm_sq;
    return d;
  });
  m.def("dissipation", [](const nfpe::ModelSpec& s, const nfpe::SpatialGrid& g, const Array& u) {
    return nfpe::dissipation(s, g, density(g, u));
  });

  m.def(
      "simulate_particles",
      [](const nfpe::ModelSpec& s, const nfpe::SpatialGrid& g, const Array& u0, std::size_t count, double dt,
         double T, std::uint64_t seed, int kde_refresh) {
        nfpe::ParticleConfig pc;
        pc.count = count;
        pc.dt = dt;
        pc.T = T;
        pc.seed = seed;
        pc.kde_refresh = kde_refresh;
        nfpe::ParticleRun run;
        {
          py::gil_scoped_release release;
          run = nfpe::simulate_mckean_vlasov(s, g, density(g, u0), pc);
        }
        py::array_t<double> pos({static_cast<py::ssize_t>(run.ensemble.size()), static_cast<py::ssize_t>(g.dim())});
        auto r = pos.mutable_unchecked<2>();
        for (std::size_t p = 0; p < run.ensemble.size(); ++p) {
          r(static_cast<py::ssize_t>(p), 0) = run.ensemble.positions[p].x;
          if (g.dim() == 2) r(static_cast<py::ssize_t>(p), 1) = run.ensemble.positions[p].y;
        }
        return py::make_tuple(pos, to_numpy(run.density.values));
      },
      py::arg("model"), py::arg("grid"), py::arg("u0"), py::arg("count"), py::arg("dt"), py::arg("T"),
      py::arg("seed") = 1, py::arg("kde_refresh") = 10);

  m.def(
      "run_config",
      [](const std::string& text, bool sequential) {
        const auto cfg = nfpe::parse_run_config(text);
        nfpe::RunOptions opts;
        opts.sequential = sequential;
        const auto out = nfpe::run(cfg, opts);
        return py::make_tuple(out.exit_code,
                              py::module_::import("json").attr("loads")(out.manifest.dump()));
      },
      py::arg("config_json"), py::arg("sequential") = true);
}
