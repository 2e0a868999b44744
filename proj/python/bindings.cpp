#include "mccpd/dense_reference.hpp"
#include "mccpd/discrepancy_mc.hpp"
#include "mccpd/linalg.hpp"
#include "mccpd/model.hpp"
#include "mccpd/oracle.hpp"
#include "mccpd/selftest.hpp"
#include "mccpd/solvers.hpp"

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace mccpd;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Core s as an (r, N_s) array.
Array core_to_array(const CPModel& m, std::size_t s) {
    if (s >= m.order()) throw py::index_error("coordinate out of range");
    Array out({m.rank(), m.dim(s)});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t a = 0; a < m.rank(); ++a) {
        for (std::size_t i = 0; i < m.dim(s); ++i) v(a, i) = m.at(s, a, i);
    }
    return out;
}

void array_to_core(CPModel& m, std::size_t s, const Array& in) {
    if (s >= m.order()) throw py::index_error("coordinate out of range");
    if (in.ndim() != 2 || static_cast<std::size_t>(in.shape(0)) != m.rank() ||
        static_cast<std::size_t>(in.shape(1)) != m.dim(s)) {
        throw py::value_error("core must have shape (rank, N_s)");
    }
    auto v = in.unchecked<2>();
    for (std::size_t a = 0; a < m.rank(); ++a) {
        for (std::size_t i = 0; i < m.dim(s); ++i) m.at(s, a, i) = v(a, i);
    }
}

Array matrix_to_array(const SmallMatrix& m) {
    Array out({m.size(), m.size()});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) v(i, j) = m(i, j);
    }
    return out;
}

SmallMatrix array_to_matrix(const Array& in) {
    if (in.ndim() != 2 || in.shape(0) != in.shape(1)) throw py::value_error("expected a square matrix");
    SmallMatrix m(static_cast<std::size_t>(in.shape(0)));
    auto v = in.unchecked<2>();
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) m(i, j) = v(i, j);
    }
    return m;
}

py::dict record_to_dict(const ConvergenceRecord& rec) {
    py::dict d;
    d["sweep"] = rec.sweep;
    d["eps_mc"] = rec.eps_mc;
    d["eps_grid_mean"] = rec.eps_grid_mean;
    d["grad_norm"] = rec.grad_norm;
    d["wall_seconds"] = rec.wall_seconds;
    d["skipped_nodes"] = rec.skipped_nodes;
    d["tau_fallbacks"] = rec.tau_fallbacks;
    d["near_zero_fraction"] = rec.near_zero_fraction;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Monte-Carlo canonical decomposition of function-defined tensors";

    py::register_exception<SingularMatrixError>(m, "SingularMatrixError", PyExc_ArithmeticError);

    py::class_<CPModel>(m, "CPModel")
        .def(py::init<std::vector<std::size_t>, std::size_t, double>(), py::arg("dims"),
             py::arg("rank"), py::arg("fill") = 0.0)
        .def_property_readonly("order", &CPModel::order)
        .def_property_readonly("rank", &CPModel::rank)
        .def_property_readonly("dims", &CPModel::dims)
        .def("core", &core_to_array, py::arg("s"), "Core s as an (rank, N_s) array (a copy).")
        .def("set_core", &array_to_core, py::arg("s"), py::arg("values"))
        .def("__call__", [](const CPModel& self, const MultiIndex& p) { return eval_cp(self, p); })
        .def("__eq__", [](const CPModel& a, const CPModel& b) { return a == b; })
        .def("__repr__", [](const CPModel& self) {
            std::ostringstream os;
            os << "CPModel(order=" << self.order() << ", rank=" << self.rank() << ")";
            return os.str();
        });

    m.def("eval_cp", [](const CPModel& model, const MultiIndex& p) { return eval_cp(model, p); },
          py::arg("model"), py::arg("index"), "Model value at a 0-based multi-index.");
    m.def("save_cpd", &save_cpd, py::arg("path"), py::arg("model"));
    m.def("load_cpd", &load_cpd, py::arg("path"));

    py::enum_<F39Radius>(m, "F39Radius")
        .value("linear", F39Radius::linear)
        .value("squared", F39Radius::squared);

    py::class_<TensorOracle>(m, "TensorOracle")
        .def_static("f38", &TensorOracle::f38, py::arg("dims"))
        .def_static("f39", &TensorOracle::f39, py::arg("dims"), py::arg("radius") = F39Radius::linear)
        .def_static(
            "dense",
            [](const Array& values) {
                std::vector<std::size_t> dims(values.shape(), values.shape() + values.ndim());
                return TensorOracle::dense(dims, std::vector<double>(values.data(), values.data() + values.size()));
            },
            py::arg("values"), "Oracle backed by an n-dimensional array.")
        .def_static("cp_synthetic", &TensorOracle::cp_synthetic, py::arg("model"))
        .def_property_readonly("dims", &TensorOracle::dims)
        .def_property_readonly("kind", [](const TensorOracle& o) { return to_string(o.kind()); })
        .def("__call__", [](const TensorOracle& o, const MultiIndex& p) { return o(p); });

    m.def("residual_at", [](const CPModel& model, const TensorOracle& oracle, const MultiIndex& p) {
        return residual_at(model, oracle, p);
    }, py::arg("model"), py::arg("oracle"), py::arg("index"));

    m.def("dense_global_discrepancy",
          [](const CPModel& model, const TensorOracle& oracle) { return dense_global_discrepancy(model, oracle); },
          py::arg("model"), py::arg("oracle"));
    m.def("dense_local_discrepancy",
          [](const CPModel& model, const TensorOracle& oracle, std::size_t c, std::size_t i) {
              return dense_local_discrepancy(model, oracle, c, i);
          },
          py::arg("model"), py::arg("oracle"), py::arg("c"), py::arg("i"));
    m.def("dense_local_gradient",
          [](const CPModel& model, const TensorOracle& oracle, std::size_t c, std::size_t i) {
              return dense_local_gradient(model, oracle, c, i);
          },
          py::arg("model"), py::arg("oracle"), py::arg("c"), py::arg("i"));
    m.def("dense_global_gradient",
          [](const CPModel& model, const TensorOracle& oracle) {
              const CPModel g = dense_global_gradient(model, oracle);
              py::list cores;
              for (std::size_t s = 0; s < g.order(); ++s) cores.append(core_to_array(g, s));
              return cores;
          },
          py::arg("model"), py::arg("oracle"), "List of (rank, N_s) gradient arrays.");

    py::class_<LocalSystem>(m, "LocalSystem")
        .def_readonly("grad", &LocalSystem::grad)
        .def_property_readonly("hess", [](const LocalSystem& s) { return matrix_to_array(s.hess); })
        .def_readonly("eps", &LocalSystem::eps)
        .def_readonly("misfit", &LocalSystem::misfit);

    m.def(
        "mc_local_system",
        [](const CPModel& model, const TensorOracle& oracle, std::size_t c, std::size_t i,
           std::size_t ens_size, double eta, std::uint64_t seed) {
            const auto ens = sample_hyperplane_ensemble(model.dims(), c, i, ens_size,
                                                        SeedPath{seed, 0, c, i, StreamKind::test});
            return mc_local_system(model, oracle, ens, eta);
        },
        py::arg("model"), py::arg("oracle"), py::arg("c"), py::arg("i"), py::arg("ens_size") = 1000,
        py::arg("eta") = 0.0, py::arg("seed") = kDefaultMasterSeed);
    m.def(
        "mc_global_discrepancy",
        [](const CPModel& model, const TensorOracle& oracle, std::size_t ens_size, std::uint64_t seed) {
            const auto ens =
                sample_global_ensemble(model.dims(), ens_size, SeedPath{seed, 0, 0, 0, StreamKind::test});
            return mc_global_discrepancy(model, oracle, ens);
        },
        py::arg("model"), py::arg("oracle"), py::arg("ens_size") = 100000,
        py::arg("seed") = kDefaultMasterSeed);

    m.def("gauss_jordan_invert",
          [](const Array& a, double pivot_tol) { return matrix_to_array(gauss_jordan_invert(array_to_matrix(a), pivot_tol)); },
          py::arg("matrix"), py::arg("pivot_tol") = kDefaultPivotTol);

    py::enum_<Method>(m, "Method")
        .value("newton", Method::newton)
        .value("steepest_descent", Method::steepest_descent)
        .value("als", Method::als);
    py::enum_<TauMode>(m, "TauMode")
        .value("auto_quadratic", TauMode::auto_quadratic)
        .value("fixed", TauMode::fixed);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("method", &SolverConfig::method)
        .def_readwrite("rank", &SolverConfig::rank)
        .def_readwrite("ens_size", &SolverConfig::ens_size)
        .def_readwrite("global_ens_size", &SolverConfig::global_ens_size)
        .def_readwrite("eta", &SolverConfig::eta)
        .def_readwrite("sigma", &SolverConfig::sigma)
        .def_readwrite("eps2", &SolverConfig::eps2)
        .def_readwrite("max_sweeps", &SolverConfig::max_sweeps)
        .def_readwrite("tau_mode", &SolverConfig::tau_mode)
        .def_readwrite("tau", &SolverConfig::tau)
        .def_readwrite("master_seed", &SolverConfig::master_seed)
        .def_readwrite("pivot_tol", &SolverConfig::pivot_tol)
        .def_readwrite("threads", &SolverConfig::threads)
        .def("validate", &SolverConfig::validate);

    m.def("init_random_start", &init_random_start, py::arg("dims"), py::arg("rank"),
          py::arg("sigma") = 0.1, py::arg("master_seed") = kDefaultMasterSeed);

    m.def(
        "sweep",
        [](CPModel& model, const TensorOracle& oracle, const SolverConfig& cfg, std::size_t sweep_no) {
            const SweepStats st = sweep(cfg.method, model, oracle, cfg, sweep_no);
            py::dict d;
            d["eps_grid_mean"] = st.eps_grid_mean;
            d["grad_norm"] = st.grad_norm;
            d["skipped_nodes"] = st.skipped_nodes;
            d["tau_fallbacks"] = st.tau_fallbacks;
            return d;
        },
        py::arg("model"), py::arg("oracle"), py::arg("config"), py::arg("sweep_no"),
        "Updates the model in place with one sweep of config.method.");

    m.def(
        "run",
        [](const TensorOracle& oracle, const SolverConfig& cfg, std::optional<CPModel> initial,
           bool record_initial) {
            RunOptions opts;
            opts.initial = std::move(initial);
            opts.record_initial = record_initial;
            RunResult res;
            {
                py::gil_scoped_release release;
                res = run(oracle, cfg, opts);
            }
            py::list history;
            for (const auto& rec : res.history) history.append(record_to_dict(rec));
            py::dict out;
            out["model"] = res.model;
            out["history"] = history;
            out["converged"] = res.converged;
            out["sweeps"] = res.sweeps;
            return out;
        },
        py::arg("oracle"), py::arg("config"), py::arg("initial") = py::none(),
        py::arg("record_initial") = false);

    m.def(
        "selftest",
        [](std::uint64_t seed) {
            SelftestOptions opts;
            opts.seed = seed;
            py::list out;
            for (const auto& r : run_selftest(opts)) {
                py::dict d;
                d["id"] = r.id;
                d["name"] = r.name;
                d["passed"] = r.passed;
                d["detail"] = r.detail;
                out.append(d);
            }
            return out;
        },
        py::arg("seed") = SelftestOptions{}.seed);
}
