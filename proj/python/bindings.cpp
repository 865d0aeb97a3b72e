#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "kdet/errors.hpp"
#include "kdet/fredholm.hpp"
#include "kdet/painleve.hpp"
#include "kdet/schlesinger.hpp"
#include "kdet/specfun.hpp"

namespace py = pybind11;
using kdet::cplx;

namespace {

// A kernel plus a cached evaluator.
struct Kernel {
    kdet::KernelSpec spec;
    std::shared_ptr<kdet::KernelEvaluator> evaluator;

    explicit Kernel(kdet::KernelSpec s)
        : spec(std::move(s)), evaluator(std::make_shared<kdet::KernelEvaluator>(spec)) {}
};

kdet::GridOptions options_for(const Kernel& k, const kdet::IntervalUnion& J, int order, int order_infinite) {
    auto opt = kdet::default_grid_options(k.spec, J, order);
    opt.order_infinite = order_infinite;
    return opt;
}

py::dict derivatives_dict(const kdet::LogDetDerivatives& d) {
    py::dict out;
    out["d1"] = d.d1;
    out["d2"] = d.d2;
    out["d3"] = d.d3;
    return out;
}

}  // namespace

PYBIND11_MODULE(_kdet, m) {
    m.doc() = "Fredholm determinants of 2F1-type kernels, Painleve sigma forms and Schlesinger flows";

    static py::exception<kdet::Error> error(m, "KdetError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const kdet::Error& e) {
            py::object err = error;
            py::object exc = err(e.what());
            exc.attr("kind") = kdet::to_string(e.kind());
            exc.attr("op") = e.op();
            PyErr_SetObject(err.ptr(), exc.ptr());
        }
    });

    // special functions
    m.def("gauss_2f1", &kdet::gauss_2f1, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("zeta"));
    m.def("kummer_1f1", &kdet::kummer_1f1, py::arg("a"), py::arg("c"), py::arg("x"));
    m.def("whittaker_w", &kdet::whittaker_w, py::arg("kappa"), py::arg("mu"), py::arg("x"));
    m.def("log_gamma", &kdet::log_gamma, py::arg("z"));
    m.def(
        "airy",
        [](double x) {
            auto v = kdet::airy(x);
            return py::make_tuple(v.ai, v.ai_prime);
        },
        py::arg("x"), "(Ai(x), Ai'(x))");

    py::class_<kdet::HypParams>(m, "HypParams")
        .def(py::init(&kdet::HypParams::make), py::arg("z"), py::arg("zp"), py::arg("w"), py::arg("wp"),
             py::arg("strict") = false)
        .def_static("unchecked", &kdet::HypParams::unchecked, py::arg("z"), py::arg("zp"), py::arg("w"), py::arg("wp"))
        .def_property_readonly("z", &kdet::HypParams::z)
        .def_property_readonly("zp", &kdet::HypParams::zp)
        .def_property_readonly("w", &kdet::HypParams::w)
        .def_property_readonly("wp", &kdet::HypParams::wp)
        .def_property_readonly("strict", &kdet::HypParams::strict)
        .def_property_readonly("sigma", &kdet::HypParams::sigma)
        .def_property_readonly("nu", &kdet::HypParams::nu)
        .def_property_readonly("theta_a", &kdet::HypParams::theta_a)
        .def_property_readonly("theta_b", &kdet::HypParams::theta_b);

    py::class_<Kernel>(m, "Kernel")
        .def_property_readonly("name", [](const Kernel& k) { return std::string(kdet::kernel_name(k.spec)); })
        .def("eval", [](const Kernel& k, double x, double y) { return k.evaluator->eval(x, y); }, py::arg("x"),
             py::arg("y"))
        .def("diag", [](const Kernel& k, double x) { return k.evaluator->diag(x); }, py::arg("x"))
        .def("__repr__", [](const Kernel& k) { return std::string("<kdet.Kernel ") + kdet::kernel_name(k.spec) + ">"; });

    m.def("f21_kernel", [](const kdet::HypParams& p) { return Kernel(kdet::F21Kernel{p}); }, py::arg("params"));
    m.def("whittaker_kernel", [](cplx z, cplx zp) { return Kernel(kdet::make_whittaker(z, zp)); }, py::arg("z"),
          py::arg("zp"));
    m.def("confluent_kernel", [](cplx r) { return Kernel(kdet::make_confluent(r)); }, py::arg("r"));
    m.def("jacobi_kernel", [](int n, double a, double b) { return Kernel(kdet::make_jacobi(n, a, b)); }, py::arg("n"),
          py::arg("alpha"), py::arg("beta"));
    m.def("sine_kernel", [] { return Kernel(kdet::SineKernel{}); });
    m.def("airy_kernel", [] { return Kernel(kdet::AiryKernel{}); });

    // Fredholm determinants; J is given by its endpoints, ±inf allowed at the ends.
    m.def(
        "log_det",
        [](const Kernel& k, std::vector<double> endpoints, int order, int order_infinite) {
            auto J = kdet::IntervalUnion::make(std::move(endpoints));
            return kdet::log_det(kdet::discretize(k.spec, J, options_for(k, J, order, order_infinite)));
        },
        py::arg("kernel"), py::arg("endpoints"), py::arg("order") = 64, py::arg("order_infinite") = 128,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "logdet_derivatives",
        [](const Kernel& k, std::vector<double> endpoints, int endpoint, double h, int order, int order_infinite) {
            auto J = kdet::IntervalUnion::make(std::move(endpoints));
            kdet::LogDetDerivatives d;
            {
                py::gil_scoped_release release;
                d = kdet::logdet_derivatives(k.spec, J, endpoint, 2, h, options_for(k, J, order, order_infinite));
            }
            return derivatives_dict(d);
        },
        "d/da, d^2/da^2, d^3/da^3 of ln det(1 - K on J) in the endpoint a = endpoints[endpoint]",
        py::arg("kernel"), py::arg("endpoints"), py::arg("endpoint") = 0, py::arg("h") = 1e-3, py::arg("order") = 64,
        py::arg("order_infinite") = 128);
    m.def(
        "fredholm_series_oracle",
        [](const Kernel& k, std::vector<double> endpoints, int terms) {
            return kdet::fredholm_series_oracle(k.spec, kdet::IntervalUnion::make(std::move(endpoints)), terms);
        },
        py::arg("kernel"), py::arg("endpoints"), py::arg("terms") = 4);

    // σ forms
    py::class_<kdet::SigmaSample>(m, "SigmaSample")
        .def(py::init([](double s, double sigma, double dsigma, double d2sigma) {
                 return kdet::SigmaSample{s, sigma, dsigma, d2sigma};
             }),
             py::arg("s"), py::arg("sigma"), py::arg("dsigma"), py::arg("d2sigma"))
        .def_readwrite("s", &kdet::SigmaSample::s)
        .def_readwrite("sigma", &kdet::SigmaSample::sigma)
        .def_readwrite("dsigma", &kdet::SigmaSample::dsigma)
        .def_readwrite("d2sigma", &kdet::SigmaSample::d2sigma)
        .def("__repr__", [](const kdet::SigmaSample& x) {
            return "SigmaSample(s=" + std::to_string(x.s) + ", sigma=" + std::to_string(x.sigma) + ")";
        });

    py::class_<kdet::NuQuad>(m, "NuQuad")
        .def_readonly("nu", &kdet::NuQuad::nu)
        .def_static("f21", &kdet::NuQuad::f21, py::arg("params"))
        .def_static("jacobi", &kdet::NuQuad::jacobi, py::arg("n"), py::arg("alpha"), py::arg("beta"))
        .def_static("whittaker", &kdet::NuQuad::whittaker, py::arg("z"), py::arg("zp"));

    py::class_<kdet::Residual>(m, "Residual")
        .def_readonly("raw", &kdet::Residual::raw)
        .def_readonly("normalized", &kdet::Residual::normalized)
        .def_readonly("scale", &kdet::Residual::scale);

    auto to_derivs = [](const py::dict& d) {
        return kdet::LogDetDerivatives{d["d1"].cast<double>(), d["d2"].cast<double>(), d["d3"].cast<double>()};
    };
    m.def(
        "pvi_sample", [to_derivs](double s, const py::dict& d, const kdet::NuQuad& nu) {
            return kdet::pvi_sample(s, to_derivs(d), nu);
        },
        py::arg("s"), py::arg("derivatives"), py::arg("nu"));
    m.def(
        "pv_sample", [to_derivs](double s, const py::dict& d) { return kdet::pv_sample(s, to_derivs(d)); }, py::arg("s"),
        py::arg("derivatives"));
    m.def("sigma_pvi_residual", &kdet::sigma_pvi_residual, py::arg("x"), py::arg("nu"));
    m.def("sigma_pv_residual", &kdet::sigma_pv_residual, py::arg("x"), py::arg("nu"));
    m.def("sigma_pv_confluent_residual", &kdet::sigma_pv_confluent_residual, py::arg("x"), py::arg("r"));
    m.def("sigma_jmms_residual", &kdet::sigma_jmms_residual, py::arg("x"));

    m.def(
        "hastings_mcleod",
        [](double s_start, double s_end, int steps) {
            std::vector<std::tuple<double, double, double>> out;
            for (const auto& p : kdet::integrate_pii_hastings_mcleod(s_start, s_end, steps))
                out.emplace_back(p.s, p.u, p.du);
            return out;
        },
        "(s, u, u') along u'' = 2u^3 + su from u ~ -Ai(s) at s_start", py::arg("s_start") = 8.0,
        py::arg("s_end") = -8.0, py::arg("steps") = 160);

    // Schlesinger systems
    py::class_<kdet::ResidueSystem>(m, "ResidueSystem")
        .def_readonly("poles", &kdet::ResidueSystem::poles)
        .def_readonly("residues", &kdet::ResidueSystem::residues)
        .def_readonly("moving", &kdet::ResidueSystem::moving)
        .def("at", &kdet::ResidueSystem::at, py::arg("pole"));
    m.def("one_interval_system", &kdet::one_interval_system, py::arg("s"), py::arg("a"), py::arg("b"), py::arg("c"));
    m.def("omega_eval", &kdet::omega_eval, py::arg("system"));
    m.def(
        "reconstruct_residues",
        [](const kdet::SigmaSample& x, const kdet::HypParams& p, double tol) {
            auto r = kdet::reconstruct_residues(x, p, tol);
            return py::make_tuple(r.system, r.mismatch);
        },
        "(system, mismatch) in the gauge x_c = 1", py::arg("x"), py::arg("params"), py::arg("tol") = 1e-8);
    m.def(
        "residue_invariants",
        [](const kdet::ResidueSystem& sys, const kdet::HypParams& p) {
            auto r = kdet::residue_invariants(sys, p);
            py::dict out;
            out["trace"] = r.trace;
            out["det_a"] = r.det_a;
            out["det_b"] = r.det_b;
            out["det_c"] = r.det_c;
            out["sum_rule"] = r.sum_rule;
            return out;
        },
        py::arg("system"), py::arg("params"));
    m.def(
        "integrate_flow",
        [](const kdet::ResidueSystem& sys, int pole_index, const std::vector<double>& b_out) {
            return kdet::integrate_flow(sys, pole_index, b_out);
        },
        py::arg("system"), py::arg("pole_index"), py::arg("b_out"));
}
