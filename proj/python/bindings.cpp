#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "polarpark/controllers.hpp"
#include "polarpark/geometry.hpp"
#include "polarpark/lyapunov.hpp"
#include "polarpark/sim.hpp"
#include "polarpark/verify.hpp"

namespace py = pybind11;
using namespace polarpark;

namespace {

std::string report_json(const CertReport& r) { return nlohmann::json(r).dump(); }

}  // namespace

PYBIND11_MODULE(_polarpark, m) {
    m.doc() = "Smooth polar-coordinate parking controllers for the unicycle, their CLFs and certification checks.";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    py::class_<CartesianState>(m, "CartesianState")
        .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("theta"))
        .def_readwrite("x", &CartesianState::x)
        .def_readwrite("y", &CartesianState::y)
        .def_readwrite("theta", &CartesianState::theta)
        .def("__repr__", [](const CartesianState& c) {
            return "CartesianState(" + std::to_string(c.x) + ", " + std::to_string(c.y) + ", " +
                   std::to_string(c.theta) + ")";
        });

    py::class_<PolarState>(m, "PolarState")
        .def(py::init<double, double, double>(), py::arg("rho"), py::arg("delta"), py::arg("gamma"))
        .def_readwrite("rho", &PolarState::rho)
        .def_readwrite("delta", &PolarState::delta)
        .def_readwrite("gamma", &PolarState::gamma)
        .def("__repr__", [](const PolarState& p) {
            return "PolarState(" + std::to_string(p.rho) + ", " + std::to_string(p.delta) + ", " +
                   std::to_string(p.gamma) + ")";
        });

    py::enum_<StateSpace>(m, "StateSpace")
        .value("S", StateSpace::S)
        .value("S1", StateSpace::S1)
        .value("S2", StateSpace::S2)
        .value("S3", StateSpace::S3);

    m.def("wrap_angle", &wrap_angle);
    m.def("cart_to_polar", &cart_to_polar);
    m.def("polar_to_cart", &polar_to_cart);
    m.def("metric", &metric, py::arg("space"), py::arg("state"));
    m.def("contains", &contains, py::arg("space"), py::arg("state"));

    py::enum_<ControllerKind>(m, "ControllerKind")
        .value("GloBa", ControllerKind::GloBa)
        .value("BarFli", ControllerKind::BarFli)
        .value("BoLSA", ControllerKind::BoLSA)
        .value("BAgAl", ControllerKind::BAgAl);

    py::enum_<GainCheck>(m, "GainCheck")
        .value("Strict", GainCheck::Strict)
        .value("PositiveOnly", GainCheck::PositiveOnly);

    py::class_<Gains>(m, "Gains")
        .def(py::init([](double k1, double k2, double k3, double k4) { return Gains{k1, k2, k3, k4}; }),
             py::arg("k1") = 1.0, py::arg("k2") = 1.0, py::arg("k3") = 1.0, py::arg("k4") = 1.0)
        .def_readwrite("k1", &Gains::k1)
        .def_readwrite("k2", &Gains::k2)
        .def_readwrite("k3", &Gains::k3)
        .def_readwrite("k4", &Gains::k4);

    py::class_<ControllerSpec>(m, "ControllerSpec")
        .def(py::init<ControllerKind, Gains, GainCheck>(), py::arg("kind"), py::arg("gains"),
             py::arg("check") = GainCheck::Strict)
        .def_property_readonly("kind", &ControllerSpec::kind)
        .def_property_readonly("gains", &ControllerSpec::gains)
        .def_property_readonly("space", &ControllerSpec::space)
        .def_property_readonly("certified", &ControllerSpec::certified);

    py::class_<ControlInput>(m, "ControlInput")
        .def_readonly("v", &ControlInput::v)
        .def_readonly("omega", &ControlInput::omega)
        .def_readonly("omega_tilde", &ControlInput::omega_tilde);

    m.def("forward_velocity", &forward_velocity, py::arg("state"), py::arg("gains"));
    m.def("delta_shaping", [](ControllerKind kind, double delta) {
        const DeltaShape s = delta_shaping(kind, delta);
        return py::make_tuple(s.value, s.slope);
    });
    m.def("psi", &psi, py::arg("z"), py::arg("k2"), py::arg("Delta"));
    m.def("omega_tilde", &omega_tilde, py::arg("spec"), py::arg("delta"), py::arg("gamma"));
    m.def("control", &control, py::arg("spec"), py::arg("state"));

    py::class_<LyapunovFn>(m, "LyapunovFn")
        .def(py::init<ControllerKind, Gains>(), py::arg("kind"), py::arg("gains"))
        .def("value", &LyapunovFn::value, py::arg("delta"), py::arg("gamma"))
        .def("gradient",
             [](const LyapunovFn& f, double d, double g) {
                 const AngularGradient a = f.gradient(d, g);
                 return py::make_tuple(a.d_delta, a.d_gamma);
             })
        .def("v_dot", &LyapunovFn::v_dot, py::arg("delta"), py::arg("gamma"))
        .def_property_readonly("space", &LyapunovFn::space);

    py::enum_<CompositorOrder>(m, "CompositorOrder")
        .value("RhoFirst", CompositorOrder::RhoFirst)
        .value("VdgFirst", CompositorOrder::VdgFirst);

    py::class_<Compositor>(m, "Compositor")
        .def_static("sum", &Compositor::sum, py::arg("order") = CompositorOrder::RhoFirst)
        .def_static("log_sum", &Compositor::log_sum, py::arg("order") = CompositorOrder::RhoFirst)
        .def_static("exp_product", &Compositor::exp_product, py::arg("order") = CompositorOrder::RhoFirst)
        .def("label", &Compositor::label);

    py::class_<CompositeLyapunovFn>(m, "CompositeLyapunovFn")
        .def(py::init<Compositor, LyapunovFn>(), py::arg("compositor"), py::arg("inner"))
        .def("value", &CompositeLyapunovFn::value)
        .def("gradient", &CompositeLyapunovFn::gradient)
        .def("v_dot", py::overload_cast<const PolarState&>(&CompositeLyapunovFn::v_dot, py::const_));

    py::enum_<Frame>(m, "Frame").value("Polar", Frame::Polar).value("Cartesian", Frame::Cartesian);
    py::enum_<Integrator>(m, "Integrator")
        .value("RK4Fixed", Integrator::RK4Fixed)
        .value("RK45Adaptive", Integrator::RK45Adaptive);
    py::enum_<Steering>(m, "Steering").value("Feedback", Steering::Feedback).value("Off", Steering::Off);
    py::enum_<SimStatus>(m, "SimStatus")
        .value("Captured", SimStatus::Captured)
        .value("HorizonReached", SimStatus::HorizonReached)
        .value("BoundaryStop", SimStatus::BoundaryStop);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("t_final", &SimConfig::t_final)
        .def_readwrite("capture_radius", &SimConfig::capture_radius)
        .def_readwrite("frame", &SimConfig::frame)
        .def_readwrite("integrator", &SimConfig::integrator)
        .def_readwrite("abs_tol", &SimConfig::abs_tol)
        .def_readwrite("rel_tol", &SimConfig::rel_tol)
        .def_readwrite("dt_min", &SimConfig::dt_min)
        .def_readwrite("dt_max", &SimConfig::dt_max)
        .def_readwrite("output_dt", &SimConfig::output_dt)
        .def_readwrite("steering", &SimConfig::steering);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("polar", &Trajectory::polar)
        .def_readonly("cartesian", &Trajectory::cartesian)
        .def_readonly("lyapunov", &Trajectory::lyapunov)
        .def_readonly("status", &Trajectory::status)
        .def_readonly("message", &Trajectory::message)
        .def_readonly("path_length", &Trajectory::path_length)
        .def("max_lyapunov_increase", &Trajectory::max_lyapunov_increase)
        .def("__len__", &Trajectory::size);

    m.def("simulate",
          py::overload_cast<const ControllerSpec&, const PolarState&, const SimConfig&>(&simulate),
          py::arg("spec"), py::arg("x0"), py::arg("config") = SimConfig{},
          py::call_guard<py::gil_scoped_release>());

    m.def(
        "check_lemma1",
        [](const std::vector<double>& ks, const std::vector<double>& gammas) {
            return report_json(check_lemma1(ks, gammas));
        },
        "Returns the certification report as a JSON string.");
    m.def(
        "run_battery",
        [](const std::string& suite, std::uint64_t seed) {
            std::vector<std::string> out;
            for (const auto& r : run_battery(suite, seed)) out.push_back(report_json(r));
            return out;
        },
        py::arg("suite") = "all", py::arg("seed") = 1, py::call_guard<py::gil_scoped_release>());
}
