#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "crnet/checkpoint.hpp"
#include "crnet/color.hpp"
#include "crnet/csc.hpp"
#include "crnet/errors.hpp"
#include "crnet/image_io.hpp"
#include "crnet/inference.hpp"
#include "crnet/metrics.hpp"
#include "crnet/ops.hpp"
#include "crnet/resize.hpp"

namespace py = pybind11;
using namespace crnet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor4 to_tensor(const Array& a) {
    if (a.ndim() != 4) throw ShapeError("expected a 4-D array (n, c, h, w), got " + std::to_string(a.ndim()) + "-D");
    const Shape s{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                  static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(3))};
    std::vector<double> data(a.data(), a.data() + a.size());
    return Tensor4(s, std::move(data));
}

Array to_array(const Tensor4& t) {
    Array a({t.batch(), t.channels(), t.height(), t.width()});
    std::memcpy(a.mutable_data(), t.data().data(), t.size() * sizeof(double));
    return a;
}

ResizeOptions resize_opts(const std::string& boundary) {
    ResizeOptions o;
    if (boundary == "replicate") o.boundary = Boundary::replicate;
    else if (boundary == "symmetric") o.boundary = Boundary::symmetric;
    else throw ConfigError("boundary must be replicate or symmetric");
    return o;
}

}  // namespace

PYBIND11_MODULE(_crnet, m) {
    m.doc() = "Convolutional sparse coding and CRNet super-resolution";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ChecksumError>(m, "ChecksumError", PyExc_IOError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);

    m.def("conv2d_same", [](const Array& x, const Array& w) { return to_array(conv2d_same(to_tensor(x), to_tensor(w))); },
          py::arg("x"), py::arg("weights"), "Zero-padded same-size cross-correlation.");
    m.def("conv2d_adjoint",
          [](const Array& y, const Array& w) { return to_array(conv2d_adjoint(to_tensor(y), to_tensor(w))); },
          py::arg("y"), py::arg("weights"), "Transpose of conv2d_same with respect to its input.");
    m.def("pixel_shuffle", [](const Array& x, std::size_t r) { return to_array(pixel_shuffle(to_tensor(x), r)); },
          py::arg("x"), py::arg("r"));
    m.def(
        "bicubic_resize",
        [](const Array& x, std::size_t num, std::size_t den, const std::string& boundary) {
            return to_array(bicubic_resize(to_tensor(x), Ratio{num, den}, resize_opts(boundary)));
        },
        py::arg("x"), py::arg("num"), py::arg("den") = 1, py::arg("boundary") = "replicate",
        "Resize by num/den with the antialiased cubic kernel.");
    m.def("rgb_to_y", [](const Array& x) { return to_array(rgb_to_ycbcr_y(to_tensor(x))); }, py::arg("rgb"));
    m.def("psnr_y", [](const Array& a, const Array& b, std::size_t shave) { return psnr_y(to_tensor(a), to_tensor(b), shave); },
          py::arg("sr"), py::arg("hr"), py::arg("shave") = 0);
    m.def("ssim_y", [](const Array& a, const Array& b, std::size_t shave) { return ssim_y(to_tensor(a), to_tensor(b), shave); },
          py::arg("sr"), py::arg("hr"), py::arg("shave") = 0);
    m.def("read_image", [](const std::string& p) { return to_array(read_image(p)); }, py::arg("path"));
    m.def("write_image", [](const std::string& p, const Array& x) { write_image(p, to_tensor(x)); }, py::arg("path"),
          py::arg("image"));

    m.def(
        "csc_solve",
        [](const Array& y, const Array& f, double lam, std::size_t iters, bool nonneg) {
            const CscProblem p{to_tensor(y), FilterBank(to_tensor(f)), lam, nonneg};
            SolveOptions o;
            o.max_iters = iters;
            const SolveResult r = solve(p, o);
            return py::make_tuple(to_array(r.state.z), r.objective_trace, r.L);
        },
        py::arg("y"), py::arg("filters"), py::arg("lam"), py::arg("iters") = 100, py::arg("nonnegative") = false,
        "Runs CISTA; returns (z, objective trace, L).");
    m.def(
        "csc_objective",
        [](const Array& y, const Array& f, double lam, const Array& z) {
            return csc_objective(CscProblem{to_tensor(y), FilterBank(to_tensor(f)), lam, false}, to_tensor(z));
        },
        py::arg("y"), py::arg("filters"), py::arg("lam"), py::arg("z"));

    m.def(
        "crneta_parameter_count",
        [](std::size_t c, std::size_t n0, std::size_t m0, std::size_t k) {
            CrnetAConfig cfg;
            cfg.channels = c;
            cfg.n0 = n0;
            cfg.m0 = m0;
            cfg.kernel = k;
            return crneta_parameter_count(cfg);
        },
        py::arg("channels") = 1, py::arg("n0") = 128, py::arg("m0") = 256, py::arg("kernel") = 3);

    m.def(
        "grad_check_tiny",
        [](const std::string& kind, std::uint64_t seed) {
            TinyGradProblem tp;
            make_tiny_grad_problem(tp, parse_model_kind(kind), seed);
            const GradCheckReport rep = grad_check(tp.graph, tp.inputs, tp.model.params);
            py::dict errors;
            for (const auto& e : rep.entries) errors[py::str(e.name)] = e.max_rel_error;
            return py::make_tuple(rep.passed(), errors);
        },
        py::arg("model"), py::arg("seed") = 1, "Finite-difference check of a tiny network; returns (passed, errors).");

    py::class_<Checkpoint>(m, "Checkpoint")
        .def_static("load", [](const std::string& p) { return load_checkpoint(p); }, py::arg("path"))
        .def_property_readonly("model_kind", [](const Checkpoint& c) { return std::string(model_kind_name(c.model.kind)); })
        .def_property_readonly("seed", [](const Checkpoint& c) { return c.info.seed; })
        .def_property_readonly("parameter_count", [](const Checkpoint& c) { return c.model.params.element_count(); })
        .def("parameter_names", [](const Checkpoint& c) { return c.model.params.names(); })
        .def("parameter", [](const Checkpoint& c, const std::string& n) { return to_array(c.model.params.tensor(n)); })
        .def(
            "super_resolve",
            [](const Checkpoint& c, const Array& lr, std::size_t scale, bool ensemble) {
                return to_array(super_resolve(c.model, to_tensor(lr), scale, SrOptions{ensemble, {}}));
            },
            py::arg("lr"), py::arg("scale"), py::arg("ensemble") = false);
}
