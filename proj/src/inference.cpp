#include "crnet/inference.hpp"

#include <algorithm>
#include <random>

#include "crnet/color.hpp"
#include "crnet/errors.hpp"
#include "crnet/metrics.hpp"
#include "crnet/ops.hpp"

namespace crnet {

Degraded degrade(const Tensor4& hr, std::size_t scale, const ResizeOptions& opts) {
    if (scale < 1 || scale > 4) throw ConfigError("scale must be in 1..4");
    Degraded d;
    d.hr = modcrop(hr, scale);
    d.lr = bicubic_resize(d.hr, Ratio::down(scale), opts);
    d.ilr = bicubic_resize(d.lr, Ratio::up(scale), opts);
    return d;
}

Tensor4 clamp01(const Tensor4& x) {
    Tensor4 y = x;
    for (double& v : y.data()) v = std::clamp(v, 0.0, 1.0);
    return y;
}

namespace {

Tensor4 run_model(const Model& model, const Tensor4& lr, std::size_t scale, const SrOptions& opts) {
    auto once = [&](const Tensor4& x) {
        if (model.kind == ModelKind::crnet_a) return model.run(bicubic_resize(x, Ratio::up(scale), opts.resize), scale);
        return model.run(x, scale);
    };
    return opts.ensemble ? self_ensemble(once, lr) : once(lr);
}

}  // namespace

Tensor4 super_resolve(const Model& model, const Tensor4& lr, std::size_t scale, const SrOptions& opts) {
    if (lr.batch() != 1) throw ShapeError("super_resolve expects a single image");
    if (lr.channels() == model.channels()) return clamp01(run_model(model, lr, scale, opts));
    if (lr.channels() == 3 && model.channels() == 1) {
        const Tensor4 ycc = rgb_to_ycbcr(lr);
        Tensor4 up = bicubic_resize(ycc, Ratio::up(scale), opts.resize);
        const Tensor4 luma = run_model(model, rgb_to_ycbcr_y(lr), scale, opts);
        std::copy(luma.data().begin(), luma.data().end(), up.plane(0, 0));
        return clamp01(ycbcr_to_rgb(up));
    }
    throw ShapeError("cannot run a " + std::to_string(model.channels()) + "-channel model on a " +
                     std::to_string(lr.channels()) + "-channel image");
}

void make_tiny_grad_problem(TinyGradProblem& out, ModelKind kind, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    out.model = Model{};
    out.model.kind = kind;
    out.graph = Graph{};
    Tensor4 input, target;
    std::size_t scale = 1;
    if (kind == ModelKind::crnet_a) {
        out.model.a = CrnetAConfig{1, 2, 3, 3, 2, true};
        out.model.params = init_crneta(out.model.a, seed);
        input = Tensor4(Shape{1, 1, 8, 8});
        target = Tensor4(Shape{1, 1, 8, 8});
    } else {
        out.model.b = CrnetBConfig{3, 4, 6, 3, 2, {2}};
        out.model.params = init_crnetb(out.model.b, seed);
        input = Tensor4(Shape{1, 3, 4, 4});
        target = Tensor4(Shape{1, 3, 8, 8});
        scale = 2;
    }
    for (double& v : input.data()) v = unit(rng);
    for (double& v : target.data()) v = unit(rng);
    const NodeId in = out.graph.input("input");
    const NodeId tg = out.graph.input("target");
    const NodeId y = out.model.build(out.graph, in, scale);
    out.graph.set_output(out.graph.mse_loss(y, tg));
    out.inputs = {{"input", input}, {"target", target}};
}

}  // namespace crnet
