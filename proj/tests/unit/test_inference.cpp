#include <doctest.h>

#include "crnet/autodiff.hpp"
#include "crnet/color.hpp"
#include "crnet/errors.hpp"
#include "crnet/inference.hpp"
#include "crnet/ops.hpp"
#include "crnet/resize.hpp"
#include "helpers.hpp"

using namespace crnet;

TEST_CASE("degrade crops, downsamples and re-upsamples") {
    std::mt19937_64 rng(91);
    const Tensor4 hr = test::random_tensor({1, 3, 25, 31}, rng, 0.0, 1.0);
    const Degraded d = degrade(hr, 3);
    CHECK(d.hr.shape() == Shape{1, 3, 24, 30});
    CHECK(d.lr.shape() == Shape{1, 3, 8, 10});
    CHECK(d.ilr.shape() == d.hr.shape());
    CHECK(d.ilr == bicubic_resize(d.lr, Ratio::up(3)));
}

TEST_CASE("zero-residual CRNet-A returns the clamped bicubic image") {
    std::mt19937_64 rng(92);
    Model m;
    m.a = CrnetAConfig{1, 3, 4, 3, 2, true};
    m.params = init_crneta(m.a, 1, InitOptions{true});
    const Tensor4 lr = test::random_tensor({1, 1, 6, 5}, rng, 0.0, 1.0);
    CHECK(super_resolve(m, lr, 2) == clamp01(bicubic_resize(lr, Ratio::up(2))));
    CHECK(max_abs_diff(super_resolve(m, lr, 2, SrOptions{true, {}}), super_resolve(m, lr, 2)) < 1e-12);
}

TEST_CASE("RGB input to a luminance model keeps bicubic chroma") {
    std::mt19937_64 rng(93);
    Model m;
    m.a = CrnetAConfig{1, 3, 4, 3, 2, true};
    m.params = init_crneta(m.a, 1, InitOptions{true});
    const Tensor4 lr = test::random_tensor({1, 3, 6, 6}, rng, 0.2, 0.8);
    const Tensor4 sr = super_resolve(m, lr, 2);
    const Tensor4 expected = clamp01(ycbcr_to_rgb(bicubic_resize(rgb_to_ycbcr(lr), Ratio::up(2))));
    CHECK(max_abs_diff(sr, expected) < 1e-12);
}

TEST_CASE("CRNet-B output has the target size") {
    Model m;
    m.kind = ModelKind::crnet_b;
    m.b = CrnetBConfig{3, 4, 6, 3, 2, {3}};
    m.params = init_crnetb(m.b, 2);
    const Tensor4 sr = super_resolve(m, Tensor4(Shape{1, 3, 5, 4}, 0.5), 3);
    CHECK(sr.shape() == Shape{1, 3, 15, 12});
    for (double v : sr.data()) CHECK((v >= 0.0 && v <= 1.0));
    CHECK_THROWS_AS(super_resolve(m, Tensor4(Shape{1, 1, 5, 4}), 3), ShapeError);
}

TEST_CASE("tiny gradient problems pass the finite-difference check") {
    for (ModelKind k : {ModelKind::crnet_a, ModelKind::crnet_b}) {
        TinyGradProblem tp;
        make_tiny_grad_problem(tp, k, 3);
        const GradCheckReport r = grad_check(tp.graph, tp.inputs, tp.model.params);
        CHECK(r.passed());
        CHECK(r.entries.size() == tp.model.params.size());
    }
}
