#include <doctest.h>

#include <cmath>
#include <sstream>

#include "crnet/errors.hpp"
#include "crnet/ops.hpp"
#include "crnet/resize.hpp"
#include "crnet/training.hpp"
#include "helpers.hpp"

using namespace crnet;

namespace {

TrainConfig tiny_a() {
    TrainConfig cfg = TrainConfig::recipe_a();
    cfg.a = CrnetAConfig{1, 4, 6, 3, 2, true};
    cfg.batch_size = 4;
    cfg.patch = 12;
    cfg.stride = 12;
    cfg.scales = {2};
    cfg.lr = 0.01;
    return cfg;
}

}  // namespace

TEST_CASE("step learning-rate schedules") {
    const TrainConfig a = TrainConfig::recipe_a();
    CHECK(lr_schedule(0, a) == doctest::Approx(0.1));
    CHECK(lr_schedule(9, a) == doctest::Approx(0.1));
    CHECK(lr_schedule(10, a) == doctest::Approx(0.01));
    CHECK(lr_schedule(25, a) == doctest::Approx(0.001));
    CHECK(lr_schedule(34, a) == doctest::Approx(0.0001));
    const TrainConfig b = TrainConfig::recipe_b();
    CHECK(lr_schedule(199, b) == doctest::Approx(1e-4));
    CHECK(lr_schedule(200, b) == doctest::Approx(5e-5));
    CHECK(lr_schedule(799, b) == doctest::Approx(1.25e-5));
}

TEST_CASE("recipes") {
    const TrainConfig a = TrainConfig::recipe_a();
    CHECK(a.model == ModelKind::crnet_a);
    CHECK(a.loss == LossKind::l2);
    CHECK(a.optimizer == OptimizerKind::sgd);
    CHECK(a.epochs == 35);
    CHECK(a.a.n0 == 128);
    CHECK(a.a.m0 == 256);
    CHECK(a.a.recursions == 25);
    const TrainConfig b = TrainConfig::recipe_b();
    CHECK(b.loss == LossKind::l1);
    CHECK(b.optimizer == OptimizerKind::adam);
    CHECK(b.epochs == 800);
    CHECK(b.b.n0 == 64);
    CHECK(b.b.m0 == 1024);
    CHECK(b.grad_clip == 0.0);
}

TEST_CASE("first Adam step moves each weight by lr against the gradient sign") {
    TrainConfig cfg = TrainConfig::recipe_b();
    ParameterStore ps;
    ps.add("w", Tensor4(Shape{1, 1, 1, 3}, {1.0, 2.0, 3.0}));
    OptimizerState st;
    TensorMap g{{"w", Tensor4(Shape{1, 1, 1, 3}, {0.5, -2.0, 0.0})}};
    optimizer_update(ps, g, st, cfg, 0.1);
    const Tensor4& w = ps.tensor("w");
    CHECK(w(0, 0, 0, 0) == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)));
    CHECK(w(0, 0, 0, 1) == doctest::Approx(2.0 + 0.1 * 2.0 / (2.0 + 1e-8)));
    CHECK(w(0, 0, 0, 2) == 3.0);
    // Second step with the same gradient: bias-corrected moments are unchanged.
    optimizer_update(ps, g, st, cfg, 0.1);
    CHECK(w(0, 0, 0, 0) == doctest::Approx(1.0 - 0.2 * 0.5 / (0.5 + 1e-8)));
}

TEST_CASE("SGD with momentum") {
    TrainConfig cfg = TrainConfig::recipe_a();
    cfg.momentum = 0.9;
    ParameterStore ps;
    ps.add("w", Tensor4(Shape{1, 1, 1, 1}, 1.0));
    OptimizerState st;
    TensorMap g{{"w", Tensor4(Shape{1, 1, 1, 1}, 2.0)}};
    optimizer_update(ps, g, st, cfg, 0.1);
    CHECK(ps.tensor("w")(0, 0, 0, 0) == doctest::Approx(0.8));
    optimizer_update(ps, g, st, cfg, 0.1);  // v = 0.9 * 2 + 2 = 3.8
    CHECK(ps.tensor("w")(0, 0, 0, 0) == doctest::Approx(0.8 - 0.38));
}

TEST_CASE("global-norm clipping") {
    TensorMap g{{"a", Tensor4(Shape{1, 1, 1, 1}, 3.0)}, {"b", Tensor4(Shape{1, 1, 1, 1}, 4.0)}};
    CHECK(clip_global_norm(g, 10.0) == doctest::Approx(5.0));
    CHECK(g.at("a")(0, 0, 0, 0) == 3.0);
    CHECK(clip_global_norm(g, 1.0) == doctest::Approx(5.0));
    CHECK(g.at("a")(0, 0, 0, 0) == doctest::Approx(0.6));
    CHECK(g.at("b")(0, 0, 0, 0) == doctest::Approx(0.8));
}

TEST_CASE("training loss equals an independently accumulated L2 and L1") {
    std::mt19937_64 rng(61);
    Model m = make_model(tiny_a());
    const Batch b{test::random_tensor({3, 1, 6, 6}, rng, 0, 1), test::random_tensor({3, 1, 6, 6}, rng, 0, 1), 2};
    const Tensor4 out = m.run(b.input, 2);
    double sq = 0.0, ab = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double d = out.data()[k] - b.target.data()[k];
        sq += d * d;
        ab += std::abs(d);
    }
    const double n = static_cast<double>(out.size());
    CHECK(evaluate_loss(m, b, LossKind::l2) == doctest::Approx(0.5 * sq / n).epsilon(1e-14));
    CHECK(evaluate_loss(m, b, LossKind::l1) == doctest::Approx(ab / n).epsilon(1e-14));
}

TEST_CASE("patch pairs are aligned crops of the degraded image") {
    const auto images = synthetic_images(2, 26, 30, 1, 3);
    const auto pairs = make_patch_pairs(images, 2, 12, 12, ModelKind::crnet_a);
    CHECK(pairs.size() == 2 * 2 * 2);
    const Tensor4 hr = modcrop(images[0], 2);
    const Tensor4 ilr = bicubic_resize(bicubic_resize(hr, Ratio::down(2)), Ratio::up(2));
    CHECK(pairs[1].target == crop(hr, 0, 12, 12, 12));
    CHECK(pairs[1].input == crop(ilr, 0, 12, 12, 12));

    const auto bp = make_patch_pairs(images, 3, 12, 6, ModelKind::crnet_b);
    const Tensor4 hr3 = modcrop(images[0], 3);
    const Tensor4 lr3 = bicubic_resize(hr3, Ratio::down(3));
    CHECK(bp[1].input.shape() == Shape{1, 1, 4, 4});
    CHECK(bp[1].input == crop(lr3, 0, 2, 4, 4));
    CHECK(bp[1].target == crop(hr3, 0, 6, 12, 12));
    CHECK_THROWS_AS(make_patch_pairs(images, 3, 10, 6, ModelKind::crnet_b), ConfigError);
    CHECK_THROWS_AS(make_patch_pairs(images, 2, 40, 40, ModelKind::crnet_a), ConfigError);
}

TEST_CASE("augmentation transforms input and target together") {
    const auto pairs = make_patch_pairs(synthetic_images(1, 24, 24, 1, 4), 2, 12, 12, ModelKind::crnet_b);
    const Dihedral t{3, true};
    const PatchPair a = augment_with(pairs[0], t);
    CHECK(a.input == apply_dihedral(pairs[0].input, t));
    CHECK(a.target == apply_dihedral(pairs[0].target, t));
    Rng r1(9), r2(9);
    CHECK(augment(pairs[0], r1).input == augment(pairs[0], r2).input);
}

TEST_CASE("scale schedule draws only configured scales") {
    ScaleSchedule s({2, 4}, 1);
    int seen2 = 0, seen4 = 0;
    for (int k = 0; k < 200; ++k) {
        const std::size_t v = s.next();
        CHECK((v == 2 || v == 4));
        (v == 2 ? seen2 : seen4)++;
    }
    CHECK(seen2 > 50);
    CHECK(seen4 > 50);
    CHECK_THROWS_AS(ScaleSchedule({}, 1), ConfigError);
}

TEST_CASE("synthetic images are deterministic and in range") {
    const auto a = synthetic_images(3, 16, 20, 3, 11);
    CHECK(a == synthetic_images(3, 16, 20, 3, 11));
    CHECK_FALSE(a == synthetic_images(3, 16, 20, 3, 12));
    for (const auto& im : a) {
        CHECK(im.shape() == Shape{1, 3, 16, 20});
        for (double v : im.data()) CHECK((v >= 0.0 && v <= 1.0));
    }
}

TEST_CASE("config parsing") {
    std::istringstream in("model = crnet-b   # comment\nn0 = 8\nm0 = 12\nscales = 2, 4\nlr = 0.001\naugment = false\n");
    const TrainConfig cfg = parse_train_config(in);
    CHECK(cfg.model == ModelKind::crnet_b);
    CHECK(cfg.optimizer == OptimizerKind::adam);
    CHECK(cfg.b.n0 == 8);
    CHECK(cfg.b.m0 == 12);
    CHECK(cfg.scales == std::vector<std::size_t>{2, 4});
    CHECK(cfg.lr == 0.001);
    CHECK_FALSE(cfg.augment);

    std::istringstream again(format_train_config(cfg));
    const TrainConfig round = parse_train_config(again);
    CHECK(format_train_config(round) == format_train_config(cfg));

    std::istringstream unknown("learning_rate = 0.1\n");
    CHECK_THROWS_AS(parse_train_config(unknown), ConfigError);
    std::istringstream bad("lr = fast\n");
    CHECK_THROWS_AS(parse_train_config(bad), ConfigError);
    std::istringstream noeq("lr 0.1\n");
    CHECK_THROWS_AS(parse_train_config(noeq), ConfigError);
    std::istringstream badscale("scales = 2,5\n");
    CHECK_THROWS_AS(parse_train_config(badscale), ConfigError);
}

TEST_CASE("a few training steps reduce the loss") {
    TrainConfig cfg = tiny_a();
    cfg.epochs = 30;
    cfg.augment = false;
    cfg.optimizer = OptimizerKind::adam;
    cfg.lr = 3e-3;
    cfg.lr_period = 0;
    cfg.grad_clip = 0.0;
    Model m = make_model(cfg);
    const auto images = synthetic_images(2, 24, 24, 1, 5);
    std::vector<std::size_t> epochs;
    const auto trace = train(m, images, cfg, TrainHooks{{}, [&](std::size_t e, const Model&) { epochs.push_back(e); }});
    REQUIRE(trace.size() == 60);  // 8 patches, batch 4
    CHECK(epochs.size() == 30);
    CHECK(trace.back().loss < 0.5 * trace.front().loss);
}

TEST_CASE("max_steps bounds training and divergence is reported") {
    TrainConfig cfg = tiny_a();
    cfg.max_steps = 3;
    Model m = make_model(cfg);
    const auto images = synthetic_images(4, 24, 24, 1, 6);
    CHECK(train(m, images, cfg).size() == 3);

    cfg.max_steps = 20;
    cfg.grad_clip = 0.0;
    cfg.momentum = 0.0;
    cfg.lr = 1e150;
    Model d = make_model(cfg);
    CHECK_THROWS_AS(train(d, images, cfg), DivergenceError);
}
