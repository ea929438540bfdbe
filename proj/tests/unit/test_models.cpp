#include <doctest.h>

#include <cmath>

#include "crnet/errors.hpp"
#include "crnet/models.hpp"
#include "crnet/ops.hpp"
#include "helpers.hpp"

using namespace crnet;

namespace {

Tensor4 conv(const Tensor4& x, const ParameterStore& p, const std::string& name) {
    return conv2d_same(x, p.tensor(name));
}

Tensor4 cista_oracle(const Tensor4& y, const ParameterStore& p, std::size_t K) {
    const Tensor4 drive = conv(y, p, "Wl");
    Tensor4 z = relu(drive);
    for (std::size_t k = 0; k < K; ++k) z = relu(drive + conv(z, p, "S"));
    return z;
}

Tensor4 crneta_oracle(const Tensor4& x, const ParameterStore& p, const CrnetAConfig& cfg) {
    const Tensor4 y = relu(conv(relu(conv(x, p, "F0")), p, "F1"));
    const Tensor4 z = cista_oracle(y, p, cfg.recursions);
    const Tensor4 r = conv(relu(conv(z, p, "Wh")), p, "H");
    return cfg.global_residual ? x + r : r;
}

Tensor4 crnetb_oracle(const Tensor4& x, const ParameterStore& p, const CrnetBConfig& cfg, std::size_t s) {
    const std::string tag = "x" + std::to_string(s);
    const Tensor4 head = conv(x, p, "head");
    const Tensor4 pre = head + conv(relu(conv(relu(head), p, "pre_" + tag + ".conv1")), p, "pre_" + tag + ".conv2");
    const Tensor4 y = relu(conv(relu(conv(pre, p, "F0")), p, "F1"));
    const Tensor4 z = cista_oracle(y, p, cfg.recursions);
    const Tensor4 trunk = pre + conv(relu(conv(z, p, "Wh")), p, "H");
    Tensor4 up;
    if (s == 4) {
        up = pixel_shuffle(conv(pixel_shuffle(conv(trunk, p, "up_x4.conv1"), 2), p, "up_x4.conv2"), 2);
    } else {
        up = pixel_shuffle(conv(trunk, p, "up_" + tag + ".conv"), s);
    }
    return conv(up, p, "tail");
}

CrnetAConfig small_a() { return CrnetAConfig{1, 4, 6, 3, 3, true}; }
CrnetBConfig small_b() { return CrnetBConfig{3, 4, 6, 3, 2, {2, 3, 4}}; }

}  // namespace

TEST_CASE("default CRNet-A parameter count") {
    // 9 * (128 + 128^2 + 256*128 + 256^2 + 128*256 + 128)
    CHECK(crneta_parameter_count(CrnetAConfig{}) == 1329408);
    CHECK(init_crneta(CrnetAConfig{}, 1).element_count() == 1329408);
}

TEST_CASE("parameter count is independent of the recursion depth") {
    CrnetAConfig cfg = small_a();
    const std::size_t base = crneta_parameter_count(cfg);
    for (std::size_t K : {1u, 5u, 25u, 48u}) {
        cfg.recursions = K;
        CHECK(crneta_parameter_count(cfg) == base);
        CHECK(init_crneta(cfg, 2).element_count() == base);
    }
}

TEST_CASE("CRNet-A forward equals the composition of primitives") {
    std::mt19937_64 rng(51);
    for (bool residual : {true, false}) {
        CrnetAConfig cfg = small_a();
        cfg.global_residual = residual;
        const ParameterStore p = init_crneta(cfg, 7);
        const Tensor4 x = test::random_tensor({2, 1, 9, 7}, rng, 0.0, 1.0);
        CHECK(max_abs_diff(crneta_forward(p, cfg, x), crneta_oracle(x, p, cfg)) < 1e-12);
    }
}

TEST_CASE("CRNet-B forward equals the composition of primitives at every scale") {
    std::mt19937_64 rng(52);
    const CrnetBConfig cfg = small_b();
    const ParameterStore p = init_crnetb(cfg, 8);
    const Tensor4 x = test::random_tensor({1, 3, 5, 6}, rng, 0.0, 1.0);
    for (std::size_t s : {2u, 3u, 4u}) {
        const Tensor4 out = crnetb_forward(p, cfg, x, s);
        CHECK(out.shape() == Shape{1, 3, 5 * s, 6 * s});
        CHECK(max_abs_diff(out, crnetb_oracle(x, p, cfg, s)) < 1e-12);
    }
}

TEST_CASE("a zeroed last layer makes CRNet-A the identity") {
    std::mt19937_64 rng(53);
    const CrnetAConfig cfg = small_a();
    const ParameterStore p = init_crneta(cfg, 9, InitOptions{true});
    const Tensor4 x = test::random_tensor({1, 1, 8, 8}, rng, 0.0, 1.0);
    CHECK(crneta_forward(p, cfg, x) == x);
}

TEST_CASE("He initialisation is deterministic and has the requested spread") {
    const CrnetAConfig cfg{1, 32, 64, 3, 2, true};
    const ParameterStore a = init_crneta(cfg, 5);
    CHECK(a == init_crneta(cfg, 5));
    CHECK_FALSE(a == init_crneta(cfg, 6));
    const Tensor4& s = a.tensor("S");  // fan-in 64 * 9
    const double var = norm2_squared(s) / static_cast<double>(s.size());
    CHECK(var == doctest::Approx(2.0 / (64.0 * 9.0)).epsilon(0.05));
}

TEST_CASE("parameter names and shapes") {
    const auto a = crneta_parameter_shapes(small_a());
    REQUIRE(a.size() == 6);
    CHECK(a[3].first == "S");
    CHECK(a[3].second == Shape{6, 6, 3, 3});
    CrnetBConfig b = small_b();
    b.scales = {4, 2};
    const auto names = init_crnetb(b, 1).names();
    CHECK(names.front() == "head");
    CHECK(names.back() == "tail");
    CHECK(std::count(names.begin(), names.end(), "up_x2.conv") == 1);
    CHECK(std::count(names.begin(), names.end(), "up_x3.conv") == 0);
    CHECK(std::count(names.begin(), names.end(), "up_x4.conv2") == 1);
}

TEST_CASE("configuration errors") {
    CrnetAConfig a = small_a();
    a.kernel = 4;
    CHECK_THROWS_AS(a.validate(), ConfigError);
    a = small_a();
    a.recursions = 0;
    CHECK_THROWS_AS(a.validate(), ConfigError);
    CrnetBConfig b = small_b();
    b.scales = {2, 5};
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b.scales = {2, 2};
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b = small_b();
    b.scales = {2};
    const ParameterStore p = init_crnetb(b, 1);
    CHECK_THROWS_AS(crnetb_forward(p, b, Tensor4(Shape{1, 3, 4, 4}), 3), ConfigError);
    CHECK_THROWS_AS(crneta_forward(init_crneta(small_a(), 1), small_a(), Tensor4(Shape{1, 3, 4, 4})), ShapeError);
    CHECK_THROWS_AS(parse_model_kind("crnet-c"), ConfigError);
}
