#include <doctest.h>

#include "crnet/color.hpp"
#include "crnet/errors.hpp"
#include "helpers.hpp"

using namespace crnet;

namespace {

Tensor4 pixel(double r, double g, double b) { return Tensor4(Shape{1, 3, 1, 1}, {r, g, b}); }

}  // namespace

TEST_CASE("studio-swing luminance endpoints") {
    CHECK(rgb_to_ycbcr_y(pixel(0, 0, 0))(0, 0, 0, 0) == doctest::Approx(16.0 / 255.0).epsilon(1e-15));
    CHECK(rgb_to_ycbcr_y(pixel(1, 1, 1))(0, 0, 0, 0) == doctest::Approx(235.0 / 255.0).epsilon(1e-15));
}

TEST_CASE("luminance coefficients per primary") {
    CHECK(rgb_to_ycbcr_y(pixel(1, 0, 0))(0, 0, 0, 0) == doctest::Approx((16.0 + 65.481) / 255.0).epsilon(1e-15));
    CHECK(rgb_to_ycbcr_y(pixel(0, 1, 0))(0, 0, 0, 0) == doctest::Approx((16.0 + 128.553) / 255.0).epsilon(1e-15));
    CHECK(rgb_to_ycbcr_y(pixel(0, 0, 1))(0, 0, 0, 0) == doctest::Approx((16.0 + 24.966) / 255.0).epsilon(1e-15));
}

TEST_CASE("chroma of grey is neutral") {
    const Tensor4 ycc = rgb_to_ycbcr(pixel(0.3, 0.3, 0.3));
    CHECK(ycc(0, 1, 0, 0) == doctest::Approx(128.0 / 255.0).epsilon(1e-14));
    CHECK(ycc(0, 2, 0, 0) == doctest::Approx(128.0 / 255.0).epsilon(1e-14));
}

TEST_CASE("YCbCr round trip") {
    std::mt19937_64 rng(21);
    const Tensor4 rgb = test::random_tensor({2, 3, 4, 5}, rng, 0.0, 1.0);
    CHECK(max_abs_diff(ycbcr_to_rgb(rgb_to_ycbcr(rgb)), rgb) < 1e-13);
}

TEST_CASE("luminance passes single-channel data through and rejects other layouts") {
    std::mt19937_64 rng(22);
    const Tensor4 g = test::random_tensor({1, 1, 3, 3}, rng);
    CHECK(luminance(g) == g);
    CHECK_THROWS_AS(luminance(Tensor4(Shape{1, 2, 3, 3})), ShapeError);
    CHECK_THROWS_AS(rgb_to_ycbcr_y(g), ShapeError);
}
