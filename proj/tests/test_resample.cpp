#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qsr/phantom.hpp"
#include "qsr/quality.hpp"
#include "qsr/resample.hpp"

using namespace qsr;

namespace {

double max_abs_diff(const Image2D& a, const Image2D& b) {
    double m = 0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

double total_variation(const Image2D& img) {
    double tv = 0;
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c) {
            if (c + 1 < img.width()) tv += std::abs(img(r, c + 1) - img(r, c));
            if (r + 1 < img.height()) tv += std::abs(img(r + 1, c) - img(r, c));
        }
    return tv;
}

/// Soft-edged ellipse, semi-axes a (along its own u) and b, rotated by `angle`
/// (radians, measured from the column axis towards increasing rows).
Image2D ellipse(std::size_t n, double cy, double cx, double a, double b, double angle) {
    Image2D img(n, n);
    const double cs = std::cos(angle), sn = std::sin(angle);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double du = double(c) - cx, dv = double(r) - cy;
            const double u = cs * du + sn * dv, v = -sn * du + cs * dv;
            const double e = std::sqrt(u * u / (a * a) + v * v / (b * b));
            img(r, c) = 1.0 / (1.0 + std::exp((e - 1.0) * 20.0));
        }
    return img;
}

double rms_diff(const Image2D& a, const Image2D& b) {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::pow(a.data()[k] - b.data()[k], 2);
    return std::sqrt(s / double(a.size()));
}

}  // namespace

TEST_CASE("gaussian_kernel") {
    SUBCASE("sigma 3") {
        const Kernel1D k = gaussian_kernel(3.0);
        REQUIRE(k.taps.size() == 19);
        CHECK(k.radius() == 9);
        double sum = 0;
        for (double v : k.taps) sum += v;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        for (std::size_t i = 0; i < 19; ++i) {
            CHECK(k.taps[i] == k.taps[18 - i]);
            CHECK(k.taps[i] <= k.taps[9]);
        }
    }
    SUBCASE("sigma 0.5 has taps proportional to exp(0), exp(-2), exp(-8)") {
        const Kernel1D k = gaussian_kernel(0.5);
        REQUIRE(k.taps.size() == 5);
        CHECK(k.taps[1] / k.taps[2] == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
        CHECK(k.taps[0] / k.taps[2] == doctest::Approx(std::exp(-8.0)).epsilon(1e-14));
    }
    SUBCASE("non-positive sigma") {
        CHECK_THROWS_AS(gaussian_kernel(0.0), Error);
        CHECK_THROWS_AS(gaussian_kernel(-1.0), Error);
    }
}

TEST_CASE("gaussian_blur") {
    SUBCASE("constant image is reproduced exactly") {
        for (double c : {0.0, 0.1, 0.77, 1.0}) CHECK(gaussian_blur(Image2D(40, 31, c), 3.0) == Image2D(40, 31, c));
    }
    SUBCASE("impulse response is the outer product of the kernel") {
        Image2D img(64, 64, 0.0);
        img(32, 32) = 1.0;
        const Image2D out = gaussian_blur(img, 3.0);
        const Kernel1D k = gaussian_kernel(3.0);
        double worst = 0;
        for (std::size_t r = 0; r < 64; ++r)
            for (std::size_t c = 0; c < 64; ++c) {
                const long dr = long(r) - 32, dc = long(c) - 32;
                const double want = (std::abs(dr) <= 9 && std::abs(dc) <= 9)
                                        ? k.taps[std::size_t(dr + 9)] * k.taps[std::size_t(dc + 9)]
                                        : 0.0;
                worst = std::max(worst, std::abs(out(r, c) - want));
            }
        CHECK(worst <= 1e-15);
    }
    SUBCASE("matches direct 2D convolution with reflection, including borders") {
        std::mt19937_64 rng(5);
        for (double sigma : {0.7, 1.5, 3.0}) {
            const Image2D img = oracle::random_image(rng, 23, 37);
            CHECK(max_abs_diff(gaussian_blur(img, sigma), oracle::blur(img, sigma)) <= 1e-12);
        }
    }
    SUBCASE("images smaller than the kernel reflect repeatedly") {
        std::mt19937_64 rng(6);
        const Image2D img = oracle::random_image(rng, 5, 3);
        CHECK(max_abs_diff(gaussian_blur(img, 3.0), oracle::blur(img, 3.0)) <= 1e-12);
    }
    SUBCASE("reduces total variation") {
        std::mt19937_64 rng(7);
        for (int t = 0; t < 10; ++t) {
            const Image2D img = oracle::random_image(rng, 32, 32);
            CHECK(total_variation(gaussian_blur(img, 1.0 + t * 0.3)) < total_variation(img));
        }
    }
    SUBCASE("serial reference is bit-identical") {
        std::mt19937_64 rng(8);
        const Image2D img = oracle::random_image(rng, 70, 45);
        CHECK(serial::gaussian_blur(img, 3.0) == gaussian_blur(img, 3.0));
    }
}

TEST_CASE("bicubic_resize") {
    std::mt19937_64 rng(9);
    SUBCASE("same size is a bit-equal copy") {
        const Image2D img = oracle::random_image(rng, 30, 20);
        CHECK(bicubic_resize(img, 30, 20) == img);
    }
    SUBCASE("constants survive any size") {
        for (double c : {0.0, 0.3, 1.0})
            for (auto [h, w] : {std::pair<std::size_t, std::size_t>{7, 9}, {64, 64}, {300, 129}, {1, 1}})
                CHECK(bicubic_resize(Image2D(50, 60, c), h, w) == Image2D(h, w, c));
    }
    SUBCASE("ramp round trip 256 -> 64 -> 256") {
        Image2D ramp(256, 256);
        for (std::size_t i = 0; i < 256; ++i)
            for (std::size_t j = 0; j < 256; ++j) ramp(i, j) = double(i) / 512 + double(j) / 512;
        CHECK(max_abs_diff(bicubic_resize(bicubic_resize(ramp, 64, 64), 256, 256), ramp) < 1e-2);
    }
    SUBCASE("interior of a linear ramp is reproduced exactly by cubic convolution") {
        Image2D ramp(32, 32);
        for (std::size_t i = 0; i < 32; ++i)
            for (std::size_t j = 0; j < 32; ++j) ramp(i, j) = 0.01 * double(j);
        const Image2D up = bicubic_resize(ramp, 32, 64);
        // output column d samples src = (d + 0.5) / 2 - 0.5; away from the clamped border
        for (std::size_t d = 8; d < 56; ++d) CHECK(up(5, d) == doctest::Approx(0.01 * ((d + 0.5) / 2 - 0.5)).epsilon(1e-12));
    }
    SUBCASE("zero output size") { CHECK_THROWS_AS(bicubic_resize(Image2D(4, 4), 0, 4), Error); }
}

TEST_CASE("degrade") {
    std::mt19937_64 rng(10);
    SUBCASE("dimensions and range") {
        const Image2D img = oracle::random_image(rng, 256, 256);
        const Image2D d = degrade(img, {});
        CHECK(d.height() == 256);
        CHECK(d.width() == 256);
        CHECK(d.min() >= 0.0);
        CHECK(d.max() <= 1.0);
    }
    SUBCASE("passes through the downsampled size") {
        const Image2D img = oracle::random_image(rng, 64, 64);
        const Image2D expect = bicubic_resize(bicubic_resize(gaussian_blur(img, 3.0), 16, 16), 64, 64);
        Image2D clamped = expect;
        for (auto& v : clamped.data()) v = std::clamp(v, 0.0, 1.0);
        CHECK(degrade(img, {}) == clamped);
    }
    SUBCASE("constant stays constant") {
        for (double c : {0.0, 0.42, 1.0}) CHECK(degrade(Image2D(32, 32, c), {}) == Image2D(32, 32, c));
    }
    SUBCASE("lowers PSNR of a textured phantom") {
        PhantomSpec spec;
        spec.patients = 1;
        spec.slices_per_patient = 1;
        const Image2D img = generate_dataset(spec)[0].slices[0];
        CHECK_FALSE(psnr(img, img).has_value());
        const auto p = psnr(img, degrade(img, {}));
        REQUIRE(p.has_value());
        CHECK(std::isfinite(*p));
    }
    SUBCASE("indivisible dims") {
        CHECK_THROWS_AS(degrade(Image2D(30, 32), {}), Error);
        CHECK_THROWS_AS(degrade(Image2D(32, 32), {0.0, 4}), Error);
        CHECK_THROWS_AS(degrade(Image2D(32, 32), {3.0, 0}), Error);
    }
    SUBCASE("degrade_volume names the volume on error") {
        const Volume v{"odd", {Image2D(30, 30)}};
        CHECK_THROWS_WITH_AS(degrade_volume(v, {}), doctest::Contains("odd"), Error);
    }
}

TEST_CASE("recenter") {
    SUBCASE("centred image is unchanged") {
        const Image2D img = ellipse(65, 32, 32, 10, 6, 0.3);
        const Corrected c = recenter(img);
        CHECK_FALSE(c.degenerate);
        CHECK(c.image == img);
    }
    SUBCASE("blob at (64,64) moves to the centre") {
        const Image2D img = ellipse(256, 64, 64, 12, 12, 0);
        const Corrected c = recenter(img);
        const auto [r, col] = oracle::centroid(c.image);
        CHECK(std::abs(r - 127.5) <= 0.5 + 1e-9);
        CHECK(std::abs(col - 127.5) <= 0.5 + 1e-9);
        // pure integer translation: the peak value is preserved
        CHECK(c.image.max() == img.max());
    }
    SUBCASE("shift equals the rounded centroid offset") {
        Image2D img(20, 20, 0.0);
        img(2, 3) = 1.0;
        const Corrected c = recenter(img);
        // centre (9.5, 9.5); offset (7.5, 6.5) rounds half away from zero to (8, 7)
        CHECK(c.image(10, 10) == 1.0);
        double sum = 0;
        for (double v : c.image.data()) sum += v;
        CHECK(sum == 1.0);
    }
    SUBCASE("constant image is flagged") {
        const Corrected c = recenter(Image2D(8, 8, 0.5));
        CHECK(c.degenerate);
        CHECK(c.image == Image2D(8, 8, 0.5));
    }
}

TEST_CASE("rotation_correct") {
    SUBCASE("moment angle agrees with the eigenvector oracle") {
        for (double deg : {-70.0, -30.0, 0.0, 20.0, 45.0, 80.0}) {
            const Image2D img = ellipse(96, 47.5, 47.5, 30, 12, deg * std::numbers::pi / 180);
            CHECK(principal_axis_angle(img) == doctest::Approx(oracle::major_axis_angle(img)).epsilon(1e-9));
            CHECK(principal_axis_angle(img) * 180 / std::numbers::pi == doctest::Approx(deg).epsilon(1e-3));
        }
    }
    SUBCASE("vertical ellipse is unchanged") {
        const Image2D img = ellipse(96, 47.5, 47.5, 12, 30, 0);
        const Corrected c = rotation_correct(img);
        CHECK_FALSE(c.degenerate);
        CHECK(rms_diff(c.image, img) < 1e-6);
    }
    SUBCASE("tilted ellipses end up vertical within one degree") {
        for (double deg : {30.0, -30.0, 60.0, 10.0, 85.0}) {
            const Image2D img = ellipse(128, 60, 70, 40, 15, deg * std::numbers::pi / 180);
            const Corrected c = rotation_correct(img);
            REQUIRE_FALSE(c.degenerate);
            const double a = oracle::major_axis_angle(c.image) * 180 / std::numbers::pi;
            CAPTURE(deg);
            CHECK(90.0 - std::abs(a) < 1.0);
            // rotation is about the centroid
            const auto [r0, c0] = oracle::centroid(img);
            const auto [r1, c1] = oracle::centroid(c.image);
            CHECK(std::abs(r1 - r0) < 0.1);
            CHECK(std::abs(c1 - c0) < 0.1);
        }
    }
    SUBCASE("isotropic disk is flagged") {
        const Image2D disk = ellipse(64, 31.5, 31.5, 15, 15, 0);
        const Corrected c = rotation_correct(disk);
        CHECK(c.degenerate);
        CHECK(c.image == disk);
        CHECK(rotation_correct(Image2D(8, 8, 0.3)).degenerate);
    }
    SUBCASE("idempotent on phantoms") {
        PhantomSpec spec;
        spec.patients = 2;
        spec.slices_per_patient = 3;
        spec.size = 128;
        const Dataset ds = generate_dataset(spec);
        for (const auto& v : ds.volumes())
            for (const auto& s : v.slices) {
                const Image2D once = rotation_correct(s).image;
                const Image2D twice = rotation_correct(once).image;
                CHECK(rms_diff(once, twice) < 1e-3);
            }
    }
}

TEST_CASE("preprocess") {
    SUBCASE("128 and 168 pixel slices become 256") {
        for (std::size_t n : {128u, 168u}) {
            const Volume v{"p", {ellipse(n, n / 2.0, n / 2.0, n / 4.0, n / 6.0, 0.4), ellipse(n, n / 3.0, n / 2.0, n / 5.0, n / 7.0, 1.0)}};
            const Volume out = preprocess(v, 256);
            REQUIRE(out.slices.size() == 2);
            for (const auto& s : out.slices) {
                CHECK(s.height() == 256);
                CHECK(s.width() == 256);
            }
        }
    }
    SUBCASE("already centred, aligned and normalised input is unchanged") {
        Image2D img = ellipse(256, 127.5, 127.5, 50, 90, 0);
        const double lo = img.min(), hi = img.max();
        for (auto& v : img.data()) v = (v - lo) / (hi - lo);
        const Volume v{"p", {img}};
        CHECK(max_abs_diff(preprocess(v, 256).slices[0], img) <= 1e-6);
    }
    SUBCASE("output is normalised to [0,1]") {
        PhantomSpec spec;
        spec.patients = 1;
        spec.size = 96;
        const Volume out = preprocess(generate_dataset(spec)[0], 64);
        double lo = 1, hi = 0;
        for (const auto& s : out.slices) {
            lo = std::min(lo, s.min());
            hi = std::max(hi, s.max());
        }
        CHECK(lo == 0.0);
        CHECK(hi == 1.0);
    }
}
