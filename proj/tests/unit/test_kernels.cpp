#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "apgstmd/core.hpp"
#include "apgstmd/kernels.hpp"

using namespace apgstmd;
constexpr double kPi = std::numbers::pi;

TEST_CASE("gaussian2d: centre value, normalisation, truncated mass") {
    const Kernel2D raw = gaussian2d(1.0, 3, false);
    CHECK(raw.at(0, 0) == doctest::Approx(1.0 / (2 * kPi)).epsilon(1e-12));
    CHECK(raw.sum() >= 0.995);
    CHECK(raw.sum() <= 1.0);
    const Kernel2D unit = gaussian2d(1.0, 3, true);
    CHECK(unit.sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS(gaussian2d(0.0, 3));
}

TEST_CASE("attention kernel: centre value of the raw sampling") {
    const Kernel2D k = attention_kernel(3.0, 0.0, 9, false);
    CHECK(k.at(0, 0) == doctest::Approx(2.0 / (kPi * 9.0)).epsilon(1e-12));
    CHECK(k.at(0, 0) == doctest::Approx(0.070736).epsilon(1e-5));
    CHECK_THROWS(attention_kernel(0.0, 0.0, 3));
}

TEST_CASE("attention kernel: discrete sum vanishes at radius 3 scale") {
    for (double s : {2.0, 2.5, 3.0, 3.5}) {
        const Kernel2D k = attention_kernel(s, kPi / 4, truncation_radius(s, 3.0));
        CHECK(std::abs(k.sum()) <= 1e-3);
    }
}

TEST_CASE("attention kernel: raw discrete sum decreases as the radius grows") {
    for (double s : {2.0, 3.0}) {
        double prev = 1e9;
        for (double m : {2.0, 3.0, 4.0}) {
            const double sum = std::abs(attention_kernel(s, 0.0, truncation_radius(s, m), false).sum());
            CHECK(sum < prev);
            prev = sum;
        }
    }
}

TEST_CASE("attention kernel: pi/2 orientation is the rotated grid") {
    const int r = 9;
    const Kernel2D k0 = attention_kernel(3.0, 0.0, r);
    const Kernel2D k90 = attention_kernel(3.0, kPi / 2, r);
    // rotating (x, y) by pi/2 maps x cos + y sin onto y
    for (int y = -r; y <= r; ++y)
        for (int x = -r; x <= r; ++x) CHECK(k90.at(x, y) == doctest::Approx(k0.at(y, -x)).epsilon(1e-12));
}

TEST_CASE("gamma kernel: shape and normalisation") {
    const Kernel1D g2 = gamma_kernel(2, 3.0, 30, 1.0, false);
    CHECK(g2.data[0] == 0.0);
    CHECK(g2.sum() >= 0.97);
    CHECK(g2.sum() <= 1.01);

    const Kernel1D g1 = gamma_kernel(1, 3.0, 30, 1.0, false);
    const auto peak = std::max_element(g1.data.begin(), g1.data.end()) - g1.data.begin();
    CHECK(peak == 3);
    CHECK(g1.data[3] == doctest::Approx(std::exp(-1.0) / 3.0).epsilon(1e-12));

    const Kernel1D unit = gamma_kernel(5, 25.0, 120, 1.0);
    CHECK(unit.sum() == doctest::Approx(1.0).epsilon(1e-14));
    for (double v : unit.data) CHECK(v >= 0.0);

    CHECK_THROWS(gamma_kernel(0, 3.0, 10, 1.0));
    CHECK_THROWS(gamma_kernel(2, -1.0, 10, 1.0));
}

TEST_CASE("gamma kernel length covers at least 3 tau") {
    for (auto [n, tau] : {std::pair{2, 3.0}, {3, 15.0}, {5, 25.0}, {8, 40.0}})
        CHECK(gamma_kernel_length(n, tau, 1.0) >= static_cast<int>(3 * tau));
}

TEST_CASE("gamma kernel peaks at tau") {
    const Kernel1D a = gamma_kernel(5, 25.0, 120, 1.0);
    const Kernel1D b = gamma_kernel(8, 40.0, 120, 1.0);
    const auto pa = std::max_element(a.data.begin(), a.data.end()) - a.data.begin();
    const auto pb = std::max_element(b.data.begin(), b.data.end()) - b.data.begin();
    CHECK(pa == 25);
    CHECK(pb == 40);
}

TEST_CASE("band-pass kernel: zero start, zero DC, one sign change") {
    const ModelConfig c;
    const int len = std::max(gamma_kernel_length(c.n1, c.tau1, 1.0), gamma_kernel_length(c.n2, c.tau2, 1.0));
    const Kernel1D h = bandpass_kernel(c.n1, c.tau1, c.n2, c.tau2, std::max(len, 61), 1.0);
    CHECK(h.data[0] == 0.0);
    CHECK(std::abs(h.sum()) <= 1e-6);
    int changes = 0;
    double prev = 0.0;
    for (int k = 1; k <= 60; ++k) {
        const double v = h.data[k];
        if (v == 0.0) continue;
        if (prev != 0.0 && (v > 0) != (prev > 0)) ++changes;
        prev = v;
    }
    CHECK(h.data[1] > 0.0);
    CHECK(changes == 1);
    CHECK_THROWS(bandpass_kernel(2, 9.0, 6, 3.0, 30, 1.0));
}

TEST_CASE("spatial inhibition kernel") {
    const Kernel2D w = inhibition_spatial(1.0, 3.5, 1.2, 0.0, 1.25, 2.5, 8);
    const double centre = 1.0 / (2 * kPi * 1.25 * 1.25) - 1.2 / (2 * kPi * 2.5 * 2.5);
    CHECK(w.at(0, 0) == doctest::Approx(centre).epsilon(1e-12));
    CHECK(w.at(0, 0) == doctest::Approx(0.07130).epsilon(1e-4));
    // negative surround is scaled by B
    auto g = [](double x, double y) {
        const double r2 = x * x + y * y;
        return std::exp(-r2 / (2 * 1.25 * 1.25)) / (2 * kPi * 1.25 * 1.25) -
               1.2 * std::exp(-r2 / (2 * 2.5 * 2.5)) / (2 * kPi * 2.5 * 2.5);
    };
    REQUIRE(g(4, 0) < 0);
    CHECK(w.at(4, 0) == doctest::Approx(3.5 * g(4, 0)).epsilon(1e-12));

    const Kernel2D pure = inhibition_spatial(1.0, 3.5, 0.0, 0.0, 1.25, 2.5, 4);
    const Kernel2D gauss = gaussian2d(1.25, 4, false);
    for (std::size_t i = 0; i < pure.data.size(); ++i) CHECK(pure.data[i] == doctest::Approx(gauss.data[i]));
    CHECK_THROWS(inhibition_spatial(1.0, 3.5, 1.2, 0.0, 2.5, 2.5, 8));
}

TEST_CASE("directional inhibition kernel") {
    const DirectionalKernel wd = inhibition_directional(1.5, 3.0, 8);
    const double w0 = 1.0 / (std::sqrt(2 * kPi) * 1.5) - 1.0 / (std::sqrt(2 * kPi) * 3.0);
    CHECK(wd.values[0] == doctest::Approx(w0).epsilon(1e-12));
    CHECK(wd.values[0] == doctest::Approx(0.13298).epsilon(1e-4));
    for (int k = 1; k < 8; ++k) CHECK(wd.at_offset(k) == doctest::Approx(wd.at_offset(-k)));
    // dense unwrapped support
    double dense = 0.0;
    for (int k = -40; k <= 40; ++k)
        dense += std::exp(-k * k / (2 * 1.5 * 1.5)) / (std::sqrt(2 * kPi) * 1.5) -
                 std::exp(-k * k / (2 * 3.0 * 3.0)) / (std::sqrt(2 * kPi) * 3.0);
    CHECK(std::abs(dense) <= 1e-3);
    CHECK_THROWS(inhibition_directional(3.0, 1.5, 8));
}

TEST_CASE("prediction kernel: unit sum, ring argmax, antipodal ratio") {
    const double v = 250.0, dt = 20.0, zeta = 2.0, eta = 2.5;
    const int r = prediction_kernel_radius(v, dt, zeta);
    const double ring = v * dt / 1000.0;
    for (int d = 0; d < 8; ++d) {
        const double theta = d * kPi / 4;
        const Kernel2D k = prediction_kernel(theta, v, dt, zeta, eta, r);
        CHECK(k.sum() == doctest::Approx(1.0).epsilon(1e-14));
        const auto it = std::max_element(k.data.begin(), k.data.end());
        const int idx = static_cast<int>(it - k.data.begin());
        const int x = idx % k.side() - r;
        const int y = idx / k.side() - r;
        CHECK(std::abs(std::hypot(x, y) - ring) <= 1.0 + 1e-9);
        const double ang = std::atan2(y, x);
        CHECK(std::abs(std::remainder(ang - theta, 2 * kPi)) <= kPi / 8);
    }
    // on-axis ring points at phi = theta and theta + pi
    const Kernel2D k0 = prediction_kernel(0.0, v, dt, zeta, eta, r);
    CHECK(k0.at(-5, 0) / k0.at(5, 0) == doctest::Approx(std::exp(-2 * eta)).epsilon(1e-9));
    CHECK_THROWS(prediction_kernel(0.0, v, dt, zeta, eta, 3));
}

TEST_CASE("kernel construction is deterministic") {
    const ModelConfig c;
    CHECK(attention_kernel(2.5, 0.3, 8).data == attention_kernel(2.5, 0.3, 8).data);
    CHECK(prediction_kernel(1.0, 250, 20, 2, 2.5, 11).data == prediction_kernel(1.0, 250, 20, 2, 2.5, 11).data);
    CHECK(gamma_kernel(8, 40, 120, 1.0).data == gamma_kernel(8, 40, 120, 1.0).data);
}
