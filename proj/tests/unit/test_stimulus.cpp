#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "apgstmd/eval.hpp"
#include "apgstmd/stimulus.hpp"

using namespace apgstmd;
using std::numbers::pi;

namespace {

StimulusSpec small_spec() {
    StimulusSpec s;
    s.width = 160;
    s.height = 80;
    s.frames = 120;
    s.path = LinearPath{20.0, 40.0, 0.0, 250.0};
    return s;
}

double measured_contrast(const StimulusRenderer& r, int k) {
    const GroundTruth g = r.truth(k);
    return weber_contrast(r.frame(k), target_box(g.x, g.y, r.spec().target_width, r.spec().target_height));
}

}  // namespace

TEST_CASE("linear path advances 0.25 px per frame at 250 px/s and 1 kHz") {
    const StimulusRenderer r(small_spec());
    for (int k = 1; k < r.frame_count(); ++k) {
        CHECK(r.truth(k).x - r.truth(k - 1).x == doctest::Approx(0.25));
        CHECK(r.truth(k).y == doctest::Approx(40.0));
        CHECK(r.truth(k).visible);
        CHECK(r.truth(k).theta == 0.0);
    }
}

TEST_CASE("rendered target centroid tracks the ground truth") {
    StimulusSpec s = small_spec();
    s.frames = 60;
    s.path = LinearPath{30.0, 30.0, pi / 5, 330.0};
    const StimulusRenderer r(s);
    for (int k = 0; k < r.frame_count(); ++k) {
        const Frame f = r.frame(k);
        double m = 0, mx = 0, my = 0;
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) {
                const double w = 255.0 - f.at(x, y);
                m += w;
                mx += w * x;
                my += w * y;
            }
        REQUIRE(m > 0.0);
        CHECK(std::hypot(mx / m - r.truth(k).x, my / m - r.truth(k).y) <= 0.6);
    }
}

TEST_CASE("circular path: 30 degree occlusion hides 30/360 of a revolution") {
    StimulusSpec s;
    s.width = 160;
    s.height = 160;
    CircularPath c;
    c.cx = 80;
    c.cy = 80;
    c.radius = 50;
    c.speed = 250;
    c.occlusion_start = pi / 3;
    c.occlusion_arc = pi / 6;
    s.path = c;
    const int revolution = static_cast<int>(std::lround(2 * pi * 50 / 250 * 1000));
    s.frames = revolution;
    const StimulusRenderer r(s);
    int hidden = 0;
    for (int k = 0; k < revolution; ++k) hidden += r.truth(k).visible ? 0 : 1;
    CHECK(std::abs(hidden - revolution / 12.0) <= 1.0);
    // hidden frames show no target
    for (int k = 0; k < revolution; k += 7)
        if (!r.truth(k).visible) {
            const Frame f = r.frame(k);
            for (double v : f.data) REQUIRE(v == 255.0);
        }
    const auto [ex, ey] = c.occlusion_end();
    CHECK(std::hypot(ex - 80, ey - 80) == doctest::Approx(50.0));
}

TEST_CASE("requested Weber contrast is met on a mid-grey ground") {
    StimulusSpec s = small_spec();
    s.background.uniform = 128.0;
    s.contrast = 0.4;
    const StimulusRenderer r(s);
    for (int k : {0, 37, 119}) CHECK(std::abs(measured_contrast(r, k) - 0.4) <= 0.02);
}

TEST_CASE("unreachable contrast names the feasible range") {
    StimulusSpec s = small_spec();
    s.background.uniform = 128.0;
    s.contrast = 1.0;
    std::string message;
    try {
        render(s);
    } catch (const std::invalid_argument& e) {
        message = e.what();
    }
    CHECK(message.find("feasible") != std::string::npos);
    s.contrast = 1.5;
    CHECK_THROWS_AS(render(s), std::invalid_argument);
}

TEST_CASE("invalid specs are rejected") {
    StimulusSpec s = small_spec();
    s.path = LinearPath{20.0, 40.0, 0.0, 1200.0};
    CHECK_THROWS_AS(StimulusRenderer{s}, std::invalid_argument);
    s.path = LinearPath{150.0, 40.0, 0.0, 250.0};  // leaves the frame
    CHECK_THROWS_AS(StimulusRenderer{s}, std::invalid_argument);
}

TEST_CASE("primer/probe: collinear continuation at offset 0, retrace at offset pi") {
    PrimerProbeSpec p;
    p.width = 200;
    p.height = 80;
    p.x0 = 60;
    p.y0 = 40;
    p.primer_frames = 100;
    p.probe_frames = 60;
    for (const double off : {0.0, pi}) {
        p.offset = off;
        const PrimerProbeStimulus pp = primer_probe(p);
        CHECK(pp.boundary_frame == 100);
        const StimulusRenderer r(pp.spec);
        CHECK(r.frame_count() == 160);
        const GroundTruth b = r.truth(pp.boundary_frame);
        for (int k = 1; k < 40; ++k) {
            const GroundTruth g = r.truth(pp.boundary_frame + k);
            CHECK(g.theta == doctest::Approx(off));
            if (off == 0.0) {
                CHECK(g.x - b.x == doctest::Approx(0.25 * k));
            } else {
                const GroundTruth back = r.truth(pp.boundary_frame - k);
                CHECK(g.x == doctest::Approx(back.x));
                CHECK(g.y == doctest::Approx(back.y).epsilon(1e-9));
            }
        }
    }
    p.offset = 0.0;
    p.probe_frames = 600;
    CHECK_THROWS_AS(primer_probe(p), std::invalid_argument);
}

TEST_CASE("primer/probe contrasts match their requests") {
    PrimerProbeSpec p;
    p.width = 200;
    p.height = 80;
    p.x0 = 40;
    p.y0 = 40;
    p.primer_frames = 100;
    p.probe_frames = 60;
    p.primer_contrast = 1.0;
    p.probe_contrast = 0.25;
    const PrimerProbeStimulus pp = primer_probe(p);
    const StimulusRenderer r(pp.spec);
    for (int k : {0, 50, 99}) CHECK(std::abs(measured_contrast(r, k) - 1.0) <= 0.02);
    for (int k : {100, 130, 159}) CHECK(std::abs(measured_contrast(r, k) - 0.25) <= 0.02);
}

TEST_CASE("panned texture background moves with the configured velocity") {
    StimulusSpec s = small_spec();
    s.contrast.reset();
    s.target_luminance = 0.0;
    s.background.texture = make_noise_texture(400, 200, 11, 2.0, 60.0, 220.0);
    s.background.vx = 250.0;
    const StimulusRenderer r(s);
    const Frame a = r.frame(0);
    const Frame b = r.frame(40);  // shifted right by 10 px
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 100; ++x) CHECK(b.at(x + 10, y) == doctest::Approx(a.at(x, y)).epsilon(1e-9));
}

TEST_CASE("rendering is deterministic") {
    StimulusSpec s = small_spec();
    s.background.texture = make_noise_texture(200, 100, 5, 1.5, 40.0, 240.0);
    s.contrast = 0.3;
    const RenderedStimulus a = render(s), b = render(s);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t k = 0; k < a.frames.size(); ++k) CHECK(a.frames[k].data == b.frames[k].data);
    const Texture t1 = make_noise_texture(50, 40, 9, 2.0, 0, 255), t2 = make_noise_texture(50, 40, 9, 2.0, 0, 255);
    const Texture t3 = make_noise_texture(50, 40, 10, 2.0, 0, 255);
    CHECK(t1.data == t2.data);
    CHECK(t1.data != t3.data);
    CHECK(*std::min_element(t1.data.begin(), t1.data.end()) == doctest::Approx(0.0));
    CHECK(*std::max_element(t1.data.begin(), t1.data.end()) == doctest::Approx(255.0));
}

TEST_CASE("ground truth CSV layout") {
    std::ostringstream os;
    write_ground_truth_header(os);
    write_ground_truth_row(os, GroundTruth{3, 1.5, 2.25, false, 0.0});
    CHECK(os.str() == "frame,x,y,visible,theta\n3,1.5,2.25,0,0\n");
}

TEST_CASE("contrast box holds the fully covered pixels") {
    CHECK(target_box(40.0, 40.0, 5, 5) == Area{38, 38, 43, 43});
    CHECK(target_box(52.5, 40.0, 5, 5) == Area{51, 38, 55, 43});
    CHECK(target_box(20.25, 10.0, 1, 1) == Area{20, 10, 21, 11});
    CHECK(target_box(20.5, 10.0, 3, 1) == Area{20, 10, 22, 11});
}
