#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apgstmd/eval.hpp"
#include "apgstmd/pipeline.hpp"

using namespace apgstmd;

namespace {

StimulusSpec mover(int frames) {
    StimulusSpec s;
    s.width = 160;
    s.height = 60;
    s.frames = frames;
    s.path = LinearPath{15.0, 30.0, 0.0, 250.0};
    return s;
}

std::string detections_csv(const StimulusSpec& s, const ModelConfig& c) {
    const StimulusRenderer r(s);
    Pipeline p(s.width, s.height, c);
    std::ostringstream os;
    write_detections_header(os);
    for (int k = 0; k < r.frame_count(); ++k) write_detections_rows(os, k, p.step(r.frame(k)).detections);
    return os.str();
}

}  // namespace

TEST_CASE("first frame: zero map, no areas, P_e = P; no detections during warm-up") {
    const StimulusSpec s = mover(200);
    const StimulusRenderer r(s);
    Pipeline p(s.width, s.height, ModelConfig{});
    const TemporalKernels tk = TemporalKernels::from_config(ModelConfig{});
    CHECK(p.warmup_frames() == tk.bandpass.length() + tk.tm1_slow.length() - 1);
    for (int k = 0; k < r.frame_count(); ++k) {
        const StepResult res = p.step(r.frame(k));
        if (k == 0) {
            CHECK(res.recalled.max_value() == 0.0);
            CHECK(res.areas.empty());
            CHECK(res.enhanced.data == res.smoothed.data);
        }
        CHECK(res.reliable == (k + 1 >= p.warmup_frames()));
        if (!res.reliable) CHECK(res.detections.empty());
    }
    CHECK(p.frames_processed() == 200);
    CHECK_THROWS(p.step(Frame(10, 10, 200.0)));
}

TEST_CASE("prediction disabled reduces to the plain STMD chain") {
    ModelConfig c;
    c.prediction = false;
    const StimulusSpec s = mover(260);
    const StimulusRenderer r(s);
    Pipeline p(s.width, s.height, c);

    // reference run with the attention and prediction stages stubbed out
    TemporalState temporal(s.width, s.height, TemporalKernels::from_config(c), c.dt_ms());
    const Inhibitor inh(
        inhibition_spatial(c.A, c.B, c.e, c.rho, c.sigma2, c.sigma3,
                           truncation_radius(std::max(c.sigma2, c.sigma3), c.spatial_truncation)),
        inhibition_directional(c.sigma4, c.sigma5, c.directions), InhibitionMode::Staged);
    double err = 0.0, peak = 0.0;
    for (int k = 0; k < r.frame_count(); ++k) {
        const Frame f = r.frame(k);
        const StepResult res = p.step(f);
        const Frame pre = preprocess(f, c.sigma1, c.spatial_truncation);
        const DirectionalField e =
            inh.apply(correlate(temporal.medulla_step(temporal.lmc_step(pre)), c.gamma, preferred_directions(8)));
        CHECK(res.areas.empty());
        CHECK(res.map.max_value() == 0.0);
        CHECK(res.q.data == res.e.data);
        for (std::size_t i = 0; i < e.data.size(); ++i) {
            err = std::max(err, std::abs(res.e.data[i] - e.data[i]));
            peak = std::max(peak, e.data[i]);
        }
    }
    CHECK(peak > 0.0);
    CHECK(err <= 1e-9);
}

TEST_CASE("two runs give identical detection CSVs") {
    StimulusSpec s = mover(320);
    s.background.texture = make_noise_texture(160, 60, 4, 2.0, 150.0, 255.0);
    s.contrast = 0.5;
    const std::string a = detections_csv(s, ModelConfig{});
    const std::string b = detections_csv(s, ModelConfig{});
    CHECK(a == b);
    CHECK(a.find('\n') + 1 < a.size());  // some detections were written
}

TEST_CASE("steady-state tracking: the recalled map covers the next target position") {
    // constant contrast on a uniform ground never passes the trace test
    const StimulusSpec s = mover(520);
    const StimulusRenderer r(s);
    ModelConfig c;
    c.trace_filter = false;
    Pipeline p(s.width, s.height, c);
    int lock = -1, total = 0, covered = 0;
    for (int k = 0; k < r.frame_count(); ++k) {
        const StepResult res = p.step(r.frame(k));
        const GroundTruth g = r.truth(k);
        if (lock >= 0) {
            ++total;
            const double thr = c.map_threshold_fraction * res.recalled.max_value();
            const int x = static_cast<int>(std::lround(g.x)), y = static_cast<int>(std::lround(g.y));
            if (thr > 0.0 && res.recalled.at(x, y) > thr) ++covered;
        } else {
            for (const Detection& d : res.detections)
                if (d.confirmed && std::hypot(d.x - g.x, d.y - g.y) <= 5.0) lock = k;
        }
    }
    REQUIRE(lock >= 0);
    REQUIRE(total > 200);
    CHECK(static_cast<double>(covered) / total >= 0.95);
}

TEST_CASE("trace filter confirms a mover on textured ground") {
    StimulusSpec s = mover(260);
    s.background.texture = make_noise_texture(s.width, s.height, 3, 3.0, 150.0, 255.0);
    s.contrast = 0.5;
    const StimulusRenderer r(s);
    Pipeline p(s.width, s.height, ModelConfig{});
    bool confirmed = false;
    for (int k = 0; k < r.frame_count(); ++k) {
        const StepResult res = p.step(r.frame(k));
        const GroundTruth g = r.truth(k);
        for (const Detection& d : res.detections)
            if (d.confirmed && std::hypot(d.x - g.x, d.y - g.y) <= 5.0) confirmed = true;
    }
    CHECK(confirmed);
}
