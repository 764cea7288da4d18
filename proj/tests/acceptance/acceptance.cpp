// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "apgstmd/eval.hpp"
#include "apgstmd/kernels.hpp"
#include "apgstmd/prediction.hpp"
#include "apgstmd/spatial.hpp"
#include "apgstmd/stmd.hpp"
#include "apgstmd/temporal.hpp"
#include "oracles.hpp"

using namespace apgstmd;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string curve_text(const std::vector<SweepPoint>& c) {
    std::ostringstream os;
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? " " : "") << c[i].value << ":" << fmt("%.3f", c[i].normalized);
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<SweepPoint> sweep(SweepParameter p) {
    return tuning_sweep(p, default_sweep_values(p), default_sweep_stimulus(), sweep_config(ModelConfig{}));
}

Outcome velocity_tuning() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto curve = sweep(SweepParameter::Velocity);
    const double secs = seconds_since(t0);
    const Support s = response_support(curve);
    const bool pass = std::abs(s.low - 100) <= 50 && std::abs(s.high - 800) <= 50 && s.argmax >= 225 &&
                      s.argmax <= 275 && secs <= 600;
    std::ostringstream os;
    os << "support [" << s.low << ", " << s.high << "] px/s (want [100, 800] +-50), argmax " << s.argmax
       << " px/s (want 225..275), " << fmt("%.0f", secs) << " s; curve " << curve_text(curve);
    return {pass, os.str()};
}

Outcome size_tuning() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto w = sweep(SweepParameter::Width);
    const auto h = sweep(SweepParameter::Height);
    const double secs = seconds_since(t0);
    auto worst_beyond = [](const std::vector<SweepPoint>& c, double from) {
        double m = 0.0;
        for (const auto& p : c)
            if (p.value >= from) m = std::max(m, p.normalized);
        return m;
    };
    const double w_tail = worst_beyond(w, 18), h_tail = worst_beyond(h, 13);
    const double w_arg = response_support(w).argmax, h_arg = response_support(h).argmax;
    const bool pass = w_tail <= 0.05 && h_tail <= 0.05 && w_arg == 5 && h_arg == 5 && secs <= 600;
    std::ostringstream os;
    os << "width: max beyond 18 px " << fmt("%.3f", w_tail) << ", argmax " << w_arg << "; height: max beyond 13 px "
       << fmt("%.3f", h_tail) << ", argmax " << h_arg << "; " << fmt("%.0f", secs) << " s; width curve "
       << curve_text(w) << "; height curve " << curve_text(h);
    return {pass, os.str()};
}

Outcome contrast_tuning() {
    const auto c = sweep(SweepParameter::Contrast);
    bool monotone = true;
    for (std::size_t i = 1; i < c.size(); ++i) monotone = monotone && c[i].response >= c[i - 1].response;
    const bool max_at_one = c.back().value == 1.0 && c.back().normalized == 1.0;
    return {monotone && max_at_one, std::string(monotone ? "nondecreasing" : "not monotone") +
                                        (max_at_one ? ", max at 1.0" : ", max not at 1.0") + "; curve " +
                                        curve_text(c)};
}

Outcome facilitation_dynamics_check() {
    const FacilitationTrace tr = facilitation_dynamics(facilitation_config(ModelConfig{}));
    const double ratio = tr.q_peak / tr.e_peak;
    const bool pass = ratio >= 1.5 && ratio <= 2.5 && tr.q_rise_ms >= 4 * tr.e_rise_ms && tr.e_rise_ms <= 10;
    std::ostringstream os;
    os << "Q/E peak " << fmt("%.3f", ratio) << " (want 1.5..2.5), rise Q " << tr.q_rise_ms << " ms vs E "
       << tr.e_rise_ms << " ms (want Q >= 4 E, E <= 10)";
    return {pass, os.str()};
}

Outcome contrast_facilitation_check() {
    const std::vector<double> levels{0.25, 0.5, 0.75, 1.0};
    const auto r = contrast_facilitation(levels, facilitation_config(ModelConfig{}));
    double lo = r[0].unfacilitated, hi = lo;
    bool increasing = true;
    std::ostringstream os;
    for (std::size_t i = 0; i < r.size(); ++i) {
        lo = std::min(lo, r[i].unfacilitated);
        hi = std::max(hi, r[i].unfacilitated);
        if (i > 0) increasing = increasing && r[i].facilitated > r[i - 1].facilitated;
        os << " c=" << levels[i] << ": E " << fmt("%.2f", r[i].unfacilitated) << " Q " << fmt("%.2f", r[i].facilitated)
           << ";";
    }
    const double spread = (hi - lo) / hi;
    return {spread <= 0.02 && increasing, "E spread " + fmt("%.4f", spread) + " (want <= 0.02), Q " +
                                              (increasing ? "strictly increasing" : "not increasing") + ";" +
                                              os.str()};
}

Outcome direction_facilitation_check() {
    const ModelConfig c = facilitation_config(ModelConfig{});
    bool pass = true;
    std::ostringstream os;
    for (int k = 0; k < 4; ++k) {
        const double primer = k * pi / 2;
        const DirectionTuning t = direction_facilitation(primer, c);
        std::size_t arg = 0;
        double lo = t.response[0].unfacilitated, hi = lo;
        for (std::size_t i = 0; i < t.response.size(); ++i) {
            if (t.response[i].facilitated > t.response[arg].facilitated) arg = i;
            lo = std::min(lo, t.response[i].unfacilitated);
            hi = std::max(hi, t.response[i].unfacilitated);
        }
        const bool arg_ok = std::abs(std::remainder(t.probe_theta[arg] - primer, 2 * pi)) < 1e-9;
        const double spread = (hi - lo) / hi;
        pass = pass && arg_ok && spread <= 0.10;
        os << " primer " << k * 90 << " deg: Q argmax " << fmt("%.0f", t.probe_theta[arg] * 180 / pi)
           << " deg, E spread " << fmt("%.3f", spread) << " [";
        for (std::size_t i = 0; i < t.response.size(); ++i)
            os << (i ? " " : "") << fmt("%.1f", t.response[i].unfacilitated) << "/"
               << fmt("%.1f", t.response[i].facilitated);
        os << "];";
    }
    return {pass, "facilitated argmax at primer, unfacilitated (max-min)/max <= 0.10;" + os.str()};
}

Outcome occlusion_check() {
    const ModelConfig c;
    const auto angles = occlusion_study({50.0}, {15.0, 30.0, 45.0, 60.0}, c);
    const auto radii = occlusion_study({30.0, 50.0, 70.0}, {30.0}, c);
    bool pass = true;
    std::ostringstream os;
    os << "R=50:";
    for (std::size_t i = 0; i < angles.size(); ++i) {
        if (i > 0) pass = pass && angles[i].q_end < angles[i - 1].q_end;
        os << " " << angles[i].occlusion_deg << "deg " << fmt("%.4g", angles[i].q_end);
    }
    os << "; 30deg:";
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (i > 0) pass = pass && radii[i].q_end < radii[i - 1].q_end;
        os << " R" << radii[i].radius << " " << fmt("%.4g", radii[i].q_end);
    }
    return {pass, "Q at the end-point strictly decreasing; " + os.str()};
}

Outcome ablation_check() {
    const AblationReport r = ablate_attention(default_ablation_scene(), ablation_config(ModelConfig{}), 200);
    const double gain = r.a_on / r.a_off;
    const double b_change = std::abs(r.b_on / r.b_off - 1.0);
    const double large_on = r.large_on / r.a_on, large_off = r.large_off / r.a_off;
    const bool pass = gain >= 2.0 && b_change <= 0.05 && large_on <= 0.01 && large_off <= 0.01;
    std::ostringstream os;
    os << "A on/off " << fmt("%.3f", gain) << " (want >= 2), B change " << fmt("%.4f", b_change)
       << " (want <= 0.05), large/A " << fmt("%.4f", large_on) << " on, " << fmt("%.4f", large_off)
       << " off (want <= 0.01); A " << fmt("%.4g", r.a_on) << "/" << fmt("%.4g", r.a_off) << ", B "
       << fmt("%.4g", r.b_on) << "/" << fmt("%.4g", r.b_off);
    return {pass, os.str()};
}

double temporal_oracle_error() {
    const TemporalKernels k = TemporalKernels::from_config(ModelConfig{});
    const int w = 8, h = 6, n = 200;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    std::bernoulli_distribution hold(0.3);
    std::vector<Frame> frames;
    for (int t = 0; t < n; ++t) {
        Frame f(w, h, t);
        for (std::size_t i = 0; i < f.data.size(); ++i)
            f.data[i] = (t > 0 && hold(rng)) ? frames.back().data[i] : u(rng);
        frames.push_back(f);
    }
    TemporalState s(w, h, k, 1.0);
    std::vector<Frame> lmc;
    std::vector<MedullaBundle> med;
    for (const Frame& f : frames) {
        lmc.push_back(s.lmc_step(f));
        med.push_back(s.medulla_step(lmc.back()));
    }
    double err = 0.0;
    for (int p = 0; p < w * h; ++p) {
        std::vector<double> x;
        for (const Frame& f : frames) x.push_back(f.data[p]);
        const auto l = oracle::causal(x, k.bandpass.data);
        std::vector<double> on(l.size()), off(l.size());
        for (std::size_t t = 0; t < l.size(); ++t) {
            on[t] = std::max(l[t], 0.0);
            off[t] = std::max(-l[t], 0.0);
        }
        const auto mi1 = oracle::causal(on, k.mi1.data);
        const auto ta = oracle::causal(off, k.tm1_fast.data);
        const auto tb = oracle::causal(off, k.tm1_slow.data);
        for (int t = 0; t < n; ++t) {
            const MedullaBundle& b = med[t];
            err = std::max({err, std::abs(lmc[t].data[p] - l[t]), std::abs(b.tm3.data[p] - on[t]),
                            std::abs(b.tm2.data[p] - off[t]), std::abs(b.mi1.data[p] - mi1[t]),
                            std::abs(b.tm1_a.data[p] - ta[t]), std::abs(b.tm1_b.data[p] - tb[t])});
        }
    }
    return err;
}

double attention_oracle_error() {
    const ModelConfig c;
    const AttentionBank bank = make_attention_bank(c.attention_scales, c.attention_orientations);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    Frame f(90, 90);
    for (double& v : f.data) v = u(rng);
    const Area patch{20, 20, 70, 70};
    const auto fast = attention_response(f, patch, bank);
    double err = 0.0;
    for (int y = patch.y0; y < patch.y1; ++y)
        for (int x = patch.x0; x < patch.x1; ++x)
            err = std::max(err, std::abs(fast[static_cast<std::size_t>((y - patch.y0) * patch.width() + (x - patch.x0))] -
                                         oracle::attention_at(f, bank, x, y)));
    return err;
}

double inhibition_oracle_error() {
    const ModelConfig c;
    const Kernel2D ws = inhibition_spatial(c.A, c.B, c.e, c.rho, c.sigma2, c.sigma3,
                                           truncation_radius(std::max(c.sigma2, c.sigma3), c.spatial_truncation));
    const DirectionalKernel wd = inhibition_directional(c.sigma4, c.sigma5, c.directions);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DirectionalField d(32, 32, preferred_directions(8));
    for (double& v : d.data) v = u(rng) < 0.3 ? u(rng) : 0.0;
    double err = 0.0;
    for (const bool staged : {false, true}) {
        const DirectionalField fast = inhibit(d, ws, wd, staged ? InhibitionMode::Staged : InhibitionMode::Joint);
        const DirectionalField ref = oracle::inhibit(d, ws, wd, staged);
        for (std::size_t i = 0; i < ref.data.size(); ++i) err = std::max(err, std::abs(fast.data[i] - ref.data[i]));
    }
    return err;
}

Outcome oracle_check() {
    const double t = temporal_oracle_error(), a = attention_oracle_error(), i = inhibition_oracle_error();
    return {t <= 1e-9 && a <= 1e-9 && i <= 1e-9, "max abs error: temporal " + fmt("%.3g", t) + ", attention pooling " +
                                                     fmt("%.3g", a) + ", inhibition " + fmt("%.3g", i) +
                                                     " (want <= 1e-9)"};
}

Outcome kernel_check() {
    const ModelConfig c;
    double att = 0.0;
    for (double s : c.attention_scales)
        for (double th : c.attention_orientations)
            att = std::max(att, std::abs(attention_kernel(s, th, truncation_radius(s, 3.0)).sum()));
    const Kernel1D bp = TemporalKernels::from_config(c).bandpass;
    const double bp_sum = std::abs(bp.sum());
    const double ring = c.v_opt * c.delta_t / 1000.0;
    double pred_sum = 0.0, ring_err = 0.0;
    const auto bank = prediction_kernel_bank(c);
    const auto dirs = preferred_directions(c.directions);
    for (std::size_t d = 0; d < bank.size(); ++d) {
        const Kernel2D& k = bank[d];
        pred_sum = std::max(pred_sum, std::abs(k.sum() - 1.0));
        const auto it = std::max_element(k.data.begin(), k.data.end());
        const int idx = static_cast<int>(it - k.data.begin());
        const double dx = idx % k.side() - k.radius, dy = idx / k.side() - k.radius;
        ring_err = std::max(ring_err, std::hypot(dx - ring * std::cos(dirs[d]), dy - ring * std::sin(dirs[d])));
    }
    const bool pass = att <= 1e-3 && bp_sum <= 1e-6 && pred_sum <= 1e-12 && ring_err <= 1.0;
    return {pass, "attention |sum| " + fmt("%.3g", att) + " (<= 1e-3), band-pass |sum| " + fmt("%.3g", bp_sum) +
                      " (<= 1e-6), prediction |sum-1| " + fmt("%.3g", pred_sum) + " (<= 1e-12), ring argmax offset " +
                      fmt("%.3f", ring_err) + " px (<= 1)"};
}

std::string end_to_end_csv() {
    StimulusSpec s;
    s.width = 200;
    s.height = 100;
    s.frames = 400;
    s.background.texture = make_noise_texture(200, 100, 17, 2.5, 120.0, 255.0);
    s.contrast = 0.4;
    s.path = LinearPath{20.0, 45.0, 0.15, 250.0};
    const ModelConfig c;
    const StimulusRenderer r(s);
    Pipeline p(s.width, s.height, c);
    std::ostringstream os;
    os << metadata_header(c, describe(s), 17);
    write_detections_header(os);
    for (int k = 0; k < r.frame_count(); ++k) write_detections_rows(os, k, p.step(r.frame(k)).detections);
    write_ground_truth_header(os);
    for (int k = 0; k < r.frame_count(); ++k) write_ground_truth_row(os, r.truth(k));
    return os.str();
}

Outcome determinism_check() {
    const std::string a = end_to_end_csv(), b = end_to_end_csv();
    const auto lines = std::count(a.begin(), a.end(), '\n');
    return {a == b, std::string(a == b ? "identical" : "different") + " CSV output over two runs (" +
                        std::to_string(lines) + " lines, hash " + fnv1a_hex(a) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"velocity tuning", velocity_tuning},
        {"size tuning", size_tuning},
        {"contrast tuning", contrast_tuning},
        {"facilitation dynamics", facilitation_dynamics_check},
        {"contrast facilitation", contrast_facilitation_check},
        {"direction facilitation", direction_facilitation_check},
        {"occlusion propagation", occlusion_check},
        {"attention ablation", ablation_check},
        {"oracle equivalences", oracle_check},
        {"analytic kernel identities", kernel_check},
        {"determinism", determinism_check},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!selected.empty() && !selected.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
