#include "apgstmd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace apgstmd {

namespace {

constexpr double kPi = 3.14159265358979323846;

Area clip(const Area& a, int w, int h) {
    return Area{std::max(0, a.x0), std::max(0, a.y0), std::min(w, a.x1), std::min(h, a.y1)};
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Rows of a CSV with a header; '#' lines are skipped. Returns column lookup.
std::vector<std::vector<std::string>> read_table(std::istream& is,
                                                 const std::vector<std::string>& required,
                                                 std::vector<int>& columns) {
    std::string line;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        header = split_csv(line);
        break;
    }
    columns.clear();
    for (const std::string& name : required) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw std::invalid_argument("CSV is missing column '" + name + "'");
        columns.push_back(static_cast<int>(it - header.begin()));
    }
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        rows.push_back(split_csv(line));
        if (rows.back().size() < header.size())
            throw std::invalid_argument("CSV row has too few cells: " + line);
    }
    return rows;
}

void set_speed(Path& path, double v) {
    if (auto* p = std::get_if<LinearPath>(&path)) p->speed = v;
    else if (auto* p = std::get_if<CircularPath>(&path)) p->speed = v;
    else
        for (auto& s : std::get<SegmentedPath>(path).segments) s.speed = v;
}

}  // namespace

double weber_contrast(const Frame& frame, const Area& box, int d) {
    if (d < 0) throw std::invalid_argument("weber_contrast: negative surround width");
    const Area inner = clip(box, frame.width, frame.height);
    const Area outer = clip(Area{box.x0 - d, box.y0 - d, box.x1 + d, box.y1 + d}, frame.width,
                            frame.height);
    if (inner.empty()) throw std::invalid_argument("weber_contrast: target box outside the frame");
    double in_sum = 0.0, ring_sum = 0.0;
    std::size_t in_n = 0, ring_n = 0;
    for (int y = outer.y0; y < outer.y1; ++y) {
        for (int x = outer.x0; x < outer.x1; ++x) {
            if (inner.contains(x, y)) {
                in_sum += frame.at(x, y);
                ++in_n;
            } else {
                ring_sum += frame.at(x, y);
                ++ring_n;
            }
        }
    }
    if (ring_n == 0) throw std::invalid_argument("weber_contrast: degenerate surround (empty ring)");
    return std::abs(in_sum / in_n - ring_sum / ring_n) / 255.0;
}

void run_stimulus(const StimulusRenderer& renderer, Pipeline& pipeline,
                  const std::function<void(const StepResult&, const GroundTruth&)>& visit) {
    for (int k = 0; k < renderer.frame_count(); ++k) {
        const StepResult r = pipeline.step(renderer.frame(k));
        visit(r, renderer.truth(k));
    }
}

double window_response(const DirectionalField& f, double x, double y, int radius) {
    const int cx = static_cast<int>(std::lround(x));
    const int cy = static_cast<int>(std::lround(y));
    double best = 0.0;
    for (std::size_t d = 0; d < f.num_directions(); ++d)
        for (int yy = std::max(0, cy - radius); yy <= std::min(f.height - 1, cy + radius); ++yy)
            for (int xx = std::max(0, cx - radius); xx <= std::min(f.width - 1, cx + radius); ++xx)
                best = std::max(best, f.at(xx, yy, d));
    return best;
}

double pixel_response(const DirectionalField& f, int x, int y) {
    double best = 0.0;
    for (std::size_t d = 0; d < f.num_directions(); ++d) best = std::max(best, f.at(x, y, d));
    return best;
}

SweepParameter parse_sweep_parameter(const std::string& name) {
    if (name == "contrast") return SweepParameter::Contrast;
    if (name == "velocity") return SweepParameter::Velocity;
    if (name == "width") return SweepParameter::Width;
    if (name == "height") return SweepParameter::Height;
    throw std::invalid_argument("unknown sweep parameter '" + name +
                                "' (expected contrast, velocity, width or height)");
}

std::string to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::Contrast: return "contrast";
        case SweepParameter::Velocity: return "velocity";
        case SweepParameter::Width: return "width";
        case SweepParameter::Height: return "height";
    }
    return "?";
}

StimulusSpec default_sweep_stimulus() {
    StimulusSpec s;
    s.width = 500;
    s.height = 250;
    s.frames = 400;
    s.background.uniform = 255.0;
    s.target_width = 5.0;
    s.target_height = 5.0;
    s.contrast = 1.0;
    s.path = LinearPath{40.0, 125.0, 0.0, 250.0};
    return s;
}

ModelConfig sweep_config(ModelConfig base) {
    base.attention = false;
    base.prediction = false;
    return base;
}

ModelConfig facilitation_config(ModelConfig base) {
    base.attention = false;
    base.trace_filter = false;
    base.prediction = true;
    base.prediction_source = PredictionSource::Raw;
    return base;
}

ModelConfig ablation_config(ModelConfig base) {
    if (!base.delta_absolute) base.delta_absolute = 10.0;
    return base;
}

std::vector<double> default_sweep_values(SweepParameter p) {
    std::vector<double> v;
    switch (p) {
        case SweepParameter::Velocity:
            for (int i = 0; i <= 20; ++i) v.push_back(50.0 * i);
            break;
        case SweepParameter::Contrast:
            for (int i = 1; i <= 10; ++i) v.push_back(0.1 * i);
            break;
        case SweepParameter::Width:
        case SweepParameter::Height:
            v = {1, 3, 5, 7, 9, 11, 13, 15, 18, 21, 25, 30};
            break;
    }
    return v;
}

std::vector<SweepPoint> tuning_sweep(SweepParameter parameter, const std::vector<double>& values,
                                     const StimulusSpec& base, const ModelConfig& config) {
    std::vector<SweepPoint> curve;
    // size sweeps hold the luminance that gives the requested contrast at the base size
    std::optional<double> size_luminance;
    if (parameter == SweepParameter::Width || parameter == SweepParameter::Height)
        size_luminance = StimulusRenderer(base).target_luminance(0);
    for (double v : values) {
        StimulusSpec s = base;
        if (size_luminance) {
            s.contrast.reset();
            s.target_luminance = size_luminance;
        }
        switch (parameter) {
            case SweepParameter::Contrast: s.contrast = v; break;
            case SweepParameter::Velocity: set_speed(s.path, v); break;
            case SweepParameter::Width: s.target_width = v; break;
            case SweepParameter::Height: s.target_height = v; break;
        }
        StimulusRenderer renderer(s);
        Pipeline pipeline(s.width, s.height, config);
        double peak = 0.0;
        run_stimulus(renderer, pipeline, [&](const StepResult& r, const GroundTruth& g) {
            if (r.reliable && g.visible) peak = std::max(peak, window_response(r.e, g.x, g.y));
        });
        curve.push_back({v, peak, 0.0});
    }
    double top = 0.0;
    for (const auto& p : curve) top = std::max(top, p.response);
    for (auto& p : curve) p.normalized = top > 0 ? p.response / top : 0.0;
    return curve;
}

Support response_support(const std::vector<SweepPoint>& curve, double fraction) {
    Support s;
    if (curve.empty()) return s;
    std::size_t arg = 0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (curve[i].normalized > curve[arg].normalized) arg = i;
    std::size_t lo = arg, hi = arg;
    while (lo > 0 && curve[lo - 1].normalized > fraction) --lo;
    while (hi + 1 < curve.size() && curve[hi + 1].normalized > fraction) ++hi;
    s.low = curve[lo].value;
    s.high = curve[hi].value;
    s.argmax = curve[arg].value;
    return s;
}

AblationScene default_ablation_scene() {
    AblationScene scene;
    StimulusSpec& s = scene.spec;
    s.width = 400;
    s.height = 200;
    s.frames = 600;
    const double pan = 250.0;
    // the ground moves right, so the texture extends to the left of the frame
    const int extra = static_cast<int>(std::ceil(pan * s.frames / s.fs)) + 2;
    Texture tex = make_noise_texture(s.width + extra, s.height, 7, 3.0, 110.0, 210.0);
    scene.b_position = {60.0, 20.0};
    scene.large_position = {90.0, 165.0};
    scene.large_width = 24.0;
    scene.large_height = 30.0;
    // B and the large object are painted into the ground and move with it
    tex.paint(extra + 58, 18, 5, 5, 0.0);
    tex.paint(extra + 78, 150, 24, 30, 20.0);
    s.background.texture = std::move(tex);
    s.background.offset_x = extra;
    s.background.vx = pan;
    s.target_width = 5.0;
    s.target_height = 5.0;
    s.contrast = 0.1;
    s.polarity = Polarity::Dark;
    // A crosses right to left against the panning ground
    s.path = LinearPath{330.0, 70.0, kPi, 250.0};
    scene.scanline = 70;
    return scene;
}

AblationReport ablate_attention(const AblationScene& scene, const ModelConfig& config,
                                int measure_frames) {
    AblationReport rep;
    rep.scanline = scene.scanline;
    const StimulusRenderer renderer(scene.spec);
    const double vx = scene.spec.background.vx;
    const double vy = scene.spec.background.vy;
    const int first = renderer.frame_count() - measure_frames;
    auto run = [&](bool attention, double& a, double& b, double& large, std::vector<double>& scan) {
        ModelConfig c = config;
        c.attention = attention;
        Pipeline pipeline(scene.spec.width, scene.spec.height, c);
        scan.assign(static_cast<std::size_t>(scene.spec.width), 0.0);
        int k = 0;
        run_stimulus(renderer, pipeline, [&](const StepResult& r, const GroundTruth& g) {
            if (k++ < first || !r.reliable) return;
            const double t = r.t_ms / 1000.0;
            a = std::max(a, window_response(r.e, g.x, g.y));
            b = std::max(b, window_response(r.e, scene.b_position.first + vx * t,
                                            scene.b_position.second + vy * t));
            large = std::max(large, window_response(r.e, scene.large_position.first + vx * t,
                                                    scene.large_position.second + vy * t));
            for (int x = 0; x < scene.spec.width; ++x)
                scan[static_cast<std::size_t>(x)] =
                    std::max(scan[static_cast<std::size_t>(x)], pixel_response(r.e, x, scene.scanline));
        });
    };
    run(true, rep.a_on, rep.b_on, rep.large_on, rep.scan_on);
    run(false, rep.a_off, rep.b_off, rep.large_off, rep.scan_off);
    return rep;
}

OcclusionPoint occlusion_run(double radius, double occlusion_deg, const ModelConfig& config,
                             double window_ms) {
    const double speed = 250.0;
    const double margin = 20.0;
    const int side = static_cast<int>(std::ceil(2 * (radius + margin)));
    CircularPath path;
    path.cx = side / 2.0;
    path.cy = side / 2.0;
    path.radius = radius;
    path.speed = speed;
    path.phi0 = kPi / 2;
    // occlusion begins after 300 ms of visible motion
    const double lead_ms = 300.0;
    path.occlusion_start = path.phi0 - speed * lead_ms / 1000.0 / radius;
    path.occlusion_arc = occlusion_deg * kPi / 180.0;
    const double arc_ms = path.occlusion_arc * radius / speed * 1000.0;
    const double fs = 1000.0 / config.dt_ms();
    StimulusSpec s;
    s.width = side;
    s.height = side;
    s.fs = fs;
    s.background.uniform = 255.0;
    s.contrast = 1.0;
    s.path = path;
    const double reappear_ms = lead_ms + arc_ms;
    s.frames = static_cast<int>(std::ceil((reappear_ms + window_ms) * fs / 1000.0)) + 1;
    const StimulusRenderer renderer(s);
    const auto [ax, ay] = path.occlusion_end();
    const int px = static_cast<int>(std::lround(ax));
    const int py = static_cast<int>(std::lround(ay));
    Pipeline pipeline(s.width, s.height, config);
    OcclusionPoint out{radius, occlusion_deg, 0.0, 0.0};
    run_stimulus(renderer, pipeline, [&](const StepResult& r, const GroundTruth&) {
        if (r.t_ms + 1e-9 < reappear_ms || r.t_ms >= reappear_ms + window_ms) return;
        for (std::size_t d = 0; d < r.q.num_directions(); ++d) {
            out.q_end += r.q.at(px, py, d);
            out.e_end += r.e.at(px, py, d);
        }
    });
    return out;
}

std::vector<OcclusionPoint> occlusion_study(const std::vector<double>& radii,
                                            const std::vector<double>& occlusion_deg,
                                            const ModelConfig& config) {
    std::vector<OcclusionPoint> out;
    for (double r : radii)
        for (double a : occlusion_deg) out.push_back(occlusion_run(r, a, config));
    return out;
}

double rise_time(const std::vector<double>& t, const std::vector<double>& v, double fraction) {
    if (t.size() != v.size() || v.empty()) return 0.0;
    const std::size_t peak = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    const double level = fraction * v[peak];
    std::size_t start = peak;
    // walk back from the peak to where the response last rose through the level
    while (start > 0 && v[start - 1] > level) --start;
    return t[peak] - t[start];
}

FacilitationTrace facilitation_dynamics(const ModelConfig& config, double probe_x) {
    StimulusSpec s;
    s.width = 260;
    s.height = 60;
    s.fs = 1000.0 / config.dt_ms();
    s.background.uniform = 255.0;
    s.contrast = 1.0;
    const double x0 = 20.0;
    s.path = LinearPath{x0, 30.0, 0.0, 250.0};
    s.frames = static_cast<int>(std::ceil((probe_x - x0 + 40.0) / 250.0 * s.fs));
    const StimulusRenderer renderer(s);
    Pipeline pipeline(s.width, s.height, config);
    FacilitationTrace tr;
    const int px = static_cast<int>(std::lround(probe_x));
    run_stimulus(renderer, pipeline, [&](const StepResult& r, const GroundTruth&) {
        if (!r.reliable) return;
        tr.t_ms.push_back(r.t_ms);
        tr.e.push_back(pixel_response(r.e, px, 30));
        tr.q.push_back(pixel_response(r.q, px, 30));
    });
    if (!tr.e.empty()) {
        tr.e_peak = *std::max_element(tr.e.begin(), tr.e.end());
        tr.q_peak = *std::max_element(tr.q.begin(), tr.q.end());
        tr.e_rise_ms = rise_time(tr.t_ms, tr.e);
        tr.q_rise_ms = rise_time(tr.t_ms, tr.q);
    }
    return tr;
}

ProbeResponse primer_probe_response(const PrimerProbeSpec& p, const ModelConfig& config,
                                    double settle_ms, double window_ms) {
    PrimerProbeStimulus stim = primer_probe(p);
    // nothing after the measurement window is needed
    const int last =
        stim.boundary_frame + static_cast<int>(std::ceil((settle_ms + window_ms) * stim.spec.fs / 1000.0));
    stim.spec.frames = std::min(stim.spec.frames, last + 1);
    const StimulusRenderer renderer(stim.spec);
    Pipeline pipeline(stim.spec.width, stim.spec.height, config);
    const double boundary_ms = stim.boundary_frame * 1000.0 / stim.spec.fs;
    ProbeResponse out;
    run_stimulus(renderer, pipeline, [&](const StepResult& r, const GroundTruth& g) {
        const double since = r.t_ms - boundary_ms;
        if (since + 1e-9 < settle_ms || since >= settle_ms + window_ms) return;
        out.unfacilitated = std::max(out.unfacilitated, window_response(r.e, g.x, g.y));
        out.facilitated = std::max(out.facilitated, window_response(r.q, g.x, g.y));
    });
    return out;
}

std::vector<ProbeResponse> contrast_facilitation(const std::vector<double>& primer_contrasts,
                                                 const ModelConfig& config) {
    std::vector<ProbeResponse> out;
    for (double c : primer_contrasts) {
        PrimerProbeSpec p;
        p.primer_contrast = c;
        out.push_back(primer_probe_response(p, config));
    }
    return out;
}

DirectionTuning direction_facilitation(double primer_theta, const ModelConfig& config) {
    DirectionTuning out;
    out.primer_theta = primer_theta;
    const int n = config.directions;
    for (int k = 0; k < n; ++k) {
        PrimerProbeSpec p;
        p.x0 = p.width / 2.0;
        p.y0 = p.height / 2.0;
        p.primer_theta = primer_theta;
        p.offset = 2 * kPi * k / n;
        out.probe_theta.push_back(std::fmod(primer_theta + p.offset, 2 * kPi));
        out.response.push_back(primer_probe_response(p, config));
    }
    return out;
}

std::vector<DetectionRecord> read_detections_csv(std::istream& is) {
    std::vector<int> col;
    const auto rows = read_table(is, {"frame_index", "x", "y", "response"}, col);
    std::vector<DetectionRecord> out;
    for (const auto& r : rows)
        out.push_back({std::stoi(r[col[0]]), std::stoi(r[col[1]]), std::stoi(r[col[2]]),
                       std::stod(r[col[3]])});
    return out;
}

std::vector<GroundTruth> read_ground_truth_csv(std::istream& is) {
    std::vector<int> col;
    const auto rows = read_table(is, {"frame", "x", "y", "visible", "theta"}, col);
    std::vector<GroundTruth> out;
    for (const auto& r : rows)
        out.push_back({std::stoi(r[col[0]]), std::stod(r[col[1]]), std::stod(r[col[2]]),
                       std::stoi(r[col[3]]) != 0, std::stod(r[col[4]])});
    return out;
}

std::vector<RocPoint> detection_metrics(const std::vector<DetectionRecord>& dets,
                                        const std::vector<GroundTruth>& truth, double match_radius,
                                        std::vector<double> deltas) {
    const int n = static_cast<int>(truth.size());
    if (n == 0) throw std::invalid_argument("detection_metrics: empty ground truth");
    for (int i = 0; i < n; ++i)
        if (truth[static_cast<std::size_t>(i)].frame != i)
            throw std::invalid_argument("detection_metrics: ground truth must list frames 0..N-1 in order");
    for (const auto& d : dets)
        if (d.frame < 0 || d.frame >= n)
            throw std::invalid_argument("detection_metrics: detection frame " + std::to_string(d.frame) +
                                        " outside the " + std::to_string(n) + "-frame ground truth");
    if (deltas.empty()) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& d : dets)
            if (d.response > 0) {
                lo = std::min(lo, d.response);
                hi = std::max(hi, d.response);
            }
        if (hi <= 0) {
            deltas.assign(1, 0.0);
        } else {
            if (!(lo < hi)) lo = hi * 1e-3;
            for (int i = 0; i < 20; ++i)
                deltas.push_back(lo * std::pow(hi / lo, i / 19.0));
        }
    }
    int visible = 0;
    for (const auto& g : truth) visible += g.visible;
    std::vector<RocPoint> out;
    for (double delta : deltas) {
        std::vector<char> hit(static_cast<std::size_t>(n), 0);
        std::size_t fp = 0;
        for (const auto& d : dets) {
            if (d.response < delta) continue;
            const GroundTruth& g = truth[static_cast<std::size_t>(d.frame)];
            if (g.visible && std::hypot(d.x - g.x, d.y - g.y) <= match_radius)
                hit[static_cast<std::size_t>(d.frame)] = 1;
            else
                ++fp;
        }
        int hits = 0;
        for (char h : hit) hits += h;
        out.push_back({delta, visible > 0 ? static_cast<double>(hits) / visible : 0.0,
                       static_cast<double>(fp) / n});
    }
    return out;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::string describe(const StimulusSpec& s) {
    std::ostringstream os;
    os << std::setprecision(17) << "size=" << s.width << 'x' << s.height << " fs=" << s.fs
       << " frames=" << s.frames << " target=" << s.target_width << 'x' << s.target_height;
    if (s.contrast) os << " contrast=" << *s.contrast;
    if (s.target_luminance) os << " luminance=" << *s.target_luminance;
    os << " polarity=" << static_cast<int>(s.polarity);
    os << " background=" << s.background.uniform << " pan=" << s.background.vx << ','
       << s.background.vy;
    if (s.background.texture) {
        const Texture& t = *s.background.texture;
        std::string bytes(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(double));
        os << " texture=" << t.width << 'x' << t.height << ':' << fnv1a_hex(bytes);
    }
    if (const auto* p = std::get_if<LinearPath>(&s.path))
        os << " linear=" << p->x0 << ',' << p->y0 << ',' << p->theta << ',' << p->speed;
    else if (const auto* p = std::get_if<CircularPath>(&s.path))
        os << " circular=" << p->cx << ',' << p->cy << ',' << p->radius << ',' << p->speed << ','
           << p->phi0 << ',' << p->occlusion_start << ',' << p->occlusion_arc;
    else {
        const auto& sp = std::get<SegmentedPath>(s.path);
        os << " segmented=" << sp.x0 << ',' << sp.y0;
        for (const auto& seg : sp.segments) {
            os << ';' << seg.theta << ',' << seg.speed << ',' << seg.frames;
            if (seg.contrast) os << ',' << *seg.contrast;
        }
    }
    os << " objects=" << s.objects.size();
    return os.str();
}

std::string metadata_header(const ModelConfig& config, const std::string& stimulus_description,
                            std::uint64_t seed) {
    std::ostringstream os;
    os << "# config_hash=" << config_hash(config) << '\n'
       << "# stimulus_hash=" << fnv1a_hex(stimulus_description) << '\n'
       << "# seed=" << seed << '\n';
    return os.str();
}

}  // namespace apgstmd
