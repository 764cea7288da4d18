#include "apgstmd/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

#include "apgstmd/convolve.hpp"
#include "apgstmd/eval.hpp"

namespace apgstmd {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_2pi(double a) {
    a = std::fmod(a, 2.0 * kPi);
    return a < 0 ? a + 2.0 * kPi : a;
}

// Length of [a0,a1) intersected with [b0,b1).
inline double overlap(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

// Blend a rectangle of the given size centred at (cx, cy) into the frame by
// exact area coverage; pixel i spans [i-0.5, i+0.5).
void draw_rect(Frame& f, double cx, double cy, double w, double h, double value) {
    const double left = cx - w / 2, right = cx + w / 2;
    const double top = cy - h / 2, bottom = cy + h / 2;
    const int x0 = std::max(0, static_cast<int>(std::floor(left + 0.5)));
    const int x1 = std::min(f.width - 1, static_cast<int>(std::ceil(right - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(top + 0.5)));
    const int y1 = std::min(f.height - 1, static_cast<int>(std::ceil(bottom - 0.5)));
    for (int y = y0; y <= y1; ++y) {
        const double cy_cov = overlap(y - 0.5, y + 0.5, top, bottom);
        if (cy_cov <= 0) continue;
        for (int x = x0; x <= x1; ++x) {
            const double cov = cy_cov * overlap(x - 0.5, x + 0.5, left, right);
            if (cov <= 0) continue;
            double& p = f.at(x, y);
            p = (1.0 - cov) * p + cov * value;
        }
    }
}

GroundTruth path_state(const Path& path, int k, double fs) {
    const double t = k / fs;
    GroundTruth g;
    g.frame = k;
    if (const auto* p = std::get_if<LinearPath>(&path)) {
        g.x = p->x0 + p->speed * t * std::cos(p->theta);
        g.y = p->y0 + p->speed * t * std::sin(p->theta);
        g.theta = p->theta;
    } else if (const auto* p = std::get_if<CircularPath>(&path)) {
        const double travelled = p->speed * t / p->radius;
        const double phi = p->phi0 - travelled;
        g.x = p->cx + p->radius * std::cos(phi);
        g.y = p->cy + p->radius * std::sin(phi);
        g.theta = wrap_2pi(phi - kPi / 2);
        if (p->occlusion_arc > 0) {
            // angle travelled since entering the occluded arc
            const double into = wrap_2pi(p->occlusion_start - phi);
            g.visible = !(into < p->occlusion_arc);
        }
    } else {
        const auto& s = std::get<SegmentedPath>(path);
        double x = s.x0, y = s.y0;
        int remaining = k;
        for (std::size_t i = 0; i < s.segments.size(); ++i) {
            const PathSegment& seg = s.segments[i];
            const bool last = i + 1 == s.segments.size();
            const int n = last ? remaining : std::min(remaining, seg.frames);
            x += seg.speed * n / fs * std::cos(seg.theta);
            y += seg.speed * n / fs * std::sin(seg.theta);
            g.theta = seg.theta;
            remaining -= n;
            if (remaining <= 0) break;
        }
        g.x = x;
        g.y = y;
    }
    return g;
}

double path_speed(const Path& path) {
    if (const auto* p = std::get_if<LinearPath>(&path)) return p->speed;
    if (const auto* p = std::get_if<CircularPath>(&path)) return p->speed;
    double v = 0.0;
    for (const auto& s : std::get<SegmentedPath>(path).segments) v = std::max(v, s.speed);
    return v;
}

}  // namespace

double Texture::sample(double x, double y) const {
    const double fx = std::floor(x), fy = std::floor(y);
    const double ax = x - fx, ay = y - fy;
    auto px = [&](double xi, double yi) {
        const int cx = std::clamp(static_cast<int>(xi), 0, width - 1);
        const int cy = std::clamp(static_cast<int>(yi), 0, height - 1);
        return data[static_cast<std::size_t>(cy) * width + cx];
    };
    return (1 - ay) * ((1 - ax) * px(fx, fy) + ax * px(fx + 1, fy)) +
           ay * ((1 - ax) * px(fx, fy + 1) + ax * px(fx + 1, fy + 1));
}

void Texture::paint(int x0, int y0, int w, int h, double value) {
    for (int y = std::max(0, y0); y < std::min(height, y0 + h); ++y)
        for (int x = std::max(0, x0); x < std::min(width, x0 + w); ++x)
            data[static_cast<std::size_t>(y) * width + x] = value;
}

Texture make_noise_texture(int width, int height, std::uint64_t seed, double smoothing, double low,
                           double high) {
    if (width < 1 || height < 1) throw std::invalid_argument("make_noise_texture: empty size");
    std::mt19937_64 rng(seed);
    Texture t{width, height, std::vector<double>(static_cast<std::size_t>(width) * height)};
    // raw 53-bit mantissa keeps the values independent of the standard library
    for (double& v : t.data) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (smoothing > 0) {
        const int r = static_cast<int>(std::ceil(3 * smoothing));
        std::vector<double> taps(static_cast<std::size_t>(2 * r + 1));
        double sum = 0;
        for (int d = -r; d <= r; ++d) sum += taps[d + r] = std::exp(-d * d / (2 * smoothing * smoothing));
        for (double& v : taps) v /= sum;
        std::vector<double> out(t.data.size());
        convolve_separable(t.data.data(), width, height, taps, Border::Replicate, out.data());
        t.data.swap(out);
    }
    const auto [mn, mx] = std::minmax_element(t.data.begin(), t.data.end());
    const double lo = *mn, span = *mx - *mn;
    for (double& v : t.data) v = span > 0 ? low + (high - low) * (v - lo) / span : low;
    return t;
}

Texture texture_from_frame(const Frame& f) { return Texture{f.width, f.height, f.data}; }

double Background::at(double x, double y, double t_s) const {
    if (!texture) return uniform;
    return texture->sample(x + offset_x - vx * t_s, y + offset_y - vy * t_s);
}

std::pair<double, double> CircularPath::occlusion_end() const {
    const double phi = occlusion_start - occlusion_arc;
    return {cx + radius * std::cos(phi), cy + radius * std::sin(phi)};
}

Area target_box(double cx, double cy, double w, double h) {
    // pixel x spans [x - 0.5, x + 0.5]
    auto span = [](double c, double size, int& lo, int& hi) {
        lo = static_cast<int>(std::ceil(c - size / 2 + 0.5));
        hi = static_cast<int>(std::floor(c + size / 2 - 0.5)) + 1;
        if (hi <= lo) {
            lo = static_cast<int>(std::floor(c + 0.5));
            hi = lo + 1;
        }
    };
    Area a;
    span(cx, w, a.x0, a.x1);
    span(cy, h, a.y0, a.y1);
    return a;
}

StimulusRenderer::StimulusRenderer(StimulusSpec spec) : spec_(std::move(spec)) {
    const StimulusSpec& s = spec_;
    if (s.width < 1 || s.height < 1) throw std::invalid_argument("stimulus: empty frame size");
    if (!(s.fs > 0)) throw std::invalid_argument("stimulus: fs must be > 0");
    if (s.frames < 1) throw std::invalid_argument("stimulus: at least one frame required");
    if (!(s.target_width > 0) || !(s.target_height > 0))
        throw std::invalid_argument("stimulus: target size must be > 0");
    const double v = path_speed(s.path);
    if (v < 0 || v > 1000) throw std::invalid_argument("stimulus: speed must be within [0, 1000] px/s");
    if (const auto* c = std::get_if<CircularPath>(&s.path); c && !(c->radius > 0))
        throw std::invalid_argument("stimulus: circular path radius must be > 0");
    if (s.check_bounds) {
        for (int k = 0; k < s.frames; ++k) {
            const GroundTruth g = path_state(s.path, k, s.fs);
            if (g.x - s.target_width / 2 < -0.5 || g.x + s.target_width / 2 > s.width - 0.5 ||
                g.y - s.target_height / 2 < -0.5 || g.y + s.target_height / 2 > s.height - 0.5) {
                std::ostringstream msg;
                msg << "stimulus: target leaves the frame at frame " << k << " (centre " << g.x
                    << ", " << g.y << ")";
                throw std::invalid_argument(msg.str());
            }
        }
    }

    seg_start_.push_back(0);
    std::vector<std::optional<double>> seg_contrast{s.contrast};
    if (const auto* sp = std::get_if<SegmentedPath>(&s.path)) {
        seg_contrast.clear();
        seg_start_.clear();
        int start = 0;
        for (const auto& seg : sp->segments) {
            seg_start_.push_back(start);
            seg_contrast.push_back(seg.contrast ? seg.contrast : s.contrast);
            start += seg.frames;
        }
        if (seg_start_.empty()) {
            seg_start_.push_back(0);
            seg_contrast.push_back(s.contrast);
        }
    }
    for (std::size_t i = 0; i < seg_start_.size(); ++i) {
        if (seg_contrast[i]) {
            const int k = std::min(seg_start_[i], s.frames - 1);
            seg_luminance_.push_back(solve_luminance(k, *seg_contrast[i]));
        } else if (s.target_luminance) {
            seg_luminance_.push_back(*s.target_luminance);
        } else {
            throw std::invalid_argument("stimulus: either contrast or target luminance is required");
        }
    }
}

std::size_t StimulusRenderer::segment_of(int k) const {
    std::size_t i = 0;
    while (i + 1 < seg_start_.size() && k >= seg_start_[i + 1]) ++i;
    return i;
}

double StimulusRenderer::target_luminance(int k) const { return seg_luminance_[segment_of(k)]; }

std::vector<int> StimulusRenderer::segment_starts() const { return seg_start_; }

void StimulusRenderer::draw(Frame& f, int k, double luminance, bool include_target) const {
    const double t = k / spec_.fs;
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) f.at(x, y) = spec_.background.at(x, y, t);
    for (const SceneObject& o : spec_.objects) {
        const GroundTruth g = path_state(o.path, k, spec_.fs);
        draw_rect(f, g.x, g.y, o.width, o.height, o.luminance);
    }
    if (include_target) {
        const GroundTruth g = path_state(spec_.path, k, spec_.fs);
        if (g.visible) draw_rect(f, g.x, g.y, spec_.target_width, spec_.target_height, luminance);
    }
}

double StimulusRenderer::solve_luminance(int k, double contrast) const {
    if (!(contrast >= 0 && contrast <= 1))
        throw std::invalid_argument("stimulus: Weber contrast must be within [0, 1]");
    const GroundTruth g = path_state(spec_.path, k, spec_.fs);
    const Area box = target_box(g.x, g.y, spec_.target_width, spec_.target_height);
    // The signed target-minus-surround difference (the Weber contrast before
    // the absolute value) is affine in the luminance: f(L) = f0 + (f255 - f0) L / 255.
    auto signed_diff = [&](double lum) {
        Frame f(spec_.width, spec_.height);
        draw(f, k, lum, true);
        const Area outer{box.x0 - 10, box.y0 - 10, box.x1 + 10, box.y1 + 10};
        double in_sum = 0, in_n = 0, ring_sum = 0, ring_n = 0;
        for (int y = std::max(0, outer.y0); y < std::min(spec_.height, outer.y1); ++y)
            for (int x = std::max(0, outer.x0); x < std::min(spec_.width, outer.x1); ++x) {
                if (box.contains(x, y)) {
                    in_sum += f.at(x, y);
                    in_n += 1;
                } else {
                    ring_sum += f.at(x, y);
                    ring_n += 1;
                }
            }
        if (in_n == 0 || ring_n == 0) throw std::invalid_argument("stimulus: degenerate contrast box");
        return in_sum / in_n - ring_sum / ring_n;
    };
    const double f0 = signed_diff(0.0);
    const double f1 = signed_diff(255.0);
    const double slope = (f1 - f0) / 255.0;
    const double want = 255.0 * contrast;
    auto try_target = [&](double target, double& lum) {
        if (slope == 0.0) return false;
        lum = (target - f0) / slope;
        return lum >= -1e-9 && lum <= 255.0 + 1e-9;
    };
    double lum = 0.0;
    const bool dark_ok = spec_.polarity != Polarity::Bright && try_target(-want, lum);
    if (dark_ok) return std::clamp(lum, 0.0, 255.0);
    if (spec_.polarity != Polarity::Dark && try_target(want, lum)) return std::clamp(lum, 0.0, 255.0);
    double lo_c, hi_c;
    const double a0 = f0 / 255.0, a1 = f1 / 255.0;
    if (spec_.polarity == Polarity::Dark) {
        lo_c = std::max(0.0, -std::max(a0, a1));
        hi_c = std::max(0.0, -std::min(a0, a1));
    } else if (spec_.polarity == Polarity::Bright) {
        lo_c = std::max(0.0, std::min(a0, a1));
        hi_c = std::max(0.0, std::max(a0, a1));
    } else {
        lo_c = (a0 <= 0 && a1 >= 0) || (a1 <= 0 && a0 >= 0) ? 0.0 : std::min(std::abs(a0), std::abs(a1));
        hi_c = std::max(std::abs(a0), std::abs(a1));
    }
    std::ostringstream msg;
    msg << std::setprecision(4) << "stimulus: Weber contrast " << contrast
        << " is unreachable; feasible range is [" << lo_c << ", " << hi_c << "]";
    throw std::invalid_argument(msg.str());
}

Frame StimulusRenderer::frame(int k) const {
    if (k < 0 || k >= spec_.frames) throw std::out_of_range("stimulus: frame index out of range");
    Frame f(spec_.width, spec_.height, k * 1000.0 / spec_.fs);
    draw(f, k, seg_luminance_[segment_of(k)], true);
    return f;
}

GroundTruth StimulusRenderer::truth(int k) const { return path_state(spec_.path, k, spec_.fs); }

RenderedStimulus render(const StimulusSpec& spec) {
    StimulusRenderer r(spec);
    RenderedStimulus out;
    out.frames.reserve(static_cast<std::size_t>(r.frame_count()));
    for (int k = 0; k < r.frame_count(); ++k) {
        out.frames.push_back(r.frame(k));
        out.truth.push_back(r.truth(k));
    }
    return out;
}

PrimerProbeStimulus primer_probe(const PrimerProbeSpec& p) {
    PrimerProbeStimulus out;
    StimulusSpec& s = out.spec;
    s.width = p.width;
    s.height = p.height;
    s.fs = p.fs;
    s.frames = p.primer_frames + p.probe_frames;
    s.background.uniform = p.background;
    s.target_width = p.target_width;
    s.target_height = p.target_height;
    s.contrast = p.primer_contrast;
    SegmentedPath path{p.x0, p.y0, {}};
    path.segments.push_back({p.primer_theta, p.speed, p.primer_frames, p.primer_contrast});
    path.segments.push_back({p.primer_theta + p.offset, p.speed, p.probe_frames, p.probe_contrast});
    s.path = path;
    out.boundary_frame = p.primer_frames;
    StimulusRenderer check(s);  // validates bounds and contrasts
    return out;
}

void write_ground_truth_header(std::ostream& os) { os << "frame,x,y,visible,theta\n"; }

void write_ground_truth_row(std::ostream& os, const GroundTruth& g) {
    const auto prec = os.precision();
    os << std::setprecision(17) << g.frame << ',' << g.x << ',' << g.y << ',' << (g.visible ? 1 : 0)
       << ',' << g.theta << '\n';
    os.precision(prec);
}

}  // namespace apgstmd
