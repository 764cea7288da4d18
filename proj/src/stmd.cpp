#include "apgstmd/stmd.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace apgstmd {

namespace {

double bilinear(const Frame& f, double x, double y) {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const double ax = x - fx;
    const double ay = y - fy;
    return (1 - ay) * ((1 - ax) * f.clamped(x0, y0) + ax * f.clamped(x0 + 1, y0)) +
           ay * ((1 - ax) * f.clamped(x0, y0 + 1) + ax * f.clamped(x0 + 1, y0 + 1));
}

}  // namespace

DirectionalField correlate(const MedullaBundle& b, double gamma, const std::vector<double>& dirs,
                           bool use_bilinear) {
    const int w = b.tm3.width;
    const int h = b.tm3.height;
    for (const Frame* f : {&b.tm2, &b.mi1, &b.tm1_a, &b.tm1_b})
        if (!f->same_shape(b.tm3)) throw std::invalid_argument("correlate: bundle shape mismatch");
    DirectionalField out(w, h, dirs);
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        const double ox = -gamma * std::cos(dirs[d]);
        const double oy = -gamma * std::sin(dirs[d]);
        const int ix = static_cast<int>(std::lround(ox));
        const int iy = static_cast<int>(std::lround(oy));
        double* plane = out.plane(d);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double tm3 = b.tm3.at(x, y);
                if (tm3 == 0.0) continue;
                double mi1;
                double tm1b;
                if (use_bilinear) {
                    mi1 = bilinear(b.mi1, x + ox, y + oy);
                    tm1b = bilinear(b.tm1_b, x + ox, y + oy);
                } else {
                    mi1 = b.mi1.clamped(x + ix, y + iy);
                    tm1b = b.tm1_b.clamped(x + ix, y + iy);
                }
                plane[static_cast<std::size_t>(y) * w + x] = tm3 * (b.tm1_a.at(x, y) + mi1) * tm1b;
            }
        }
    }
    return out;
}

Inhibitor::Inhibitor(Kernel2D spatial, DirectionalKernel directional, InhibitionMode mode)
    : spatial_(std::move(spatial), Border::Replicate), directional_(std::move(directional)), mode_(mode) {}

DirectionalField Inhibitor::mix_directions(const DirectionalField& in) const {
    const std::size_t nd = in.num_directions();
    const std::size_t np = in.plane_size();
    // index range holding any nonzero input, shared by all directions
    std::size_t first = np, last = 0;
    for (std::size_t j = 0; j < nd; ++j) {
        const double* src = in.plane(j);
        for (std::size_t p = 0; p < np; ++p)
            if (src[p] != 0.0) {
                first = std::min(first, p);
                break;
            }
        for (std::size_t p = np; p-- > 0;)
            if (src[p] != 0.0) {
                last = std::max(last, p + 1);
                break;
            }
    }
    // circular convolution over direction index
    DirectionalField mixed(in.width, in.height, in.directions);
    for (std::size_t i = 0; i < nd && first < last; ++i) {
        double* dst = mixed.plane(i);
        for (std::size_t j = 0; j < nd; ++j) {
            const double wgt = directional_.at_offset(static_cast<int>(i) - static_cast<int>(j));
            if (wgt == 0.0) continue;
            const double* src = in.plane(j);
            for (std::size_t p = first; p < last; ++p) dst[p] += wgt * src[p];
        }
    }
    return mixed;
}

DirectionalField Inhibitor::convolve_planes(const DirectionalField& in) const {
    DirectionalField out(in.width, in.height, in.directions);
    for (std::size_t i = 0; i < in.num_directions(); ++i)
        spatial_.apply(in.plane(i), in.width, in.height, out.plane(i));
    return out;
}

DirectionalField Inhibitor::apply(const DirectionalField& in) const {
    if (directional_.values.size() != in.num_directions())
        throw std::invalid_argument("inhibit: directional kernel size does not match field");
    auto rectify = [](DirectionalField& f) {
        for (double& v : f.data)
            if (v < 0.0) v = 0.0;
    };
    DirectionalField out;
    if (mode_ == InhibitionMode::Staged) {
        DirectionalField spatial = convolve_planes(in);
        rectify(spatial);
        out = mix_directions(spatial);
    } else {
        out = convolve_planes(mix_directions(in));
    }
    rectify(out);
    return out;
}

DirectionalField inhibit(const DirectionalField& d, const Kernel2D& ws, const DirectionalKernel& wd,
                         InhibitionMode mode) {
    return Inhibitor(ws, wd, mode).apply(d);
}

std::vector<Detection> detect(const DirectionalField& f, double delta, int nms_radius, double t_ms) {
    if (nms_radius < 0) throw std::invalid_argument("detect: negative NMS radius");
    const std::size_t np = f.plane_size();
    std::vector<Detection> cand;
    for (std::size_t p = 0; p < np; ++p) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t d = 0; d < f.num_directions(); ++d) {
            const double v = f.plane(d)[p];
            if (v > best) {
                best = v;
                arg = d;
            }
        }
        if (!(best > delta)) continue;
        Detection det;
        det.x = static_cast<int>(p % f.width);
        det.y = static_cast<int>(p / f.width);
        det.t_ms = t_ms;
        det.theta = f.directions[arg];
        det.response = best;
        cand.push_back(det);
    }
    // stable sort keeps raster order among equal responses
    std::stable_sort(cand.begin(), cand.end(),
                     [](const Detection& a, const Detection& b) { return a.response > b.response; });
    std::vector<Detection> kept;
    const long r2 = static_cast<long>(nms_radius) * nms_radius;
    for (const Detection& c : cand) {
        bool suppressed = false;
        for (const Detection& k : kept) {
            const long dx = c.x - k.x;
            const long dy = c.y - k.y;
            if (dx * dx + dy * dy <= r2) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(c);
    }
    return kept;
}

double population_stddev(const std::deque<double>& s) {
    if (s.empty()) return 0.0;
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    double acc = 0.0;
    for (double v : s) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(s.size()));
}

std::deque<double> moving_average(const std::deque<double>& s, int n) {
    if (n < 1) throw std::invalid_argument("moving_average: length must be >= 1");
    std::deque<double> out;
    const std::size_t len = static_cast<std::size_t>(n);
    if (s.size() < len) return out;
    double acc = std::accumulate(s.begin(), s.begin() + n, 0.0);
    out.push_back(acc / n);
    for (std::size_t i = len; i < s.size(); ++i) {
        acc += s[i] - s[i - len];
        out.push_back(acc / n);
    }
    return out;
}

TraceFilter::TraceFilter(int window, double std_threshold, double gate, int max_gap, int smoothing)
    : window_(window), threshold_(std_threshold), gate_(gate), max_gap_(max_gap), smoothing_(smoothing) {
    if (window < 1) throw std::invalid_argument("TraceFilter: window must be >= 1");
    if (smoothing < 1 || smoothing > window)
        throw std::invalid_argument("TraceFilter: smoothing must lie in [1, window]");
    if (gate < 0 || max_gap < 0) throw std::invalid_argument("TraceFilter: negative gate or gap");
}

std::vector<Detection> TraceFilter::update(int frame, std::vector<Detection> dets,
                                           const std::vector<double>& contrast) {
    if (contrast.size() != dets.size())
        throw std::invalid_argument("TraceFilter: one contrast sample per detection required");
    traces_.erase(std::remove_if(traces_.begin(), traces_.end(),
                                 [&](const Trace& t) { return frame - t.last_frame > max_gap_ + 1; }),
                  traces_.end());
    // visit detections strongest first; each trace takes at most one per frame
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].response > dets[b].response; });
    std::vector<char> taken(traces_.size(), 0);
    for (std::size_t idx : order) {
        Detection& d = dets[idx];
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < traces_.size(); ++i) {
            if (taken[i]) continue;
            const Trace& t = traces_[i];
            const int elapsed = frame - t.last_frame;
            if (elapsed <= 0) continue;
            const double dist = std::hypot(d.x - t.x, d.y - t.y);
            if (dist <= gate_ * elapsed && dist < best_dist) {
                best_dist = dist;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) {
            Trace t;
            t.id = next_id_++;
            traces_.push_back(t);
            taken.push_back(0);
            best = static_cast<int>(traces_.size() - 1);
        }
        Trace& t = traces_[static_cast<std::size_t>(best)];
        taken[static_cast<std::size_t>(best)] = 1;
        t.last_frame = frame;
        t.x = d.x;
        t.y = d.y;
        ++t.length;
        t.samples.push_back(contrast[idx]);
        while (static_cast<int>(t.samples.size()) > window_) t.samples.pop_front();
        d.trace_id = t.id;
        d.confirmed = false;
        if (static_cast<int>(t.samples.size()) >= window_) {
            const std::deque<double> avg = moving_average(t.samples, smoothing_);
            d.confirmed = population_stddev(avg) > threshold_ * *std::max_element(avg.begin(), avg.end());
        }
    }
    return dets;
}

void write_detections_header(std::ostream& os) {
    os << "frame_index,t_ms,x,y,theta_rad,response,trace_id,confirmed\n";
}

void write_detections_rows(std::ostream& os, int frame_index, const std::vector<Detection>& dets) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(17);
    for (const Detection& d : dets) {
        os << frame_index << ',' << d.t_ms << ',' << d.x << ',' << d.y << ',' << d.theta << ','
           << d.response << ',';
        if (d.trace_id) os << *d.trace_id;
        os << ',' << (d.confirmed ? 1 : 0) << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

}  // namespace apgstmd
