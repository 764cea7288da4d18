#include "apgstmd/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apgstmd/convolve.hpp"

namespace apgstmd {

Frame preprocess(const Frame& frame, double sigma1, double truncation) {
    if (frame.width < 1 || frame.height < 1 || frame.data.size() != frame.size())
        throw std::invalid_argument("preprocess: invalid frame");
    const int r = truncation_radius(sigma1, truncation);
    // the unit-sum 2-D Gaussian is the outer product of unit-sum 1-D Gaussians
    std::vector<double> taps(static_cast<std::size_t>(2 * r + 1));
    double sum = 0.0;
    for (int d = -r; d <= r; ++d) sum += taps[d + r] = std::exp(-d * d / (2.0 * sigma1 * sigma1));
    for (double& t : taps) t /= sum;
    Frame out(frame.width, frame.height, frame.t_ms);
    convolve_separable(frame.data.data(), frame.width, frame.height, taps, Border::Replicate,
                       out.data.data());
    return out;
}

AreaSet extract_areas(const PredictionMap& map, double threshold, int margin) {
    if (margin < 0) throw std::invalid_argument("extract_areas: margin must be >= 0");
    const int w = map.width;
    const int h = map.height;
    std::vector<int> label(map.data.size(), -1);
    AreaSet areas;
    std::vector<int> stack;
    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            const std::size_t seed = static_cast<std::size_t>(y0) * w + x0;
            if (label[seed] >= 0 || !(map.data[seed] > threshold)) continue;
            Area box{x0, y0, x0 + 1, y0 + 1};
            const int id = static_cast<int>(areas.size());
            label[seed] = id;
            stack.assign(1, static_cast<int>(seed));
            while (!stack.empty()) {
                const int idx = stack.back();
                stack.pop_back();
                const int x = idx % w;
                const int y = idx / w;
                box.x0 = std::min(box.x0, x);
                box.y0 = std::min(box.y0, y);
                box.x1 = std::max(box.x1, x + 1);
                box.y1 = std::max(box.y1, y + 1);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx;
                        const int ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
                        if (label[n] >= 0 || !(map.data[n] > threshold)) continue;
                        label[n] = id;
                        stack.push_back(static_cast<int>(n));
                    }
                }
            }
            box.x0 = std::max(0, box.x0 - margin);
            box.y0 = std::max(0, box.y0 - margin);
            box.x1 = std::min(w, box.x1 + margin);
            box.y1 = std::min(h, box.y1 + margin);
            areas.push_back(box);
        }
    }
    return areas;
}

AttentionBank make_attention_bank(const std::vector<double>& scales,
                                  const std::vector<double>& orientations, double truncation) {
    if (scales.empty() || orientations.empty())
        throw std::invalid_argument("make_attention_bank: empty scale or orientation set");
    AttentionBank bank{scales, orientations, {}};
    for (double s : scales)
        for (double o : orientations)
            bank.kernels.push_back(attention_kernel(s, o, truncation_radius(s, truncation)));
    return bank;
}

double attention_at(const Frame& smoothed, int x, int y, const AttentionBank& bank) {
    double best = 0.0;
    for (std::size_t s = 0; s < bank.scales.size(); ++s) {
        double weakest = 0.0;
        for (std::size_t o = 0; o < bank.orientations.size(); ++o) {
            const double v = convolve_at(smoothed.data.data(), smoothed.width, smoothed.height,
                                         bank.kernel(s, o), Border::Replicate, x, y);
            if (o == 0 || std::abs(v) < std::abs(weakest)) weakest = v;
        }
        if (s == 0 || std::abs(weakest) > std::abs(best)) best = weakest;
    }
    return best;
}

double attention_contrast(const Frame& smoothed, int x, int y, int r, const AttentionBank& bank) {
    double best = 0.0;
    for (int yy = std::max(0, y - r); yy <= std::min(smoothed.height - 1, y + r); ++yy)
        for (int xx = std::max(0, x - r); xx <= std::min(smoothed.width - 1, x + r); ++xx)
            best = std::max(best, std::abs(attention_at(smoothed, xx, yy, bank)));
    return best;
}

std::vector<double> attention_response(const Frame& smoothed, const Area& area,
                                       const AttentionBank& bank) {
    if (area.empty()) throw std::invalid_argument("attention_response: empty area");
    if (area.x0 < 0 || area.y0 < 0 || area.x1 > smoothed.width || area.y1 > smoothed.height)
        throw std::invalid_argument("attention_response: area outside frame");
    std::vector<double> out(static_cast<std::size_t>(area.width()) * area.height());
    for (int y = area.y0; y < area.y1; ++y)
        for (int x = area.x0; x < area.x1; ++x)
            out[static_cast<std::size_t>(y - area.y0) * area.width() + (x - area.x0)] =
                attention_at(smoothed, x, y, bank);
    return out;
}

Frame enhance(const Frame& smoothed, const AreaSet& areas,
              const std::vector<std::vector<double>>& responses, double alpha) {
    if (areas.size() != responses.size())
        throw std::invalid_argument("enhance: one response grid per area required");
    Frame out = smoothed;
    if (alpha == 0.0) return out;
    for (std::size_t i = 0; i < areas.size(); ++i) {
        const Area& a = areas[i];
        const auto& grid = responses[i];
        if (grid.size() != static_cast<std::size_t>(a.width()) * a.height())
            throw std::invalid_argument("enhance: response grid does not match its area");
        for (int y = a.y0; y < a.y1; ++y)
            for (int x = a.x0; x < a.x1; ++x)
                out.at(x, y) += alpha * grid[static_cast<std::size_t>(y - a.y0) * a.width() + (x - a.x0)];
    }
    return out;
}

}  // namespace apgstmd
