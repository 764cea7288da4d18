#pragma once

// Direct, loop-by-loop evaluations used as independent references by the unit
// and acceptance tests. Nothing here shares code with the library stages.

#include <algorithm>
#include <cmath>
#include <vector>

#include "apgstmd/core.hpp"
#include "apgstmd/kernels.hpp"
#include "apgstmd/spatial.hpp"

namespace oracle {

using apgstmd::AttentionBank;
using apgstmd::DirectionalField;
using apgstmd::DirectionalKernel;
using apgstmd::Frame;
using apgstmd::Kernel2D;

// y[t] = sum_j k[j] x[t - j], zero history before t = 0.
inline std::vector<double> causal(const std::vector<double>& x, const std::vector<double>& k) {
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t t = 0; t < x.size(); ++t)
        for (std::size_t j = 0; j < k.size() && j <= t; ++j) y[t] += k[j] * x[t - j];
    return y;
}

// One kernel at one pixel, replicate borders.
inline double conv_at(const Frame& p, const Kernel2D& k, int x, int y) {
    double acc = 0.0;
    for (int dy = -k.radius; dy <= k.radius; ++dy)
        for (int dx = -k.radius; dx <= k.radius; ++dx) {
            const int sx = std::clamp(x - dx, 0, p.width - 1);
            const int sy = std::clamp(y - dy, 0, p.height - 1);
            acc += k.at(dx, dy) * p.at(sx, sy);
        }
    return acc;
}

// Weakest orientation per scale, strongest scale, both by magnitude.
inline double attention_at(const Frame& p, const AttentionBank& bank, int x, int y) {
    double best = 0.0;
    for (std::size_t s = 0; s < bank.scales.size(); ++s) {
        double weakest = 0.0;
        for (std::size_t o = 0; o < bank.orientations.size(); ++o) {
            const double r = conv_at(p, bank.kernel(s, o), x, y);
            if (o == 0 || std::abs(r) < std::abs(weakest)) weakest = r;
        }
        if (s == 0 || std::abs(weakest) > std::abs(best)) best = weakest;
    }
    return best;
}

// Triple loop over (theta, x, y): spatial pass with replicate borders, then the
// circular direction pass, rectified. `staged` also rectifies between passes.
inline DirectionalField inhibit(const DirectionalField& d, const Kernel2D& ws, const DirectionalKernel& wd,
                                bool staged) {
    const int w = d.width, h = d.height, nd = static_cast<int>(d.num_directions());
    DirectionalField s(w, h, d.directions);
    for (int t = 0; t < nd; ++t)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int dy = -ws.radius; dy <= ws.radius; ++dy)
                    for (int dx = -ws.radius; dx <= ws.radius; ++dx) {
                        const int sx = std::clamp(x - dx, 0, w - 1);
                        const int sy = std::clamp(y - dy, 0, h - 1);
                        acc += ws.at(dx, dy) * d.plane(static_cast<std::size_t>(t))[static_cast<std::size_t>(sy) * w + sx];
                    }
                s.plane(static_cast<std::size_t>(t))[static_cast<std::size_t>(y) * w + x] = staged ? std::max(acc, 0.0) : acc;
            }
    DirectionalField out(w, h, d.directions);
    for (int t = 0; t < nd; ++t)
        for (std::size_t p = 0; p < out.plane_size(); ++p) {
            double acc = 0.0;
            for (int j = 0; j < nd; ++j)
                acc += wd.values[static_cast<std::size_t>(((t - j) % nd + nd) % nd)] * s.plane(static_cast<std::size_t>(j))[p];
            out.plane(static_cast<std::size_t>(t))[p] = std::max(acc, 0.0);
        }
    return out;
}

}  // namespace oracle
