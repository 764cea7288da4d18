#pragma once

#include <vector>

#include "apgstmd/core.hpp"
#include "apgstmd/kernels.hpp"

namespace apgstmd {

/// Half-open pixel rectangle [x0,x1) x [y0,y1).
struct Area {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool empty() const { return width() <= 0 || height() <= 0; }
    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
    bool operator==(const Area&) const = default;
};

using AreaSet = std::vector<Area>;

/// Ommatidia stage: unit-sum Gaussian blur with replicate borders.
Frame preprocess(const Frame& frame, double sigma1, double truncation = 3.0);

/// Bounding boxes of the 8-connected components of {map > threshold}, grown by
/// `margin` and clipped to the map.
AreaSet extract_areas(const PredictionMap& map, double threshold, int margin);

/// Attention kernels for every (scale, orientation) pair.
struct AttentionBank {
    std::vector<double> scales;
    std::vector<double> orientations;
    std::vector<Kernel2D> kernels;  // scale-major

    const Kernel2D& kernel(std::size_t s, std::size_t o) const {
        return kernels[s * orientations.size() + o];
    }
};

AttentionBank make_attention_bank(const std::vector<double>& scales,
                                  const std::vector<double>& orientations,
                                  double truncation = 3.0);

/// Pooled attention response at one pixel. For every scale the orientation
/// with the weakest response is kept (sign preserved); the strongest of those
/// across scales is returned. Equals max-over-scales of min-over-orientations
/// whenever responses are non-negative.
double attention_at(const Frame& smoothed, int x, int y, const AttentionBank& bank);

/// Largest |attention_at| over the (2r+1)^2 neighbourhood of (x, y), clipped
/// to the frame.
double attention_contrast(const Frame& smoothed, int x, int y, int r, const AttentionBank& bank);

/// attention_at over an area, row-major area-sized grid.
std::vector<double> attention_response(const Frame& smoothed, const Area& area,
                                       const AttentionBank& bank);

/// P + alpha * sum of area responses; pixels outside every area are copied.
Frame enhance(const Frame& smoothed, const AreaSet& areas,
              const std::vector<std::vector<double>>& responses, double alpha);

}  // namespace apgstmd
