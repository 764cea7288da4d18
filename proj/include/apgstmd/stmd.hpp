#pragma once

#include <deque>
#include <ostream>
#include <vector>

#include "apgstmd/convolve.hpp"
#include "apgstmd/core.hpp"
#include "apgstmd/kernels.hpp"
#include "apgstmd/temporal.hpp"

namespace apgstmd {

/// Directionally selective correlation of the medulla channels. The delayed
/// channels are read at x' = x - gamma*(cos t, sin t), i.e. upstream along the
/// preferred direction, rounded to the nearest pixel (or bilinearly sampled)
/// with replicate borders.
DirectionalField correlate(const MedullaBundle& bundle, double gamma,
                           const std::vector<double>& directions, bool bilinear = false);

/// Spatial and directional lateral inhibition followed by rectification.
///
/// Joint: E = [W_d (*) (W_s * D)]+, one linear pass then rectification.
/// Staged: E = [W_d (*) [W_s * D]+]+. Without the intermediate rectification
/// the negative lobes of W_d turn the strongly inhibited planes of an extended
/// object into a positive response in the opposite direction channel.
enum class InhibitionMode { Joint, Staged };

class Inhibitor {
public:
    Inhibitor(Kernel2D spatial, DirectionalKernel directional,
              InhibitionMode mode = InhibitionMode::Joint);
    DirectionalField apply(const DirectionalField& d) const;
    const Kernel2D& spatial() const { return spatial_.kernel(); }
    const DirectionalKernel& directional() const { return directional_; }
    InhibitionMode mode() const { return mode_; }

private:
    SpatialConvolver spatial_;
    DirectionalKernel directional_;
    InhibitionMode mode_;

    DirectionalField mix_directions(const DirectionalField& in) const;
    DirectionalField convolve_planes(const DirectionalField& in) const;
};

DirectionalField inhibit(const DirectionalField& d, const Kernel2D& ws, const DirectionalKernel& wd,
                         InhibitionMode mode = InhibitionMode::Joint);

/// Pixels with max-over-theta response above delta, reduced to their argmax
/// direction and thinned by greedy non-maximum suppression (Euclidean radius).
/// Sorted by descending response.
std::vector<Detection> detect(const DirectionalField& field, double delta, int nms_radius = 5,
                              double t_ms = 0.0);

/// Nearest-neighbour trace association with a directional-contrast variance test.
class TraceFilter {
public:
    struct Trace {
        int id = 0;
        int last_frame = 0;
        int x = 0;
        int y = 0;
        std::size_t length = 0;
        std::deque<double> samples;  // latest `window` contrast samples
    };

    TraceFilter(int window, double std_threshold, double gate, int max_gap, int smoothing = 1);

    /// Associate the detections of frame `frame_index` (one contrast sample
    /// each) and return them with trace ids and confirmation flags set. A trace
    /// is confirmed once it holds `window` samples and the moving averages of
    /// length `smoothing` over them have a population standard deviation above
    /// `std_threshold` times their largest value. The averaging removes the
    /// periodic jitter a sub-pixel drift leaves in pixel-sampled contrast.
    std::vector<Detection> update(int frame_index, std::vector<Detection> detections,
                                  const std::vector<double>& contrast);

    const std::vector<Trace>& traces() const { return traces_; }

private:
    int window_;
    double threshold_;
    double gate_;
    int max_gap_;
    int smoothing_;
    int next_id_ = 0;
    std::vector<Trace> traces_;
};

/// Population standard deviation.
double population_stddev(const std::deque<double>& samples);

/// Moving averages of length `n` over `samples` (size - n + 1 values).
std::deque<double> moving_average(const std::deque<double>& samples, int n);

void write_detections_header(std::ostream& os);
void write_detections_rows(std::ostream& os, int frame_index, const std::vector<Detection>& dets);

}  // namespace apgstmd
