#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "apgstmd/convolve.hpp"
#include "apgstmd/core.hpp"
#include "apgstmd/kernels.hpp"

namespace apgstmd {

/// Ring kernels W_p(., ., theta), one per preferred direction.
std::vector<Kernel2D> prediction_kernel_bank(const ModelConfig& config);

/// Recursive predictive gain with a history of past F fields.
///
/// With h = horizon_frames(), F(t) = (mu E(t) + (1-mu) F(t-h)) * W_p per
/// direction (zero padding). The facilitated output uses the left-endpoint sum
/// Q(t) = E(t) + beta * sum_{j=1..h} exp(kappa (j dt - Dt)) F(t-j) dt.
class PredictiveState {
public:
    PredictiveState(int width, int height, const ModelConfig& config);
    PredictiveState(int width, int height, std::vector<double> directions,
                    std::vector<Kernel2D> kernels, int horizon_frames, double dt_ms, double mu,
                    double beta, double kappa);

    /// Q for the current frame from E and the stored history (must precede
    /// predictive_gain for the same frame).
    DirectionalField facilitate(const DirectionalField& e) const;
    /// Advance the recursion with the current input and return F(t).
    const DirectionalField& predictive_gain(const DirectionalField& input);

    /// F(t-lag) for lag in [0, horizon]; zero field if not yet computed.
    const DirectionalField& history(int lag) const;
    int horizon() const { return horizon_; }
    double mu() const { return mu_; }
    double beta() const { return beta_; }
    /// Relative floor below which F values are flushed to zero (keeps the
    /// support of the recursion bounded); 0 disables.
    void set_flush_floor(double floor) { flush_floor_ = floor; }

private:
    int width_;
    int height_;
    std::vector<double> directions_;
    std::vector<SpatialConvolver> kernels_;
    int horizon_;
    double dt_ms_;
    double mu_;
    double beta_;
    double kappa_;
    double flush_floor_ = 1e-12;
    double running_max_ = 0.0;
    std::deque<DirectionalField> history_;  // front = most recent
    DirectionalField zero_;
};

/// M = sum over directions of F times the direction spacing 2pi/n.
PredictionMap prediction_map(const DirectionalField& f);

/// Keeps the latest prediction map for the next frame's attention stage.
class Memorizer {
public:
    Memorizer(int width, int height) : width_(width), height_(height) {}
    void memorize(const PredictionMap& map);
    /// Latest stored map, or the zero map before any store.
    PredictionMap recall() const;
    bool empty() const { return !latest_.has_value(); }

private:
    int width_;
    int height_;
    std::optional<PredictionMap> latest_;
};

/// Copy of `e` restricted to square windows of the given radius around the
/// detections (all directions kept), zero elsewhere.
DirectionalField gate_to_detections(const DirectionalField& e, const std::vector<Detection>& dets,
                                    int radius);

/// Write M as a 16-bit PGM scaled to its maximum; the maximum goes to a
/// sidecar `<path>.max` text file.
void write_prediction_map(const std::string& path, const PredictionMap& map);

}  // namespace apgstmd
