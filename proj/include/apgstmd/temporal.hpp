#pragma once

#include <cstdint>
#include <vector>

#include "apgstmd/core.hpp"
#include "apgstmd/kernels.hpp"

namespace apgstmd {

struct TemporalKernels {
    Kernel1D bandpass;  // LMC impulse response
    Kernel1D mi1;       // (n3, tau3) delay
    Kernel1D tm1_fast;  // (n4, tau4) delay
    Kernel1D tm1_slow;  // (n5, tau5) delay

    static TemporalKernels from_config(const ModelConfig& config);
    /// Frames until outputs no longer depend on the zero history before the
    /// first frame: band-pass length plus longest delay kernel, minus one.
    int warmup_length() const;
};

struct MedullaBundle {
    Frame tm3;      // [L]+
    Frame tm2;      // [-L]+
    Frame mi1;      // [L]+ delayed by (n3, tau3)
    Frame tm1_a;    // [-L]+ delayed by (n4, tau4)
    Frame tm1_b;    // [-L]+ delayed by (n5, tau5)
    bool reliable = false;  // false during warm-up
};

/// Streaming LMC and medulla state. Each pixel keeps ring buffers of its recent
/// input and rectified LMC output; pixels whose history is constant (or zero)
/// over a kernel's support are not re-evaluated since their output is known
/// exactly.
///
/// The LMC is evaluated in DC-free form, sum_k H[k] (x[t-k] - x[t]), which
/// equals the plain causal convolution because the band-pass taps sum to zero.
/// History before the first frame is zero.
class TemporalState {
public:
    TemporalState(int width, int height, TemporalKernels kernels, double dt_ms);

    /// Append a contrast-enhanced frame and return the LMC output L.
    /// Throws std::invalid_argument on a shape mismatch or non-uniform step.
    Frame lmc_step(const Frame& enhanced);
    /// Rectify and delay the L returned by the preceding lmc_step.
    MedullaBundle medulla_step(const Frame& lmc);

    bool warmed_up() const { return frames_ >= kernels_.warmup_length(); }
    std::int64_t frames_seen() const { return frames_; }
    const TemporalKernels& kernels() const { return kernels_; }
    int width() const { return width_; }
    int height() const { return height_; }

private:
    int width_;
    int height_;
    TemporalKernels kernels_;
    double dt_ms_;
    std::int64_t frames_ = 0;
    double last_t_ = 0.0;
    bool medulla_pending_ = false;

    int input_depth_;
    int pos_depth_;
    int neg_depth_;
    std::vector<double> input_ring_;
    std::vector<double> pos_ring_;
    std::vector<double> neg_ring_;
    std::vector<double> last_input_;
    std::vector<std::int64_t> input_changed_;
    std::vector<std::int64_t> pos_event_;
    std::vector<std::int64_t> neg_event_;
};

/// Full-history causal convolution of a per-pixel sequence with `kernel`, the
/// reference the streaming state must reproduce.
std::vector<double> causal_convolve(const std::vector<double>& series, const Kernel1D& kernel);

}  // namespace apgstmd
