#include "apgstmd/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace apgstmd {

namespace {

constexpr std::int64_t kLongAgo = std::numeric_limits<std::int64_t>::min() / 4;

// sum_{k<taps.size()} taps[k] * ring[(t-k) mod depth], with slot = t mod depth
inline double ring_fir(const double* ring, int depth, int slot, const std::vector<double>& taps) {
    const int n = static_cast<int>(taps.size());
    double acc = 0.0;
    const int head = std::min(slot + 1, n);
    for (int k = 0; k < head; ++k) acc += taps[k] * ring[slot - k];
    for (int k = head; k < n; ++k) acc += taps[k] * ring[slot - k + depth];
    return acc;
}

}  // namespace

TemporalKernels TemporalKernels::from_config(const ModelConfig& c) {
    const double dt = c.dt_ms();
    const double trunc = c.temporal_truncation;
    const double tail = c.gamma_tail_mass;
    const int lh = std::max(gamma_kernel_length(c.n1, c.tau1, dt, trunc, tail),
                            gamma_kernel_length(c.n2, c.tau2, dt, trunc, tail));
    TemporalKernels k;
    k.bandpass = bandpass_kernel(c.n1, c.tau1, c.n2, c.tau2, lh, dt);
    k.mi1 = gamma_kernel(c.n3, c.tau3, gamma_kernel_length(c.n3, c.tau3, dt, trunc, tail), dt);
    k.tm1_fast = gamma_kernel(c.n4, c.tau4, gamma_kernel_length(c.n4, c.tau4, dt, trunc, tail), dt);
    k.tm1_slow = gamma_kernel(c.n5, c.tau5, gamma_kernel_length(c.n5, c.tau5, dt, trunc, tail), dt);
    return k;
}

int TemporalKernels::warmup_length() const {
    return bandpass.length() + std::max({mi1.length(), tm1_fast.length(), tm1_slow.length()}) - 1;
}

TemporalState::TemporalState(int width, int height, TemporalKernels kernels, double dt_ms)
    : width_(width), height_(height), kernels_(std::move(kernels)), dt_ms_(dt_ms) {
    if (width < 1 || height < 1) throw std::invalid_argument("TemporalState: empty frame size");
    if (!(dt_ms > 0)) throw std::invalid_argument("TemporalState: dt must be > 0");
    if (kernels_.bandpass.length() < 1 || kernels_.mi1.length() < 1 ||
        kernels_.tm1_fast.length() < 1 || kernels_.tm1_slow.length() < 1)
        throw std::invalid_argument("TemporalState: empty temporal kernel");
    const std::size_t n = static_cast<std::size_t>(width) * height;
    input_depth_ = kernels_.bandpass.length();
    pos_depth_ = kernels_.mi1.length();
    neg_depth_ = std::max(kernels_.tm1_fast.length(), kernels_.tm1_slow.length());
    input_ring_.assign(n * input_depth_, 0.0);
    pos_ring_.assign(n * pos_depth_, 0.0);
    neg_ring_.assign(n * neg_depth_, 0.0);
    last_input_.assign(n, 0.0);
    input_changed_.assign(n, kLongAgo);
    pos_event_.assign(n, kLongAgo);
    neg_event_.assign(n, kLongAgo);
}

Frame TemporalState::lmc_step(const Frame& in) {
    if (in.width != width_ || in.height != height_)
        throw std::invalid_argument("lmc_step: frame is " + std::to_string(in.width) + "x" +
                                    std::to_string(in.height) + ", state is " +
                                    std::to_string(width_) + "x" + std::to_string(height_));
    if (medulla_pending_) throw std::logic_error("lmc_step: medulla_step was not called");
    if (frames_ > 0) {
        const double step = in.t_ms - last_t_;
        if (std::abs(step - dt_ms_) > 1e-6 * std::max(1.0, dt_ms_))
            throw std::invalid_argument("lmc_step: non-uniform timestamps (step " +
                                        std::to_string(step) + " ms, expected " +
                                        std::to_string(dt_ms_) + " ms)");
    }
    const std::int64_t t = frames_;
    const int depth = input_depth_;
    const int slot = static_cast<int>(t % depth);
    const auto& h = kernels_.bandpass.data;
    Frame out(width_, height_, in.t_ms);
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = in.data[i];
        double* ring = input_ring_.data() + i * depth;
        // After a change the next `depth` writes overwrite every slot, so a
        // ring that stopped being written already holds its constant value.
        if (v != last_input_[i]) {
            last_input_[i] = v;
            input_changed_[i] = t;
        }
        const std::int64_t age = t - input_changed_[i];
        if (age < depth) ring[slot] = v;
        if (age >= depth - 1) continue;  // constant over the support: L = 0
        double acc = 0.0;
        const int head = std::min(slot + 1, depth);
        for (int k = 1; k < head; ++k) acc += h[k] * (ring[slot - k] - v);
        for (int k = head; k < depth; ++k) acc += h[k] * (ring[slot - k + depth] - v);
        out.data[i] = acc;
    }
    last_t_ = in.t_ms;
    medulla_pending_ = true;
    return out;
}

MedullaBundle TemporalState::medulla_step(const Frame& lmc) {
    if (!medulla_pending_) throw std::logic_error("medulla_step: no preceding lmc_step");
    if (lmc.width != width_ || lmc.height != height_)
        throw std::invalid_argument("medulla_step: shape mismatch");
    const std::int64_t t = frames_;
    MedullaBundle b;
    b.tm3 = Frame(width_, height_, lmc.t_ms);
    b.tm2 = Frame(width_, height_, lmc.t_ms);
    b.mi1 = Frame(width_, height_, lmc.t_ms);
    b.tm1_a = Frame(width_, height_, lmc.t_ms);
    b.tm1_b = Frame(width_, height_, lmc.t_ms);
    const int pslot = static_cast<int>(t % pos_depth_);
    const int nslot = static_cast<int>(t % neg_depth_);
    const auto& g3 = kernels_.mi1.data;
    const auto& g4 = kernels_.tm1_fast.data;
    const auto& g5 = kernels_.tm1_slow.data;
    const std::size_t n = lmc.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double l = lmc.data[i];
        const double pos = l > 0 ? l : 0.0;
        const double neg = l < 0 ? -l : 0.0;
        b.tm3.data[i] = pos;
        b.tm2.data[i] = neg;

        // A ring keeps being written for depth frames after its last nonzero
        // sample so that the slot holding that sample is cleared again.
        if (pos != 0.0) pos_event_[i] = t;
        const std::int64_t page = t - pos_event_[i];
        if (page <= pos_depth_) {
            double* ring = pos_ring_.data() + i * pos_depth_;
            ring[pslot] = pos;
            if (page < static_cast<std::int64_t>(g3.size()))
                b.mi1.data[i] = ring_fir(ring, pos_depth_, pslot, g3);
        }

        if (neg != 0.0) neg_event_[i] = t;
        const std::int64_t nage = t - neg_event_[i];
        if (nage <= neg_depth_) {
            double* ring = neg_ring_.data() + i * neg_depth_;
            ring[nslot] = neg;
            if (nage < static_cast<std::int64_t>(g4.size()))
                b.tm1_a.data[i] = ring_fir(ring, neg_depth_, nslot, g4);
            if (nage < static_cast<std::int64_t>(g5.size()))
                b.tm1_b.data[i] = ring_fir(ring, neg_depth_, nslot, g5);
        }
    }
    medulla_pending_ = false;
    ++frames_;
    b.reliable = warmed_up();
    return b;
}

std::vector<double> causal_convolve(const std::vector<double>& series, const Kernel1D& kernel) {
    std::vector<double> out(series.size(), 0.0);
    for (std::size_t t = 0; t < series.size(); ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k < kernel.data.size() && k <= t; ++k)
            acc += kernel.data[k] * series[t - k];
        out[t] = acc;
    }
    return out;
}

}  // namespace apgstmd
