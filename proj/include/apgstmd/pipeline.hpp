#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "apgstmd/core.hpp"
#include "apgstmd/prediction.hpp"
#include "apgstmd/spatial.hpp"
#include "apgstmd/stmd.hpp"
#include "apgstmd/temporal.hpp"

namespace apgstmd {

/// Everything one step produced. Fields are moved out of the stage outputs,
/// so keeping them costs no copies.
struct StepResult {
    std::int64_t frame_index = 0;
    double t_ms = 0.0;
    bool reliable = false;          // temporal warm-up complete
    double delta = 0.0;             // threshold applied this frame
    std::vector<Detection> detections;
    PredictionMap recalled;         // map that gated attention this frame
    AreaSet areas;
    Frame smoothed;                 // P
    Frame enhanced;                 // P_e
    DirectionalField e;             // unfacilitated output
    DirectionalField q;             // facilitated output (== e without prediction)
    PredictionMap map;              // M stored for the next frame
};

/// The recurrent per-frame loop. Frames must share the size given at
/// construction and arrive at the configured frame rate.
class Pipeline {
public:
    Pipeline(int width, int height, const ModelConfig& config);

    StepResult step(const Frame& frame);

    int width() const { return width_; }
    int height() const { return height_; }
    const ModelConfig& config() const { return config_; }
    std::int64_t frames_processed() const { return frame_index_; }
    /// Number of frames after which detections are emitted.
    int warmup_frames() const { return temporal_.kernels().warmup_length(); }
    const AttentionBank& attention_bank() const { return bank_; }

private:
    int width_;
    int height_;
    ModelConfig config_;
    std::vector<double> directions_;
    AttentionBank bank_;
    TemporalState temporal_;
    Inhibitor inhibitor_;
    std::optional<PredictiveState> predictive_;
    Memorizer memorizer_;
    TraceFilter traces_;
    double running_max_ = 0.0;
    std::int64_t frame_index_ = 0;
};

}  // namespace apgstmd
