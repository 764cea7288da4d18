#include "apgstmd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace apgstmd {

namespace {

Kernel2D spatial_inhibition_kernel(const ModelConfig& c) {
    return inhibition_spatial(c.A, c.B, c.e, c.rho, c.sigma2, c.sigma3,
                              truncation_radius(c.sigma3, c.spatial_truncation));
}

}  // namespace

Pipeline::Pipeline(int width, int height, const ModelConfig& config)
    : width_(width),
      height_(height),
      config_((config.validate(), config)),
      directions_(preferred_directions(config.directions)),
      bank_(make_attention_bank(config.attention_scales, config.attention_orientations,
                                config.spatial_truncation)),
      temporal_(width, height, TemporalKernels::from_config(config), config.dt_ms()),
      inhibitor_(spatial_inhibition_kernel(config),
                 inhibition_directional(config.sigma4, config.sigma5, config.directions),
                 config.staged_inhibition ? InhibitionMode::Staged : InhibitionMode::Joint),
      memorizer_(width, height),
      traces_(config.trace_window, config.trace_std_threshold, config.trace_gate,
              config.trace_max_gap, config.trace_smoothing) {
    if (config_.prediction) predictive_.emplace(width, height, config_);
}

StepResult Pipeline::step(const Frame& frame) {
    if (frame.width != width_ || frame.height != height_)
        throw std::invalid_argument("Pipeline::step: frame is " + std::to_string(frame.width) + "x" +
                                    std::to_string(frame.height) + ", pipeline expects " +
                                    std::to_string(width_) + "x" + std::to_string(height_));
    StepResult r;
    r.frame_index = frame_index_;
    r.t_ms = frame.t_ms;

    r.recalled = memorizer_.recall();
    r.smoothed = preprocess(frame, config_.sigma1, config_.spatial_truncation);

    if (config_.attention) {
        const double peak = r.recalled.max_value();
        if (peak > 0.0)
            r.areas = extract_areas(r.recalled, config_.map_threshold_fraction * peak,
                                    config_.area_margin);
        std::vector<std::vector<double>> responses;
        responses.reserve(r.areas.size());
        for (const Area& a : r.areas) responses.push_back(attention_response(r.smoothed, a, bank_));
        r.enhanced = enhance(r.smoothed, r.areas, responses, config_.alpha);
    } else {
        r.enhanced = r.smoothed;
    }

    const Frame lmc = temporal_.lmc_step(r.enhanced);
    const MedullaBundle bundle = temporal_.medulla_step(lmc);
    r.reliable = bundle.reliable;

    r.e = inhibitor_.apply(correlate(bundle, config_.gamma, directions_, config_.bilinear_offsets));
    r.q = predictive_ ? predictive_->facilitate(r.e) : r.e;

    const DirectionalField& scored = config_.facilitated_threshold ? r.q : r.e;
    if (r.reliable) {
        if (config_.delta_absolute) {
            r.delta = *config_.delta_absolute;
        } else {
            running_max_ = std::max(running_max_, scored.max_value());
            r.delta = config_.delta_fraction * running_max_;
        }
        r.detections = detect(scored, r.delta, config_.nms_radius, frame.t_ms);
        if (config_.trace_filter) {
            std::vector<double> contrast;
            contrast.reserve(r.detections.size());
            for (const Detection& d : r.detections)
                contrast.push_back(
                    attention_contrast(r.smoothed, d.x, d.y, config_.trace_sample_radius, bank_) / 255.0);
            r.detections = traces_.update(static_cast<int>(frame_index_), std::move(r.detections),
                                          contrast);
        } else {
            for (Detection& d : r.detections) d.confirmed = true;
        }
    }

    if (predictive_) {
        const DirectionalField* input = &r.e;
        DirectionalField gated;
        if (config_.prediction_source == PredictionSource::Detections) {
            std::vector<Detection> confirmed;
            for (const Detection& d : r.detections)
                if (d.confirmed) confirmed.push_back(d);
            gated = gate_to_detections(r.e, confirmed, config_.prediction_gate_radius);
            input = &gated;
        }
        r.map = prediction_map(predictive_->predictive_gain(*input));
        r.map.t_ms = frame.t_ms;
        memorizer_.memorize(r.map);
    } else {
        r.map = PredictionMap(width_, height_, frame.t_ms);
    }
    ++frame_index_;
    return r;
}

}  // namespace apgstmd
