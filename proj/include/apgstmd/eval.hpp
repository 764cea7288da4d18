#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "apgstmd/core.hpp"
#include "apgstmd/pipeline.hpp"
#include "apgstmd/spatial.hpp"
#include "apgstmd/stimulus.hpp"

namespace apgstmd {

/// |mean inside box - mean of the surrounding ring of width d| / 255. Boxes
/// are clipped to the frame. Throws std::invalid_argument when the clipped
/// ring or box is empty.
double weber_contrast(const Frame& frame, const Area& box, int d = 10);

/// Runs `pipeline` over every frame of `renderer`, handing each result and the
/// matching ground truth to `visit`.
void run_stimulus(const StimulusRenderer& renderer, Pipeline& pipeline,
                  const std::function<void(const StepResult&, const GroundTruth&)>& visit);

/// Max over directions and over the (2r+1)^2 window centred on (x, y).
double window_response(const DirectionalField& field, double x, double y, int radius = 5);
/// Max over directions at one pixel.
double pixel_response(const DirectionalField& field, int x, int y);

enum class SweepParameter { Contrast, Velocity, Width, Height };
SweepParameter parse_sweep_parameter(const std::string& name);
std::string to_string(SweepParameter p);

struct SweepPoint {
    double value = 0.0;
    double response = 0.0;    // peak response
    double normalized = 0.0;  // response / max response
};

/// Raw STMD for tuning curves: attention and prediction off.
ModelConfig sweep_config(ModelConfig base);
/// Facilitation experiments: attention and trace filter off, prediction fed
/// with E directly so that facilitation does not depend on the threshold.
ModelConfig facilitation_config(ModelConfig base);
/// Attention ablation: an absolute detection threshold (10 unless already
/// set), since a running-max threshold is held far above the low-contrast
/// mover by the high-contrast object.
ModelConfig ablation_config(ModelConfig base);

/// Sweep grids: velocity 0..1000 px/s in 21 steps, contrast 0.1..1.0,
/// width and height 1..30 px.
std::vector<double> default_sweep_values(SweepParameter p);

/// White ground, 5x5 dark target, 250 px/s, contrast 1, horizontal path.
StimulusSpec default_sweep_stimulus();

/// One pipeline run per value. The response is the peak over reliable frames
/// of window_response(E) around the visible target. Width and height sweeps
/// keep the target luminance solved for the base size.
std::vector<SweepPoint> tuning_sweep(SweepParameter parameter, const std::vector<double>& values,
                                     const StimulusSpec& base, const ModelConfig& config);

/// Velocity support: the contiguous run of points around the argmax whose
/// normalised response exceeds `fraction`.
struct Support {
    double low = 0.0;
    double high = 0.0;
    double argmax = 0.0;
};
Support response_support(const std::vector<SweepPoint>& curve, double fraction = 0.05);

/// Scene with a low-contrast mover (A), a background-locked high-contrast
/// small object (B) and a large background-locked object, all on a textured
/// background panned at `background_speed`.
struct AblationScene {
    StimulusSpec spec;
    std::pair<double, double> b_position;      // image position at t = 0
    std::pair<double, double> large_position;  // centre, image position at t = 0
    double large_width = 0.0;
    double large_height = 0.0;
    int scanline = 0;
};
AblationScene default_ablation_scene();

struct AblationReport {
    double a_on = 0.0;
    double a_off = 0.0;
    double b_on = 0.0;
    double b_off = 0.0;
    double large_on = 0.0;
    double large_off = 0.0;
    int scanline = 0;
    std::vector<double> scan_on;   // peak E along the scanline, attention on
    std::vector<double> scan_off;  // same with attention off
};

/// Runs the scene with attention on and off. Responses are peak E in the 11x11
/// window around each object over the last `measure_frames` frames.
AblationReport ablate_attention(const AblationScene& scene, const ModelConfig& config,
                                int measure_frames);

struct OcclusionPoint {
    double radius = 0.0;
    double occlusion_deg = 0.0;
    double q_end = 0.0;  // summed facilitated output at the occlusion end-point
    double e_end = 0.0;  // same for the unfacilitated output
};

/// Circular path at 250 px/s with an occluded arc; Q summed over directions and
/// over the `window_ms` after the target re-emerges, at the end-point pixel.
OcclusionPoint occlusion_run(double radius, double occlusion_deg, const ModelConfig& config,
                             double window_ms = 20.0);
std::vector<OcclusionPoint> occlusion_study(const std::vector<double>& radii,
                                            const std::vector<double>& occlusion_deg,
                                            const ModelConfig& config);

/// Time courses of max-over-direction E and Q at one pixel on the path of a
/// constant-velocity target.
struct FacilitationTrace {
    std::vector<double> t_ms;
    std::vector<double> e;
    std::vector<double> q;
    double e_peak = 0.0;
    double q_peak = 0.0;
    double e_rise_ms = 0.0;  // first crossing of 10% of peak to peak
    double q_rise_ms = 0.0;
};
FacilitationTrace facilitation_dynamics(const ModelConfig& config, double probe_x = 150.0);
/// Time from first exceeding `fraction` of the peak until the peak.
double rise_time(const std::vector<double>& t_ms, const std::vector<double>& values,
                 double fraction = 0.1);

struct ProbeResponse {
    double unfacilitated = 0.0;  // peak E around the probe target
    double facilitated = 0.0;    // peak Q around the probe target
};
/// Probe responses measured from `settle_ms` after the primer/probe boundary
/// for `window_ms`. A probe that retraces the primer is, t ms after the
/// boundary, where the primer was 2t ms earlier; the default settle time lets
/// the temporal stage (149 ms of history) forget that visit.
ProbeResponse primer_probe_response(const PrimerProbeSpec& p, const ModelConfig& config,
                                    double settle_ms = 80.0, double window_ms = 40.0);

/// Facilitated and unfacilitated probe responses, one per primer contrast.
std::vector<ProbeResponse> contrast_facilitation(const std::vector<double>& primer_contrasts,
                                                 const ModelConfig& config);

/// Probe responses over probe directions for a fixed primer direction. The
/// sequence starts at the frame centre.
struct DirectionTuning {
    double primer_theta = 0.0;
    std::vector<double> probe_theta;
    std::vector<ProbeResponse> response;
};
DirectionTuning direction_facilitation(double primer_theta, const ModelConfig& config);

struct DetectionRecord {
    int frame = 0;
    int x = 0;
    int y = 0;
    double response = 0.0;
};
struct RocPoint {
    double delta = 0.0;
    double detection_rate = 0.0;
    double false_alarms_per_frame = 0.0;
};

std::vector<DetectionRecord> read_detections_csv(std::istream& is);
std::vector<GroundTruth> read_ground_truth_csv(std::istream& is);

/// Detection rate and false alarms per frame for each delta. A detection within
/// `match_radius` of a visible ground-truth centre in its frame is a hit;
/// every other detection is a false alarm. When `deltas` is empty, 20
/// log-spaced values between the smallest and largest response are used.
/// Throws std::invalid_argument if a detection refers to a frame outside the
/// ground truth.
std::vector<RocPoint> detection_metrics(const std::vector<DetectionRecord>& detections,
                                        const std::vector<GroundTruth>& truth,
                                        double match_radius = 5.0,
                                        std::vector<double> deltas = {});

/// Comment lines identifying the run: config hash, stimulus hash, seed.
std::string metadata_header(const ModelConfig& config, const std::string& stimulus_description,
                            std::uint64_t seed);
std::string describe(const StimulusSpec& spec);
std::string fnv1a_hex(const std::string& text);

}  // namespace apgstmd
