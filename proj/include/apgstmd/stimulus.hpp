#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <variant>
#include <vector>

#include "apgstmd/core.hpp"
#include "apgstmd/spatial.hpp"

namespace apgstmd {

/// Grey-level image sampled bilinearly with clamped edges.
struct Texture {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    double sample(double x, double y) const;
    /// Overwrite an axis-aligned block (clipped) with a constant value.
    void paint(int x0, int y0, int w, int h, double value);
};

/// Smoothed white noise rescaled to [low, high]; deterministic in `seed`.
Texture make_noise_texture(int width, int height, std::uint64_t seed, double smoothing,
                           double low, double high);
Texture texture_from_frame(const Frame& frame);

/// Uniform value or a texture panned at (vx, vy) px/s. Image pixel (x, y) at
/// time t shows texture point (x + offset_x - vx t, y + offset_y - vy t).
struct Background {
    double uniform = 255.0;
    std::optional<Texture> texture;
    double vx = 0.0;
    double vy = 0.0;
    double offset_x = 0.0;
    double offset_y = 0.0;

    double at(double x, double y, double t_s) const;
};

struct LinearPath {
    double x0 = 0.0;
    double y0 = 0.0;
    double theta = 0.0;  // image coordinates, y down
    double speed = 250.0;  // px/s
};

/// Circle traversed counterclockwise on screen (polar angle decreasing with y
/// down). The target is hidden while it travels the arc of `occlusion_arc`
/// radians that begins at polar angle `occlusion_start`.
struct CircularPath {
    double cx = 0.0;
    double cy = 0.0;
    double radius = 50.0;
    double speed = 250.0;  // px/s along the circle
    double phi0 = 0.0;
    double occlusion_start = 0.0;
    double occlusion_arc = 0.0;

    /// Centre of the target where it leaves the occluded arc.
    std::pair<double, double> occlusion_end() const;
};

struct PathSegment {
    double theta = 0.0;
    double speed = 250.0;
    int frames = 0;
    std::optional<double> contrast;  // overrides the stimulus contrast
};

/// Consecutive straight segments, each starting where the previous ended.
struct SegmentedPath {
    double x0 = 0.0;
    double y0 = 0.0;
    std::vector<PathSegment> segments;
};

using Path = std::variant<LinearPath, CircularPath, SegmentedPath>;

/// Additional constant-luminance rectangle moving along its own path.
struct SceneObject {
    double width = 5.0;
    double height = 5.0;
    double luminance = 0.0;
    Path path;
};

enum class Polarity { Auto, Dark, Bright };

struct StimulusSpec {
    int width = 500;
    int height = 250;
    double fs = 1000.0;
    int frames = 500;
    Background background;
    double target_width = 5.0;
    double target_height = 5.0;
    std::optional<double> target_luminance;  // used when contrast is unset
    std::optional<double> contrast = 1.0;    // requested Weber contrast
    Polarity polarity = Polarity::Auto;
    Path path = LinearPath{};
    std::vector<SceneObject> objects;
    bool check_bounds = true;  // target must stay inside the frame
};

struct GroundTruth {
    int frame = 0;
    double x = 0.0;
    double y = 0.0;
    bool visible = true;
    double theta = 0.0;
};

/// Renders frames one at a time. Target luminance is solved on the first
/// frame of each contrast segment so that the measured Weber contrast equals
/// the request.
class StimulusRenderer {
public:
    explicit StimulusRenderer(StimulusSpec spec);

    int frame_count() const { return spec_.frames; }
    const StimulusSpec& spec() const { return spec_; }
    Frame frame(int k) const;
    GroundTruth truth(int k) const;
    /// Luminance used for the target at frame k.
    double target_luminance(int k) const;
    /// First frame of every path segment (0 for single-segment paths).
    std::vector<int> segment_starts() const;

private:
    StimulusSpec spec_;
    std::vector<int> seg_start_;
    std::vector<double> seg_luminance_;

    std::size_t segment_of(int k) const;
    void draw(Frame& f, int k, double luminance, bool include_target) const;
    double solve_luminance(int k, double contrast) const;
};

struct RenderedStimulus {
    std::vector<Frame> frames;
    std::vector<GroundTruth> truth;
};

RenderedStimulus render(const StimulusSpec& spec);

/// Target box used for contrast measurement: the pixels fully covered by the
/// target rectangle, or the pixel holding its centre when none is.
Area target_box(double cx, double cy, double w, double h);

struct PrimerProbeSpec {
    int width = 500;
    int height = 250;
    double fs = 1000.0;
    double background = 255.0;
    double target_width = 5.0;
    double target_height = 5.0;
    double x0 = 100.0;
    double y0 = 125.0;
    double primer_theta = 0.0;
    double speed = 250.0;
    int primer_frames = 300;
    int probe_frames = 150;
    double offset = 0.0;  // probe direction = primer direction + offset
    double primer_contrast = 1.0;
    double probe_contrast = 0.25;
};

struct PrimerProbeStimulus {
    StimulusSpec spec;
    int boundary_frame = 0;  // first probe frame
};

/// Continuous primer then probe sequence. Throws std::invalid_argument if a
/// path leaves the frame.
PrimerProbeStimulus primer_probe(const PrimerProbeSpec& p);

void write_ground_truth_header(std::ostream& os);
void write_ground_truth_row(std::ostream& os, const GroundTruth& g);

}  // namespace apgstmd
