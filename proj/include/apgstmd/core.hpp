#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace apgstmd {

/// Raised when a configuration file is malformed or violates an invariant.
/// `field()` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Raised on unreadable or inconsistent image input.
class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Row-major single-channel grid of real luminance values with a timestamp.
struct Frame {
    int width = 0;
    int height = 0;
    double t_ms = 0.0;
    std::vector<double> data;

    Frame() = default;
    Frame(int w, int h, double t = 0.0, double fill = 0.0);

    std::size_t size() const { return data.size(); }
    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    /// Replicate-padded read.
    double clamped(int x, int y) const;
    bool same_shape(const Frame& o) const { return width == o.width && height == o.height; }
};

/// Grid over (x, y, theta). Storage is direction-major: each direction is a
/// contiguous width*height plane.
struct DirectionalField {
    int width = 0;
    int height = 0;
    std::vector<double> directions;
    std::vector<double> data;

    DirectionalField() = default;
    DirectionalField(int w, int h, std::vector<double> dirs, double fill = 0.0);

    std::size_t plane_size() const { return static_cast<std::size_t>(width) * height; }
    std::size_t num_directions() const { return directions.size(); }
    double* plane(std::size_t d) { return data.data() + d * plane_size(); }
    const double* plane(std::size_t d) const { return data.data() + d * plane_size(); }
    double& at(int x, int y, std::size_t d) { return plane(d)[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y, std::size_t d) const { return plane(d)[static_cast<std::size_t>(y) * width + x]; }
    double max_value() const;
};

/// Direction-integrated predictive gain; anticipates target locations.
struct PredictionMap {
    int width = 0;
    int height = 0;
    double t_ms = 0.0;
    std::vector<double> data;

    PredictionMap() = default;
    PredictionMap(int w, int h, double t = 0.0);

    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    double max_value() const;
};

struct Detection {
    int x = 0;
    int y = 0;
    double t_ms = 0.0;
    double theta = 0.0;
    double response = 0.0;
    std::optional<int> trace_id;
    bool confirmed = false;
};

/// The discrete preferred-direction set {k*2pi/n}.
std::vector<double> preferred_directions(int count = 8);

/// Where the prediction module draws its input from.
enum class PredictionSource { Detections, Raw };

/// Every model constant. Defaults reproduce the published parameter table;
/// constants that were never published carry declared defaults.
struct ModelConfig {
    // ommatidia
    double sigma1 = 1.0;
    // attention
    std::vector<double> attention_scales{2.0, 2.5, 3.0, 3.5};
    std::vector<double> attention_orientations;  // filled in constructor
    double alpha = 1.0;
    double map_threshold_fraction = 0.1;
    int area_margin = 15;
    // LMC band-pass
    int n1 = 2;
    double tau1 = 3.0;
    int n2 = 6;
    double tau2 = 9.0;
    // correlation
    double gamma = 3.0;
    int n3 = 3;
    double tau3 = 15.0;
    int n4 = 5;
    double tau4 = 25.0;
    int n5 = 8;
    double tau5 = 40.0;
    bool bilinear_offsets = false;
    // lateral inhibition
    double A = 1.0;
    double B = 3.5;
    double e = 1.2;
    double rho = 0.0;
    double sigma2 = 1.25;
    double sigma3 = 2.5;
    double sigma4 = 1.5;
    double sigma5 = 3.0;
    int directions = 8;
    bool staged_inhibition = true;  // rectify between spatial and directional inhibition
    // prediction
    double zeta = 2.0;
    double eta = 2.5;
    double kappa = 0.02;       // 1/ms
    double v_opt = 250.0;      // px/s
    double delta_t = 20.0;     // prediction horizon, ms
    double mu = 0.5;
    double beta = 1.0;         // facilitation gain, 1/ms
    PredictionSource prediction_source = PredictionSource::Detections;
    int prediction_gate_radius = 5;
    // detection
    double delta_fraction = 0.5;
    std::optional<double> delta_absolute;
    int nms_radius = 5;
    bool facilitated_threshold = false;
    // trace filter
    bool trace_filter = true;
    int trace_window = 20;
    double trace_std_threshold = 0.05;   // relative to the window max sample
    int trace_smoothing = 4;             // moving-average length before the std test
    int trace_sample_radius = 1;         // contrast sample = max over this neighbourhood
    double trace_gate = 5.0;
    int trace_max_gap = 2;
    // discretisation
    double frame_rate = 1000.0;    // Hz
    double spatial_truncation = 3.0;
    double temporal_truncation = 3.0;
    double gamma_tail_mass = 1e-3;
    // stage switches
    bool attention = true;
    bool prediction = true;

    ModelConfig();

    double dt_ms() const { return 1000.0 / frame_rate; }
    /// Prediction horizon in whole frames (at least 1).
    int horizon_frames() const;
    /// Throws ConfigError naming the first offending field.
    void validate() const;
};

/// Parse a flat `key=value` file (`#` comments). Missing keys keep defaults.
ModelConfig load_config(const std::filesystem::path& path);
/// Same as load_config but from in-memory text.
ModelConfig parse_config(const std::string& text);
/// Serialise every key so that parse_config(to_config_text(c)) == c.
std::string to_config_text(const ModelConfig& config);
/// Stable 64-bit FNV-1a hash of to_config_text, for experiment metadata.
std::string config_hash(const ModelConfig& config);

/// Load lexicographically ordered PGM/PNG frames from a directory with
/// timestamps k/fs seconds (in ms).
std::vector<Frame> ingest_sequence(const std::filesystem::path& dir, double fs_hz);

/// Streaming form of ingest_sequence: one file at a time.
class SequenceReader {
public:
    SequenceReader(const std::filesystem::path& dir, double fs_hz);
    bool next(Frame& out);
    std::size_t size() const { return files_.size(); }

private:
    std::vector<std::filesystem::path> files_;
    double fs_hz_;
    std::size_t index_ = 0;
    int width_ = -1;
    int height_ = -1;
};

}  // namespace apgstmd
