#include "apgstmd/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "apgstmd/image_io.hpp"

namespace apgstmd {

Frame::Frame(int w, int h, double t, double fill)
    : width(w), height(h), t_ms(t), data(static_cast<std::size_t>(w) * h, fill) {}

double Frame::clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y);
}

DirectionalField::DirectionalField(int w, int h, std::vector<double> dirs, double fill)
    : width(w), height(h), directions(std::move(dirs)),
      data(static_cast<std::size_t>(w) * h * directions.size(), fill) {}

double DirectionalField::max_value() const {
    if (data.empty()) return 0.0;
    return *std::max_element(data.begin(), data.end());
}

PredictionMap::PredictionMap(int w, int h, double t)
    : width(w), height(h), t_ms(t), data(static_cast<std::size_t>(w) * h, 0.0) {}

double PredictionMap::max_value() const {
    if (data.empty()) return 0.0;
    return *std::max_element(data.begin(), data.end());
}

std::vector<double> preferred_directions(int count) {
    std::vector<double> dirs(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) dirs[k] = 2.0 * std::numbers::pi * k / count;
    return dirs;
}

ModelConfig::ModelConfig() {
    attention_orientations = {0.0, std::numbers::pi / 4, std::numbers::pi / 2,
                              3 * std::numbers::pi / 4};
}

int ModelConfig::horizon_frames() const {
    return std::max(1, static_cast<int>(std::lround(delta_t / dt_ms())));
}

void ModelConfig::validate() const {
    auto require = [](bool ok, const char* field, const char* what) {
        if (!ok) throw ConfigError(field, what);
    };
    require(sigma1 > 0, "sigma1", "must be > 0");
    require(!attention_scales.empty(), "attention_scales", "must not be empty");
    for (double s : attention_scales) require(s > 0, "attention_scales", "scales must be > 0");
    require(!attention_orientations.empty(), "attention_orientations", "must not be empty");
    require(alpha >= 0, "alpha", "must be >= 0");
    require(map_threshold_fraction >= 0 && map_threshold_fraction <= 1,
            "map_threshold_fraction", "must lie in [0,1]");
    require(area_margin >= 0, "area_margin", "must be >= 0");
    require(n1 >= 1, "n1", "must be >= 1");
    require(n2 >= 1, "n2", "must be >= 1");
    require(n3 >= 1, "n3", "must be >= 1");
    require(n4 >= 1, "n4", "must be >= 1");
    require(n5 >= 1, "n5", "must be >= 1");
    require(tau1 > 0, "tau1", "must be > 0");
    require(tau2 > 0, "tau2", "must be > 0");
    require(tau1 < tau2, "tau1", "must be < tau2");
    require(tau3 > 0, "tau3", "must be > 0");
    require(tau4 > 0, "tau4", "must be > 0");
    require(tau5 > 0, "tau5", "must be > 0");
    require(gamma >= 0, "gamma", "must be >= 0");
    require(sigma2 > 0, "sigma2", "must be > 0");
    require(sigma3 > sigma2, "sigma3", "must be > sigma2");
    require(sigma4 > 0, "sigma4", "must be > 0");
    require(sigma5 > sigma4, "sigma5", "must be > sigma4");
    require(directions >= 1, "directions", "must be >= 1");
    require(zeta > 0, "zeta", "must be > 0");
    require(eta >= 0, "eta", "must be >= 0");
    require(kappa >= 0, "kappa", "must be >= 0");
    require(v_opt >= 0, "v_opt", "must be >= 0");
    require(delta_t > 0, "delta_t", "must be > 0");
    require(mu >= 0 && mu <= 1, "mu", "must lie in [0,1]");
    require(beta >= 0, "beta", "must be >= 0");
    require(prediction_gate_radius >= 0, "prediction_gate_radius", "must be >= 0");
    require(delta_fraction >= 0, "delta_fraction", "must be >= 0");
    require(!delta_absolute || *delta_absolute >= 0, "delta_absolute", "must be >= 0");
    require(nms_radius >= 0, "nms_radius", "must be >= 0");
    require(trace_window >= 1, "trace_window", "must be >= 1");
    require(trace_std_threshold >= 0, "trace_std_threshold", "must be >= 0");
    require(trace_smoothing >= 1 && trace_smoothing <= trace_window, "trace_smoothing",
            "must lie in [1, trace_window]");
    require(trace_sample_radius >= 0, "trace_sample_radius", "must be >= 0");
    require(trace_gate >= 0, "trace_gate", "must be >= 0");
    require(trace_max_gap >= 1, "trace_max_gap", "must be >= 1");
    require(frame_rate > 0, "frame_rate", "must be > 0");
    require(spatial_truncation > 0, "spatial_truncation", "must be > 0");
    require(temporal_truncation > 0, "temporal_truncation", "must be > 0");
    require(gamma_tail_mass > 0 && gamma_tail_mass < 1, "gamma_tail_mass", "must lie in (0,1)");
}

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// Accepts plain numbers and the forms `pi`, `3pi/4`, `pi/2`, `-pi/4`.
std::optional<double> parse_real(std::string_view text) {
    std::string s = trim(text);
    if (s.empty()) return std::nullopt;
    auto pi_pos = s.find("pi");
    if (pi_pos == std::string::npos) {
        double v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    }
    double coef = 1.0;
    std::string head = trim(s.substr(0, pi_pos));
    if (head == "-") {
        coef = -1.0;
    } else if (!head.empty() && head != "+") {
        if (head.back() == '*') head.pop_back();
        auto c = parse_real(head);
        if (!c) return std::nullopt;
        coef = *c;
    }
    double denom = 1.0;
    std::string tail = trim(s.substr(pi_pos + 2));
    if (!tail.empty()) {
        if (tail.front() != '/') return std::nullopt;
        auto d = parse_real(tail.substr(1));
        if (!d || *d == 0.0) return std::nullopt;
        denom = *d;
    }
    return coef * std::numbers::pi / denom;
}

std::string format_real(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

struct Field {
    std::function<void(ModelConfig&, const std::string&)> set;
    std::function<std::string(const ModelConfig&)> get;
};

Field real_field(double ModelConfig::*m) {
    return {[m](ModelConfig& c, const std::string& v) {
                auto r = parse_real(v);
                if (!r) throw std::invalid_argument("not a number: '" + v + "'");
                c.*m = *r;
            },
            [m](const ModelConfig& c) { return format_real(c.*m); }};
}

Field int_field(int ModelConfig::*m) {
    return {[m](ModelConfig& c, const std::string& v) {
                auto r = parse_real(v);
                if (!r || *r != std::floor(*r) || std::abs(*r) > 1e9)
                    throw std::invalid_argument("not an integer: '" + v + "'");
                c.*m = static_cast<int>(*r);
            },
            [m](const ModelConfig& c) { return std::to_string(c.*m); }};
}

Field bool_field(bool ModelConfig::*m) {
    return {[m](ModelConfig& c, const std::string& v) {
                std::string s = v;
                std::transform(s.begin(), s.end(), s.begin(),
                               [](unsigned char ch) { return std::tolower(ch); });
                if (s == "true" || s == "1" || s == "on" || s == "yes") c.*m = true;
                else if (s == "false" || s == "0" || s == "off" || s == "no") c.*m = false;
                else throw std::invalid_argument("not a boolean: '" + v + "'");
            },
            [m](const ModelConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

Field list_field(std::vector<double> ModelConfig::*m) {
    return {[m](ModelConfig& c, const std::string& v) {
                std::vector<double> out;
                std::stringstream ss(v);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (trim(item).empty()) continue;
                    auto r = parse_real(item);
                    if (!r) throw std::invalid_argument("not a number: '" + item + "'");
                    out.push_back(*r);
                }
                c.*m = std::move(out);
            },
            [m](const ModelConfig& c) {
                std::string s;
                for (std::size_t i = 0; i < (c.*m).size(); ++i) {
                    if (i) s += ",";
                    s += format_real((c.*m)[i]);
                }
                return s;
            }};
}

const std::vector<std::pair<std::string, Field>>& field_table() {
    static const std::vector<std::pair<std::string, Field>> table = [] {
        std::vector<std::pair<std::string, Field>> t;
        t.emplace_back("sigma1", real_field(&ModelConfig::sigma1));
        t.emplace_back("attention_scales", list_field(&ModelConfig::attention_scales));
        t.emplace_back("attention_orientations", list_field(&ModelConfig::attention_orientations));
        t.emplace_back("alpha", real_field(&ModelConfig::alpha));
        t.emplace_back("map_threshold_fraction", real_field(&ModelConfig::map_threshold_fraction));
        t.emplace_back("area_margin", int_field(&ModelConfig::area_margin));
        t.emplace_back("n1", int_field(&ModelConfig::n1));
        t.emplace_back("tau1", real_field(&ModelConfig::tau1));
        t.emplace_back("n2", int_field(&ModelConfig::n2));
        t.emplace_back("tau2", real_field(&ModelConfig::tau2));
        t.emplace_back("gamma", real_field(&ModelConfig::gamma));
        t.emplace_back("n3", int_field(&ModelConfig::n3));
        t.emplace_back("tau3", real_field(&ModelConfig::tau3));
        t.emplace_back("n4", int_field(&ModelConfig::n4));
        t.emplace_back("tau4", real_field(&ModelConfig::tau4));
        t.emplace_back("n5", int_field(&ModelConfig::n5));
        t.emplace_back("tau5", real_field(&ModelConfig::tau5));
        t.emplace_back("bilinear_offsets", bool_field(&ModelConfig::bilinear_offsets));
        t.emplace_back("A", real_field(&ModelConfig::A));
        t.emplace_back("B", real_field(&ModelConfig::B));
        t.emplace_back("e", real_field(&ModelConfig::e));
        t.emplace_back("rho", real_field(&ModelConfig::rho));
        t.emplace_back("sigma2", real_field(&ModelConfig::sigma2));
        t.emplace_back("sigma3", real_field(&ModelConfig::sigma3));
        t.emplace_back("sigma4", real_field(&ModelConfig::sigma4));
        t.emplace_back("sigma5", real_field(&ModelConfig::sigma5));
        t.emplace_back("directions", int_field(&ModelConfig::directions));
        t.emplace_back("staged_inhibition", bool_field(&ModelConfig::staged_inhibition));
        t.emplace_back("zeta", real_field(&ModelConfig::zeta));
        t.emplace_back("eta", real_field(&ModelConfig::eta));
        t.emplace_back("kappa", real_field(&ModelConfig::kappa));
        t.emplace_back("v_opt", real_field(&ModelConfig::v_opt));
        t.emplace_back("delta_t", real_field(&ModelConfig::delta_t));
        t.emplace_back("mu", real_field(&ModelConfig::mu));
        t.emplace_back("beta", real_field(&ModelConfig::beta));
        t.emplace_back("prediction_source",
                       Field{[](ModelConfig& c, const std::string& v) {
                                 if (v == "detections") c.prediction_source = PredictionSource::Detections;
                                 else if (v == "raw") c.prediction_source = PredictionSource::Raw;
                                 else throw std::invalid_argument("expected 'detections' or 'raw'");
                             },
                             [](const ModelConfig& c) {
                                 return std::string(c.prediction_source == PredictionSource::Raw
                                                        ? "raw"
                                                        : "detections");
                             }});
        t.emplace_back("prediction_gate_radius", int_field(&ModelConfig::prediction_gate_radius));
        t.emplace_back("delta_fraction", real_field(&ModelConfig::delta_fraction));
        t.emplace_back("delta_absolute",
                       Field{[](ModelConfig& c, const std::string& v) {
                                 if (v == "none" || v.empty()) {
                                     c.delta_absolute.reset();
                                     return;
                                 }
                                 auto r = parse_real(v);
                                 if (!r) throw std::invalid_argument("not a number: '" + v + "'");
                                 c.delta_absolute = *r;
                             },
                             [](const ModelConfig& c) {
                                 return c.delta_absolute ? format_real(*c.delta_absolute)
                                                         : std::string("none");
                             }});
        t.emplace_back("nms_radius", int_field(&ModelConfig::nms_radius));
        t.emplace_back("facilitated_threshold", bool_field(&ModelConfig::facilitated_threshold));
        t.emplace_back("trace_filter", bool_field(&ModelConfig::trace_filter));
        t.emplace_back("trace_window", int_field(&ModelConfig::trace_window));
        t.emplace_back("trace_std_threshold", real_field(&ModelConfig::trace_std_threshold));
        t.emplace_back("trace_smoothing", int_field(&ModelConfig::trace_smoothing));
        t.emplace_back("trace_sample_radius", int_field(&ModelConfig::trace_sample_radius));
        t.emplace_back("trace_gate", real_field(&ModelConfig::trace_gate));
        t.emplace_back("trace_max_gap", int_field(&ModelConfig::trace_max_gap));
        t.emplace_back("frame_rate", real_field(&ModelConfig::frame_rate));
        t.emplace_back("spatial_truncation", real_field(&ModelConfig::spatial_truncation));
        t.emplace_back("temporal_truncation", real_field(&ModelConfig::temporal_truncation));
        t.emplace_back("gamma_tail_mass", real_field(&ModelConfig::gamma_tail_mass));
        t.emplace_back("attention", bool_field(&ModelConfig::attention));
        t.emplace_back("prediction", bool_field(&ModelConfig::prediction));
        return t;
    }();
    return table;
}

}  // namespace

ModelConfig parse_config(const std::string& text) {
    ModelConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string content = trim(line);
        if (content.empty()) continue;
        auto eq = content.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no), "expected key=value");
        std::string key = trim(content.substr(0, eq));
        std::string value = trim(content.substr(eq + 1));
        const auto& table = field_table();
        auto it = std::find_if(table.begin(), table.end(),
                               [&](const auto& kv) { return kv.first == key; });
        if (it == table.end()) throw ConfigError(key, "unknown key");
        try {
            it->second.set(config, value);
        } catch (const std::invalid_argument& err) {
            throw ConfigError(key, err.what());
        }
    }
    config.validate();
    return config;
}

ModelConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("path", "cannot open config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string to_config_text(const ModelConfig& config) {
    std::string out;
    for (const auto& [key, field] : field_table()) out += key + "=" + field.get(config) + "\n";
    return out;
}

std::string config_hash(const ModelConfig& config) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : to_config_text(config)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

namespace {

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw IngestError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char ch) { return std::tolower(ch); });
        if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
    }
    if (files.empty()) throw IngestError("no PGM/PNG images in " + dir.string());
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

}  // namespace

SequenceReader::SequenceReader(const std::filesystem::path& dir, double fs_hz)
    : files_(list_images(dir)), fs_hz_(fs_hz) {
    if (!(fs_hz > 0)) throw IngestError("sampling frequency must be > 0");
}

bool SequenceReader::next(Frame& out) {
    if (index_ >= files_.size()) return false;
    const auto& path = files_[index_];
    GrayImage img = read_image(path);
    if (width_ < 0) {
        width_ = img.width;
        height_ = img.height;
    } else if (img.width != width_ || img.height != height_) {
        throw IngestError("dimension mismatch: " + path.filename().string() + " is " +
                          std::to_string(img.width) + "x" + std::to_string(img.height) +
                          ", expected " + std::to_string(width_) + "x" + std::to_string(height_));
    }
    out = frame_from_image(img, static_cast<double>(index_) / fs_hz_ * 1000.0);
    ++index_;
    return true;
}

std::vector<Frame> ingest_sequence(const std::filesystem::path& dir, double fs_hz) {
    SequenceReader reader(dir, fs_hz);
    std::vector<Frame> frames;
    frames.reserve(reader.size());
    Frame f;
    while (reader.next(f)) frames.push_back(std::move(f));
    return frames;
}

}  // namespace apgstmd
