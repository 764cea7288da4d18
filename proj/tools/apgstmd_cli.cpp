#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "apgstmd/eval.hpp"
#include "apgstmd/image_io.hpp"
#include "apgstmd/kernels.hpp"
#include "apgstmd/pipeline.hpp"
#include "apgstmd/prediction.hpp"
#include "apgstmd/stimulus.hpp"

namespace fs = std::filesystem;
using namespace apgstmd;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<int> dump_frames;
    bool no_attention = false;
    bool no_prediction = false;
    bool facilitated_threshold = false;
    bool dump_kernels = false;
};

ModelConfig base_config(const GlobalOptions& g) {
    ModelConfig c = g.config_path.empty() ? ModelConfig{} : load_config(g.config_path);
    if (g.no_attention) c.attention = false;
    if (g.no_prediction) c.prediction = false;
    if (g.facilitated_threshold) c.facilitated_threshold = true;
    c.validate();
    return c;
}

std::ofstream open_csv(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << std::setprecision(17);
    return os;
}

std::string frame_name(const std::string& stem, int index, const std::string& ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%06d.%s", stem.c_str(), index, ext.c_str());
    return buf;
}

// Signed grid to 16-bit PGM: 0 maps to mid-grey, +-max to the extremes.
void write_signed_pgm16(const fs::path& path, const Frame& f) {
    double m = 0.0;
    for (double v : f.data) m = std::max(m, std::abs(v));
    GrayImage img;
    img.width = f.width;
    img.height = f.height;
    img.max_value = 65535;
    img.pixels.resize(f.data.size());
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        const double u = m > 0 ? 0.5 + 0.5 * f.data[i] / m : 0.5;
        img.pixels[i] = static_cast<std::uint16_t>(std::lround(u * 65535.0));
    }
    write_pgm(path, img);
    std::ofstream(path.string() + ".max") << std::setprecision(17) << "max_abs " << m << '\n';
}

void dump_kernels(const ModelConfig& c, const fs::path& dir) {
    fs::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& csv) {
        std::ofstream(dir / (name + ".csv")) << csv;
    };
    put("gaussian_sigma1", gaussian2d(c.sigma1, truncation_radius(c.sigma1, c.spatial_truncation)).to_csv());
    const AttentionBank bank =
        make_attention_bank(c.attention_scales, c.attention_orientations, c.spatial_truncation);
    for (std::size_t s = 0; s < bank.scales.size(); ++s)
        for (std::size_t o = 0; o < bank.orientations.size(); ++o)
            put("attention_s" + std::to_string(s) + "_o" + std::to_string(o), bank.kernel(s, o).to_csv());
    const TemporalKernels tk = TemporalKernels::from_config(c);
    put("bandpass", tk.bandpass.to_csv());
    put("gamma_mi1", tk.mi1.to_csv());
    put("gamma_tm1_fast", tk.tm1_fast.to_csv());
    put("gamma_tm1_slow", tk.tm1_slow.to_csv());
    put("inhibition_spatial", inhibition_spatial(c.A, c.B, c.e, c.rho, c.sigma2, c.sigma3,
                                                 truncation_radius(c.sigma3, c.spatial_truncation))
                                  .to_csv());
    std::ostringstream wd;
    wd << std::setprecision(17);
    for (double v : inhibition_directional(c.sigma4, c.sigma5, c.directions).values) wd << v << '\n';
    put("inhibition_directional", wd.str());
    const auto pk = prediction_kernel_bank(c);
    for (std::size_t d = 0; d < pk.size(); ++d) put("prediction_d" + std::to_string(d), pk[d].to_csv());
}

int cmd_run(const GlobalOptions& g, const std::string& input, double fs_hz) {
    ModelConfig c = base_config(g);
    if (fs_hz > 0) c.frame_rate = fs_hz;
    SequenceReader reader(input, c.frame_rate);
    const fs::path out(g.out_dir);
    std::ofstream csv = open_csv(out / "detections.csv");
    csv << metadata_header(c, "sequence=" + fs::path(input).filename().string() +
                                  " frames=" + std::to_string(reader.size()),
                           0);
    write_detections_header(csv);
    const std::set<int> dumps(g.dump_frames.begin(), g.dump_frames.end());
    std::optional<Pipeline> pipeline;
    Frame frame;
    int index = 0;
    std::size_t total = 0;
    while (reader.next(frame)) {
        if (!pipeline) pipeline.emplace(frame.width, frame.height, c);
        const StepResult r = pipeline->step(frame);
        write_detections_rows(csv, r.frame_index, r.detections);
        total += r.detections.size();
        if (dumps.count(index)) {
            const fs::path d = out / "frames";
            fs::create_directories(d);
            write_frame_pgm(d / frame_name("P", index, "pgm"), r.smoothed);
            write_frame_pgm(d / frame_name("Pe", index, "pgm"), r.enhanced);
            Frame a = r.enhanced;
            for (std::size_t i = 0; i < a.data.size(); ++i)
                a.data[i] = c.alpha != 0 ? (r.enhanced.data[i] - r.smoothed.data[i]) / c.alpha : 0.0;
            write_signed_pgm16(d / frame_name("A", index, "pgm"), a);
            write_prediction_map((d / frame_name("M", index, "pgm")).string(), r.map);
        }
        ++index;
    }
    std::cout << "processed " << index << " frames, " << total << " detections -> "
              << (out / "detections.csv").string() << '\n';
    return 0;
}

struct GenOptions {
    int width = 500;
    int height = 250;
    int frames = 500;
    double fs = 1000.0;
    double background = 255.0;
    std::optional<std::uint64_t> texture_seed;
    double texture_smoothing = 3.0;
    double texture_low = 0.0;
    double texture_high = 255.0;
    double pan_vx = 0.0;
    double pan_vy = 0.0;
    double target_width = 5.0;
    double target_height = 5.0;
    std::optional<double> contrast;
    std::optional<double> luminance;
    std::string polarity = "auto";
    std::string path = "linear";
    double x0 = 40.0;
    double y0 = 125.0;
    double theta_deg = 0.0;
    double speed = 250.0;
    double cx = 250.0;
    double cy = 125.0;
    double radius = 50.0;
    double phi0_deg = 90.0;
    double occlusion_start_deg = 0.0;
    double occlusion_deg = 0.0;
};

StimulusSpec build_spec(const GenOptions& o) {
    StimulusSpec s;
    s.width = o.width;
    s.height = o.height;
    s.frames = o.frames;
    s.fs = o.fs;
    s.background.uniform = o.background;
    if (o.texture_seed) {
        s.background.texture = make_noise_texture(o.width, o.height, *o.texture_seed,
                                                  o.texture_smoothing, o.texture_low, o.texture_high);
        s.background.vx = o.pan_vx;
        s.background.vy = o.pan_vy;
    }
    s.target_width = o.target_width;
    s.target_height = o.target_height;
    if (o.luminance) {
        s.contrast.reset();
        s.target_luminance = o.luminance;
    }
    if (o.contrast) s.contrast = o.contrast;
    if (o.polarity == "dark") s.polarity = Polarity::Dark;
    else if (o.polarity == "bright") s.polarity = Polarity::Bright;
    else s.polarity = Polarity::Auto;
    constexpr double deg = std::numbers::pi / 180.0;
    if (o.path == "circular") {
        CircularPath p;
        p.cx = o.cx;
        p.cy = o.cy;
        p.radius = o.radius;
        p.speed = o.speed;
        p.phi0 = o.phi0_deg * deg;
        p.occlusion_start = o.occlusion_start_deg * deg;
        p.occlusion_arc = o.occlusion_deg * deg;
        s.path = p;
    } else {
        s.path = LinearPath{o.x0, o.y0, o.theta_deg * deg, o.speed};
    }
    return s;
}

int cmd_gen(const GlobalOptions& g, const GenOptions& o) {
    const StimulusSpec spec = build_spec(o);
    const StimulusRenderer renderer(spec);
    const fs::path out(g.out_dir);
    fs::create_directories(out / "frames");
    std::ofstream gt = open_csv(out / "ground_truth.csv");
    gt << "# stimulus_hash=" << fnv1a_hex(describe(spec)) << '\n'
       << "# seed=" << o.texture_seed.value_or(0) << '\n';
    write_ground_truth_header(gt);
    for (int k = 0; k < renderer.frame_count(); ++k) {
        write_frame_pgm(out / "frames" / frame_name("frame", k, "pgm"), renderer.frame(k));
        write_ground_truth_row(gt, renderer.truth(k));
    }
    std::ofstream(out / "stimulus.txt") << describe(spec) << '\n';
    std::cout << "rendered " << renderer.frame_count() << " frames -> " << (out / "frames").string()
              << '\n';
    return 0;
}

int cmd_sweep(const GlobalOptions& g, const std::string& parameter, std::vector<double> values,
              bool attention, bool prediction) {
    ModelConfig c = sweep_config(base_config(g));
    c.attention = attention && !g.no_attention;
    c.prediction = prediction && !g.no_prediction;
    const SweepParameter p = parse_sweep_parameter(parameter);
    if (values.empty()) values = default_sweep_values(p);
    const StimulusSpec base = default_sweep_stimulus();
    const auto curve = tuning_sweep(p, values, base, c);
    const fs::path path = fs::path(g.out_dir) / ("sweep_" + to_string(p) + ".csv");
    std::ofstream csv = open_csv(path);
    csv << metadata_header(c, describe(base), 0) << "value,response,normalized\n";
    for (const auto& pt : curve) csv << pt.value << ',' << pt.response << ',' << pt.normalized << '\n';
    const Support s = response_support(curve);
    std::cout << to_string(p) << ": argmax " << s.argmax << ", support [" << s.low << ", " << s.high
              << "] -> " << path.string() << '\n';
    return 0;
}

int cmd_ablate(const GlobalOptions& g, int measure_frames) {
    const ModelConfig c = ablation_config(base_config(g));
    const AblationScene scene = default_ablation_scene();
    const AblationReport r = ablate_attention(scene, c, measure_frames);
    const fs::path out(g.out_dir);
    std::ofstream csv = open_csv(out / "ablation.csv");
    csv << metadata_header(c, describe(scene.spec), 7) << "object,attention_on,attention_off,ratio\n";
    auto row = [&](const char* name, double on, double off) {
        csv << name << ',' << on << ',' << off << ',' << (off > 0 ? on / off : 0.0) << '\n';
    };
    row("mover", r.a_on, r.a_off);
    row("background_locked", r.b_on, r.b_off);
    row("large", r.large_on, r.large_off);
    std::ofstream scan = open_csv(out / "ablation_scanline.csv");
    scan << metadata_header(c, describe(scene.spec), 7) << "x,attention_on,attention_off\n";
    for (std::size_t x = 0; x < r.scan_on.size(); ++x)
        scan << x << ',' << r.scan_on[x] << ',' << r.scan_off[x] << '\n';
    std::cout << "mover on/off " << (r.a_off > 0 ? r.a_on / r.a_off : 0.0) << ", background-locked "
              << r.b_on << " / " << r.b_off << '\n';
    return 0;
}

int cmd_occlusion(const GlobalOptions& g, const std::vector<double>& radii,
                  const std::vector<double>& angles) {
    const ModelConfig c = facilitation_config(base_config(g));
    const auto pts = occlusion_study(radii, angles, c);
    std::ofstream csv = open_csv(fs::path(g.out_dir) / "occlusion.csv");
    csv << metadata_header(c, "occlusion", 0) << "radius,occlusion_deg,q_end,e_end\n";
    for (const auto& p : pts)
        csv << p.radius << ',' << p.occlusion_deg << ',' << p.q_end << ',' << p.e_end << '\n';
    std::cout << pts.size() << " occlusion runs -> " << (fs::path(g.out_dir) / "occlusion.csv").string()
              << '\n';
    return 0;
}

int cmd_primer_probe(const GlobalOptions& g, const std::string& mode, const std::vector<double>& levels,
                     const std::vector<double>& primer_deg) {
    const ModelConfig c = facilitation_config(base_config(g));
    const fs::path out(g.out_dir);
    if (mode == "contrast") {
        const auto res = contrast_facilitation(levels, c);
        std::ofstream csv = open_csv(out / "primer_probe_contrast.csv");
        csv << metadata_header(c, "primer-probe contrast", 0)
            << "primer_contrast,unfacilitated,facilitated\n";
        for (std::size_t i = 0; i < levels.size(); ++i)
            csv << levels[i] << ',' << res[i].unfacilitated << ',' << res[i].facilitated << '\n';
    } else if (mode == "direction") {
        std::ofstream csv = open_csv(out / "primer_probe_direction.csv");
        csv << metadata_header(c, "primer-probe direction", 0)
            << "primer_theta,probe_theta,unfacilitated,facilitated\n";
        for (double d : primer_deg) {
            const DirectionTuning t = direction_facilitation(d * std::numbers::pi / 180.0, c);
            for (std::size_t i = 0; i < t.probe_theta.size(); ++i)
                csv << t.primer_theta << ',' << t.probe_theta[i] << ',' << t.response[i].unfacilitated
                    << ',' << t.response[i].facilitated << '\n';
        }
    } else {
        throw CLI::ValidationError("--mode", "expected 'contrast' or 'direction'");
    }
    std::cout << "primer-probe " << mode << " -> " << out.string() << '\n';
    return 0;
}

int cmd_metrics(const GlobalOptions& g, const std::string& dets_path, const std::string& truth_path,
                double radius, const std::vector<double>& deltas) {
    std::ifstream di(dets_path);
    std::ifstream ti(truth_path);
    if (!di) throw std::runtime_error("cannot read " + dets_path);
    if (!ti) throw std::runtime_error("cannot read " + truth_path);
    const auto roc = detection_metrics(read_detections_csv(di), read_ground_truth_csv(ti), radius, deltas);
    std::ofstream csv = open_csv(fs::path(g.out_dir) / "roc.csv");
    csv << "delta,detection_rate,false_alarms_per_frame\n";
    for (const auto& p : roc)
        csv << p.delta << ',' << p.detection_rate << ',' << p.false_alarms_per_frame << '\n';
    std::cout << roc.size() << " operating points -> " << (fs::path(g.out_dir) / "roc.csv").string()
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attention and prediction guided small target motion detector"};
    GlobalOptions g;
    app.add_option("--config", g.config_path, "key=value model configuration file")
        ->check(CLI::ExistingFile);
    app.add_option("--out-dir", g.out_dir, "Output directory");
    app.add_option("--dump-frames", g.dump_frames, "Frame indices whose P, A, Pe and M are written")
        ->delimiter(',');
    app.add_flag("--no-attention", g.no_attention, "Disable the attention module");
    app.add_flag("--no-prediction", g.no_prediction, "Disable the prediction module");
    app.add_flag("--facilitated-threshold", g.facilitated_threshold,
                 "Threshold the facilitated output Q instead of E");
    app.add_flag("--dump-kernels", g.dump_kernels, "Write every kernel as CSV to <out-dir>/kernels");
    app.require_subcommand(0, 1);

    auto* run = app.add_subcommand("run", "Process a frame sequence into detections.csv");
    std::string input;
    double fs_hz = 0.0;
    run->add_option("input", input, "Directory of PGM/PNG frames")->required()->check(CLI::ExistingDirectory);
    run->add_option("--fs", fs_hz, "Frame rate in Hz (default: config frame_rate)");

    auto* gen = app.add_subcommand("gen", "Render a synthetic stimulus and its ground truth");
    GenOptions go;
    gen->add_option("--width", go.width);
    gen->add_option("--height", go.height);
    gen->add_option("--frames", go.frames);
    gen->add_option("--fs", go.fs);
    gen->add_option("--background", go.background, "Uniform background value");
    gen->add_option("--texture-seed", go.texture_seed, "Noise texture background with this seed");
    gen->add_option("--texture-smoothing", go.texture_smoothing);
    gen->add_option("--texture-low", go.texture_low);
    gen->add_option("--texture-high", go.texture_high);
    gen->add_option("--pan-vx", go.pan_vx, "Background velocity, px/s");
    gen->add_option("--pan-vy", go.pan_vy);
    gen->add_option("--target-width", go.target_width);
    gen->add_option("--target-height", go.target_height);
    gen->add_option("--contrast", go.contrast, "Requested Weber contrast (default 1)");
    gen->add_option("--luminance", go.luminance, "Fixed target luminance instead of a contrast");
    gen->add_option("--polarity", go.polarity)->check(CLI::IsMember({"auto", "dark", "bright"}));
    gen->add_option("--path", go.path)->check(CLI::IsMember({"linear", "circular"}));
    gen->add_option("--x0", go.x0);
    gen->add_option("--y0", go.y0);
    gen->add_option("--theta-deg", go.theta_deg);
    gen->add_option("--speed", go.speed, "px/s");
    gen->add_option("--cx", go.cx);
    gen->add_option("--cy", go.cy);
    gen->add_option("--radius", go.radius);
    gen->add_option("--phi0-deg", go.phi0_deg);
    gen->add_option("--occlusion-start-deg", go.occlusion_start_deg);
    gen->add_option("--occlusion-deg", go.occlusion_deg);

    auto* sweep = app.add_subcommand("sweep", "Tuning curve of the raw STMD");
    std::string parameter = "velocity";
    std::vector<double> values;
    bool sweep_attention = false;
    bool sweep_prediction = false;
    sweep->add_option("parameter", parameter, "velocity | contrast | width | height")
        ->check(CLI::IsMember({"velocity", "contrast", "width", "height"}));
    sweep->add_option("--values", values, "Comma-separated values")->delimiter(',');
    sweep->add_flag("--attention", sweep_attention, "Re-enable attention");
    sweep->add_flag("--prediction", sweep_prediction, "Re-enable prediction");

    auto* ablate = app.add_subcommand("ablate", "Attention on/off on the mixed-object scene");
    int measure_frames = 200;
    ablate->add_option("--measure-frames", measure_frames);

    auto* occl = app.add_subcommand("occlusion", "Facilitation carried across an occluded arc");
    std::vector<double> radii{30, 50, 70};
    std::vector<double> angles{15, 30, 45, 60};
    occl->add_option("--radii", radii)->delimiter(',');
    occl->add_option("--angles", angles, "Occlusion arcs in degrees")->delimiter(',');

    auto* pp = app.add_subcommand("primer-probe", "Primer/probe facilitation experiments");
    std::string mode = "contrast";
    std::vector<double> levels{0.25, 0.5, 0.75, 1.0};
    std::vector<double> primer_deg{0, 90, 180, 270};
    pp->add_option("--mode", mode)->check(CLI::IsMember({"contrast", "direction"}));
    pp->add_option("--levels", levels, "Primer contrasts")->delimiter(',');
    pp->add_option("--primer-deg", primer_deg, "Primer directions in degrees")->delimiter(',');

    auto* metrics = app.add_subcommand("metrics", "Detection rate and false alarms per threshold");
    std::string dets_path;
    std::string truth_path;
    double match_radius = 5.0;
    std::vector<double> deltas;
    metrics->add_option("--detections", dets_path)->required()->check(CLI::ExistingFile);
    metrics->add_option("--truth", truth_path)->required()->check(CLI::ExistingFile);
    metrics->add_option("--radius", match_radius);
    metrics->add_option("--deltas", deltas)->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (g.dump_kernels) {
            dump_kernels(base_config(g), fs::path(g.out_dir) / "kernels");
            std::cout << "kernels -> " << (fs::path(g.out_dir) / "kernels").string() << '\n';
        }
        if (*run) return cmd_run(g, input, fs_hz);
        if (*gen) return cmd_gen(g, go);
        if (*sweep) return cmd_sweep(g, parameter, values, sweep_attention, sweep_prediction);
        if (*ablate) return cmd_ablate(g, measure_frames);
        if (*occl) return cmd_occlusion(g, radii, angles);
        if (*pp) return cmd_primer_probe(g, mode, levels, primer_deg);
        if (*metrics) return cmd_metrics(g, dets_path, truth_path, match_radius, deltas);
        if (!g.dump_kernels) std::cout << app.help();
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}
