#include "apgstmd/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "apgstmd/image_io.hpp"

namespace apgstmd {

std::vector<Kernel2D> prediction_kernel_bank(const ModelConfig& c) {
    const double horizon_ms = c.horizon_frames() * c.dt_ms();
    const int radius = prediction_kernel_radius(c.v_opt, horizon_ms, c.zeta);
    std::vector<Kernel2D> bank;
    for (double theta : preferred_directions(c.directions))
        bank.push_back(prediction_kernel(theta, c.v_opt, horizon_ms, c.zeta, c.eta, radius));
    return bank;
}

PredictiveState::PredictiveState(int width, int height, const ModelConfig& c)
    : PredictiveState(width, height, preferred_directions(c.directions), prediction_kernel_bank(c),
                      c.horizon_frames(), c.dt_ms(), c.mu, c.beta, c.kappa) {}

PredictiveState::PredictiveState(int width, int height, std::vector<double> directions,
                                 std::vector<Kernel2D> kernels, int horizon_frames, double dt_ms,
                                 double mu, double beta, double kappa)
    : width_(width),
      height_(height),
      directions_(std::move(directions)),
      horizon_(horizon_frames),
      dt_ms_(dt_ms),
      mu_(mu),
      beta_(beta),
      kappa_(kappa),
      zero_(width, height, directions_) {
    if (kernels.size() != directions_.size())
        throw std::invalid_argument("PredictiveState: one kernel per direction required");
    if (horizon_ < 1) throw std::invalid_argument("PredictiveState: horizon must be >= 1 frame");
    if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("PredictiveState: mu must be in [0,1]");
    for (Kernel2D& k : kernels) kernels_.emplace_back(std::move(k), Border::Zero);
}

const DirectionalField& PredictiveState::history(int lag) const {
    if (lag < 0 || lag > horizon_) throw std::out_of_range("PredictiveState::history: lag out of range");
    // front() holds F(t-1) between steps, so lag j lives at index j-1
    const std::size_t idx = static_cast<std::size_t>(lag == 0 ? 0 : lag - 1);
    if (idx >= history_.size()) return zero_;
    return history_[idx];
}

DirectionalField PredictiveState::facilitate(const DirectionalField& e) const {
    if (e.width != width_ || e.height != height_ || e.num_directions() != directions_.size())
        throw std::invalid_argument("facilitate: field shape mismatch");
    DirectionalField q = e;
    if (beta_ == 0.0) return q;
    const double horizon_ms = horizon_ * dt_ms_;
    for (int j = 1; j <= horizon_ && j <= static_cast<int>(history_.size()); ++j) {
        const double w = beta_ * std::exp(kappa_ * (j * dt_ms_ - horizon_ms)) * dt_ms_;
        const DirectionalField& f = history_[static_cast<std::size_t>(j - 1)];
        for (std::size_t i = 0; i < q.data.size(); ++i) q.data[i] += w * f.data[i];
    }
    return q;
}

const DirectionalField& PredictiveState::predictive_gain(const DirectionalField& input) {
    if (input.width != width_ || input.height != height_ ||
        input.num_directions() != directions_.size())
        throw std::invalid_argument("predictive_gain: field shape mismatch");
    const DirectionalField* prev =
        static_cast<int>(history_.size()) >= horizon_ ? &history_[static_cast<std::size_t>(horizon_ - 1)]
                                                      : nullptr;
    DirectionalField mixed(width_, height_, directions_);
    for (std::size_t i = 0; i < mixed.data.size(); ++i)
        mixed.data[i] = mu_ * input.data[i] + (prev ? (1.0 - mu_) * prev->data[i] : 0.0);
    DirectionalField f(width_, height_, directions_);
    for (std::size_t d = 0; d < directions_.size(); ++d)
        kernels_[d].apply(mixed.plane(d), width_, height_, f.plane(d));
    double peak = 0.0;
    for (double& v : f.data) {
        if (v < 0.0) v = 0.0;  // round-off from the FFT path
        peak = std::max(peak, v);
    }
    running_max_ = std::max(running_max_, peak);
    if (flush_floor_ > 0.0) {
        const double floor = flush_floor_ * running_max_;
        for (double& v : f.data)
            if (v < floor) v = 0.0;
    }
    history_.push_front(std::move(f));
    while (static_cast<int>(history_.size()) > horizon_ + 1) history_.pop_back();
    return history_.front();
}

PredictionMap prediction_map(const DirectionalField& f) {
    PredictionMap m(f.width, f.height);
    if (f.num_directions() == 0) return m;
    const double step = 2.0 * 3.14159265358979323846 / static_cast<double>(f.num_directions());
    for (std::size_t d = 0; d < f.num_directions(); ++d) {
        const double* p = f.plane(d);
        for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] += step * p[i];
    }
    return m;
}

void Memorizer::memorize(const PredictionMap& map) {
    if (map.width != width_ || map.height != height_)
        throw std::invalid_argument("Memorizer: map shape mismatch");
    latest_ = map;
}

PredictionMap Memorizer::recall() const {
    if (latest_) return *latest_;
    return PredictionMap(width_, height_);
}

DirectionalField gate_to_detections(const DirectionalField& e, const std::vector<Detection>& dets,
                                    int radius) {
    DirectionalField out(e.width, e.height, e.directions);
    for (const Detection& det : dets) {
        const int x0 = std::max(0, det.x - radius);
        const int x1 = std::min(e.width - 1, det.x + radius);
        const int y0 = std::max(0, det.y - radius);
        const int y1 = std::min(e.height - 1, det.y + radius);
        for (std::size_t d = 0; d < e.num_directions(); ++d)
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) out.at(x, y, d) = e.at(x, y, d);
    }
    return out;
}

void write_prediction_map(const std::string& path, const PredictionMap& map) {
    const double peak = write_scaled_pgm16(path, map.width, map.height, map.data);
    std::ofstream side(path + ".max");
    if (!side) throw std::runtime_error("cannot write " + path + ".max");
    side << std::setprecision(17) << "max " << peak << '\n';
}

}  // namespace apgstmd
