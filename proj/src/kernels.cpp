#include "apgstmd/kernels.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace apgstmd {

namespace {

constexpr double kPi = std::numbers::pi;

std::string grid_csv(const std::vector<double>& data, int cols) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
        os << data[i];
        os << (((i + 1) % static_cast<std::size_t>(cols)) == 0 ? '\n' : ',');
    }
    return os.str();
}

// Survival function of the continuous Gamma kernel: mass beyond t.
double gamma_tail(int n, double tau, double t) {
    const double x = n * t / tau;
    double term = 1.0;
    double acc = 1.0;
    for (int k = 1; k <= n; ++k) {
        term *= x / k;
        acc += term;
    }
    return std::exp(-x) * acc;
}

}  // namespace

double Kernel2D::sum() const { return std::accumulate(data.begin(), data.end(), 0.0); }
std::string Kernel2D::to_csv() const { return grid_csv(data, side()); }

double Kernel1D::sum() const { return std::accumulate(data.begin(), data.end(), 0.0); }
std::string Kernel1D::to_csv() const { return grid_csv(data, length()); }

double DirectionalKernel::at_offset(int k) const {
    const int n = static_cast<int>(values.size());
    return values[static_cast<std::size_t>(((k % n) + n) % n)];
}
std::string DirectionalKernel::to_csv() const {
    return grid_csv(values, static_cast<int>(values.size()));
}

int truncation_radius(double sigma, double truncation) {
    return static_cast<int>(std::ceil(truncation * sigma - 1e-12));
}

Kernel2D gaussian2d(double sigma, int radius, bool normalize) {
    if (!(sigma > 0)) throw std::invalid_argument("gaussian2d: sigma must be > 0");
    if (radius < 0) throw std::invalid_argument("gaussian2d: radius must be >= 0");
    Kernel2D k{radius, {}};
    k.data.resize(static_cast<std::size_t>(k.side()) * k.side());
    const double norm = 1.0 / (2.0 * kPi * sigma * sigma);
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            k.data[static_cast<std::size_t>(dy + radius) * k.side() + dx + radius] =
                norm * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    if (normalize) {
        const double s = k.sum();
        for (double& v : k.data) v /= s;
    }
    return k;
}

Kernel2D attention_kernel(double scale, double theta, int radius, bool zero_mean) {
    if (!(scale > 0)) throw std::invalid_argument("attention_kernel: scale must be > 0");
    if (radius < 0) throw std::invalid_argument("attention_kernel: radius must be >= 0");
    Kernel2D k{radius, {}};
    k.data.resize(static_cast<std::size_t>(k.side()) * k.side());
    const double s2 = scale * scale;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            const double u = dx * c + dy * s;
            k.data[static_cast<std::size_t>(dy + radius) * k.side() + dx + radius] =
                2.0 * (s2 - u * u) / (kPi * s2 * s2) * std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
        }
    }
    if (zero_mean) {
        const double mean = k.sum() / static_cast<double>(k.data.size());
        for (double& v : k.data) v -= mean;
    }
    return k;
}

Kernel1D gamma_kernel(int n, double tau, int length, double dt, bool normalize) {
    if (n < 1) throw std::invalid_argument("gamma_kernel: order n must be >= 1");
    if (!(tau > 0)) throw std::invalid_argument("gamma_kernel: tau must be > 0");
    if (!(dt > 0)) throw std::invalid_argument("gamma_kernel: dt must be > 0");
    if (length < 1) throw std::invalid_argument("gamma_kernel: length must be >= 1");
    Kernel1D k{dt, std::vector<double>(static_cast<std::size_t>(length))};
    // log form keeps (n t)^n / (n-1)! finite for large orders
    const double log_norm = -std::lgamma(static_cast<double>(n)) - (n + 1) * std::log(tau);
    for (int i = 0; i < length; ++i) {
        const double t = i * dt;
        if (t == 0.0) {
            k.data[i] = 0.0;
            continue;
        }
        k.data[i] = std::exp(n * std::log(n * t) - n * t / tau + log_norm) * dt;
    }
    if (normalize) {
        const double s = k.sum();
        if (s > 0)
            for (double& v : k.data) v /= s;
    }
    return k;
}

int gamma_kernel_length(int n, double tau, double dt, double truncation, double tail_mass) {
    int length = static_cast<int>(std::ceil(truncation * tau / dt - 1e-12)) + 1;
    while (gamma_tail(n, tau, (length - 1) * dt) > tail_mass) ++length;
    return length;
}

Kernel1D bandpass_kernel(int n1, double tau1, int n2, double tau2, int length, double dt) {
    if (!(tau1 < tau2)) throw std::invalid_argument("bandpass_kernel: tau1 must be < tau2");
    Kernel1D fast = gamma_kernel(n1, tau1, length, dt, true);
    Kernel1D slow = gamma_kernel(n2, tau2, length, dt, true);
    Kernel1D h{dt, std::vector<double>(static_cast<std::size_t>(length))};
    for (int i = 0; i < length; ++i) h.data[i] = fast.data[i] - slow.data[i];
    return h;
}

Kernel2D inhibition_spatial(double A, double B, double e, double rho, double sigma2,
                            double sigma3, int radius) {
    if (!(sigma2 > 0) || !(sigma3 > 0))
        throw std::invalid_argument("inhibition_spatial: sigmas must be > 0");
    if (!(sigma2 < sigma3))
        throw std::invalid_argument("inhibition_spatial: sigma2 must be < sigma3");
    Kernel2D k{radius, {}};
    k.data.resize(static_cast<std::size_t>(k.side()) * k.side());
    const Kernel2D g2 = gaussian2d(sigma2, radius, false);
    const Kernel2D g3 = gaussian2d(sigma3, radius, false);
    for (std::size_t i = 0; i < k.data.size(); ++i) {
        const double g = g2.data[i] - e * g3.data[i] - rho;
        k.data[i] = g > 0 ? A * g : B * g;
    }
    return k;
}

DirectionalKernel inhibition_directional(double sigma4, double sigma5, int directions) {
    if (!(sigma4 > 0) || !(sigma5 > 0))
        throw std::invalid_argument("inhibition_directional: sigmas must be > 0");
    if (!(sigma4 < sigma5))
        throw std::invalid_argument("inhibition_directional: sigma4 must be < sigma5");
    auto g1d = [](double x, double s) {
        return std::exp(-x * x / (2 * s * s)) / (std::sqrt(2 * kPi) * s);
    };
    DirectionalKernel k;
    k.values.resize(static_cast<std::size_t>(directions));
    for (int i = 0; i < directions; ++i) {
        int off = i;
        if (2 * off >= directions) off -= directions;  // wrap to [-n/2, n/2)
        k.values[i] = g1d(off, sigma4) - g1d(off, sigma5);
    }
    return k;
}

int prediction_kernel_radius(double v_opt, double dt_ms, double zeta) {
    return static_cast<int>(std::ceil(v_opt * dt_ms / 1000.0 + 3.0 * zeta - 1e-12));
}

Kernel2D prediction_kernel(double theta, double v_opt, double dt_ms, double zeta, double eta,
                           int radius) {
    if (!(zeta > 0)) throw std::invalid_argument("prediction_kernel: zeta must be > 0");
    const double ring = v_opt * dt_ms / 1000.0;
    if (ring > radius)
        throw std::invalid_argument("prediction_kernel: ring radius v_opt*dt exceeds kernel radius");
    Kernel2D k{radius, {}};
    k.data.resize(static_cast<std::size_t>(k.side()) * k.side());
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            double value;
            if (dx == 0 && dy == 0) {
                // direction undefined at the origin: use the circular mean of exp(eta cos)
                value = std::exp(-ring * ring / (2 * zeta * zeta)) * std::cyl_bessel_i(0.0, eta);
            } else {
                double phi = std::atan2(static_cast<double>(dy), static_cast<double>(dx));
                if (phi < 0) phi += 2 * kPi;
                const double ex = dx - ring * std::cos(phi);
                const double ey = dy - ring * std::sin(phi);
                value = std::exp(-ex * ex / (2 * zeta * zeta)) * std::exp(-ey * ey / (2 * zeta * zeta)) *
                        std::exp(eta * std::cos(phi - theta));
            }
            k.data[static_cast<std::size_t>(dy + radius) * k.side() + dx + radius] = value;
        }
    }
    const double s = k.sum();
    for (double& v : k.data) v /= s;
    return k;
}

}  // namespace apgstmd
