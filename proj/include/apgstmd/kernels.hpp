#pragma once

#include <string>
#include <vector>

namespace apgstmd {

/// Square (2r+1)x(2r+1) kernel, row-major, origin at the centre.
struct Kernel2D {
    int radius = 0;
    std::vector<double> data;

    int side() const { return 2 * radius + 1; }
    double at(int dx, int dy) const {
        return data[static_cast<std::size_t>(dy + radius) * side() + (dx + radius)];
    }
    double sum() const;
    std::string to_csv() const;
};

/// Causal kernel sampled at t = k*dt, k = 0..length-1.
struct Kernel1D {
    double dt = 1.0;
    std::vector<double> data;

    int length() const { return static_cast<int>(data.size()); }
    double sum() const;
    std::string to_csv() const;
};

/// Weights over the circular preferred-direction set, indexed by direction
/// offset 0..n-1 (offset k and n-k are the same angular distance).
struct DirectionalKernel {
    std::vector<double> values;

    double at_offset(int k) const;
    std::string to_csv() const;
};

/// Radius ceil(truncation * sigma).
int truncation_radius(double sigma, double truncation = 3.0);

Kernel2D gaussian2d(double sigma, int radius, bool normalize = true);

/// Oriented centre-surround kernel. With `zero_mean` the truncated grid is
/// shifted by its mean so that it has no DC response.
Kernel2D attention_kernel(double scale, double theta, int radius, bool zero_mean = true);

/// Gamma delay kernel (n t)^n exp(-n t / tau) / ((n-1)! tau^(n+1)), samples
/// multiplied by dt.
Kernel1D gamma_kernel(int n, double tau, int length, double dt, bool normalize = true);

/// Smallest length covering at least `truncation`*tau and leaving at most
/// `tail_mass` of the continuous kernel beyond it.
int gamma_kernel_length(int n, double tau, double dt, double truncation = 3.0,
                        double tail_mass = 1e-3);

/// Difference of two unit-sum Gamma kernels on a common support.
Kernel1D bandpass_kernel(int n1, double tau1, int n2, double tau2, int length, double dt);

/// A*[g]^+ + B*[g]^- with g = G_s2 - e*G_s3 - rho.
Kernel2D inhibition_spatial(double A, double B, double e, double rho, double sigma2,
                            double sigma3, int radius);

/// G_s4 - G_s5 of the direction-index offset, wrapped to [-n/2, n/2).
DirectionalKernel inhibition_directional(double sigma4, double sigma5, int directions = 8);

/// Ring-shaped prediction kernel of radius v_opt*dt, concentrated towards
/// theta, normalised to unit sum. v_opt in px/s, dt in ms.
Kernel2D prediction_kernel(double theta, double v_opt, double dt_ms, double zeta, double eta,
                           int radius);

/// Smallest integer radius >= v_opt*dt + 3*zeta.
int prediction_kernel_radius(double v_opt, double dt_ms, double zeta);

}  // namespace apgstmd
