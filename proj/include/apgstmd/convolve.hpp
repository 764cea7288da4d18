#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "apgstmd/kernels.hpp"

namespace apgstmd {

enum class Border { Replicate, Zero };

/// out(x,y) = sum_d k(d) * in((x,y) - d), reading outside the grid according
/// to `border`. Plain direct evaluation over every pixel.
void convolve_direct(const double* in, int width, int height, const Kernel2D& kernel,
                     Border border, double* out);

/// Single output pixel of convolve_direct.
double convolve_at(const double* in, int width, int height, const Kernel2D& kernel,
                   Border border, int x, int y);

/// Separable convolution with a 1-D kernel (indexed -r..r) along x then y.
void convolve_separable(const double* in, int width, int height, const std::vector<double>& taps,
                        Border border, double* out);

/// 2-D convolution that exploits zero input. Outputs outside the kernel-dilated
/// support of the input are exactly zero; inside it the result is evaluated
/// either directly or through an FFT when the support is dense.
class SpatialConvolver {
public:
    SpatialConvolver() = default;
    SpatialConvolver(Kernel2D kernel, Border border);
    ~SpatialConvolver();
    SpatialConvolver(SpatialConvolver&&) noexcept;
    SpatialConvolver& operator=(SpatialConvolver&&) noexcept;

    enum class Method { Auto, Direct, Fft };

    const Kernel2D& kernel() const { return kernel_; }
    void set_method(Method m) { method_ = m; }
    void apply(const double* in, int width, int height, double* out) const;

private:
    struct FftCache;
    Kernel2D kernel_;
    Border border_ = Border::Replicate;
    Method method_ = Method::Auto;
    mutable std::unique_ptr<FftCache> fft_;

    void apply_region(const double* in, int width, int height, double* out) const;
    void apply_fft(const double* in, int width, int height, double* out) const;
};

/// Dilate a binary mask by a square of half-size r (Chebyshev distance).
std::vector<unsigned char> dilate_mask(const std::vector<unsigned char>& mask, int width,
                                       int height, int r);

}  // namespace apgstmd
