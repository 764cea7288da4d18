#include "apgstmd/convolve.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace apgstmd {

namespace {

inline int reflect_index(int i, int n, Border border) {
    if (border == Border::Replicate) return std::clamp(i, 0, n - 1);
    return (i < 0 || i >= n) ? -1 : i;
}

// Interior pixel: the whole kernel footprint lies inside the grid.
inline double convolve_interior(const double* in, int width, const Kernel2D& k, int x, int y) {
    const int r = k.radius;
    const int side = k.side();
    double acc = 0.0;
    for (int ky = 0; ky < side; ++ky) {
        // kernel row dy = ky - r reads input row y - dy
        const double* row = in + static_cast<std::size_t>(y - (ky - r)) * width + x + r;
        const double* kr = k.data.data() + static_cast<std::size_t>(ky) * side;
        for (int kx = 0; kx < side; ++kx) acc += kr[kx] * row[-kx];
    }
    return acc;
}

}  // namespace

double convolve_at(const double* in, int width, int height, const Kernel2D& kernel,
                   Border border, int x, int y) {
    const int r = kernel.radius;
    if (x >= r && x < width - r && y >= r && y < height - r)
        return convolve_interior(in, width, kernel, x, y);
    double acc = 0.0;
    for (int dy = -r; dy <= r; ++dy) {
        const int yy = reflect_index(y - dy, height, border);
        if (yy < 0) continue;
        for (int dx = -r; dx <= r; ++dx) {
            const int xx = reflect_index(x - dx, width, border);
            if (xx < 0) continue;
            acc += kernel.at(dx, dy) * in[static_cast<std::size_t>(yy) * width + xx];
        }
    }
    return acc;
}

void convolve_direct(const double* in, int width, int height, const Kernel2D& kernel,
                     Border border, double* out) {
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            out[static_cast<std::size_t>(y) * width + x] = convolve_at(in, width, height, kernel, border, x, y);
}

void convolve_separable(const double* in, int width, int height, const std::vector<double>& taps,
                        Border border, double* out) {
    const int r = static_cast<int>(taps.size() / 2);
    std::vector<double> tmp(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        const double* row = in + static_cast<std::size_t>(y) * width;
        double* trow = tmp.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int d = -r; d <= r; ++d) {
                const int xx = reflect_index(x - d, width, border);
                if (xx >= 0) acc += taps[d + r] * row[xx];
            }
            trow[x] = acc;
        }
    }
    for (int y = 0; y < height; ++y) {
        double* orow = out + static_cast<std::size_t>(y) * width;
        std::fill(orow, orow + width, 0.0);
        for (int d = -r; d <= r; ++d) {
            const int yy = reflect_index(y - d, height, border);
            if (yy < 0) continue;
            const double w = taps[d + r];
            const double* trow = tmp.data() + static_cast<std::size_t>(yy) * width;
            for (int x = 0; x < width; ++x) orow[x] += w * trow[x];
        }
    }
}

std::vector<unsigned char> dilate_mask(const std::vector<unsigned char>& mask, int width,
                                       int height, int r) {
    // row pass with a running count of set pixels in the window, then column pass
    std::vector<unsigned char> rows(mask.size(), 0);
    for (int y = 0; y < height; ++y) {
        const unsigned char* m = mask.data() + static_cast<std::size_t>(y) * width;
        unsigned char* o = rows.data() + static_cast<std::size_t>(y) * width;
        int count = 0;
        for (int x = 0; x <= std::min(r, width - 1); ++x) count += m[x];
        for (int x = 0; x < width; ++x) {
            o[x] = count > 0;
            const int add = x + r + 1;
            const int drop = x - r;
            if (add < width) count += m[add];
            if (drop >= 0) count -= m[drop];
        }
    }
    std::vector<unsigned char> out(mask.size(), 0);
    std::vector<int> counts(static_cast<std::size_t>(width), 0);
    for (int y = 0; y <= std::min(r, height - 1); ++y)
        for (int x = 0; x < width; ++x) counts[x] += rows[static_cast<std::size_t>(y) * width + x];
    for (int y = 0; y < height; ++y) {
        unsigned char* o = out.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) o[x] = counts[x] > 0;
        const int add = y + r + 1;
        const int drop = y - r;
        if (add < height)
            for (int x = 0; x < width; ++x) counts[x] += rows[static_cast<std::size_t>(add) * width + x];
        if (drop >= 0)
            for (int x = 0; x < width; ++x) counts[x] -= rows[static_cast<std::size_t>(drop) * width + x];
    }
    return out;
}

struct SpatialConvolver::FftCache {
    int width = 0;
    int height = 0;
    int pw = 0;  // padded width
    int ph = 0;  // padded height
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_complex* kernel_spec = nullptr;
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;

    FftCache() = default;
    FftCache(const FftCache&) = delete;
    FftCache& operator=(const FftCache&) = delete;
    ~FftCache() {
        if (forward) fftw_destroy_plan(forward);
        if (inverse) fftw_destroy_plan(inverse);
        fftw_free(real);
        fftw_free(spec);
        fftw_free(kernel_spec);
    }
    std::size_t spec_size() const { return static_cast<std::size_t>(ph) * (pw / 2 + 1); }
};

SpatialConvolver::SpatialConvolver(Kernel2D kernel, Border border)
    : kernel_(std::move(kernel)), border_(border) {}
SpatialConvolver::~SpatialConvolver() = default;
SpatialConvolver::SpatialConvolver(SpatialConvolver&&) noexcept = default;
SpatialConvolver& SpatialConvolver::operator=(SpatialConvolver&&) noexcept = default;

void SpatialConvolver::apply(const double* in, int width, int height, double* out) const {
    const int r = kernel_.radius;
    // bounding box of the nonzero input
    int bx0 = width, by0 = height, bx1 = -1, by1 = -1;
    for (int y = 0; y < height; ++y) {
        const double* row = in + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            if (row[x] != 0.0) {
                bx0 = std::min(bx0, x);
                bx1 = std::max(bx1, x);
                by0 = std::min(by0, y);
                by1 = std::max(by1, y);
            }
        }
    }
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (bx1 < 0) {
        std::fill(out, out + n, 0.0);
        return;
    }
    // Outputs vanish beyond r of the box. On a crop of box+r the crop edges
    // that are not frame edges hold zeros, so replicate reads there are exact.
    const int cx0 = std::max(0, bx0 - r), cy0 = std::max(0, by0 - r);
    const int cx1 = std::min(width - 1, bx1 + r), cy1 = std::min(height - 1, by1 + r);
    const int cw = cx1 - cx0 + 1, ch = cy1 - cy0 + 1;
    if (cw == width && ch == height) {
        apply_region(in, width, height, out);
        return;
    }
    std::vector<double> crop(static_cast<std::size_t>(cw) * ch);
    for (int y = 0; y < ch; ++y)
        std::copy_n(in + static_cast<std::size_t>(y + cy0) * width + cx0, cw,
                    crop.data() + static_cast<std::size_t>(y) * cw);
    std::vector<double> result(crop.size());
    apply_region(crop.data(), cw, ch, result.data());
    std::fill(out, out + n, 0.0);
    for (int y = 0; y < ch; ++y)
        std::copy_n(result.data() + static_cast<std::size_t>(y) * cw, cw,
                    out + static_cast<std::size_t>(y + cy0) * width + cx0);
}

void SpatialConvolver::apply_region(const double* in, int width, int height, double* out) const {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    const int r = kernel_.radius;
    std::vector<unsigned char> mask(n);
    for (std::size_t i = 0; i < n; ++i) mask[i] = in[i] != 0.0;
    std::vector<unsigned char> support = dilate_mask(mask, width, height, r);
    std::size_t active = 0;
    for (auto s : support) active += s;

    bool use_fft = method_ == Method::Fft;
    if (method_ == Method::Auto) {
        const double padded = static_cast<double>(width + 2 * r) * (height + 2 * r);
        const double fft_cost = 6.0 * padded * std::log2(padded);
        const double direct_cost = static_cast<double>(active) * kernel_.data.size();
        use_fft = direct_cost > fft_cost;
    }
    if (use_fft) {
        apply_fft(in, width, height, out);
        for (std::size_t i = 0; i < n; ++i)
            if (!support[i]) out[i] = 0.0;
        return;
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            out[i] = support[i] ? convolve_at(in, width, height, kernel_, border_, x, y) : 0.0;
        }
    }
}

void SpatialConvolver::apply_fft(const double* in, int width, int height, double* out) const {
    const int r = kernel_.radius;
    if (!fft_ || fft_->width != width || fft_->height != height) {
        auto cache = std::make_unique<FftCache>();
        cache->width = width;
        cache->height = height;
        cache->pw = width + 2 * r;
        cache->ph = height + 2 * r;
        const std::size_t real_n = static_cast<std::size_t>(cache->pw) * cache->ph;
        cache->real = fftw_alloc_real(real_n);
        cache->spec = fftw_alloc_complex(cache->spec_size());
        cache->kernel_spec = fftw_alloc_complex(cache->spec_size());
        cache->forward = fftw_plan_dft_r2c_2d(cache->ph, cache->pw, cache->real, cache->spec, FFTW_ESTIMATE);
        cache->inverse = fftw_plan_dft_c2r_2d(cache->ph, cache->pw, cache->spec, cache->real, FFTW_ESTIMATE);
        // kernel placed with its origin at (0,0), negative offsets wrapped
        std::fill(cache->real, cache->real + real_n, 0.0);
        for (int dy = -r; dy <= r; ++dy) {
            const int yy = (dy + cache->ph) % cache->ph;
            for (int dx = -r; dx <= r; ++dx) {
                const int xx = (dx + cache->pw) % cache->pw;
                cache->real[static_cast<std::size_t>(yy) * cache->pw + xx] = kernel_.at(dx, dy);
            }
        }
        fftw_execute(cache->forward);
        std::memcpy(cache->kernel_spec, cache->spec, sizeof(fftw_complex) * cache->spec_size());
        fft_ = std::move(cache);
    }
    FftCache& c = *fft_;
    for (int py = 0; py < c.ph; ++py) {
        int sy = py - r;
        if (border_ == Border::Replicate) sy = std::clamp(sy, 0, height - 1);
        double* row = c.real + static_cast<std::size_t>(py) * c.pw;
        if (sy < 0 || sy >= height) {
            std::fill(row, row + c.pw, 0.0);
            continue;
        }
        const double* src = in + static_cast<std::size_t>(sy) * width;
        for (int px = 0; px < c.pw; ++px) {
            int sx = px - r;
            if (border_ == Border::Replicate) {
                row[px] = src[std::clamp(sx, 0, width - 1)];
            } else {
                row[px] = (sx < 0 || sx >= width) ? 0.0 : src[sx];
            }
        }
    }
    fftw_execute(c.forward);
    const std::size_t m = c.spec_size();
    for (std::size_t i = 0; i < m; ++i) {
        const double ar = c.spec[i][0], ai = c.spec[i][1];
        const double br = c.kernel_spec[i][0], bi = c.kernel_spec[i][1];
        c.spec[i][0] = ar * br - ai * bi;
        c.spec[i][1] = ar * bi + ai * br;
    }
    fftw_execute(c.inverse);
    const double scale = 1.0 / (static_cast<double>(c.pw) * c.ph);
    for (int y = 0; y < height; ++y) {
        const double* row = c.real + static_cast<std::size_t>(y + r) * c.pw + r;
        double* orow = out + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) orow[x] = row[x] * scale;
    }
}

}  // namespace apgstmd
