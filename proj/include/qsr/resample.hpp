#pragma once

#include <cstddef>
#include <vector>

#include "qsr/image.hpp"

namespace qsr {

/// HR -> LR simulation: Gaussian blur, bicubic downsample by `scale_factor`,
/// bicubic upsample back to the input size.
struct DegradeParams {
    double sigma = 3.0;
    std::size_t scale_factor = 4;
};

/// Odd-length, symmetric, unit-sum taps.
struct Kernel1D {
    std::vector<double> taps;
    std::size_t radius() const { return taps.size() / 2; }
};

/// Taps proportional to exp(-i^2 / (2 sigma^2)) for i in [-r, r], r = ceil(3 sigma).
Kernel1D gaussian_kernel(double sigma);

/// Separable blur, horizontal then vertical, half-sample symmetric reflection at borders.
Image2D gaussian_blur(const Image2D& img, double sigma);

/// Keys cubic convolution (a = -0.5) with pixel-centre alignment and clamped borders.
/// Same-size requests return an exact copy.
Image2D bicubic_resize(const Image2D& img, std::size_t out_h, std::size_t out_w);

/// Throws if either dimension is not divisible by the scale factor. Output clamped to [0,1].
Image2D degrade(const Image2D& img, const DegradeParams& p);

/// Image plus a flag raised when the correction was skipped as undefined.
struct Corrected {
    Image2D image;
    bool degenerate = false;
};

/// Integer translation moving the intensity centroid to the geometric centre.
/// Vacated pixels are zero. Constant or massless images come back unchanged and flagged.
Corrected recenter(const Image2D& img);

/// Principal-axis angle of the intensity distribution, radians from the column axis,
/// with rows pointing down: 0.5 * atan2(2 mu11, mu20 - mu02).
double principal_axis_angle(const Image2D& img);

/// Rotates about the centroid so the major principal axis becomes vertical. Nearly
/// isotropic or constant images come back unchanged and flagged.
Corrected rotation_correct(const Image2D& img);

/// Per slice: resize to target x target, rotation correction, recentering; then
/// per-volume min-max normalisation. Slices run in parallel.
Volume preprocess(const Volume& v, std::size_t target);

/// `degrade` applied to every slice in parallel.
Volume degrade_volume(const Volume& v, const DegradeParams& p);

namespace serial {
/// Single-threaded reference for gaussian_blur. Bit-identical output.
Image2D gaussian_blur(const Image2D& img, double sigma);
}  // namespace serial

}  // namespace qsr
