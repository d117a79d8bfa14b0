#pragma once

#include <cstddef>
#include <optional>

#include "qsr/image.hpp"

namespace qsr {

enum class SsimMode { Global, Windowed };

struct SsimParams {
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
    SsimMode mode = SsimMode::Global;
    std::size_t window = 8;  // Windowed mode only

    double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
    void validate() const;
};

/// sqrt(mean((y - x)^2)).
double rmse(const Image2D& y, const Image2D& x);

/// 20 log10(peak / rmse(y, x)) with peak = max(y) unless overridden.
/// std::nullopt means the images are identical (infinite PSNR).
std::optional<double> psnr(const Image2D& y, const Image2D& x,
                           std::optional<double> peak = std::nullopt);

/// Global: one evaluation with whole-image population statistics.
/// Windowed: mean over non-overlapping window x window tiles; a partial tile at the
/// right or bottom edge is evaluated on its own pixels.
double ssim(const Image2D& x, const Image2D& y, const SsimParams& p = {});

struct QualityReport {
    std::optional<double> psnr;  // nullopt = infinite
    double ssim = 0;
    double rmse = 0;
};

QualityReport evaluate_pair(const Image2D& reference, const Image2D& estimate,
                            const SsimParams& p = {}, std::optional<double> peak = std::nullopt);

}  // namespace qsr
