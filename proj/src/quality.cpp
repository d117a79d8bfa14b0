#include "qsr/quality.hpp"

#include <algorithm>
#include <cmath>

namespace qsr {

namespace {

void require_same_shape(const Image2D& a, const Image2D& b, const char* who) {
    if (!a.same_shape(b))
        throw Error(std::string(who) + ": dimension mismatch " + std::to_string(a.height()) + "x" +
                    std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                    std::to_string(b.width()));
    if (a.empty()) throw Error(std::string(who) + ": empty image");
}

double ssim_block(ImageView x, ImageView y, double c1, double c2) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t r = 0; r < x.height(); ++r)
        for (std::size_t c = 0; c < x.width(); ++c) {
            sx += x(r, c);
            sy += y(r, c);
        }
    const double mx = sx / n, my = sy / n;
    double vxx = 0, vyy = 0, vxy = 0;
    for (std::size_t r = 0; r < x.height(); ++r)
        for (std::size_t c = 0; c < x.width(); ++c) {
            const double dx = x(r, c) - mx, dy = y(r, c) - my;
            vxx += dx * dx;
            vyy += dy * dy;
            vxy += dx * dy;
        }
    vxx /= n;
    vyy /= n;
    vxy /= n;
    const double num = (2.0 * mx * my + c1) * (2.0 * vxy + c2);
    const double den = (mx * mx + my * my + c1) * (vxx + vyy + c2);
    return std::clamp(num / den, -1.0, 1.0);
}

}  // namespace

void SsimParams::validate() const {
    if (!(k1 > 0) || !(k2 > 0) || !(dynamic_range > 0))
        throw Error("ssim: k1, k2 and dynamic range must be positive");
    if (mode == SsimMode::Windowed && window == 0) throw Error("ssim: window must be >= 1");
}

double rmse(const Image2D& y, const Image2D& x) {
    require_same_shape(y, x, "rmse");
    auto dy = y.data();
    auto dx = x.data();
    double s = 0;
    for (std::size_t k = 0; k < dy.size(); ++k) {
        const double d = dy[k] - dx[k];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(dy.size()));
}

std::optional<double> psnr(const Image2D& y, const Image2D& x, std::optional<double> peak) {
    const double e = rmse(y, x);
    if (e == 0.0) return std::nullopt;
    const double top = peak ? *peak : y.max();
    if (!(top > 0)) throw Error("psnr: peak value must be positive");
    return 20.0 * std::log10(top / e);
}

double ssim(const Image2D& x, const Image2D& y, const SsimParams& p) {
    require_same_shape(x, y, "ssim");
    p.validate();
    const double c1 = p.c1(), c2 = p.c2();
    if (p.mode == SsimMode::Global) return ssim_block(x.view(), y.view(), c1, c2);

    const ImageView vx = x.view(), vy = y.view();
    double sum = 0;
    std::size_t tiles = 0;
    for (std::size_t r = 0; r < x.height(); r += p.window)
        for (std::size_t c = 0; c < x.width(); c += p.window) {
            const std::size_t h = std::min(p.window, x.height() - r);
            const std::size_t w = std::min(p.window, x.width() - c);
            sum += ssim_block(vx.window(r, c, h, w), vy.window(r, c, h, w), c1, c2);
            ++tiles;
        }
    return sum / static_cast<double>(tiles);
}

QualityReport evaluate_pair(const Image2D& reference, const Image2D& estimate, const SsimParams& p,
                            std::optional<double> peak) {
    QualityReport q;
    q.rmse = rmse(reference, estimate);
    q.psnr = psnr(reference, estimate, peak);
    q.ssim = ssim(reference, estimate, p);
    return q;
}

}  // namespace qsr
