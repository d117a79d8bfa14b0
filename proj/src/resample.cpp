#include "qsr/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qsr/parallel.hpp"
#include "qsr/volume_io.hpp"
#include "resample_detail.hpp"

namespace qsr {

namespace detail {

std::size_t reflect_index(long long i, std::size_t n) {
    const long long period = 2 * static_cast<long long>(n);
    long long m = i % period;
    if (m < 0) m += period;
    if (m >= static_cast<long long>(n)) m = period - 1 - m;
    return static_cast<std::size_t>(m);
}

double keys_weight(double x) {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

std::vector<CubicTaps> cubic_taps(std::size_t in, std::size_t out) {
    std::vector<CubicTaps> taps(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    const long long last = static_cast<long long>(in) - 1;
    for (std::size_t d = 0; d < out; ++d) {
        const double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
        const double base = std::floor(src);
        const double t = src - base;
        const auto i0 = static_cast<long long>(base);
        auto& tp = taps[d];
        tp.nearest = static_cast<std::size_t>(std::clamp(t < 0.5 ? i0 : i0 + 1, 0LL, last));
        const double w[4] = {keys_weight(t + 1.0), keys_weight(t), keys_weight(1.0 - t),
                             keys_weight(2.0 - t)};
        for (int k = 0; k < 4; ++k) {
            tp.index[k] = static_cast<std::size_t>(std::clamp(i0 - 1 + k, 0LL, last));
            tp.weight[k] = w[k];
        }
    }
    return taps;
}

}  // namespace detail

Kernel1D gaussian_kernel(double sigma) {
    if (!(sigma > 0) || !std::isfinite(sigma))
        throw Error("gaussian_kernel: sigma must be positive, got " + std::to_string(sigma));
    const auto r = static_cast<long long>(std::ceil(3.0 * sigma));
    Kernel1D k;
    k.taps.resize(static_cast<std::size_t>(2 * r + 1));
    double sum = 0;
    for (long long i = -r; i <= r; ++i) {
        const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
        k.taps[static_cast<std::size_t>(i + r)] = v;
        sum += v;
    }
    for (double& t : k.taps) t /= sum;
    return k;
}

// Each output is written as centre + sum(w * (v - centre)), which equals
// sum(w * v) for unit-sum weights and reproduces constant inputs bit-exactly.

Image2D gaussian_blur(const Image2D& img, double sigma) {
    const Kernel1D k = gaussian_kernel(sigma);
    const std::size_t h = img.height(), w = img.width();
    const auto r = static_cast<long long>(k.radius());
    const auto& taps = k.taps;

    Image2D tmp(h, w);
#pragma omp parallel for schedule(static)
    for (long long rr = 0; rr < static_cast<long long>(h); ++rr) {
        const auto row = static_cast<std::size_t>(rr);
        for (std::size_t c = 0; c < w; ++c) {
            const double centre = img(row, c);
            double acc = 0;
            for (long long t = -r; t <= r; ++t) {
                const std::size_t cc = detail::reflect_index(static_cast<long long>(c) + t, w);
                acc += taps[static_cast<std::size_t>(t + r)] * (img(row, cc) - centre);
            }
            tmp(row, c) = centre + acc;
        }
    }

    Image2D out(h, w);
#pragma omp parallel
    {
        std::vector<double> acc(w);
#pragma omp for schedule(static)
        for (long long rr = 0; rr < static_cast<long long>(h); ++rr) {
            const auto row = static_cast<std::size_t>(rr);
            std::fill(acc.begin(), acc.end(), 0.0);
            const double* centre = &tmp.data()[row * w];
            for (long long t = -r; t <= r; ++t) {
                const std::size_t src = detail::reflect_index(rr + t, h);
                const double* s = &tmp.data()[src * w];
                const double tap = taps[static_cast<std::size_t>(t + r)];
                for (std::size_t c = 0; c < w; ++c) acc[c] += tap * (s[c] - centre[c]);
            }
            for (std::size_t c = 0; c < w; ++c) out(row, c) = centre[c] + acc[c];
        }
    }
    return out;
}

Image2D bicubic_resize(const Image2D& img, std::size_t out_h, std::size_t out_w) {
    if (out_h == 0 || out_w == 0) throw Error("bicubic_resize: output dimensions must be >= 1");
    if (out_h == img.height() && out_w == img.width()) return img;
    const auto col_taps = detail::cubic_taps(img.width(), out_w);
    const auto row_taps = detail::cubic_taps(img.height(), out_h);

    Image2D tmp(img.height(), out_w);
#pragma omp parallel for schedule(static)
    for (long long rr = 0; rr < static_cast<long long>(img.height()); ++rr) {
        const auto r = static_cast<std::size_t>(rr);
        for (std::size_t c = 0; c < out_w; ++c) {
            const auto& tp = col_taps[c];
            const double centre = img(r, tp.nearest);
            double acc = 0;
            for (int k = 0; k < 4; ++k) acc += tp.weight[k] * (img(r, tp.index[k]) - centre);
            tmp(r, c) = centre + acc;
        }
    }
    Image2D out(out_h, out_w);
#pragma omp parallel for schedule(static)
    for (long long rr = 0; rr < static_cast<long long>(out_h); ++rr) {
        const auto r = static_cast<std::size_t>(rr);
        const auto& tp = row_taps[r];
        for (std::size_t c = 0; c < out_w; ++c) {
            const double centre = tmp(tp.nearest, c);
            double acc = 0;
            for (int k = 0; k < 4; ++k) acc += tp.weight[k] * (tmp(tp.index[k], c) - centre);
            out(r, c) = centre + acc;
        }
    }
    return out;
}

Image2D degrade(const Image2D& img, const DegradeParams& p) {
    const std::size_t f = p.scale_factor;
    if (f == 0) throw Error("degrade: scale factor must be >= 1");
    if (img.height() % f != 0 || img.width() % f != 0)
        throw Error("degrade: " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                    " image is not divisible by scale factor " + std::to_string(f));
    Image2D blurred = gaussian_blur(img, p.sigma);
    Image2D small = bicubic_resize(blurred, img.height() / f, img.width() / f);
    Image2D out = bicubic_resize(small, img.height(), img.width());
    for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
    return out;
}

namespace {

struct Moments {
    double mass = 0;
    double cy = 0, cx = 0;
    double mu20 = 0, mu02 = 0, mu11 = 0;
};

bool is_constant(const Image2D& img) { return img.min() == img.max(); }

Moments moments(const Image2D& img) {
    Moments m;
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c) {
            const double v = img(r, c);
            m.mass += v;
            m.cy += v * static_cast<double>(r);
            m.cx += v * static_cast<double>(c);
        }
    if (!(m.mass > 0)) return m;
    m.cy /= m.mass;
    m.cx /= m.mass;
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c) {
            const double v = img(r, c);
            const double dv = static_cast<double>(r) - m.cy;
            const double du = static_cast<double>(c) - m.cx;
            m.mu20 += v * du * du;
            m.mu02 += v * dv * dv;
            m.mu11 += v * du * dv;
        }
    return m;
}

double sample_bicubic_zero(const Image2D& img, double y, double x) {
    const double fy = std::floor(y), fx = std::floor(x);
    const double ty = y - fy, tx = x - fx;
    const auto y0 = static_cast<long long>(fy), x0 = static_cast<long long>(fx);
    const double wy[4] = {detail::keys_weight(ty + 1), detail::keys_weight(ty),
                          detail::keys_weight(1 - ty), detail::keys_weight(2 - ty)};
    const double wx[4] = {detail::keys_weight(tx + 1), detail::keys_weight(tx),
                          detail::keys_weight(1 - tx), detail::keys_weight(2 - tx)};
    const auto h = static_cast<long long>(img.height()), w = static_cast<long long>(img.width());
    double acc = 0;
    for (int i = 0; i < 4; ++i) {
        const long long yy = y0 - 1 + i;
        if (yy < 0 || yy >= h) continue;
        double row = 0;
        for (int j = 0; j < 4; ++j) {
            const long long xx = x0 - 1 + j;
            if (xx < 0 || xx >= w) continue;
            row += wx[j] * img(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
        }
        acc += wy[i] * row;
    }
    return acc;
}

}  // namespace

Corrected recenter(const Image2D& img) {
    if (is_constant(img)) return {img, true};
    const Moments m = moments(img);
    if (!(m.mass > 0)) return {img, true};
    const double gy = (static_cast<double>(img.height()) - 1.0) / 2.0;
    const double gx = (static_cast<double>(img.width()) - 1.0) / 2.0;
    const long long dy = std::llround(gy - m.cy);
    const long long dx = std::llround(gx - m.cx);
    if (dy == 0 && dx == 0) return {img, false};
    const auto h = static_cast<long long>(img.height()), w = static_cast<long long>(img.width());
    Image2D out(img.height(), img.width());
    for (long long r = 0; r < h; ++r) {
        const long long sr = r - dy;
        if (sr < 0 || sr >= h) continue;
        for (long long c = 0; c < w; ++c) {
            const long long sc = c - dx;
            if (sc < 0 || sc >= w) continue;
            out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
                img(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
        }
    }
    return {std::move(out), false};
}

double principal_axis_angle(const Image2D& img) {
    const Moments m = moments(img);
    return 0.5 * std::atan2(2.0 * m.mu11, m.mu20 - m.mu02);
}

Corrected rotation_correct(const Image2D& img) {
    if (is_constant(img)) return {img, true};
    const Moments m = moments(img);
    if (!(m.mass > 0)) return {img, true};
    const double tol = 1e-9 * m.mass;
    if (std::abs(m.mu20 - m.mu02) < tol && std::abs(m.mu11) < tol) return {img, true};

    const double theta = 0.5 * std::atan2(2.0 * m.mu11, m.mu20 - m.mu02);
    double phi = std::numbers::pi / 2 - theta;
    while (phi > std::numbers::pi / 2) phi -= std::numbers::pi;
    while (phi <= -std::numbers::pi / 2) phi += std::numbers::pi;
    if (std::abs(phi) < 1e-12) return {img, false};

    const double cs = std::cos(phi), sn = std::sin(phi);
    Image2D out(img.height(), img.width());
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c) {
            const double up = static_cast<double>(c) - m.cx;
            const double vp = static_cast<double>(r) - m.cy;
            const double u = cs * up + sn * vp;
            const double v = -sn * up + cs * vp;
            out(r, c) = sample_bicubic_zero(img, m.cy + v, m.cx + u);
        }
    return {std::move(out), false};
}

Volume preprocess(const Volume& v, std::size_t target) {
    v.validate();
    if (target == 0) throw Error("preprocess: target size must be >= 1");
    Volume out{v.patient_id, std::vector<Image2D>(v.slices.size())};
    parallel_for(v.slices.size(), [&](std::size_t s) {
        Image2D img = bicubic_resize(v.slices[s], target, target);
        img = rotation_correct(img).image;
        out.slices[s] = recenter(img).image;
    });
    return normalize_volume(out);
}

Volume degrade_volume(const Volume& v, const DegradeParams& p) {
    v.validate();
    Volume out{v.patient_id, std::vector<Image2D>(v.slices.size())};
    try {
        parallel_for(v.slices.size(), [&](std::size_t s) { out.slices[s] = degrade(v.slices[s], p); });
    } catch (const Error& e) {
        throw Error("volume '" + v.patient_id + "': " + e.what());
    }
    return out;
}

}  // namespace qsr
