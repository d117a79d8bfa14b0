#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Everything here is written from the definitions with plain loops and shares no
// code with the library beyond the public data types.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "qsr/image.hpp"
#include "qsr/loss.hpp"
#include "qsr/patchmatch.hpp"
#include "qsr/similarity.hpp"

namespace oracle {

inline qsr::Image2D random_image(std::mt19937_64& rng, std::size_t h, std::size_t w, double lo = 0.0,
                                 double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> d(h * w);
    for (auto& v : d) v = u(rng);
    return qsr::Image2D(h, w, std::move(d));
}

/// Bin index from the definition: floor((v - lo) / (hi - lo) * bins), clamped to the edge bins.
inline std::size_t bin_index(double v, std::size_t bins, double lo, double hi) {
    const double t = std::floor((v - lo) / (hi - lo) * static_cast<double>(bins));
    if (t < 0) return 0;
    if (t >= static_cast<double>(bins)) return bins - 1;
    return static_cast<std::size_t>(t);
}

/// NMI from probabilities: 2 sum p_ij ln(p_ij / (p_i p_j)) / (H(X) + H(Y)).
inline double nmi(const qsr::Image2D& x, const qsr::Image2D& y, std::size_t bins = 64, double lo = 0.0,
                  double hi = 1.0) {
    std::vector<std::vector<double>> p(bins, std::vector<double>(bins, 0.0));
    const double n = static_cast<double>(x.size());
    for (std::size_t r = 0; r < x.height(); ++r)
        for (std::size_t c = 0; c < x.width(); ++c)
            p[bin_index(x(r, c), bins, lo, hi)][bin_index(y(r, c), bins, lo, hi)] += 1.0 / n;
    std::vector<double> px(bins, 0.0), py(bins, 0.0);
    for (std::size_t i = 0; i < bins; ++i)
        for (std::size_t j = 0; j < bins; ++j) {
            px[i] += p[i][j];
            py[j] += p[i][j];
        }
    double hx = 0, hy = 0, mi = 0;
    for (std::size_t i = 0; i < bins; ++i) {
        if (px[i] > 0) hx -= px[i] * std::log(px[i]);
        if (py[i] > 0) hy -= py[i] * std::log(py[i]);
    }
    for (std::size_t i = 0; i < bins; ++i)
        for (std::size_t j = 0; j < bins; ++j)
            if (p[i][j] > 0) mi += p[i][j] * std::log(p[i][j] / (px[i] * py[j]));
    if (hx + hy <= 0) return 0.0;
    return 2.0 * mi / (hx + hy);
}

/// Direct (non-separable) 2D Gaussian convolution with half-sample symmetric reflection.
inline qsr::Image2D blur(const qsr::Image2D& img, double sigma) {
    const long rad = static_cast<long>(std::ceil(3.0 * sigma));
    std::vector<double> g(static_cast<std::size_t>(2 * rad + 1));
    double s = 0;
    for (long i = -rad; i <= rad; ++i) s += g[static_cast<std::size_t>(i + rad)] = std::exp(-double(i * i) / (2 * sigma * sigma));
    for (auto& v : g) v /= s;
    const long h = static_cast<long>(img.height()), w = static_cast<long>(img.width());
    auto refl = [](long i, long n) {
        const long period = 2 * n;
        i %= period;
        if (i < 0) i += period;
        return i < n ? i : period - 1 - i;
    };
    qsr::Image2D out(img.height(), img.width());
    for (long r = 0; r < h; ++r)
        for (long c = 0; c < w; ++c) {
            double acc = 0;
            for (long dr = -rad; dr <= rad; ++dr)
                for (long dc = -rad; dc <= rad; ++dc)
                    acc += g[static_cast<std::size_t>(dr + rad)] * g[static_cast<std::size_t>(dc + rad)] *
                           img(static_cast<std::size_t>(refl(r + dr, h)), static_cast<std::size_t>(refl(c + dc, w)));
            out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
        }
    return out;
}

/// Intensity centroid (row, col).
inline std::pair<double, double> centroid(const qsr::Image2D& img) {
    double m = 0, mr = 0, mc = 0;
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c) {
            m += img(r, c);
            mr += img(r, c) * static_cast<double>(r);
            mc += img(r, c) * static_cast<double>(c);
        }
    return {mr / m, mc / m};
}

/// Orientation of the major axis from the eigenvector of the covariance matrix
/// (u = column, v = row), in (-pi/2, pi/2].
inline double major_axis_angle(const qsr::Image2D& img) {
    const auto [vr, uc] = centroid(img);
    double m = 0, suu = 0, svv = 0, suv = 0;
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c) {
            const double du = static_cast<double>(c) - uc, dv = static_cast<double>(r) - vr;
            m += img(r, c);
            suu += img(r, c) * du * du;
            svv += img(r, c) * dv * dv;
            suv += img(r, c) * du * dv;
        }
    suu /= m;
    svv /= m;
    suv /= m;
    // largest eigenvalue of [[suu, suv], [suv, svv]] and its eigenvector
    const double tr = suu + svv, det = suu * svv - suv * suv;
    const double l = tr / 2 + std::sqrt(tr * tr / 4 - det);
    // both rows of (S - l I) give an eigenvector; take the better conditioned one
    double ex = suv, ey = l - suu;
    if (std::hypot(l - svv, suv) > std::hypot(ex, ey)) {
        ex = l - svv;
        ey = suv;
    }
    double a = std::atan2(ey, ex);
    if (a <= -M_PI / 2) a += M_PI;
    if (a > M_PI / 2) a -= M_PI;
    return a;
}

// --- matcher ---------------------------------------------------------------

inline std::vector<std::size_t> offsets(std::size_t extent, std::size_t size, std::size_t stride) {
    std::vector<std::size_t> out;
    std::size_t o = 0;
    while (o + size <= extent) {
        out.push_back(o);
        o += stride;
    }
    if (out.empty() || out.back() + size != extent) out.push_back(extent - size);
    return out;
}

inline qsr::Image2D crop(const qsr::Image2D& img, std::size_t r0, std::size_t c0, std::size_t n) {
    qsr::Image2D out(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) out(r, c) = img(r0 + r, c0 + c);
    return out;
}

/// The metric as specified, with a PCC that is undefined on a constant input scored 0.
inline double score(const qsr::MatchConfig& cfg, const qsr::Image2D& a, const qsr::Image2D& b) {
    if (cfg.metric == qsr::SimilarityKind::PCC) {
        auto constant = [](const qsr::Image2D& im) {
            for (double v : im.data())
                if (v != im.data()[0]) return false;
            return true;
        };
        if (constant(a) || constant(b)) return 0.0;
    }
    return qsr::similarity(cfg.metric, a.view(), b.view(), cfg.similarity_params());
}

inline std::string ref_json(const std::string& id, std::size_t s, std::size_t r, std::size_t c,
                            std::size_t n) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "{\"patient\":\"%s\",\"slice\":%zu,\"row\":%zu,\"col\":%zu,\"size\":%zu}",
                  id.c_str(), s, r, c, n);
    return buf;
}

/// Exhaustive search: for every LR grid patch, scan every HR patient, slice and grid
/// window in order and keep the first strict maximum. One manifest record line each.
inline std::vector<std::string> exhaustive_lines(const qsr::Dataset& lr, const qsr::Dataset& hr,
                                                 const qsr::MatchConfig& cfg) {
    std::vector<std::string> lines;
    const std::size_t n = cfg.patch_size;
    for (const auto& lv : lr.volumes())
        for (std::size_t ls = 0; ls < lv.slices.size(); ++ls) {
            const auto& sl = lv.slices[ls];
            for (auto r : offsets(sl.height(), n, cfg.stride))
                for (auto c : offsets(sl.width(), n, cfg.stride)) {
                    const qsr::Image2D q = crop(sl, r, c, n);
                    double best = -std::numeric_limits<double>::infinity();
                    std::string best_ref;
                    for (const auto& hv : hr.volumes())
                        for (std::size_t hs = 0; hs < hv.slices.size(); ++hs)
                            for (auto hr_r : offsets(hv.slices[hs].height(), n, cfg.stride))
                                for (auto hr_c : offsets(hv.slices[hs].width(), n, cfg.stride)) {
                                    const double s = score(cfg, q, crop(hv.slices[hs], hr_r, hr_c, n));
                                    if (s > best) {
                                        best = s;
                                        best_ref = ref_json(hv.patient_id, hs, hr_r, hr_c, n);
                                    }
                                }
                    const double w = cfg.metric == qsr::SimilarityKind::PCC ? std::max(0.0, best) : best;
                    char wb[64];
                    std::snprintf(wb, sizeof wb, "%.17g", w);
                    lines.push_back("{\"lr\":" + ref_json(lv.patient_id, ls, r, c, n) + ",\"hr\":" + best_ref +
                                    ",\"weight\":" + wb + "}");
                }
        }
    return lines;
}

// --- losses -----------------------------------------------------------------

/// Total objective evaluated straight from the definitions.
inline double total_loss(const qsr::LossBatch& b, const qsr::LossWeights& lw, qsr::AdvKind kind) {
    auto l1 = [](const qsr::Image2D& a, const qsr::Image2D& t) {
        double s = 0;
        for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a.data()[k] - t.data()[k]);
        return s / static_cast<double>(a.size());
    };
    auto clampd = [](double d) { return std::clamp(d, qsr::kLogClamp, 1.0 - qsr::kLogClamp); };
    double adv = 0, cyc = 0, idt = 0, ql = 0;
    for (const auto& it : b.items) {
        if (kind == qsr::AdvKind::LeastSquares)
            adv += (it.dy_y - 1) * (it.dy_y - 1) + it.dy_gx * it.dy_gx + (it.dx_x - 1) * (it.dx_x - 1) +
                   it.dx_fy * it.dx_fy;
        else
            adv += std::log(clampd(it.dy_y)) + std::log(1 - clampd(it.dy_gx)) + std::log(clampd(it.dx_x)) +
                   std::log(1 - clampd(it.dx_fy));
        cyc += l1(it.fgx, it.x) + l1(it.gfy, it.y);
        idt += l1(it.gy, it.y) + l1(it.fx, it.x);
        ql += it.w * (l1(it.gx, it.y) + l1(it.fy, it.x));
    }
    const double n = static_cast<double>(b.items.size());
    return adv / n + lw.lambda1 * cyc / n + lw.lambda2 * idt / n + lw.lambda3 * ql / n;
}

}  // namespace oracle
