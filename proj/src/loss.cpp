#include "qsr/loss.hpp"

#include <algorithm>
#include <cmath>

namespace qsr {

namespace {

double mean_abs_diff(const Image2D& a, const Image2D& b) {
    auto da = a.data();
    auto db = b.data();
    double s = 0;
    for (std::size_t k = 0; k < da.size(); ++k) s += std::abs(da[k] - db[k]);
    return s / static_cast<double>(da.size());
}

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

/// scale * sign(a - b) per pixel.
Image2D sign_grad(const Image2D& a, const Image2D& b, double scale) {
    Image2D g(a.height(), a.width());
    auto da = a.data();
    auto db = b.data();
    auto dg = g.data();
    for (std::size_t k = 0; k < da.size(); ++k) dg[k] = scale * sign(da[k] - db[k]);
    return g;
}

double clamp_d(double d) { return std::clamp(d, kLogClamp, 1.0 - kLogClamp); }

bool in_clamp_range(double d) { return d >= kLogClamp && d <= 1.0 - kLogClamp; }

template <class F>
double batch_mean(const LossBatch& b, F&& per_item) {
    b.validate();
    double s = 0;
    for (const auto& it : b.items) s += per_item(it);
    return s / static_cast<double>(b.items.size());
}

}  // namespace

void LossBatch::validate() const {
    if (items.empty()) throw Error("loss: empty batch");
    const Image2D& ref = items.front().x;
    if (ref.empty()) throw Error("loss: empty images");
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& it = items[i];
        for (const Image2D* img : {&it.x, &it.y, &it.gx, &it.fy, &it.fgx, &it.gfy, &it.fx, &it.gy})
            if (!img->same_shape(ref))
                throw Error("loss: item " + std::to_string(i) + " has images of mismatched shape");
        if (!(it.w >= 0.0 && it.w <= 1.0))
            throw Error("loss: item " + std::to_string(i) + " weight outside [0,1]");
        for (double d : {it.dy_y, it.dy_gx, it.dx_x, it.dx_fy})
            if (!std::isfinite(d))
                throw Error("loss: item " + std::to_string(i) + " has a non-finite discriminator output");
    }
}

const char* to_string(AdvKind kind) {
    return kind == AdvKind::LogLoss ? "log" : "least-squares";
}

AdvKind adv_kind_from_string(const std::string& s) {
    if (s == "log") return AdvKind::LogLoss;
    if (s == "least-squares" || s == "ls") return AdvKind::LeastSquares;
    throw Error("unknown adversarial loss '" + s + "'");
}

double adv_loss(const LossBatch& b, AdvKind kind) {
    b.validate();
    const double n = static_cast<double>(b.items.size());
    double real_y = 0, fake_y = 0, real_x = 0, fake_x = 0;
    for (const auto& it : b.items) {
        if (kind == AdvKind::LogLoss) {
            real_y += std::log(clamp_d(it.dy_y));
            fake_y += std::log(1.0 - clamp_d(it.dy_gx));
            real_x += std::log(clamp_d(it.dx_x));
            fake_x += std::log(1.0 - clamp_d(it.dx_fy));
        } else {
            real_y += (it.dy_y - 1.0) * (it.dy_y - 1.0);
            fake_y += it.dy_gx * it.dy_gx;
            real_x += (it.dx_x - 1.0) * (it.dx_x - 1.0);
            fake_x += it.dx_fy * it.dx_fy;
        }
    }
    return real_y / n + fake_y / n + real_x / n + fake_x / n;
}

double cyc_loss(const LossBatch& b) {
    return batch_mean(b, [](const LossItem& it) {
        return mean_abs_diff(it.fgx, it.x) + mean_abs_diff(it.gfy, it.y);
    });
}

double idt_loss(const LossBatch& b) {
    return batch_mean(b, [](const LossItem& it) {
        return mean_abs_diff(it.fx, it.x) + mean_abs_diff(it.gy, it.y);
    });
}

double ql_loss(const LossBatch& b) {
    return batch_mean(b, [](const LossItem& it) {
        return it.w * (mean_abs_diff(it.gx, it.y) + mean_abs_diff(it.fy, it.x));
    });
}

LossBreakdown total_loss(const LossBatch& b, const LossWeights& lw, AdvKind kind) {
    if (lw.lambda1 < 0 || lw.lambda2 < 0 || lw.lambda3 < 0)
        throw Error("loss: lambdas must be non-negative");
    LossBreakdown r;
    r.adv = adv_loss(b, kind);
    r.cyc = cyc_loss(b);
    r.idt = idt_loss(b);
    r.ql = ql_loss(b);
    r.total = r.adv + lw.lambda1 * r.cyc + lw.lambda2 * r.idt + lw.lambda3 * r.ql;
    return r;
}

double weighted_supervised_loss(const std::vector<Image2D>& preds,
                                const std::vector<Image2D>& targets,
                                const std::vector<double>& weights, DistKind dist) {
    if (preds.size() != targets.size() || preds.size() != weights.size())
        throw Error("weighted_supervised_loss: length mismatch (" + std::to_string(preds.size()) +
                    " predictions, " + std::to_string(targets.size()) + " targets, " +
                    std::to_string(weights.size()) + " weights)");
    double total = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!preds[i].same_shape(targets[i]))
            throw Error("weighted_supervised_loss: item " + std::to_string(i) + " shape mismatch");
        if (!(weights[i] >= 0.0 && weights[i] <= 1.0))
            throw Error("weighted_supervised_loss: weight outside [0,1]");
        auto p = preds[i].data();
        auto t = targets[i].data();
        double s = 0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double d = p[k] - t[k];
            s += dist == DistKind::L1 ? std::abs(d) : d * d;
        }
        total += weights[i] * (s / static_cast<double>(p.size()));
    }
    return total;
}

std::vector<ItemGrad> loss_grad(const LossBatch& b, const LossWeights& lw, AdvKind kind) {
    b.validate();
    const double batch = static_cast<double>(b.items.size());
    const double pixels = static_cast<double>(b.items.front().x.size());
    const double l1 = 1.0 / (pixels * batch);

    std::vector<ItemGrad> out;
    out.reserve(b.items.size());
    for (const auto& it : b.items) {
        ItemGrad g;
        g.fgx = sign_grad(it.fgx, it.x, lw.lambda1 * l1);
        g.gfy = sign_grad(it.gfy, it.y, lw.lambda1 * l1);
        g.fx = sign_grad(it.fx, it.x, lw.lambda2 * l1);
        g.gy = sign_grad(it.gy, it.y, lw.lambda2 * l1);
        g.gx = sign_grad(it.gx, it.y, lw.lambda3 * it.w * l1);
        g.fy = sign_grad(it.fy, it.x, lw.lambda3 * it.w * l1);
        if (kind == AdvKind::LogLoss) {
            g.dy_y = in_clamp_range(it.dy_y) ? 1.0 / (it.dy_y * batch) : 0.0;
            g.dy_gx = in_clamp_range(it.dy_gx) ? -1.0 / ((1.0 - it.dy_gx) * batch) : 0.0;
            g.dx_x = in_clamp_range(it.dx_x) ? 1.0 / (it.dx_x * batch) : 0.0;
            g.dx_fy = in_clamp_range(it.dx_fy) ? -1.0 / ((1.0 - it.dx_fy) * batch) : 0.0;
        } else {
            g.dy_y = 2.0 * (it.dy_y - 1.0) / batch;
            g.dy_gx = 2.0 * it.dy_gx / batch;
            g.dx_x = 2.0 * (it.dx_x - 1.0) / batch;
            g.dx_fy = 2.0 * it.dx_fy / batch;
        }
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace qsr
