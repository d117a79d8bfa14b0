#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qsr/image.hpp"

namespace qsr {

/// One training pair with the network evaluations the losses need.
/// x is LR, y is HR; G maps LR -> HR, F maps HR -> LR.
struct LossItem {
    Image2D x, y;
    Image2D gx;   // G(x)
    Image2D fy;   // F(y)
    Image2D fgx;  // F(G(x))
    Image2D gfy;  // G(F(y))
    Image2D fx;   // F(x)
    Image2D gy;   // G(y)
    double dy_y = 0.5;   // D_Y(y)
    double dy_gx = 0.5;  // D_Y(G(x))
    double dx_x = 0.5;   // D_X(x)
    double dx_fy = 0.5;  // D_X(F(y))
    double w = 1.0;      // pair similarity weight
};

struct LossBatch {
    std::vector<LossItem> items;

    /// Non-empty, one image shape throughout, weights in [0,1].
    void validate() const;
};

struct LossWeights {
    double lambda1 = 1.0;    // cycle consistency
    double lambda2 = 1.0;    // identity
    double lambda3 = 256.0;  // quasi-supervised
};

enum class AdvKind { LogLoss, LeastSquares };

const char* to_string(AdvKind kind);
AdvKind adv_kind_from_string(const std::string& s);

/// Discriminator outputs are clamped to [eps, 1 - eps] for the log form.
inline constexpr double kLogClamp = 1e-7;

double adv_loss(const LossBatch& b, AdvKind kind);
double cyc_loss(const LossBatch& b);
double idt_loss(const LossBatch& b);
/// Batch mean of w_i * (mean|G(x)-y| + mean|F(y)-x|).
double ql_loss(const LossBatch& b);

struct LossBreakdown {
    double adv = 0, cyc = 0, idt = 0, ql = 0;
    double total = 0;
};

/// adv + lambda1 cyc + lambda2 idt + lambda3 ql.
LossBreakdown total_loss(const LossBatch& b, const LossWeights& lw, AdvKind kind);

enum class DistKind { L1, L2 };

/// sum_i w_i Dist(pred_i, target_i), Dist the per-pixel mean of |d| or d^2.
double weighted_supervised_loss(const std::vector<Image2D>& preds,
                                const std::vector<Image2D>& targets,
                                const std::vector<double>& weights, DistKind dist);

/// Gradient of the total loss for one item.
struct ItemGrad {
    Image2D gx, fy, fgx, gfy, fx, gy;
    double dy_y = 0, dy_gx = 0, dx_x = 0, dx_fy = 0;
};

/// Analytic gradients of total_loss. L1 subgradient uses sign(0) = 0; clamped log
/// inputs have zero gradient.
std::vector<ItemGrad> loss_grad(const LossBatch& b, const LossWeights& lw, AdvKind kind);

}  // namespace qsr
