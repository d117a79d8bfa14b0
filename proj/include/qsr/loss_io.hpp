#pragma once

#include <filesystem>

#include "qsr/loss.hpp"

namespace qsr {

// Batch directory layout: one volume per role (x.vol, y.vol, gx.vol, fy.vol,
// fgx.vol, gfy.vol, fx.vol, gy.vol), slice i of each holding item i, plus
// values.csv with header "dy_y,dy_gx,dx_x,dx_fy,w" and one row per item.

LossBatch load_loss_batch(const std::filesystem::path& dir);
void save_loss_batch(const LossBatch& b, const std::filesystem::path& dir);

}  // namespace qsr
