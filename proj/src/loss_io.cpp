#include "qsr/loss_io.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qsr/manifest.hpp"
#include "qsr/volume_io.hpp"

namespace qsr {
namespace fs = std::filesystem;

namespace {

constexpr std::array<const char*, 8> kRoles = {"x", "y", "gx", "fy", "fgx", "gfy", "fx", "gy"};

std::array<Image2D LossItem::*, 8> role_members() {
    return {&LossItem::x, &LossItem::y, &LossItem::gx, &LossItem::fy,
            &LossItem::fgx, &LossItem::gfy, &LossItem::fx, &LossItem::gy};
}

double parse_number(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw Error(where + ": not a number: '" + s + "'");
    return v;
}

}  // namespace

LossBatch load_loss_batch(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(dir.string() + ": not a directory");
    const auto members = role_members();
    std::array<Volume, 8> vols;
    for (std::size_t r = 0; r < kRoles.size(); ++r)
        vols[r] = load_volume(dir / (std::string(kRoles[r]) + ".vol"));
    const std::size_t n = vols[0].slices.size();
    for (std::size_t r = 1; r < kRoles.size(); ++r)
        if (vols[r].slices.size() != n)
            throw Error(dir.string() + ": role '" + kRoles[r] + "' has " +
                        std::to_string(vols[r].slices.size()) + " items, expected " + std::to_string(n));

    const fs::path vpath = dir / "values.csv";
    std::ifstream in(vpath);
    if (!in) throw Error(vpath.string() + ": cannot open");
    std::string line;
    if (!std::getline(in, line) || line != "dy_y,dy_gx,dx_x,dx_fy,w")
        throw Error(vpath.string() + ":1: expected header dy_y,dy_gx,dx_x,dx_fy,w");

    LossBatch b;
    b.items.resize(n);
    std::size_t row = 0, lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = vpath.string() + ":" + std::to_string(lineno);
        if (row >= n) throw Error(where + ": more value rows than batch items");
        std::stringstream ss(line);
        std::string cell;
        std::array<double, 5> v{};
        std::size_t k = 0;
        while (std::getline(ss, cell, ',')) {
            if (k >= v.size()) throw Error(where + ": too many columns");
            v[k++] = parse_number(cell, where);
        }
        if (k != v.size()) throw Error(where + ": expected 5 columns");
        auto& it = b.items[row++];
        it.dy_y = v[0];
        it.dy_gx = v[1];
        it.dx_x = v[2];
        it.dx_fy = v[3];
        it.w = v[4];
    }
    if (row != n)
        throw Error(vpath.string() + ": " + std::to_string(row) + " value rows for " + std::to_string(n) +
                    " batch items");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < kRoles.size(); ++r) b.items[i].*members[r] = vols[r].slices[i];
    b.validate();
    return b;
}

void save_loss_batch(const LossBatch& b, const fs::path& dir) {
    b.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(dir.string() + ": " + ec.message());
    const auto members = role_members();
    for (std::size_t r = 0; r < kRoles.size(); ++r) {
        Volume v{kRoles[r], {}};
        for (const auto& it : b.items) v.slices.push_back(it.*members[r]);
        save_volume(v, dir / (std::string(kRoles[r]) + ".vol"));
    }
    std::ofstream out(dir / "values.csv", std::ios::trunc);
    if (!out) throw Error((dir / "values.csv").string() + ": cannot open for writing");
    out << "dy_y,dy_gx,dx_x,dx_fy,w\n";
    for (const auto& it : b.items)
        out << format_real(it.dy_y) << ',' << format_real(it.dy_gx) << ',' << format_real(it.dx_x)
            << ',' << format_real(it.dx_fy) << ',' << format_real(it.w) << '\n';
}

}  // namespace qsr
