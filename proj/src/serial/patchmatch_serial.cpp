#include <limits>

#include "../patchmatch_detail.hpp"
#include "qsr/patchmatch.hpp"

namespace qsr::serial {

namespace {

struct Best {
    std::size_t volume = 0, slice = 0, row = 0, col = 0;
    double score = -std::numeric_limits<double>::infinity();
};

void consider(Best& best, const MatchConfig& cfg, const Image2D& query, const Dataset& hr,
              std::size_t v, std::size_t s) {
    for (const auto& [r, c] : patch_grid(hr[v].height(), hr[v].width(), cfg.patch_size, cfg.stride)) {
        const Image2D cand = extract_patch(hr[v].slices[s], {hr[v].patient_id, s, r, c, cfg.patch_size});
        const double sc = match_score(cfg, query, cand);
        if (sc > best.score) best = {v, s, r, c, sc};
    }
}

MatchRecord record(const Dataset& lr, std::size_t lv, std::size_t ls, std::size_t r, std::size_t c,
                   const Dataset& hr, const Best& b, const MatchConfig& cfg) {
    return {detail::make_ref(lr[lv], ls, r, c, cfg.patch_size),
            detail::make_ref(hr[b.volume], b.slice, b.row, b.col, cfg.patch_size),
            to_weight(cfg.metric, b.score)};
}

}  // namespace

Manifest match_exhaustive(const Dataset& lr_set, const Dataset& hr_set, const MatchConfig& cfg) {
    const auto [h, w] = detail::check_match_inputs(lr_set, hr_set, cfg);
    std::vector<MatchRecord> records;
    for (std::size_t lv = 0; lv < lr_set.size(); ++lv)
        for (std::size_t ls = 0; ls < lr_set[lv].slices.size(); ++ls)
            for (const auto& [r, c] : patch_grid(h, w, cfg.patch_size, cfg.stride)) {
                const Image2D query =
                    extract_patch(lr_set[lv].slices[ls], {lr_set[lv].patient_id, ls, r, c, cfg.patch_size});
                Best best;
                for (std::size_t hv = 0; hv < hr_set.size(); ++hv)
                    for (std::size_t hs = 0; hs < hr_set[hv].slices.size(); ++hs)
                        consider(best, cfg, query, hr_set, hv, hs);
                records.push_back(record(lr_set, lv, ls, r, c, hr_set, best, cfg));
            }
    return detail::make_manifest(std::move(records), lr_set, hr_set, cfg);
}

Manifest match_hierarchical(const Dataset& lr_set, const Dataset& hr_set, const MatchConfig& cfg) {
    if (cfg.levels == MatchLevels::PatchOnly) return serial::match_exhaustive(lr_set, hr_set, cfg);
    const auto [h, w] = detail::check_match_inputs(lr_set, hr_set, cfg);
    std::vector<MatchRecord> records;
    for (std::size_t lv = 0; lv < lr_set.size(); ++lv) {
        std::size_t first = 0, last = hr_set.size();
        if (cfg.levels == MatchLevels::Hierarchical) {
            const std::string id = match_patient(lr_set[lv], hr_set, cfg);
            while (hr_set[first].patient_id != id) ++first;
            last = first + 1;
        }
        for (std::size_t ls = 0; ls < lr_set[lv].slices.size(); ++ls) {
            const Image2D& lr_slice = lr_set[lv].slices[ls];
            std::size_t hv_best = first, hs_best = 0;
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t hv = first; hv < last; ++hv) {
                const std::size_t hs = match_slice(lr_slice, hr_set[hv], cfg);
                const double sc = match_score(cfg, lr_slice, hr_set[hv].slices[hs]);
                if (sc > best) {
                    best = sc;
                    hv_best = hv;
                    hs_best = hs;
                }
            }
            for (const auto& [r, c] : patch_grid(h, w, cfg.patch_size, cfg.stride)) {
                const Image2D query = extract_patch(lr_slice, {lr_set[lv].patient_id, ls, r, c, cfg.patch_size});
                const PatchChoice pc = match_patch(query, hr_set[hv_best].slices[hs_best], cfg);
                Best b{hv_best, hs_best, pc.row, pc.col, pc.score};
                records.push_back(record(lr_set, lv, ls, r, c, hr_set, b, cfg));
            }
        }
    }
    return detail::make_manifest(std::move(records), lr_set, hr_set, cfg);
}

}  // namespace qsr::serial
