#include "qsr/patchmatch.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <limits>
#include <optional>
#include <random>

#include "patchmatch_detail.hpp"
#include "qsr/parallel.hpp"
#include "qsr/volume_io.hpp"

namespace qsr {

const char* to_string(MatchLevels levels) {
    switch (levels) {
        case MatchLevels::Hierarchical: return "hierarchical";
        case MatchLevels::SliceAndPatch: return "slice-patch";
        case MatchLevels::PatchOnly: return "patch-only";
    }
    return "?";
}

MatchLevels match_levels_from_string(const std::string& s) {
    if (s == "hierarchical") return MatchLevels::Hierarchical;
    if (s == "slice-patch") return MatchLevels::SliceAndPatch;
    if (s == "patch-only" || s == "exhaustive") return MatchLevels::PatchOnly;
    throw Error("unknown match levels '" + s + "'");
}

void MatchConfig::validate(std::size_t height, std::size_t width) const {
    if (stride == 0) throw Error("match config: stride must be positive");
    if (stride > patch_size) throw Error("match config: stride exceeds patch size");
    if (patch_size > height || patch_size > width)
        throw Error("match config: patch size " + std::to_string(patch_size) + " exceeds " +
                    std::to_string(height) + "x" + std::to_string(width) + " slices");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error("match config: threshold outside [0,1]");
    hist.validate();
    if (rbf.gamma < 0 || !std::isfinite(rbf.gamma)) throw Error("match config: invalid RBF gamma");
}

bool operator==(const MatchConfig& a, const MatchConfig& b) {
    return a.patch_size == b.patch_size && a.stride == b.stride && a.metric == b.metric &&
           a.hist.bins == b.hist.bins && a.hist.lo == b.hist.lo && a.hist.hi == b.hist.hi &&
           a.rbf.gamma == b.rbf.gamma && a.threshold == b.threshold && a.levels == b.levels;
}

double MatchStats::fraction_in(double lo, double hi) const {
    if (sorted_weights.empty()) return 0.0;
    const auto first = std::lower_bound(sorted_weights.begin(), sorted_weights.end(), lo);
    const auto last = std::upper_bound(sorted_weights.begin(), sorted_weights.end(), hi);
    if (last <= first) return 0.0;
    return static_cast<double>(last - first) / static_cast<double>(sorted_weights.size());
}

std::vector<std::size_t> grid_offsets(std::size_t extent, std::size_t size, std::size_t stride) {
    if (size == 0 || size > extent)
        throw Error("patch_grid: patch size " + std::to_string(size) + " exceeds extent " +
                    std::to_string(extent));
    if (stride == 0) throw Error("patch_grid: stride must be positive");
    std::vector<std::size_t> out;
    for (std::size_t o = 0; o + size <= extent; o += stride) out.push_back(o);
    if (out.back() != extent - size) out.push_back(extent - size);
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> patch_grid(std::size_t h, std::size_t w,
                                                            std::size_t size, std::size_t stride) {
    const auto rows = grid_offsets(h, size, stride);
    const auto cols = grid_offsets(w, size, stride);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(rows.size() * cols.size());
    for (auto r : rows)
        for (auto c : cols) out.emplace_back(r, c);
    return out;
}

double match_score(const MatchConfig& cfg, ImageView a, ImageView b) {
    switch (cfg.metric) {
        case SimilarityKind::NMI: return nmi(a, b, cfg.hist);
        case SimilarityKind::RBF: return rbf(a, b, cfg.rbf);
        case SimilarityKind::PCC:
            try {
                return pcc(a, b);
            } catch (const Error&) {
                return 0.0;
            }
    }
    throw Error("match_score: unknown metric");
}

std::string manifest_timestamp() {
    std::time_t t = 0;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end && *end == '\0' && v >= 0) t = static_cast<std::time_t>(v);
        else t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace detail {

std::pair<std::size_t, std::size_t> check_match_inputs(const Dataset& lr_set, const Dataset& hr_set,
                                                       const MatchConfig& cfg) {
    if (lr_set.empty()) throw Error("match: empty LR dataset");
    if (hr_set.empty()) throw Error("match: empty HR dataset");
    const std::size_t h = lr_set[0].height(), w = lr_set[0].width();
    for (const auto* ds : {&lr_set, &hr_set})
        for (const auto& v : ds->volumes())
            if (v.height() != h || v.width() != w)
                throw Error("match: volume '" + v.patient_id + "' is " + std::to_string(v.height()) +
                            "x" + std::to_string(v.width()) + ", expected " + std::to_string(h) +
                            "x" + std::to_string(w));
    cfg.validate(h, w);
    return {h, w};
}

Manifest make_manifest(std::vector<MatchRecord> records, const Dataset& lr_set,
                       const Dataset& hr_set, const MatchConfig& cfg) {
    Manifest m;
    m.records = std::move(records);
    m.config = cfg;
    m.created = manifest_timestamp();
    m.lr_fingerprint = fingerprint(lr_set);
    m.hr_fingerprint = fingerprint(hr_set);
    return m;
}

PatchRef make_ref(const Volume& v, std::size_t slice, std::size_t row, std::size_t col,
                  std::size_t size) {
    return PatchRef{v.patient_id, slice, row, col, size};
}

}  // namespace detail

namespace {

/// A scoring operand: raw pixels plus, for NMI, the matching window of a binned image.
struct Window {
    ImageView pixels;
    BinnedView bins;
};

/// Per-dataset caches: binned slices (NMI only) and mean images (patient level only).
class Prepared {
public:
    Prepared(const Dataset& ds, const MatchConfig& cfg, bool with_means) : ds_(&ds) {
        const bool binned = cfg.metric == SimilarityKind::NMI;
        slice_bins_.resize(ds.size());
        if (with_means) {
            means_.resize(ds.size());
            mean_bins_.resize(ds.size());
        }
        parallel_for(ds.size(), [&](std::size_t v) {
            const Volume& vol = ds[v];
            if (binned)
                for (const auto& s : vol.slices) slice_bins_[v].emplace_back(s.view(), cfg.hist);
            if (with_means) {
                means_[v] = mean_image(vol);
                if (binned) mean_bins_[v] = BinnedImage(means_[v].view(), cfg.hist);
            }
        });
    }

    Window slice(std::size_t v, std::size_t s) const {
        const Image2D& img = (*ds_)[v].slices[s];
        Window win{img.view(), {}};
        if (!slice_bins_[v].empty()) win.bins = BinnedView::whole(slice_bins_[v][s]);
        return win;
    }

    Window patch(std::size_t v, std::size_t s, std::size_t r, std::size_t c, std::size_t size) const {
        const Image2D& img = (*ds_)[v].slices[s];
        Window win{img.view().window(r, c, size, size), {}};
        if (!slice_bins_[v].empty()) win.bins = {&slice_bins_[v][s], r, c, size, size};
        return win;
    }

    Window mean(std::size_t v) const {
        Window win{means_[v].view(), {}};
        if (!mean_bins_.empty() && mean_bins_[v].height() > 0) win.bins = BinnedView::whole(mean_bins_[v]);
        return win;
    }

private:
    const Dataset* ds_;
    std::vector<std::vector<BinnedImage>> slice_bins_;
    std::vector<Image2D> means_;
    std::vector<BinnedImage> mean_bins_;
};

double score(const MatchConfig& cfg, const Window& a, const Window& b) {
    if (cfg.metric == SimilarityKind::NMI) return nmi(a.bins, b.bins);
    return match_score(cfg, a.pixels, b.pixels);
}

struct SliceQuery {
    std::size_t volume;
    std::size_t slice;
};

std::vector<SliceQuery> slice_queries(const Dataset& ds) {
    std::vector<SliceQuery> q;
    for (std::size_t v = 0; v < ds.size(); ++v)
        for (std::size_t s = 0; s < ds[v].slices.size(); ++s) q.push_back({v, s});
    return q;
}

using Grid = std::vector<std::pair<std::size_t, std::size_t>>;

/// Best grid window of HR slice (hv, hs) for the LR window; first maximum wins.
PatchChoice best_in_slice(const MatchConfig& cfg, const Window& query, const Prepared& hr,
                          std::size_t hv, std::size_t hs, const Grid& grid) {
    PatchChoice best;
    best.score = -std::numeric_limits<double>::infinity();
    for (const auto& [r, c] : grid) {
        const double s = score(cfg, query, hr.patch(hv, hs, r, c, cfg.patch_size));
        if (s > best.score) {
            best.row = r;
            best.col = c;
            best.score = s;
        }
    }
    best.weight = to_weight(cfg.metric, best.score);
    return best;
}

}  // namespace

std::string match_patient(const Volume& lr, const Dataset& hr_set, const MatchConfig& cfg) {
    if (hr_set.empty()) throw Error("match_patient: empty HR dataset");
    const Image2D lr_mean = mean_image(lr);
    std::optional<std::size_t> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < hr_set.size(); ++v) {
        const double s = match_score(cfg, lr_mean.view(), mean_image(hr_set[v]).view());
        if (s > best_score) {
            best_score = s;
            best = v;
        }
    }
    return hr_set[*best].patient_id;
}

std::size_t match_slice(const Image2D& lr_slice, const Volume& hr, const MatchConfig& cfg) {
    hr.validate();
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < hr.slices.size(); ++s) {
        const double sc = match_score(cfg, lr_slice.view(), hr.slices[s].view());
        if (sc > best_score) {
            best_score = sc;
            best = s;
        }
    }
    return best;
}

PatchChoice match_patch(const Image2D& lr_patch, const Image2D& hr_slice, const MatchConfig& cfg) {
    if (lr_patch.height() != cfg.patch_size || lr_patch.width() != cfg.patch_size)
        throw Error("match_patch: patch is " + std::to_string(lr_patch.height()) + "x" +
                    std::to_string(lr_patch.width()) + ", config expects " +
                    std::to_string(cfg.patch_size));
    cfg.validate(hr_slice.height(), hr_slice.width());
    const Dataset one(DatasetLabel::HR, {Volume{"", {hr_slice}}});
    const Prepared hr(one, cfg, false);
    Window query{lr_patch.view(), {}};
    std::optional<BinnedImage> qbins;
    if (cfg.metric == SimilarityKind::NMI) {
        qbins.emplace(lr_patch.view(), cfg.hist);
        query.bins = BinnedView::whole(*qbins);
    }
    return best_in_slice(cfg, query, hr, 0, 0,
                         patch_grid(hr_slice.height(), hr_slice.width(), cfg.patch_size, cfg.stride));
}

Manifest match_exhaustive(const Dataset& lr_set, const Dataset& hr_set, const MatchConfig& cfg) {
    const auto [h, w] = detail::check_match_inputs(lr_set, hr_set, cfg);
    const Prepared lr(lr_set, cfg, false), hr(hr_set, cfg, false);
    const Grid grid = patch_grid(h, w, cfg.patch_size, cfg.stride);
    const auto lr_slices = slice_queries(lr_set);
    const auto hr_slices = slice_queries(hr_set);

    std::vector<MatchRecord> records(lr_slices.size() * grid.size());
    parallel_for(records.size(), [&](std::size_t q) {
        const auto& ls = lr_slices[q / grid.size()];
        const auto [r, c] = grid[q % grid.size()];
        const Window query = lr.patch(ls.volume, ls.slice, r, c, cfg.patch_size);
        PatchChoice best;
        best.score = -std::numeric_limits<double>::infinity();
        SliceQuery best_slice{0, 0};
        for (const auto& hs : hr_slices) {
            const PatchChoice cand = best_in_slice(cfg, query, hr, hs.volume, hs.slice, grid);
            if (cand.score > best.score) {
                best = cand;
                best_slice = hs;
            }
        }
        records[q] = MatchRecord{
            detail::make_ref(lr_set[ls.volume], ls.slice, r, c, cfg.patch_size),
            detail::make_ref(hr_set[best_slice.volume], best_slice.slice, best.row, best.col,
                             cfg.patch_size),
            best.weight};
    });
    return detail::make_manifest(std::move(records), lr_set, hr_set, cfg);
}

Manifest match_hierarchical(const Dataset& lr_set, const Dataset& hr_set, const MatchConfig& cfg) {
    if (cfg.levels == MatchLevels::PatchOnly) return match_exhaustive(lr_set, hr_set, cfg);
    const auto [h, w] = detail::check_match_inputs(lr_set, hr_set, cfg);
    const bool patient_level = cfg.levels == MatchLevels::Hierarchical;
    const Prepared lr(lr_set, cfg, patient_level), hr(hr_set, cfg, patient_level);

    // Patient level: one candidate HR volume per LR volume, or all of them.
    std::vector<std::size_t> chosen_patient(lr_set.size(), 0);
    if (patient_level) {
        parallel_for(lr_set.size(), [&](std::size_t lv) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t hv = 0; hv < hr_set.size(); ++hv) {
                const double s = score(cfg, lr.mean(lv), hr.mean(hv));
                if (s > best) {
                    best = s;
                    chosen_patient[lv] = hv;
                }
            }
        });
    }

    // Slice level.
    const auto lr_slices = slice_queries(lr_set);
    std::vector<SliceQuery> chosen_slice(lr_slices.size());
    parallel_for(lr_slices.size(), [&](std::size_t q) {
        const auto& ls = lr_slices[q];
        const Window query = lr.slice(ls.volume, ls.slice);
        double best = -std::numeric_limits<double>::infinity();
        const std::size_t first = patient_level ? chosen_patient[ls.volume] : 0;
        const std::size_t last = patient_level ? first + 1 : hr_set.size();
        for (std::size_t hv = first; hv < last; ++hv)
            for (std::size_t hs = 0; hs < hr_set[hv].slices.size(); ++hs) {
                const double s = score(cfg, query, hr.slice(hv, hs));
                if (s > best) {
                    best = s;
                    chosen_slice[q] = {hv, hs};
                }
            }
    });

    // Patch level.
    const Grid grid = patch_grid(h, w, cfg.patch_size, cfg.stride);
    std::vector<MatchRecord> records(lr_slices.size() * grid.size());
    parallel_for(records.size(), [&](std::size_t q) {
        const std::size_t sq = q / grid.size();
        const auto& ls = lr_slices[sq];
        const auto& hs = chosen_slice[sq];
        const auto [r, c] = grid[q % grid.size()];
        const PatchChoice best = best_in_slice(
            cfg, lr.patch(ls.volume, ls.slice, r, c, cfg.patch_size), hr, hs.volume, hs.slice, grid);
        records[q] = MatchRecord{
            detail::make_ref(lr_set[ls.volume], ls.slice, r, c, cfg.patch_size),
            detail::make_ref(hr_set[hs.volume], hs.slice, best.row, best.col, cfg.patch_size),
            best.weight};
    });
    return detail::make_manifest(std::move(records), lr_set, hr_set, cfg);
}

Manifest filter_threshold(const Manifest& m, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw Error("filter_threshold: tau outside [0,1]");
    Manifest out = m;
    out.records.clear();
    std::copy_if(m.records.begin(), m.records.end(), std::back_inserter(out.records),
                 [tau](const MatchRecord& r) { return r.weight > tau; });
    out.config.threshold = tau;
    out.filtered = true;
    return out;
}

MatchStats weight_stats(const std::vector<double>& weights, std::size_t bins) {
    if (weights.empty()) throw Error("weight_stats: no records");
    if (bins == 0) throw Error("weight_stats: bins must be >= 1");
    MatchStats st;
    st.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        st.edges[i] = static_cast<double>(i) / static_cast<double>(bins);
    st.counts.assign(bins, 0);
    double sum = 0;
    for (double w : weights) {
        const double t = w * static_cast<double>(bins);
        std::size_t b = t > 0 ? static_cast<std::size_t>(t) : 0;
        b = std::min(b, bins - 1);
        ++st.counts[b];
        sum += w;
    }
    st.mean = sum / static_cast<double>(weights.size());
    st.sorted_weights = weights;
    std::sort(st.sorted_weights.begin(), st.sorted_weights.end());
    return st;
}

MatchStats weight_stats(const Manifest& m, std::size_t bins) {
    std::vector<double> w;
    w.reserve(m.records.size());
    for (const auto& r : m.records) w.push_back(r.weight);
    return weight_stats(w, bins);
}

std::vector<double> random_pair_weights(const Dataset& lr_set, const Dataset& hr_set,
                                        const MatchConfig& cfg, std::size_t count,
                                        std::uint64_t seed) {
    const auto [h, w] = detail::check_match_inputs(lr_set, hr_set, cfg);
    const Grid grid = patch_grid(h, w, cfg.patch_size, cfg.stride);
    const auto lr_slices = slice_queries(lr_set);
    const auto hr_slices = slice_queries(hr_set);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_lr(0, lr_slices.size() * grid.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_hr(0, hr_slices.size() * grid.size() - 1);
    std::vector<std::pair<std::size_t, std::size_t>> pairs(count);
    for (auto& p : pairs) {
        p.first = pick_lr(rng);
        p.second = pick_hr(rng);
    }
    std::vector<double> out(count);
    parallel_for(count, [&](std::size_t i) {
        const auto& ls = lr_slices[pairs[i].first / grid.size()];
        const auto [lr_r, lr_c] = grid[pairs[i].first % grid.size()];
        const auto& hs = hr_slices[pairs[i].second / grid.size()];
        const auto [hr_r, hr_c] = grid[pairs[i].second % grid.size()];
        const auto a = lr_set[ls.volume].slices[ls.slice].view().window(lr_r, lr_c, cfg.patch_size,
                                                                         cfg.patch_size);
        const auto b = hr_set[hs.volume].slices[hs.slice].view().window(hr_r, hr_c, cfg.patch_size,
                                                                         cfg.patch_size);
        out[i] = to_weight(cfg.metric, match_score(cfg, a, b));
    });
    return out;
}

}  // namespace qsr
