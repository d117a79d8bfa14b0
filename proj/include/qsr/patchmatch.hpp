#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qsr/image.hpp"
#include "qsr/similarity.hpp"

namespace qsr {

/// Which search levels run before the patch search.
/// Hierarchical: patient -> slice -> patch. SliceAndPatch: best slice over every
/// HR patient, then patch. PatchOnly: every HR patch is a candidate (exhaustive).
enum class MatchLevels { Hierarchical, SliceAndPatch, PatchOnly };

const char* to_string(MatchLevels levels);
MatchLevels match_levels_from_string(const std::string& s);

struct MatchConfig {
    std::size_t patch_size = 128;
    std::size_t stride = 64;
    SimilarityKind metric = SimilarityKind::NMI;
    HistogramSpec hist;
    RbfParams rbf;
    double threshold = 0.4;
    MatchLevels levels = MatchLevels::Hierarchical;

    SimilarityParams similarity_params() const { return {hist, rbf}; }
    /// Checks the invariants against slices of height x width.
    void validate(std::size_t height, std::size_t width) const;

    friend bool operator==(const MatchConfig& a, const MatchConfig& b);
};

struct MatchRecord {
    PatchRef lr;
    PatchRef hr;
    double weight = 0.0;

    friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

/// Matched pairs sorted by lr ref, plus provenance.
struct Manifest {
    std::vector<MatchRecord> records;
    MatchConfig config;
    bool filtered = false;
    /// ISO-8601 UTC; SOURCE_DATE_EPOCH is honoured when set.
    std::string created;
    std::uint64_t lr_fingerprint = 0;
    std::uint64_t hr_fingerprint = 0;
};

/// Weight histogram over [0,1] with uniform bins.
struct MatchStats {
    std::vector<double> edges;  // bins + 1
    std::vector<std::size_t> counts;
    double mean = 0.0;
    std::vector<double> sorted_weights;

    /// Fraction of weights w with lo <= w <= hi.
    double fraction_in(double lo, double hi) const;
};

/// Offsets {0, stride, 2 stride, ...} plus a final flush-to-border offset, per axis.
std::vector<std::size_t> grid_offsets(std::size_t extent, std::size_t size, std::size_t stride);

/// Row-major Cartesian product of the row and column offsets.
std::vector<std::pair<std::size_t, std::size_t>> patch_grid(std::size_t h, std::size_t w,
                                                            std::size_t size, std::size_t stride);

/// Best HR patient for an LR volume, comparing pixel-wise mean images.
std::string match_patient(const Volume& lr, const Dataset& hr_set, const MatchConfig& cfg);

/// Best HR slice index for one LR slice, comparing whole slices.
std::size_t match_slice(const Image2D& lr_slice, const Volume& hr, const MatchConfig& cfg);

struct PatchChoice {
    std::size_t row = 0;
    std::size_t col = 0;
    double score = 0.0;
    double weight = 0.0;
};

/// Best grid window of `hr_slice` for `lr_patch` (cfg.patch_size must equal the patch size).
PatchChoice match_patch(const Image2D& lr_patch, const Image2D& hr_slice, const MatchConfig& cfg);

/// Score used for ranking candidates: the metric value, with a PCC that is undefined
/// because one side is constant counted as 0.
double match_score(const MatchConfig& cfg, ImageView a, ImageView b);

/// Three-level search per cfg.levels. Every LR grid patch yields one record
/// (no threshold applied). Queries run in parallel; output does not depend on
/// the thread count.
Manifest match_hierarchical(const Dataset& lr_set, const Dataset& hr_set, const MatchConfig& cfg);

/// Every HR patient, slice and grid window is a candidate for every LR patch.
Manifest match_exhaustive(const Dataset& lr_set, const Dataset& hr_set, const MatchConfig& cfg);

/// Keeps records with weight strictly greater than tau.
Manifest filter_threshold(const Manifest& m, double tau);

/// Throws on an empty manifest or bins == 0.
MatchStats weight_stats(const Manifest& m, std::size_t bins);
MatchStats weight_stats(const std::vector<double>& weights, std::size_t bins);

/// Weights of `count` uniformly drawn (LR grid patch, HR grid patch) pairs.
std::vector<double> random_pair_weights(const Dataset& lr_set, const Dataset& hr_set,
                                        const MatchConfig& cfg, std::size_t count,
                                        std::uint64_t seed);

/// Timestamp used for new manifests.
std::string manifest_timestamp();

namespace serial {
/// Single-threaded references without precomputed binning; identical output.
Manifest match_hierarchical(const Dataset& lr_set, const Dataset& hr_set, const MatchConfig& cfg);
Manifest match_exhaustive(const Dataset& lr_set, const Dataset& hr_set, const MatchConfig& cfg);
}  // namespace serial

}  // namespace qsr
