#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qsr/image.hpp"

namespace qsr {

/// Uniform binning of [lo, hi]; values outside land in the edge bins.
struct HistogramSpec {
    std::size_t bins = 64;
    double lo = 0.0;
    double hi = 1.0;

    void validate() const;
    std::uint16_t bin_of(double v) const;
};

struct JointHistogram {
    std::size_t bins = 0;
    std::vector<std::uint64_t> counts;  // bins x bins, row index = x bin
    std::uint64_t total = 0;

    std::uint64_t at(std::size_t i, std::size_t j) const { return counts[i * bins + j]; }
    std::vector<double> marginal_x() const;
    std::vector<double> marginal_y() const;
};

/// gamma <= 0 selects the default sqrt(N)/2 for N-pixel inputs.
struct RbfParams {
    double gamma = 0.0;

    double resolve(std::size_t pixels) const;
};

enum class SimilarityKind { NMI, PCC, RBF };

const char* to_string(SimilarityKind kind);
SimilarityKind similarity_kind_from_string(const std::string& s);

struct SimilarityParams {
    HistogramSpec hist;
    RbfParams rbf;
};

/// Per-pixel bin indices of an image, laid out like the image.
class BinnedImage {
public:
    BinnedImage() = default;
    BinnedImage(ImageView img, const HistogramSpec& spec);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t bins() const { return bins_; }
    const std::uint16_t* row(std::size_t r) const { return data_.data() + r * width_; }

private:
    std::size_t height_ = 0, width_ = 0, bins_ = 0;
    std::vector<std::uint16_t> data_;
};

/// Window of a BinnedImage.
struct BinnedView {
    const BinnedImage* image = nullptr;
    std::size_t row = 0, col = 0, height = 0, width = 0;

    static BinnedView whole(const BinnedImage& b) { return {&b, 0, 0, b.height(), b.width()}; }
};

JointHistogram joint_histogram(ImageView x, ImageView y, const HistogramSpec& spec);
JointHistogram joint_histogram(const BinnedView& x, const BinnedView& y);

/// Shannon entropy in nats; 0 ln 0 := 0. Throws unless p is a distribution (sum 1 +- 1e-9).
double entropy(std::span<const double> p);

/// Plug-in mutual information in nats.
double mutual_information(const JointHistogram& h);

/// 2 I(x,y) / (H(x) + H(y)); 0 when both marginals are degenerate.
double nmi(const JointHistogram& h);
double nmi(ImageView x, ImageView y, const HistogramSpec& spec = {});
double nmi(const BinnedView& x, const BinnedView& y);

/// Pearson correlation with population statistics. Throws on zero variance.
double pcc(ImageView x, ImageView y);

/// exp(-||x - y||^2 / (2 gamma^2)).
double rbf(ImageView x, ImageView y, const RbfParams& p = {});

double similarity(SimilarityKind kind, ImageView x, ImageView y, const SimilarityParams& params = {});

/// Maps a raw score onto [0,1]: NMI and RBF pass through, PCC is clamped at 0.
double to_weight(SimilarityKind kind, double score);

}  // namespace qsr
