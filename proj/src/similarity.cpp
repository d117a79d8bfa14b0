#include "qsr/similarity.hpp"

#include <algorithm>
#include <cmath>

namespace qsr {

namespace {

void require_same_shape(ImageView x, ImageView y, const char* who) {
    if (x.height() != y.height() || x.width() != y.width())
        throw Error(std::string(who) + ": dimension mismatch " + std::to_string(x.height()) + "x" +
                    std::to_string(x.width()) + " vs " + std::to_string(y.height()) + "x" +
                    std::to_string(y.width()));
    if (x.size() == 0) throw Error(std::string(who) + ": empty input");
}

double entropy_of_counts(std::span<const std::uint64_t> counts, std::uint64_t total) {
    const double n = static_cast<double>(total);
    double h = 0;
    // p ln(n/c) with the same rounding as the diagonal terms of mutual_information,
    // so identical inputs give an NMI of exactly 1.
    for (auto c : counts)
        if (c > 0) {
            const double cd = static_cast<double>(c);
            h += cd / n * std::log((cd * n) / (cd * cd));
        }
    return h;
}

}  // namespace

void HistogramSpec::validate() const {
    if (bins < 2) throw Error("histogram: need at least 2 bins");
    if (bins > 65535) throw Error("histogram: too many bins");
    if (!(hi > lo)) throw Error("histogram: degenerate range");
}

std::uint16_t HistogramSpec::bin_of(double v) const {
    const double t = (v - lo) / (hi - lo) * static_cast<double>(bins);
    if (!(t > 0)) return 0;
    if (t >= static_cast<double>(bins)) return static_cast<std::uint16_t>(bins - 1);
    return static_cast<std::uint16_t>(t);
}

std::vector<double> JointHistogram::marginal_x() const {
    std::vector<double> p(bins, 0.0);
    for (std::size_t i = 0; i < bins; ++i) {
        std::uint64_t s = 0;
        for (std::size_t j = 0; j < bins; ++j) s += at(i, j);
        p[i] = static_cast<double>(s) / static_cast<double>(total);
    }
    return p;
}

std::vector<double> JointHistogram::marginal_y() const {
    std::vector<double> p(bins, 0.0);
    for (std::size_t j = 0; j < bins; ++j) {
        std::uint64_t s = 0;
        for (std::size_t i = 0; i < bins; ++i) s += at(i, j);
        p[j] = static_cast<double>(s) / static_cast<double>(total);
    }
    return p;
}

double RbfParams::resolve(std::size_t pixels) const {
    return gamma > 0 ? gamma : std::sqrt(static_cast<double>(pixels)) / 2.0;
}

const char* to_string(SimilarityKind kind) {
    switch (kind) {
        case SimilarityKind::NMI: return "nmi";
        case SimilarityKind::PCC: return "pcc";
        case SimilarityKind::RBF: return "rbf";
    }
    return "?";
}

SimilarityKind similarity_kind_from_string(const std::string& s) {
    if (s == "nmi") return SimilarityKind::NMI;
    if (s == "pcc") return SimilarityKind::PCC;
    if (s == "rbf") return SimilarityKind::RBF;
    throw Error("unknown similarity metric '" + s + "'");
}

BinnedImage::BinnedImage(ImageView img, const HistogramSpec& spec)
    : height_(img.height()), width_(img.width()), bins_(spec.bins), data_(img.size()) {
    spec.validate();
    for (std::size_t r = 0; r < height_; ++r)
        for (std::size_t c = 0; c < width_; ++c) data_[r * width_ + c] = spec.bin_of(img(r, c));
}

JointHistogram joint_histogram(const BinnedView& x, const BinnedView& y) {
    if (x.height != y.height || x.width != y.width)
        throw Error("joint_histogram: dimension mismatch");
    if (x.image->bins() != y.image->bins()) throw Error("joint_histogram: bin count mismatch");
    JointHistogram h;
    h.bins = x.image->bins();
    h.counts.assign(h.bins * h.bins, 0);
    for (std::size_t r = 0; r < x.height; ++r) {
        const std::uint16_t* bx = x.image->row(x.row + r) + x.col;
        const std::uint16_t* by = y.image->row(y.row + r) + y.col;
        for (std::size_t c = 0; c < x.width; ++c) ++h.counts[bx[c] * h.bins + by[c]];
    }
    h.total = x.height * x.width;
    return h;
}

JointHistogram joint_histogram(ImageView x, ImageView y, const HistogramSpec& spec) {
    require_same_shape(x, y, "joint_histogram");
    const BinnedImage bx(x, spec), by(y, spec);
    return joint_histogram(BinnedView::whole(bx), BinnedView::whole(by));
}

double entropy(std::span<const double> p) {
    if (p.empty()) throw Error("entropy: empty distribution");
    double sum = 0;
    for (double v : p) {
        if (!(v >= 0) || !std::isfinite(v)) throw Error("entropy: negative or non-finite probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("entropy: probabilities sum to " + std::to_string(sum));
    double h = 0;
    for (double v : p)
        if (v > 0) h -= v * std::log(v);
    return h;
}

double mutual_information(const JointHistogram& h) {
    if (h.total == 0) throw Error("mutual_information: empty histogram");
    std::vector<std::uint64_t> mx(h.bins, 0), my(h.bins, 0);
    for (std::size_t i = 0; i < h.bins; ++i)
        for (std::size_t j = 0; j < h.bins; ++j) {
            mx[i] += h.at(i, j);
            my[j] += h.at(i, j);
        }
    const double n = static_cast<double>(h.total);
    auto term = [&](std::size_t i, std::size_t j) {
        const auto c = h.at(i, j);
        if (c == 0) return 0.0;
        const double ratio = (static_cast<double>(c) * n) /
                             (static_cast<double>(mx[i]) * static_cast<double>(my[j]));
        return static_cast<double>(c) / n * std::log(ratio);
    };
    // Cells (i,j) and (j,i) are added as a pair so that transposing the
    // histogram (swapping x and y) reproduces the same sum bit for bit.
    double mi = 0;
    for (std::size_t i = 0; i < h.bins; ++i) {
        mi += term(i, i);
        for (std::size_t j = i + 1; j < h.bins; ++j) mi += term(i, j) + term(j, i);
    }
    return mi;
}

double nmi(const JointHistogram& h) {
    if (h.total == 0) throw Error("nmi: empty histogram");
    std::vector<std::uint64_t> mx(h.bins, 0), my(h.bins, 0);
    for (std::size_t i = 0; i < h.bins; ++i)
        for (std::size_t j = 0; j < h.bins; ++j) {
            mx[i] += h.at(i, j);
            my[j] += h.at(i, j);
        }
    const double hsum = entropy_of_counts(mx, h.total) + entropy_of_counts(my, h.total);
    if (hsum <= 0) return 0.0;
    const double v = 2.0 * mutual_information(h) / hsum;
    // plug-in MI can exceed the entropies by rounding only
    return std::clamp(v, 0.0, 1.0);
}

double nmi(const BinnedView& x, const BinnedView& y) { return nmi(joint_histogram(x, y)); }

double nmi(ImageView x, ImageView y, const HistogramSpec& spec) {
    return nmi(joint_histogram(x, y, spec));
}

double pcc(ImageView x, ImageView y) {
    require_same_shape(x, y, "pcc");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    bool x_varies = false, y_varies = false;
    for (std::size_t r = 0; r < x.height(); ++r) {
        const double* px = x.row(r);
        const double* py = y.row(r);
        for (std::size_t c = 0; c < x.width(); ++c) {
            sx += px[c];
            sy += py[c];
            x_varies = x_varies || px[c] != x(0, 0);
            y_varies = y_varies || py[c] != y(0, 0);
        }
    }
    if (!x_varies || !y_varies) throw Error("pcc: zero variance");
    const double mx = sx / n, my = sy / n;
    double vxx = 0, vyy = 0, vxy = 0;
    for (std::size_t r = 0; r < x.height(); ++r) {
        const double* px = x.row(r);
        const double* py = y.row(r);
        for (std::size_t c = 0; c < x.width(); ++c) {
            const double dx = px[c] - mx, dy = py[c] - my;
            vxx += dx * dx;
            vyy += dy * dy;
            vxy += dx * dy;
        }
    }
    if (!(vxx > 0) || !(vyy > 0)) throw Error("pcc: zero variance");
    const double r = vxy / std::sqrt(vxx * vyy);
    return std::clamp(r, -1.0, 1.0);
}

double rbf(ImageView x, ImageView y, const RbfParams& p) {
    require_same_shape(x, y, "rbf");
    const double gamma = p.resolve(x.size());
    double d2 = 0;
    for (std::size_t r = 0; r < x.height(); ++r) {
        const double* px = x.row(r);
        const double* py = y.row(r);
        for (std::size_t c = 0; c < x.width(); ++c) {
            const double d = px[c] - py[c];
            d2 += d * d;
        }
    }
    return std::exp(-d2 / (2.0 * gamma * gamma));
}

double similarity(SimilarityKind kind, ImageView x, ImageView y, const SimilarityParams& params) {
    switch (kind) {
        case SimilarityKind::NMI: return nmi(x, y, params.hist);
        case SimilarityKind::PCC: return pcc(x, y);
        case SimilarityKind::RBF: return rbf(x, y, params.rbf);
    }
    throw Error("similarity: unknown kind");
}

double to_weight(SimilarityKind kind, double score) {
    switch (kind) {
        case SimilarityKind::NMI:
        case SimilarityKind::RBF: return score;
        case SimilarityKind::PCC: return std::max(0.0, score);
    }
    return 0.0;
}

}  // namespace qsr
