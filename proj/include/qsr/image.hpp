#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsr {

/// Raised for any violated precondition or malformed input.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Addressable square patch inside one slice of one patient volume.
struct PatchRef {
    std::string patient_id;
    std::size_t slice_index = 0;
    std::size_t row = 0;
    std::size_t col = 0;
    std::size_t size = 0;

    friend bool operator==(const PatchRef&, const PatchRef&) = default;
    friend auto operator<=>(const PatchRef&, const PatchRef&) = default;
};

/// Non-owning, possibly strided, read-only window onto image data.
class ImageView {
public:
    ImageView() = default;
    ImageView(const double* data, std::size_t height, std::size_t width, std::size_t stride)
        : data_(data), height_(height), width_(width), stride_(stride) {}

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t size() const { return height_ * width_; }
    std::size_t stride() const { return stride_; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * stride_ + c]; }
    const double* row(std::size_t r) const { return data_ + r * stride_; }

    /// Sub-window; the caller guarantees bounds.
    ImageView window(std::size_t r, std::size_t c, std::size_t h, std::size_t w) const {
        return ImageView(data_ + r * stride_ + c, h, w, stride_);
    }

private:
    const double* data_ = nullptr;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t stride_ = 0;
};

/// Row-major grid of finite intensities.
class Image2D {
public:
    Image2D() = default;
    Image2D(std::size_t height, std::size_t width, double fill = 0.0);
    /// Throws if data.size() != height*width or any value is non-finite.
    Image2D(std::size_t height, std::size_t width, std::vector<double> data);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * width_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * width_ + c]; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    ImageView view() const { return ImageView(data_.data(), height_, width_, width_); }
    operator ImageView() const { return view(); }

    bool same_shape(const Image2D& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

    double min() const;
    double max() const;

    friend bool operator==(const Image2D&, const Image2D&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

/// Ordered slices of one patient, all of one shape.
struct Volume {
    std::string patient_id;
    std::vector<Image2D> slices;

    std::size_t height() const { return slices.front().height(); }
    std::size_t width() const { return slices.front().width(); }

    /// Throws unless there is at least one slice and all slices share a shape.
    void validate() const;

    friend bool operator==(const Volume&, const Volume&) = default;
};

enum class DatasetLabel { LR, HR };

const char* to_string(DatasetLabel label);

/// Set of patient volumes with unique ids, kept sorted by patient id.
class Dataset {
public:
    Dataset() = default;
    Dataset(DatasetLabel label, std::vector<Volume> volumes);

    DatasetLabel label() const { return label_; }
    const std::vector<Volume>& volumes() const { return volumes_; }
    std::size_t size() const { return volumes_.size(); }
    bool empty() const { return volumes_.empty(); }
    const Volume& operator[](std::size_t i) const { return volumes_[i]; }

    /// Nullptr when absent.
    const Volume* find(const std::string& patient_id) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    DatasetLabel label_ = DatasetLabel::LR;
    std::vector<Volume> volumes_;
};

/// Copies the size x size window at (ref.row, ref.col). Throws when out of bounds.
Image2D extract_patch(const Image2D& img, const PatchRef& ref);

/// Pixel-wise mean over all slices.
Image2D mean_image(const Volume& v);

}  // namespace qsr
