#include "qsr/image.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qsr {

Image2D::Image2D(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), data_(height * width, fill) {
    if (!std::isfinite(fill)) throw Error("image: non-finite fill value");
}

Image2D::Image2D(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != height_ * width_)
        throw Error("image: data length " + std::to_string(data_.size()) + " != " +
                    std::to_string(height_) + "x" + std::to_string(width_));
    for (double v : data_)
        if (!std::isfinite(v)) throw Error("image: non-finite value");
}

double Image2D::min() const {
    if (data_.empty()) throw Error("image: min of empty image");
    return *std::min_element(data_.begin(), data_.end());
}

double Image2D::max() const {
    if (data_.empty()) throw Error("image: max of empty image");
    return *std::max_element(data_.begin(), data_.end());
}

void Volume::validate() const {
    if (slices.empty()) throw Error("volume '" + patient_id + "': no slices");
    const auto& first = slices.front();
    if (first.empty()) throw Error("volume '" + patient_id + "': empty slice");
    for (std::size_t i = 1; i < slices.size(); ++i)
        if (!slices[i].same_shape(first))
            throw Error("volume '" + patient_id + "': slice " + std::to_string(i) +
                        " has a different shape");
}

const char* to_string(DatasetLabel label) { return label == DatasetLabel::LR ? "LR" : "HR"; }

Dataset::Dataset(DatasetLabel label, std::vector<Volume> volumes)
    : label_(label), volumes_(std::move(volumes)) {
    std::set<std::string> seen;
    for (const auto& v : volumes_) {
        v.validate();
        if (!seen.insert(v.patient_id).second)
            throw Error("dataset: duplicate patient id '" + v.patient_id + "'");
    }
    std::sort(volumes_.begin(), volumes_.end(),
              [](const Volume& a, const Volume& b) { return a.patient_id < b.patient_id; });
}

const Volume* Dataset::find(const std::string& patient_id) const {
    auto it = std::lower_bound(
        volumes_.begin(), volumes_.end(), patient_id,
        [](const Volume& v, const std::string& id) { return v.patient_id < id; });
    if (it == volumes_.end() || it->patient_id != patient_id) return nullptr;
    return &*it;
}

Image2D extract_patch(const Image2D& img, const PatchRef& ref) {
    if (ref.size == 0 || ref.row + ref.size > img.height() || ref.col + ref.size > img.width())
        throw Error("extract_patch: patch (" + std::to_string(ref.row) + "," +
                    std::to_string(ref.col) + ",size=" + std::to_string(ref.size) +
                    ") out of bounds for " + std::to_string(img.height()) + "x" +
                    std::to_string(img.width()) + " image");
    std::vector<double> out;
    out.reserve(ref.size * ref.size);
    for (std::size_t i = 0; i < ref.size; ++i) {
        const auto row = img.data().subspan((ref.row + i) * img.width() + ref.col, ref.size);
        out.insert(out.end(), row.begin(), row.end());
    }
    return Image2D(ref.size, ref.size, std::move(out));
}

Image2D mean_image(const Volume& v) {
    v.validate();
    Image2D out(v.height(), v.width());
    auto acc = out.data();
    for (const auto& s : v.slices) {
        auto d = s.data();
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += d[k];
    }
    const double n = static_cast<double>(v.slices.size());
    for (double& a : acc) a /= n;
    return out;
}

}  // namespace qsr
