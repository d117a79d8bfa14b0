#include "qsr/resample.hpp"

#include "../resample_detail.hpp"

namespace qsr::serial {

Image2D gaussian_blur(const Image2D& img, double sigma) {
    const Kernel1D k = gaussian_kernel(sigma);
    const std::size_t h = img.height(), w = img.width();
    const auto r = static_cast<long long>(k.radius());

    Image2D tmp(h, w);
    for (std::size_t row = 0; row < h; ++row)
        for (std::size_t c = 0; c < w; ++c) {
            const double centre = img(row, c);
            double acc = 0;
            for (long long t = -r; t <= r; ++t)
                acc += k.taps[static_cast<std::size_t>(t + r)] *
                       (img(row, detail::reflect_index(static_cast<long long>(c) + t, w)) - centre);
            tmp(row, c) = centre + acc;
        }

    Image2D out(h, w);
    for (std::size_t row = 0; row < h; ++row)
        for (std::size_t c = 0; c < w; ++c) {
            const double centre = tmp(row, c);
            double acc = 0;
            for (long long t = -r; t <= r; ++t)
                acc += k.taps[static_cast<std::size_t>(t + r)] *
                       (tmp(detail::reflect_index(static_cast<long long>(row) + t, h), c) - centre);
            out(row, c) = centre + acc;
        }
    return out;
}

}  // namespace qsr::serial
