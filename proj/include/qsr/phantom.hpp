#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include "qsr/image.hpp"

namespace qsr {

/// Synthetic brain-like phantoms: a skull ring around a soft tissue disc with
/// smooth elliptical blobs whose parameters drift linearly across slices.
struct PhantomSpec {
    std::uint64_t seed = 1;
    std::size_t patients = 4;
    std::size_t slices_per_patient = 8;
    std::size_t size = 256;
    std::size_t min_blobs = 4;
    std::size_t max_blobs = 8;
    double min_radius = 0.04;  // fraction of size
    double max_radius = 0.14;
    double min_intensity = 0.25;
    double max_intensity = 0.9;

    void validate() const;
};

/// Deterministic in the seed; values in [0,1] and exactly representable as float32.
Dataset generate_dataset(const PhantomSpec& spec, DatasetLabel label = DatasetLabel::HR);

/// Two datasets with the same patient ids; the second jitters every shape parameter
/// of the first by `perturbation` (a fraction of each parameter's range). The jitter
/// directions do not depend on `perturbation`, and 0 yields an exact copy.
std::pair<Dataset, Dataset> generate_similar_pair(const PhantomSpec& spec, double perturbation);

}  // namespace qsr
