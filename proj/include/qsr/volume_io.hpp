#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "qsr/image.hpp"

namespace qsr {

// On-disk volume: `<name>.vol` holds little-endian float32 samples, row-major
// within a slice, slices concatenated. `<name>.vol.json` is the sidecar header
// {"patient_id", "height", "width", "slices"}.
//
// Samples are stored as float32, so save/load is bit-exact for volumes whose
// values are representable in single precision (everything loaded from disk or
// produced by the phantom generator). Other values are rounded to nearest.

Volume load_volume(const std::filesystem::path& path);
void save_volume(const Volume& v, const std::filesystem::path& path);

/// Loads every `*.vol` file in `dir`.
Dataset load_dataset(const std::filesystem::path& dir, DatasetLabel label);
/// Writes `<dir>/<patient_id>.vol` for each volume, creating `dir` if needed.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

/// Min-max rescale over the whole volume to [0,1]. A constant volume maps to zeros.
Volume normalize_volume(const Volume& v);

/// 16-bit binary PGM of one slice; [0,1] maps linearly to [0,65535], clamped.
void write_pgm16(const Image2D& img, const std::filesystem::path& path);

/// 64-bit FNV-1a over patient ids, shapes and sample bits, in patient order.
std::uint64_t fingerprint(const Dataset& ds);

/// Rounds every sample to the nearest float32 value.
Image2D quantize_to_float(const Image2D& img);

}  // namespace qsr
