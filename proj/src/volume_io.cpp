#include "qsr/volume_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "json.hpp"

namespace qsr {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path header_path(const fs::path& p) { return fs::path(p.string() + ".json"); }

std::uint32_t to_little(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

std::size_t read_dim(const json& h, const char* key, const fs::path& path) {
    if (!h.contains(key) || !h[key].is_number_integer() || h[key].get<long long>() < 1)
        throw Error(path.string() + ": header field '" + key + "' missing or not a positive integer");
    return static_cast<std::size_t>(h[key].get<long long>());
}

}  // namespace

Volume load_volume(const fs::path& path) {
    const fs::path hpath = header_path(path);
    std::ifstream hin(hpath);
    if (!hin) throw Error(hpath.string() + ": cannot open header");
    json h;
    try {
        h = json::parse(hin);
    } catch (const json::exception& e) {
        throw Error(hpath.string() + ": malformed header: " + e.what());
    }
    if (!h.is_object() || !h.contains("patient_id") || !h["patient_id"].is_string())
        throw Error(hpath.string() + ": header field 'patient_id' missing or not a string");
    const std::size_t height = read_dim(h, "height", hpath);
    const std::size_t width = read_dim(h, "width", hpath);
    const std::size_t slices = read_dim(h, "slices", hpath);

    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(path.string() + ": cannot open payload");
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::uintmax_t>(in.tellg());
    in.seekg(0);
    const std::uintmax_t expected = std::uintmax_t{height} * width * slices * 4;
    if (bytes != expected)
        throw Error(path.string() + ": length mismatch: payload has " + std::to_string(bytes) +
                    " bytes, header implies " + std::to_string(expected));

    Volume v;
    v.patient_id = h["patient_id"].get<std::string>();
    v.slices.reserve(slices);
    std::vector<std::uint32_t> raw(height * width);
    for (std::size_t s = 0; s < slices; ++s) {
        in.read(reinterpret_cast<char*>(raw.data()),
                static_cast<std::streamsize>(raw.size() * sizeof(std::uint32_t)));
        if (!in) throw Error(path.string() + ": short read in slice " + std::to_string(s));
        std::vector<double> px(raw.size());
        for (std::size_t k = 0; k < raw.size(); ++k) {
            const float f = std::bit_cast<float>(to_little(raw[k]));
            if (!std::isfinite(f))
                throw Error(path.string() + ": non-finite value in slice " + std::to_string(s));
            px[k] = f;
        }
        v.slices.emplace_back(height, width, std::move(px));
    }
    return v;
}

void save_volume(const Volume& v, const fs::path& path) {
    v.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path.string() + ": cannot open for writing");
    std::vector<std::uint32_t> raw(v.height() * v.width());
    for (const auto& s : v.slices) {
        auto d = s.data();
        for (std::size_t k = 0; k < raw.size(); ++k)
            raw[k] = to_little(std::bit_cast<std::uint32_t>(static_cast<float>(d[k])));
        out.write(reinterpret_cast<const char*>(raw.data()),
                  static_cast<std::streamsize>(raw.size() * sizeof(std::uint32_t)));
    }
    if (!out) throw Error(path.string() + ": write failed");

    const json h = {{"patient_id", v.patient_id},
                    {"height", v.height()},
                    {"width", v.width()},
                    {"slices", v.slices.size()}};
    std::ofstream hout(header_path(path), std::ios::trunc);
    if (!hout) throw Error(header_path(path).string() + ": cannot open for writing");
    hout << h.dump(2) << '\n';
    if (!hout) throw Error(header_path(path).string() + ": write failed");
}

Dataset load_dataset(const fs::path& dir, DatasetLabel label) {
    if (!fs::is_directory(dir)) throw Error(dir.string() + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".vol")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(dir.string() + ": no .vol files");
    std::vector<Volume> volumes;
    volumes.reserve(files.size());
    for (const auto& f : files) volumes.push_back(load_volume(f));
    return Dataset(label, std::move(volumes));
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(dir.string() + ": " + ec.message());
    for (const auto& v : ds.volumes()) save_volume(v, dir / (v.patient_id + ".vol"));
}

Volume normalize_volume(const Volume& v) {
    v.validate();
    double lo = v.slices.front().min();
    double hi = v.slices.front().max();
    for (const auto& s : v.slices) {
        lo = std::min(lo, s.min());
        hi = std::max(hi, s.max());
    }
    Volume out{v.patient_id, {}};
    out.slices.reserve(v.slices.size());
    const double range = hi - lo;
    for (const auto& s : v.slices) {
        Image2D n(s.height(), s.width());
        auto src = s.data();
        auto dst = n.data();
        if (range > 0)
            for (std::size_t k = 0; k < src.size(); ++k) dst[k] = (src[k] - lo) / range;
        out.slices.push_back(std::move(n));
    }
    return out;
}

void write_pgm16(const Image2D& img, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path.string() + ": cannot open for writing");
    out << "P5\n" << img.width() << ' ' << img.height() << "\n65535\n";
    std::vector<unsigned char> buf(img.size() * 2);
    auto d = img.data();
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double c = std::clamp(d[k], 0.0, 1.0);
        const auto q = static_cast<std::uint16_t>(std::lround(c * 65535.0));
        buf[2 * k] = static_cast<unsigned char>(q >> 8);  // PGM is big-endian
        buf[2 * k + 1] = static_cast<unsigned char>(q & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error(path.string() + ": write failed");
}

std::uint64_t fingerprint(const Dataset& ds) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& v : ds.volumes()) {
        mix(v.patient_id.data(), v.patient_id.size());
        const std::uint64_t dims[3] = {v.slices.size(), v.height(), v.width()};
        mix(dims, sizeof dims);
        for (const auto& s : v.slices)
            for (double x : s.data()) {
                const auto bits = std::bit_cast<std::uint64_t>(x);
                mix(&bits, sizeof bits);
            }
    }
    return h;
}

Image2D quantize_to_float(const Image2D& img) {
    Image2D out = img;
    for (double& x : out.data()) x = static_cast<float>(x);
    return out;
}

}  // namespace qsr
