#include "qsr/manifest.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qsr/volume_io.hpp"

namespace qsr {
using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

std::string format_ref(const PatchRef& r) {
    return "{\"patient\":" + json(r.patient_id).dump() + ",\"slice\":" + std::to_string(r.slice_index) +
           ",\"row\":" + std::to_string(r.row) + ",\"col\":" + std::to_string(r.col) +
           ",\"size\":" + std::to_string(r.size) + "}";
}

std::size_t get_index(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw Error(std::string("field '") + key + "' is not a non-negative integer");
    return v.get<std::size_t>();
}

PatchRef parse_ref(const json& j) {
    if (!j.is_object()) throw Error("patch reference is not an object");
    const auto& p = j.at("patient");
    if (!p.is_string()) throw Error("field 'patient' is not a string");
    return {p.get<std::string>(), get_index(j, "slice"), get_index(j, "row"), get_index(j, "col"),
            get_index(j, "size")};
}

json config_json(const MatchConfig& c) {
    return {{"patch_size", c.patch_size},
            {"stride", c.stride},
            {"metric", to_string(c.metric)},
            {"bins", c.hist.bins},
            {"range", {c.hist.lo, c.hist.hi}},
            {"rbf_gamma", c.rbf.gamma},
            {"threshold", c.threshold},
            {"levels", to_string(c.levels)}};
}

MatchConfig parse_config(const json& j) {
    MatchConfig c;
    c.patch_size = get_index(j, "patch_size");
    c.stride = get_index(j, "stride");
    c.metric = similarity_kind_from_string(j.at("metric").get<std::string>());
    c.hist.bins = get_index(j, "bins");
    c.hist.lo = j.at("range").at(0).get<double>();
    c.hist.hi = j.at("range").at(1).get<double>();
    c.rbf.gamma = j.at("rbf_gamma").get<double>();
    c.threshold = j.at("threshold").get<double>();
    c.levels = match_levels_from_string(j.at("levels").get<std::string>());
    return c;
}

std::uint64_t parse_hex(const json& j) {
    const auto s = j.get<std::string>();
    std::size_t used = 0;
    const auto v = std::stoull(s, &used, 16);
    if (used != s.size()) throw Error("bad fingerprint '" + s + "'");
    return v;
}

}  // namespace

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_record(const MatchRecord& r) {
    return "{\"lr\":" + format_ref(r.lr) + ",\"hr\":" + format_ref(r.hr) +
           ",\"weight\":" + format_real(r.weight) + "}";
}

std::string format_header(const Manifest& m) {
    // key order is fixed by hand so the header bytes are stable
    return "{\"format\":\"qsr-manifest\",\"version\":1,\"created\":" + json(m.created).dump() +
           ",\"record_count\":" + std::to_string(m.records.size()) +
           ",\"filtered\":" + (m.filtered ? "true" : "false") + ",\"lr_fingerprint\":\"" +
           hex64(m.lr_fingerprint) + "\",\"hr_fingerprint\":\"" + hex64(m.hr_fingerprint) +
           "\",\"config\":" + config_json(m.config).dump() + "}";
}

void write_manifest(const Manifest& m, std::ostream& out) {
    out << format_header(m) << '\n';
    for (const auto& r : m.records) out << format_record(r) << '\n';
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(path.string() + ": cannot open for writing");
    write_manifest(m, out);
    if (!out) throw Error(path.string() + ": write failed");
}

Manifest read_manifest(std::istream& in, const std::string& source) {
    Manifest m;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& what) -> Error {
        return Error(source + ":" + std::to_string(lineno) + ": " + what);
    };

    if (!std::getline(in, line)) throw Error(source + ": empty manifest (missing header)");
    ++lineno;
    std::size_t expected = 0;
    try {
        const json h = json::parse(line);
        if (h.at("format") != "qsr-manifest") throw Error("not a qsr manifest");
        if (h.at("version") != 1) throw Error("unsupported manifest version");
        m.created = h.at("created").get<std::string>();
        expected = get_index(h, "record_count");
        m.filtered = h.at("filtered").get<bool>();
        m.lr_fingerprint = parse_hex(h.at("lr_fingerprint"));
        m.hr_fingerprint = parse_hex(h.at("hr_fingerprint"));
        m.config = parse_config(h.at("config"));
    } catch (const std::exception& e) {
        throw fail(std::string("malformed header: ") + e.what());
    }

    m.records.reserve(expected);
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            MatchRecord r{parse_ref(j.at("lr")), parse_ref(j.at("hr")), 0.0};
            const auto& w = j.at("weight");
            if (!w.is_number()) throw Error("field 'weight' is not a number");
            r.weight = w.get<double>();
            if (!(r.weight >= 0.0 && r.weight <= 1.0)) throw Error("weight outside [0,1]");
            if (!m.records.empty() && !(m.records.back().lr < r.lr))
                throw Error("records not sorted by lr reference or duplicated");
            m.records.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw fail(std::string("malformed record: ") + e.what());
        }
    }
    if (m.records.size() != expected)
        throw Error(source + ":" + std::to_string(lineno + 1) + ": truncated manifest: header declares " +
                    std::to_string(expected) + " records, found " + std::to_string(m.records.size()));
    return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(path.string() + ": cannot open manifest");
    return read_manifest(in, path.string());
}

std::vector<std::string> check_fingerprints(const Manifest& m, const Dataset& lr_set,
                                            const Dataset& hr_set) {
    std::vector<std::string> warnings;
    if (const auto f = fingerprint(lr_set); f != m.lr_fingerprint)
        warnings.push_back("LR dataset fingerprint " + hex64(f) + " differs from manifest " +
                           hex64(m.lr_fingerprint));
    if (const auto f = fingerprint(hr_set); f != m.hr_fingerprint)
        warnings.push_back("HR dataset fingerprint " + hex64(f) + " differs from manifest " +
                           hex64(m.hr_fingerprint));
    return warnings;
}

void write_histogram_csv(const MatchStats& stats, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(path.string() + ": cannot open for writing");
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < stats.counts.size(); ++i)
        out << format_real(stats.edges[i]) << ',' << format_real(stats.edges[i + 1]) << ','
            << stats.counts[i] << '\n';
    if (!out) throw Error(path.string() + ": write failed");
}

}  // namespace qsr
