#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qsr/patchmatch.hpp"

namespace qsr {

// Manifest file: one JSON header line
//   {"format":"qsr-manifest","version":1,"created":...,"record_count":N,
//    "filtered":bool,"lr_fingerprint":"<hex>","hr_fingerprint":"<hex>","config":{...}}
// followed by N record lines
//   {"lr":{"patient":..,"slice":..,"row":..,"col":..,"size":..},"hr":{...},"weight":w}
// with weights printed to 17 significant digits.

std::string format_record(const MatchRecord& r);
std::string format_header(const Manifest& m);

void write_manifest(const Manifest& m, const std::filesystem::path& path);
void write_manifest(const Manifest& m, std::ostream& out);

/// Throws Error naming the offending line on malformed or truncated input.
Manifest read_manifest(const std::filesystem::path& path);
Manifest read_manifest(std::istream& in, const std::string& source = "<stream>");

/// Human-readable warnings when the datasets do not match the recorded fingerprints.
std::vector<std::string> check_fingerprints(const Manifest& m, const Dataset& lr_set,
                                            const Dataset& hr_set);

/// CSV with header bin_lo,bin_hi,count.
void write_histogram_csv(const MatchStats& stats, const std::filesystem::path& path);

/// printf("%.17g") for finite values.
std::string format_real(double v);

}  // namespace qsr
