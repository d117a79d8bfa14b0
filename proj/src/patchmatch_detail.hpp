#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "qsr/patchmatch.hpp"

namespace qsr::detail {

/// Common slice shape of both datasets after validating cfg against it.
std::pair<std::size_t, std::size_t> check_match_inputs(const Dataset& lr_set, const Dataset& hr_set,
                                                       const MatchConfig& cfg);

Manifest make_manifest(std::vector<MatchRecord> records, const Dataset& lr_set,
                       const Dataset& hr_set, const MatchConfig& cfg);

PatchRef make_ref(const Volume& v, std::size_t slice, std::size_t row, std::size_t col,
                  std::size_t size);

}  // namespace qsr::detail
