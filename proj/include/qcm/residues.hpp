#pragma once

#include <cstdint>
#include <vector>

#include "qcm/poly.hpp"

namespace qcm {

enum class Exec { serial, parallel };

inline constexpr std::uint64_t default_budget = 400'000'000ULL;

// Histogram of the value vector f(x) mod q over all x mod q.  The returned
// vector has q^R entries indexed by t_1 + t_2 q + ... + t_R q^{R-1}.
//
// When the variables of the system split into independent blocks (no term
// mixes blocks), each block is enumerated separately and the histograms are
// combined by additive convolution over (Z/q)^R.  That turns diagonal forms
// from q^n work into n q + q^{2R} work, which is what makes large-modulus
// local densities affordable.
std::vector<std::uint64_t> value_histogram(const PolySystem& s, std::int64_t q,
                                           std::uint64_t budget = default_budget,
                                           Exec exec = Exec::parallel);

// Serial reference without the split-block optimization; kept for tests and
// the benchmark target.
std::vector<std::uint64_t> value_histogram_reference(const PolySystem& s, std::int64_t q,
                                                     std::uint64_t budget = default_budget);

// Variable blocks used by the split path (union-find over shared terms).
std::vector<std::vector<int>> variable_blocks(const PolySystem& s);

} // namespace qcm
