#pragma once

#include "agsr/dataset.hpp"

#include <cstdint>

namespace agsr {

// Deterministic synthetic corpus: n artworks with seeded gold affect labels
// and gold salience vectors. Stands in for real artworks in end-to-end
// verification; no images are involved.
Dataset make_synthetic_dataset(std::size_t n, std::uint64_t seed);

} // namespace agsr
