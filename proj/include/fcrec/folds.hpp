#pragma once

#include <cstdint>
#include <vector>

#include "fcrec/ratings.hpp"

namespace fcrec {

struct Fold {
    RatingsMatrix train;
    std::vector<Rating> test;  // sorted by (user, item)
};

struct FoldSplit {
    int fold_count = 0;
    std::vector<Fold> folds;
};

// Seeded shuffle of all rating entries, partitioned into k near-equal test
// folds; fold i trains on everything outside partition i. Identical
// (matrix, k, seed) always yields identical folds.
FoldSplit split_folds(const RatingsMatrix& matrix, int k, std::uint64_t seed);

}  // namespace fcrec
