#include "fcrec/folds.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace fcrec {

namespace {

// Fisher-Yates with explicit draws so the shuffle does not depend on the
// standard library's std::shuffle implementation.
void shuffle_indices(std::vector<std::size_t>& idx, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace

FoldSplit split_folds(const RatingsMatrix& matrix, int k, std::uint64_t seed) {
    const std::size_t n = matrix.n_entries();
    if (k < 2)
        throw std::invalid_argument("fold count must be at least 2, got " + std::to_string(k));
    if (n == 0)
        throw std::invalid_argument("cannot split an empty rating matrix");
    if (static_cast<std::size_t>(k) > n)
        throw std::invalid_argument("fold count " + std::to_string(k) + " exceeds entry count " +
                                    std::to_string(n));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle_indices(order, seed);

    // fold_of[e] = which test partition entry e lands in
    std::vector<int> fold_of(n);
    for (int f = 0; f < k; ++f) {
        std::size_t lo = n * static_cast<std::size_t>(f) / k;
        std::size_t hi = n * static_cast<std::size_t>(f + 1) / k;
        for (std::size_t pos = lo; pos < hi; ++pos) fold_of[order[pos]] = f;
    }

    const auto& entries = matrix.entries();
    FoldSplit split;
    split.fold_count = k;
    split.folds.resize(k);
    for (int f = 0; f < k; ++f) {
        std::vector<Rating> train_entries;
        std::vector<Rating>& test = split.folds[f].test;
        train_entries.reserve(n - n / k);
        for (std::size_t e = 0; e < n; ++e) {
            if (fold_of[e] == f)
                test.push_back(entries[e]);
            else
                train_entries.push_back(entries[e]);
        }
        std::sort(test.begin(), test.end(), [](const Rating& a, const Rating& b) {
            return a.user != b.user ? a.user < b.user : a.item < b.item;
        });
        split.folds[f].train = RatingsMatrix::from_parts(
            matrix.scale(), matrix.user_ids(), matrix.item_ids(), std::move(train_entries));
    }
    return split;
}

}  // namespace fcrec
