#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace fcrec {

// Thrown for structurally broken input (wrong field count, non-integer field).
struct ParseError : std::runtime_error {
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

// Thrown for well-formed input that violates data constraints
// (rating out of scale, duplicate user/item pair).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RatingScale {
    int min = 1;
    int max = 5;

    double median() const { return (min + max) / 2.0; }
    bool contains(int r) const { return r >= min && r <= max; }
};

// One rating with dense user/item indices.
struct Rating {
    int user;
    int item;
    int value;

    friend bool operator==(const Rating&, const Rating&) = default;
};

struct ItemRating {
    int item;
    int value;
};

struct UserProfile {
    double mean = 0.0;
    double stddev = 0.0;   // population form, divisor = number of rated items
    int n_rated = 0;
    bool empty = false;    // no ratings; mean substituted with scale midpoint
};

struct ItemStats {
    double mean = 0.0;
    int n_raters = 0;
    bool empty = false;
};

// Sparse user x item rating matrix with dense indices and the raw-id maps
// retained from ingestion. Immutable after construction.
class RatingsMatrix {
public:
    RatingsMatrix() = default;

    static RatingsMatrix from_parts(RatingScale scale,
                                    std::vector<int> user_ids,
                                    std::vector<int> item_ids,
                                    std::vector<Rating> entries);

    int n_users() const { return static_cast<int>(user_ids_.size()); }
    int n_items() const { return static_cast<int>(item_ids_.size()); }
    std::size_t n_entries() const { return entries_.size(); }
    const RatingScale& scale() const { return scale_; }

    const std::vector<Rating>& entries() const { return entries_; }

    // Ratings of one user, sorted by item index.
    std::span<const ItemRating> ratings_of(int user) const {
        return {by_user_[user].data(), by_user_[user].size()};
    }

    std::optional<int> rating(int user, int item) const;

    // Dense index <-> raw dataset id.
    int user_id(int index) const { return user_ids_[index]; }
    int item_id(int index) const { return item_ids_[index]; }
    std::optional<int> user_index(int raw_id) const;
    std::optional<int> item_index(int raw_id) const;

    const std::vector<int>& user_ids() const { return user_ids_; }
    const std::vector<int>& item_ids() const { return item_ids_; }

private:
    RatingScale scale_;
    std::vector<Rating> entries_;
    std::vector<std::vector<ItemRating>> by_user_;
    std::vector<int> user_ids_;
    std::vector<int> item_ids_;
    std::unordered_map<int, int> user_index_;
    std::unordered_map<int, int> item_index_;
};

// Reads tab-separated lines "user<TAB>item<TAB>rating<TAB>timestamp".
// Raw ids are remapped to dense indices in order of first appearance;
// timestamps are discarded.
RatingsMatrix parse_movielens(const std::string& path, RatingScale scale = {});
RatingsMatrix parse_movielens_text(const std::string& text, RatingScale scale = {});

// Writes entries back in the same format (timestamp column written as 0).
void write_movielens(const RatingsMatrix& matrix, std::ostream& out);

std::vector<UserProfile> profile_users(const RatingsMatrix& matrix);
std::vector<ItemStats> profile_items(const RatingsMatrix& matrix);

}  // namespace fcrec
