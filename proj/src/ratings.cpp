#include "fcrec/ratings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fcrec {

namespace {

bool parse_int(std::string_view field, int& out) {
    if (field.empty()) return false;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace

RatingsMatrix RatingsMatrix::from_parts(RatingScale scale,
                                        std::vector<int> user_ids,
                                        std::vector<int> item_ids,
                                        std::vector<Rating> entries) {
    const int n_users = static_cast<int>(user_ids.size());
    const int n_items = static_cast<int>(item_ids.size());
    std::unordered_map<std::uint64_t, char> seen;
    seen.reserve(entries.size());
    for (const Rating& r : entries) {
        if (r.user < 0 || r.user >= n_users || r.item < 0 || r.item >= n_items)
            throw ValidationError("entry index out of range");
        if (!scale.contains(r.value))
            throw ValidationError("rating " + std::to_string(r.value) + " outside scale [" +
                                  std::to_string(scale.min) + ", " + std::to_string(scale.max) +
                                  "]");
        std::uint64_t key =
            (static_cast<std::uint64_t>(r.user) << 32) | static_cast<std::uint32_t>(r.item);
        if (!seen.emplace(key, 1).second)
            throw ValidationError("duplicate rating for user index " + std::to_string(r.user) +
                                  ", item index " + std::to_string(r.item));
    }

    RatingsMatrix m;
    m.scale_ = scale;
    m.user_ids_ = std::move(user_ids);
    m.item_ids_ = std::move(item_ids);
    m.entries_ = std::move(entries);

    m.user_index_.reserve(m.user_ids_.size());
    for (int i = 0; i < static_cast<int>(m.user_ids_.size()); ++i)
        m.user_index_.emplace(m.user_ids_[i], i);
    m.item_index_.reserve(m.item_ids_.size());
    for (int i = 0; i < static_cast<int>(m.item_ids_.size()); ++i)
        m.item_index_.emplace(m.item_ids_[i], i);

    m.by_user_.resize(m.user_ids_.size());
    for (const Rating& r : m.entries_)
        m.by_user_[r.user].push_back({r.item, r.value});
    for (auto& row : m.by_user_)
        std::sort(row.begin(), row.end(),
                  [](const ItemRating& a, const ItemRating& b) { return a.item < b.item; });
    return m;
}

std::optional<int> RatingsMatrix::rating(int user, int item) const {
    const auto& row = by_user_[user];
    auto it = std::lower_bound(row.begin(), row.end(), item,
                               [](const ItemRating& r, int i) { return r.item < i; });
    if (it == row.end() || it->item != item) return std::nullopt;
    return it->value;
}

std::optional<int> RatingsMatrix::user_index(int raw_id) const {
    auto it = user_index_.find(raw_id);
    if (it == user_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> RatingsMatrix::item_index(int raw_id) const {
    auto it = item_index_.find(raw_id);
    if (it == item_index_.end()) return std::nullopt;
    return it->second;
}

namespace {

RatingsMatrix parse_stream(std::istream& in, RatingScale scale) {
    std::vector<int> user_ids;
    std::vector<int> item_ids;
    std::vector<Rating> entries;
    std::unordered_map<int, int> user_index;
    std::unordered_map<int, int> item_index;
    std::unordered_map<std::uint64_t, std::size_t> seen;  // (user,item) -> first line

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::string_view rest = line;
        std::string_view fields[3];
        int n_fields = 0;
        while (n_fields < 3) {
            auto tab = rest.find('\t');
            if (tab == std::string_view::npos) break;
            fields[n_fields++] = rest.substr(0, tab);
            rest = rest.substr(tab + 1);
        }
        // rest now holds field 4 onward; a line needs at least 4 fields.
        if (n_fields < 3 || rest.empty())
            throw ParseError(line_no, "expected at least 4 tab-separated fields");

        int raw_user, raw_item, value;
        if (!parse_int(fields[0], raw_user))
            throw ParseError(line_no, "user id is not an integer: '" + std::string(fields[0]) + "'");
        if (!parse_int(fields[1], raw_item))
            throw ParseError(line_no, "item id is not an integer: '" + std::string(fields[1]) + "'");
        if (!parse_int(fields[2], value))
            throw ParseError(line_no, "rating is not an integer: '" + std::string(fields[2]) + "'");

        if (!scale.contains(value))
            throw ValidationError("line " + std::to_string(line_no) + ": rating " +
                                  std::to_string(value) + " outside scale [" +
                                  std::to_string(scale.min) + ", " + std::to_string(scale.max) + "]");

        auto [uit, u_new] = user_index.try_emplace(raw_user, static_cast<int>(user_ids.size()));
        if (u_new) user_ids.push_back(raw_user);
        auto [iit, i_new] = item_index.try_emplace(raw_item, static_cast<int>(item_ids.size()));
        if (i_new) item_ids.push_back(raw_item);
        int u = uit->second;
        int i = iit->second;

        std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(i);
        auto [sit, fresh] = seen.try_emplace(key, line_no);
        if (!fresh)
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate rating for user " +
                                  std::to_string(raw_user) + ", item " + std::to_string(raw_item) +
                                  " (first seen at line " + std::to_string(sit->second) + ")");

        entries.push_back({u, i, value});
    }
    return RatingsMatrix::from_parts(scale, std::move(user_ids), std::move(item_ids),
                                     std::move(entries));
}

}  // namespace

RatingsMatrix parse_movielens(const std::string& path, RatingScale scale) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open data file: " + path);
    return parse_stream(in, scale);
}

RatingsMatrix parse_movielens_text(const std::string& text, RatingScale scale) {
    std::istringstream in(text);
    return parse_stream(in, scale);
}

void write_movielens(const RatingsMatrix& matrix, std::ostream& out) {
    for (const Rating& r : matrix.entries())
        out << matrix.user_id(r.user) << '\t' << matrix.item_id(r.item) << '\t'
            << r.value << '\t' << 0 << '\n';
}

std::vector<UserProfile> profile_users(const RatingsMatrix& matrix) {
    std::vector<UserProfile> profiles(matrix.n_users());
    const double midpoint = matrix.scale().median();
    for (int u = 0; u < matrix.n_users(); ++u) {
        auto row = matrix.ratings_of(u);
        UserProfile& p = profiles[u];
        p.n_rated = static_cast<int>(row.size());
        if (row.empty()) {
            p.mean = midpoint;
            p.stddev = 0.0;
            p.empty = true;
            continue;
        }
        double sum = 0.0;
        for (const ItemRating& r : row) sum += r.value;
        p.mean = sum / row.size();
        double sq = 0.0;
        for (const ItemRating& r : row) {
            double d = r.value - p.mean;
            sq += d * d;
        }
        p.stddev = std::sqrt(sq / row.size());
    }
    return profiles;
}

std::vector<ItemStats> profile_items(const RatingsMatrix& matrix) {
    std::vector<ItemStats> stats(matrix.n_items());
    std::vector<long long> sums(matrix.n_items(), 0);
    for (const Rating& r : matrix.entries()) {
        sums[r.item] += r.value;
        ++stats[r.item].n_raters;
    }
    const double midpoint = matrix.scale().median();
    for (int i = 0; i < matrix.n_items(); ++i) {
        if (stats[i].n_raters == 0) {
            stats[i].mean = midpoint;
            stats[i].empty = true;
        } else {
            stats[i].mean = static_cast<double>(sums[i]) / stats[i].n_raters;
        }
    }
    return stats;
}

}  // namespace fcrec
