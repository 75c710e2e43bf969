#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "fcrec/fcm.hpp"

using namespace fcrec;

namespace {

RatingsMatrix one_dim_points(std::vector<int> values, int scale_min, int scale_max) {
    std::vector<int> user_ids;
    std::vector<Rating> entries;
    for (std::size_t u = 0; u < values.size(); ++u) {
        user_ids.push_back(static_cast<int>(u) + 1);
        entries.push_back({static_cast<int>(u), 0, values[u]});
    }
    return RatingsMatrix::from_parts({scale_min, scale_max}, std::move(user_ids), {1},
                                     std::move(entries));
}

RatingsMatrix random_matrix(std::mt19937_64& rng, int n_users, int n_items, double fill) {
    std::vector<int> user_ids(n_users), item_ids(n_items);
    for (int u = 0; u < n_users; ++u) user_ids[u] = u + 1;
    for (int i = 0; i < n_items; ++i) item_ids[i] = i + 1;
    std::vector<Rating> entries;
    for (int u = 0; u < n_users; ++u)
        for (int i = 0; i < n_items; ++i)
            if ((rng() % 1000) / 1000.0 < fill)
                entries.push_back({u, i, 1 + static_cast<int>(rng() % 5)});
    return RatingsMatrix::from_parts({1, 5}, std::move(user_ids), std::move(item_ids),
                                     std::move(entries));
}

}  // namespace

TEST_CASE("single cluster gives membership exactly 1 and the mean centroid") {
    std::mt19937_64 rng(2);
    RatingsMatrix m = random_matrix(rng, 8, 5, 0.6);
    FcmParams params;
    params.cluster_count = 1;
    params.seed = 3;
    MembershipMatrix mm = fcm_fit(m, params);
    for (int u = 0; u < m.n_users(); ++u) CHECK(mm.row(u)[0] == 1.0);

    // with all memberships 1, the centroid is the plain mean of the user vectors
    for (int j = 0; j < m.n_items(); ++j) {
        double mean = 0.0;
        for (int u = 0; u < m.n_users(); ++u) {
            auto r = m.rating(u, j);
            mean += r ? *r : 0;
        }
        mean /= m.n_users();
        CHECK(mm.centroids[0][j] == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("two distinct users split into two clusters symmetrically") {
    RatingsMatrix m = one_dim_points({1, 5}, 1, 5);
    FcmParams params;
    params.cluster_count = 2;
    params.seed = 17;
    params.tolerance = 1e-10;
    MembershipMatrix mm = fcm_fit(m, params);
    for (int u = 0; u < 2; ++u) {
        auto row = mm.row(u);
        CHECK(row[0] + row[1] == doctest::Approx(1.0).epsilon(1e-12));
        // nearest centroid dominates
        double d0 = std::abs((u == 0 ? 1 : 5) - mm.centroids[0][0]);
        double d1 = std::abs((u == 0 ? 1 : 5) - mm.centroids[1][0]);
        int nearest = d0 <= d1 ? 0 : 1;
        CHECK(row[nearest] > 0.5);
    }
}

// Independent fixed-point iteration of the two update formulas on the
// points {0, 1, 10}. The converged memberships are initialization
// independent up to cluster relabeling.
TEST_CASE("converged memberships match a hand-iterated run on {0,1,10}") {
    const std::array<double, 3> x = {0.0, 1.0, 10.0};
    std::array<std::array<double, 2>, 3> u = {{{0.9, 0.1}, {0.8, 0.2}, {0.1, 0.9}}};
    std::array<double, 2> v{};
    for (int iter = 0; iter < 2000; ++iter) {
        for (int k = 0; k < 2; ++k) {
            double num = 0.0, den = 0.0;
            for (int i = 0; i < 3; ++i) {
                double w = u[i][k] * u[i][k];
                num += w * x[i];
                den += w;
            }
            v[k] = num / den;
        }
        for (int i = 0; i < 3; ++i) {
            std::array<double, 2> d = {std::abs(x[i] - v[0]), std::abs(x[i] - v[1])};
            if (d[0] < 1e-12 || d[1] < 1e-12) {
                int zero = d[0] <= d[1] ? 0 : 1;
                u[i] = {zero == 0 ? 1.0 : 0.0, zero == 1 ? 1.0 : 0.0};
                continue;
            }
            for (int k = 0; k < 2; ++k) {
                double sum = 0.0;
                for (int j = 0; j < 2; ++j) sum += (d[k] / d[j]) * (d[k] / d[j]);
                u[i][k] = 1.0 / sum;
            }
        }
    }

    RatingsMatrix m = one_dim_points({0, 1, 10}, 0, 10);
    FcmParams params;
    params.cluster_count = 2;
    params.seed = 5;
    params.tolerance = 1e-12;
    params.max_iterations = 2000;
    MembershipMatrix mm = fcm_fit(m, params);

    // align cluster labels by centroid value
    int low = mm.centroids[0][0] < mm.centroids[1][0] ? 0 : 1;
    int ref_low = v[0] < v[1] ? 0 : 1;
    for (int i = 0; i < 3; ++i) {
        CHECK(mm.row(i)[low] == doctest::Approx(u[i][ref_low]).epsilon(1e-6));
        CHECK(mm.row(i)[1 - low] == doctest::Approx(u[i][1 - ref_low]).epsilon(1e-6));
    }
    CHECK(mm.centroids[low][0] == doctest::Approx(v[ref_low]).epsilon(1e-6));
    CHECK(mm.centroids[1 - low][0] == doctest::Approx(v[1 - ref_low]).epsilon(1e-6));
}

TEST_CASE("membership rows stay stochastic and the objective never rises") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        RatingsMatrix m = random_matrix(rng, 10 + static_cast<int>(rng() % 20),
                                        4 + static_cast<int>(rng() % 10), 0.5);
        FcmParams params;
        params.cluster_count = 1 + static_cast<int>(rng() % 4);
        params.seed = rng();
        MembershipMatrix mm = fcm_fit(m, params);
        for (int u = 0; u < m.n_users(); ++u) {
            double sum = 0.0;
            for (double d : mm.row(u)) {
                sum += d;
                CHECK(d >= 0.0);
                CHECK(d <= 1.0);
            }
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
        for (std::size_t i = 1; i < mm.objective_trace.size(); ++i)
            CHECK(mm.objective_trace[i] <= mm.objective_trace[i - 1] + 1e-9);
    }
}

TEST_CASE("identical seeds are bit-identical across thread counts") {
    std::mt19937_64 rng(31);
    RatingsMatrix m = random_matrix(rng, 40, 12, 0.4);
    FcmParams params;
    params.cluster_count = 3;
    params.seed = 77;

    params.threads = 1;
    MembershipMatrix a = fcm_fit(m, params);
    params.threads = 4;
    MembershipMatrix b = fcm_fit(m, params);
    params.threads = 0;  // hardware concurrency
    MembershipMatrix c = fcm_fit(m, params);

    REQUIRE(a.degrees().size() == b.degrees().size());
    for (std::size_t i = 0; i < a.degrees().size(); ++i) {
        CHECK(a.degrees()[i] == b.degrees()[i]);
        CHECK(a.degrees()[i] == c.degrees()[i]);
    }
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("identical user vectors with c > 1 settle without error") {
    RatingsMatrix m = one_dim_points({3, 3, 3, 3}, 1, 5);
    FcmParams params;
    params.cluster_count = 2;
    params.seed = 9;
    MembershipMatrix mm = fcm_fit(m, params);
    for (int u = 0; u < 4; ++u) {
        double sum = 0.0;
        for (double d : mm.row(u)) sum += d;
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("cluster count larger than the user count is rejected") {
    RatingsMatrix m = one_dim_points({1, 5}, 1, 5);
    FcmParams params;
    params.cluster_count = 3;
    CHECK_THROWS_AS(fcm_fit(m, params), std::invalid_argument);
    params.cluster_count = 2;
    params.fuzzifier = 1.0;
    CHECK_THROWS_AS(fcm_fit(m, params), std::invalid_argument);
}

TEST_CASE("center-of-gravity defuzzification") {
    CHECK(defuzzify_cog(std::array{1.0, 0.0, 0.0}) == 0);
    CHECK(defuzzify_cog(std::array{0.5, 0.5}) == 0);        // half-way tie -> lower index
    CHECK(defuzzify_cog(std::array{0.1, 0.2, 0.7}) == 2);   // g = 1.6
    CHECK(defuzzify_cog(std::array{0.0, 0.0, 1.0}) == 2);
    CHECK(defuzzify_cog(std::array{0.2, 0.6, 0.2}) == 1);   // g = 1.0
    CHECK(defuzzify_cog(std::array{1.0}) == 0);
}

TEST_CASE("max defuzzification with ties to the lower index") {
    CHECK(defuzzify_max(std::array{0.2, 0.5, 0.3}) == 1);
    CHECK(defuzzify_max(std::array{0.5, 0.5}) == 0);
    CHECK(defuzzify_max(std::array{1.0 / 3, 1.0 / 3, 1.0 / 3}) == 0);
}

TEST_CASE("crisp rows defuzzify identically under both strategies") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        int c = 2 + static_cast<int>(rng() % 5);
        std::vector<double> row(c, 0.0);
        row[rng() % c] = 1.0;
        CHECK(defuzzify_cog(row) == defuzzify_max(row));
    }
}

TEST_CASE("assignment partitions users and allows empty clusters") {
    std::mt19937_64 rng(55);
    RatingsMatrix m = random_matrix(rng, 25, 8, 0.5);
    FcmParams params;
    params.cluster_count = 4;
    params.seed = 13;
    MembershipMatrix mm = fcm_fit(m, params);

    for (Defuzzifier strategy : {Defuzzifier::Cog, Defuzzifier::Max}) {
        ClusterAssignment a = assign_clusters(mm, strategy);
        REQUIRE(a.cluster_of.size() == static_cast<std::size_t>(m.n_users()));
        std::size_t total = 0;
        for (int k = 0; k < a.n_clusters(); ++k) {
            total += a.members[k].size();
            for (int u : a.members[k]) CHECK(a.cluster_of[u] == k);
        }
        CHECK(total == static_cast<std::size_t>(m.n_users()));
    }
}
