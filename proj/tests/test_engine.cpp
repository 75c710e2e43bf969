#include <doctest.h>

#include <cmath>
#include <random>

#include "fcrec/engine.hpp"
#include "fcrec/oracle.hpp"

using namespace fcrec;

namespace {

TrainModel toy_model(const char* text) {
    return TrainModel::build(parse_movielens_text(text));
}

ClusterAssignment single_cluster(int n_users) {
    ClusterAssignment a;
    a.cluster_of.assign(n_users, 0);
    a.members.resize(1);
    for (int u = 0; u < n_users; ++u) a.members[0].push_back(u);
    return a;
}

ClusterAssignment from_labels(std::vector<int> labels, int n_clusters) {
    ClusterAssignment a;
    a.cluster_of = std::move(labels);
    a.members.resize(n_clusters);
    for (int u = 0; u < static_cast<int>(a.cluster_of.size()); ++u)
        a.members[a.cluster_of[u]].push_back(u);
    return a;
}

}  // namespace

TEST_CASE("a singleton cluster yields an empty neighbor list") {
    TrainModel m = toy_model("1\t1\t3\t0\n2\t1\t4\t0\n3\t1\t5\t0\n");
    ClusterAssignment a = from_labels({0, 1, 1}, 2);
    NeighborList nl = select_neighbors(0, a, MeasureId::Nhsm, 5, m);
    CHECK(nl.neighbors.empty());
    CHECK_FALSE(nl.pool_fallback);

    // opting into the pool fallback widens to all users and flags it
    NeighborList widened = select_neighbors(0, a, MeasureId::Nhsm, 5, m, {}, true);
    CHECK(widened.pool_fallback);
    CHECK(widened.neighbors.size() == 2);
}

TEST_CASE("neighbors are ranked by similarity then user index") {
    // users 2 and 4 tie exactly (identical rating rows), user 3 is closest
    TrainModel m = toy_model(
        "1\t1\t5\t0\n1\t2\t1\t0\n"
        "2\t1\t2\t0\n2\t2\t2\t0\n"
        "3\t1\t5\t0\n3\t2\t2\t0\n"
        "4\t1\t2\t0\n4\t2\t2\t0\n");
    ClusterAssignment a = single_cluster(4);
    NeighborList nl = select_neighbors(0, a, MeasureId::Nhsm, 2, m);
    REQUIRE(nl.neighbors.size() == 2);
    CHECK(nl.neighbors[0].user == 2);
    CHECK(nl.neighbors[0].sim >= nl.neighbors[1].sim);
    CHECK(nl.neighbors[1].user == 1);  // tie with user 3 broken by index

    // never the active user itself
    for (const Neighbor& nb : nl.neighbors) CHECK(nb.user != 0);

    // fewer members than k returns all of them
    NeighborList all = select_neighbors(0, a, MeasureId::Nhsm, 50, m);
    CHECK(all.neighbors.size() == 3);
}

TEST_CASE("single-neighbor prediction cancels the weight") {
    // neighbor mean 4, rating 5 on the target (item index 1), active mean 3
    TrainModel m = toy_model(
        "1\t2\t3\t0\n"
        "2\t1\t5\t0\n2\t2\t4\t0\n2\t3\t3\t0\n");
    NeighborList nl;
    nl.user = 0;
    nl.neighbors = {{1, 0.4}};
    Prediction p = predict(0, 1, nl, m);
    CHECK(p.value == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(p.support == 1);
    CHECK_FALSE(p.fallback_used());
}

TEST_CASE("two-neighbor prediction follows the weighted deviation form") {
    // active mean 3; neighbor deviations +2 and -1 with sims 0.5 and 0.25
    TrainModel m = toy_model(
        "1\t2\t3\t0\n"
        "2\t1\t5\t0\n2\t2\t4\t0\n2\t3\t1\t0\n2\t4\t2\t0\n"   // mean 3, rates item 1 with 5
        "3\t1\t2\t0\n3\t2\t3\t0\n3\t3\t4\t0\n3\t4\t3\t0\n"); // mean 3, rates item 1 with 2
    NeighborList nl;
    nl.user = 0;
    nl.neighbors = {{1, 0.5}, {2, 0.25}};
    Prediction p = predict(0, 1, nl, m);
    // 3 + (2*0.5 + (-1)*0.25) / (0.5 + 0.25) = 4.0
    CHECK(p.value == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(p.support == 2);
}

TEST_CASE("prediction falls back to the user mean, then the global mean") {
    TrainModel m = toy_model(
        "1\t1\t3\t0\n1\t2\t4\t0\n"
        "2\t1\t2\t0\n");
    NeighborList nl;
    nl.user = 0;
    nl.neighbors = {{1, 0.9}};

    // no neighbor rated item 2 (index 1 is rated; pick an unrated one)
    Prediction p = predict(0, 1, nl, m);
    CHECK(p.support == 0);
    CHECK(p.source == PredictionSource::UserMean);
    CHECK(p.value == doctest::Approx(3.5).epsilon(1e-12));

    // all-zero similarities also count as no evidence
    NeighborList zero;
    zero.user = 0;
    zero.neighbors = {{1, 0.0}};
    Prediction pz = predict(0, 0, zero, m);
    CHECK(pz.source == PredictionSource::UserMean);

    // a user with no train ratings gets the global train mean
    RatingsMatrix with_empty = RatingsMatrix::from_parts(
        {1, 5}, {1, 2}, {1}, {{0, 0, 4}});
    TrainModel em = TrainModel::build(std::move(with_empty));
    NeighborList none;
    none.user = 1;
    Prediction pg = predict(1, 0, none, em);
    CHECK(pg.source == PredictionSource::GlobalMean);
    CHECK(pg.value == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("predictions are clamped to the rating scale") {
    // neighbor deviation +4 on top of active mean 5 exceeds the scale
    TrainModel m = toy_model(
        "1\t2\t5\t0\n"
        "2\t1\t5\t0\n2\t2\t1\t0\n2\t3\t1\t0\n2\t4\t1\t0\n");
    NeighborList nl;
    nl.user = 0;
    nl.neighbors = {{1, 1.0}};
    Prediction p = predict(0, 1, nl, m);
    CHECK(p.value == 5.0);
    CHECK_FALSE(p.fallback_used());

    // and from below
    TrainModel low = toy_model(
        "1\t2\t1\t0\n"
        "2\t1\t1\t0\n2\t2\t5\t0\n2\t3\t5\t0\n2\t4\t5\t0\n");
    Prediction q = predict(0, 1, nl, low);
    CHECK(q.value == 1.0);
}

TEST_CASE("negative similarities keep their sign in the numerator only") {
    // one negative-similarity neighbor: deviation flips sign, weight stays positive
    TrainModel m = toy_model(
        "1\t2\t3\t0\n"
        "2\t1\t5\t0\n2\t2\t4\t0\n2\t3\t3\t0\n");  // mean 4, rating 5 -> deviation +1
    NeighborList nl;
    nl.user = 0;
    nl.neighbors = {{1, -0.5}};
    Prediction p = predict(0, 1, nl, m);
    // 3 + (1 * -0.5) / 0.5 = 2
    CHECK(p.value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("scaling every similarity by a positive constant changes nothing") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        int n_users = 4 + static_cast<int>(rng() % 4);
        int n_items = 5 + static_cast<int>(rng() % 5);
        std::vector<int> user_ids(n_users), item_ids(n_items);
        for (int u = 0; u < n_users; ++u) user_ids[u] = u + 1;
        for (int i = 0; i < n_items; ++i) item_ids[i] = i + 1;
        std::vector<Rating> entries;
        for (int u = 0; u < n_users; ++u)
            for (int i = 0; i < n_items; ++i)
                if (rng() % 100 < 60)
                    entries.push_back({u, i, 1 + static_cast<int>(rng() % 5)});
        TrainModel m = TrainModel::build(RatingsMatrix::from_parts(
            {1, 5}, std::move(user_ids), std::move(item_ids), std::move(entries)));

        NeighborList nl;
        nl.user = 0;
        for (int v = 1; v < n_users; ++v)
            nl.neighbors.push_back({v, ((rng() % 2000) / 1000.0) - 1.0});

        double factor = 0.001 + (rng() % 10000) / 1000.0;
        NeighborList scaled = nl;
        for (Neighbor& nb : scaled.neighbors) nb.sim *= factor;

        for (int i = 0; i < n_items; ++i) {
            Prediction a = predict(0, i, nl, m);
            Prediction b = predict(0, i, scaled, m);
            CHECK(std::abs(a.value - b.value) <= 1e-9);
            CHECK(a.support == b.support);
            CHECK(a.source == b.source);
        }
    }
}

TEST_CASE("top-n sorts by prediction then item index and truncates") {
    // active mean 3, neighbor mean 3.25; candidate predictions are
    // item 1 -> 4.75, item 2 -> clamp(0.75) = 1, item 3 -> 3.75
    TrainModel m = toy_model(
        "1\t9\t3\t0\n"
        "2\t9\t3\t0\n2\t1\t5\t0\n2\t2\t1\t0\n2\t3\t4\t0\n");
    NeighborList nl;
    nl.user = 0;
    nl.neighbors = {{1, 1.0}};

    std::vector<int> candidates = {1, 2, 3};
    auto top = recommend_top_n(0, 2, candidates, nl, m);
    REQUIRE(top.size() == 2);
    CHECK(top[0].first == 1);
    CHECK(top[0].second == doctest::Approx(4.75).epsilon(1e-12));
    CHECK(top[1].first == 3);

    // n larger than the candidate set returns everything, still sorted
    auto all = recommend_top_n(0, 10, candidates, nl, m);
    CHECK(all.size() == 3);
    CHECK(all[2].first == 2);

    // n = 0 gives an empty list
    CHECK(recommend_top_n(0, 0, candidates, nl, m).empty());
}

TEST_CASE("a total tie recommends the first n by item index") {
    // no neighbor rated anything the active user might get: all user-mean
    NeighborList nl;
    nl.user = 0;
    nl.neighbors = {{1, 0.7}};
    std::vector<int> candidates = {1, 2, 3, 4};  // items the neighbor never rated
    RatingsMatrix wide = RatingsMatrix::from_parts(
        {1, 5}, {1, 2}, {1, 2, 3, 4, 5}, {{0, 0, 3}, {1, 0, 4}});
    TrainModel wm = TrainModel::build(std::move(wide));
    auto top = recommend_top_n(0, 3, candidates, nl, wm);
    REQUIRE(top.size() == 3);
    CHECK(top[0].first == 1);
    CHECK(top[1].first == 2);
    CHECK(top[2].first == 3);
    for (const auto& [item, score] : top) CHECK(score == doctest::Approx(3.0));
}

TEST_CASE("neighbor selection and ranking agree with the exhaustive oracle") {
    // the oracle module re-sorts all in-cluster pairs with its own similarity code
    auto result = fcrec::oracle::run_equivalence_suite(20, 99);
    CHECK(result.failures == 0);
    if (result.failures > 0) MESSAGE(result.first_failure);
}
