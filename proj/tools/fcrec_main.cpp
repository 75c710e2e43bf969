// Command-line driver: precompute-then-query pipeline over the library.
//   ingest     validate and summarize a ratings file
//   cluster    fit the fuzzy clustering and dump memberships
//   evaluate   cross-validated experiment, CSV + JSON reports
//   recommend  Top-N items for one user
//   oracle     brute-force equivalence suite on random small instances

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fcrec/engine.hpp"
#include "fcrec/eval.hpp"
#include "fcrec/oracle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct CommonArgs {
    std::string data_path;
    std::optional<std::string> config_path;
    fcrec::FlagOverrides flags;
    std::optional<std::string> out_path;
};

// CLI11 stores into plain values; promote to optionals only when the flag
// was actually given so config-file values are not clobbered.
struct RawFlags {
    std::vector<std::string> measures;
    int clusters = 0;
    int neighbors = 0;
    std::uint64_t seed = 0;
    std::vector<int> top_n;
    std::string defuzzifier;
    int threads = 0;
    std::string pss_aggregation;
    std::string singularity_form;
};

void add_common_options(CLI::App* cmd, CommonArgs& args, RawFlags& raw, bool needs_data) {
    auto* data = cmd->add_option("--data", args.data_path, "Ratings file (user<TAB>item<TAB>rating<TAB>timestamp)");
    if (needs_data) data->required();
    cmd->add_option("--config", args.config_path, "Config file (key = value lines)");
    cmd->add_option("--measure", raw.measures, "Similarity measure id (repeatable); one of: " +
                                                   fcrec::measure_names_joined())
        ->default_str("nhsm");
    cmd->add_option("--clusters", raw.clusters, "Fuzzy cluster count")->default_val(3);
    cmd->add_option("--neighbors", raw.neighbors, "Neighbor count per prediction")->default_val(50);
    cmd->add_option("--seed", raw.seed, "Seed for fold shuffling and clustering init")->default_val(1);
    cmd->add_option("--top-n", raw.top_n, "Top-N list sizes")->delimiter(',')->default_str("5,10,15,20,30");
    cmd->add_option("--defuzzifier", raw.defuzzifier, "Membership defuzzification: cog or max")
        ->default_str("cog");
    cmd->add_option("--threads", raw.threads, "Worker threads (0 = hardware)")->default_val(0);
    cmd->add_option("--pss-aggregation", raw.pss_aggregation, "PSS over co-rated items: sum or mean")
        ->default_str("sum");
    cmd->add_option("--singularity-form", raw.singularity_form,
                    "Singularity exponent: centered or signed")
        ->default_str("centered");
    cmd->add_option("--out", args.out_path, "Write the report here instead of stdout");
}

void collect_overrides(CLI::App* cmd, CommonArgs& args, const RawFlags& raw) {
    auto set = [&](const char* name) { return cmd->count(name) > 0; };
    if (set("--measure")) args.flags.measures = raw.measures;
    if (set("--clusters")) args.flags.cluster_count = raw.clusters;
    if (set("--neighbors")) args.flags.neighbor_count = raw.neighbors;
    if (set("--seed")) args.flags.seed = raw.seed;
    if (set("--top-n")) args.flags.top_n_list = raw.top_n;
    if (set("--defuzzifier")) args.flags.defuzzifier = raw.defuzzifier;
    if (set("--threads")) args.flags.threads = raw.threads;
    if (set("--pss-aggregation")) args.flags.pss_aggregation = raw.pss_aggregation;
    if (set("--singularity-form")) args.flags.singularity_form = raw.singularity_form;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw fcrec::ValidationError("cannot open output file: " + path);
    return out;
}

int run_ingest(const CommonArgs& args, const std::optional<std::string>& export_path) {
    fcrec::RatingsMatrix m = fcrec::parse_movielens(args.data_path);
    auto profiles = fcrec::profile_users(m);

    if (export_path) {
        auto out = open_out(*export_path);
        fcrec::write_movielens(m, out);
    }

    std::vector<long long> histogram(m.scale().max - m.scale().min + 1, 0);
    for (const fcrec::Rating& r : m.entries()) ++histogram[r.value - m.scale().min];
    double mean = 0.0;
    for (const fcrec::Rating& r : m.entries()) mean += r.value;
    if (m.n_entries() > 0) mean /= static_cast<double>(m.n_entries());
    long long empty_users = 0;
    for (const auto& p : profiles)
        if (p.empty) ++empty_users;

    std::ostringstream report;
    report << "file: " << args.data_path << "\n"
           << "users: " << m.n_users() << "\n"
           << "items: " << m.n_items() << "\n"
           << "ratings: " << m.n_entries() << "\n"
           << "scale: " << m.scale().min << ".." << m.scale().max << "\n"
           << "mean rating: " << mean << "\n"
           << "density: "
           << (m.n_users() && m.n_items()
                   ? static_cast<double>(m.n_entries()) / m.n_users() / m.n_items()
                   : 0.0)
           << "\n"
           << "users without ratings: " << empty_users << "\n";
    for (std::size_t i = 0; i < histogram.size(); ++i)
        report << "ratings of " << (m.scale().min + static_cast<int>(i)) << ": " << histogram[i]
               << "\n";

    if (args.out_path) {
        auto out = open_out(*args.out_path);
        out << report.str();
    } else {
        std::cout << report.str();
    }
    return kExitOk;
}

int run_cluster(const CommonArgs& args) {
    fcrec::ExperimentConfig config = fcrec::resolve_config(args.config_path, args.flags);
    fcrec::RatingsMatrix m = fcrec::parse_movielens(args.data_path);
    config.validate(m.scale());

    fcrec::FcmParams params;
    params.cluster_count = config.cluster_count;
    params.fuzzifier = config.fuzzifier;
    params.tolerance = config.fcm_tolerance;
    params.max_iterations = config.fcm_max_iterations;
    params.seed = config.seed;
    params.threads = config.threads;

    fcrec::MembershipMatrix membership = fcrec::fcm_fit(m, params);
    fcrec::ClusterAssignment assignment = fcrec::assign_clusters(membership, config.defuzzifier);

    std::ostringstream dump;
    dump << "user_id";
    for (int k = 0; k < membership.n_clusters(); ++k) dump << ",membership_" << k;
    dump << ",cluster\n";
    dump.precision(17);
    for (int u = 0; u < membership.n_users(); ++u) {
        dump << m.user_id(u);
        for (double d : membership.row(u)) dump << ',' << d;
        dump << ',' << assignment.cluster_of[u] << "\n";
    }

    std::cerr << "fcm: " << membership.iterations << " iterations, "
              << (membership.converged ? "converged" : "iteration limit") << "\n";
    if (args.out_path) {
        auto out = open_out(*args.out_path);
        out << dump.str();
    } else {
        std::cout << dump.str();
    }
    return kExitOk;
}

int run_evaluate(const CommonArgs& args, const std::optional<std::string>& json_path) {
    fcrec::ExperimentConfig config = fcrec::resolve_config(args.config_path, args.flags);
    fcrec::RatingsMatrix m = fcrec::parse_movielens(args.data_path);
    config.validate(m.scale());

    std::cerr << "evaluate: " << m.n_users() << " users, " << m.n_items() << " items, "
              << m.n_entries() << " ratings; " << config.fold_count << " folds, seed "
              << config.seed << "\n"
              << "protocol: clusters=" << config.cluster_count
              << " fuzzifier=" << config.fuzzifier << " neighbors=" << config.neighbor_count
              << " relevance_threshold=" << config.relevance_threshold
              << " defuzzifier=" << to_string(config.defuzzifier)
              << " pss_aggregation="
              << (config.similarity.pss_aggregation == fcrec::PssAggregation::Sum ? "sum" : "mean")
              << " singularity_form="
              << (config.similarity.singularity_form == fcrec::SingularityForm::Centered
                      ? "centered"
                      : "signed")
              << " candidate_pool=user_test_items\n";

    fcrec::EvaluationReport report = fcrec::run_experiment(m, config);

    if (report.directional) {
        std::cerr << "directional check: nhsm mae " << report.directional->nhsm_mae
                  << (report.directional->nhsm_not_worse ? " <= " : " > ")
                  << "pearson mae " << report.directional->pearson_mae
                  << (report.directional->nhsm_not_worse ? "" : "  [flag: nhsm worse]") << "\n";
    }

    if (args.out_path) {
        auto out = open_out(*args.out_path);
        fcrec::write_report_csv(report, out);
    } else {
        fcrec::write_report_csv(report, std::cout);
    }
    if (json_path) {
        auto out = open_out(*json_path);
        fcrec::write_report_json(report, out);
    } else if (args.out_path) {
        auto out = open_out(*args.out_path + ".json");
        fcrec::write_report_json(report, out);
    }
    return kExitOk;
}

int run_recommend(const CommonArgs& args, int raw_user_id, int top_n) {
    fcrec::ExperimentConfig config = fcrec::resolve_config(args.config_path, args.flags);
    fcrec::RatingsMatrix m = fcrec::parse_movielens(args.data_path);
    config.validate(m.scale());

    auto user = m.user_index(raw_user_id);
    if (!user)
        throw fcrec::ValidationError("user id " + std::to_string(raw_user_id) +
                                     " not present in the data");

    // Offline phase: model the full matrix, cluster, pick neighbors.
    fcrec::FoldModel fm = fcrec::build_fold_model(m, config, config.seed);
    fcrec::NeighborList neighbors =
        fcrec::select_neighbors(*user, fm.clusters, config.measures.front(),
                                config.neighbor_count, fm.model, config.similarity,
                                /*allow_pool_fallback=*/true);

    std::vector<int> candidates;
    auto rated = fm.model.train.ratings_of(*user);
    std::size_t next = 0;
    for (int item = 0; item < fm.model.train.n_items(); ++item) {
        if (next < rated.size() && rated[next].item == item) {
            ++next;
            continue;
        }
        candidates.push_back(item);
    }

    auto top = fcrec::recommend_top_n(*user, top_n, candidates, neighbors, fm.model);

    std::ostringstream out;
    out << "rank,item_id,predicted\n";
    for (std::size_t i = 0; i < top.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", top[i].second);
        out << (i + 1) << ',' << m.item_id(top[i].first) << ',' << buf << "\n";
    }
    if (neighbors.pool_fallback)
        std::cerr << "note: user's cluster had no other members; neighbors drawn from all users\n";

    if (args.out_path) {
        auto f = open_out(*args.out_path);
        f << out.str();
    } else {
        std::cout << out.str();
    }
    return kExitOk;
}

int run_oracle(int trials, std::uint64_t seed) {
    fcrec::oracle::EquivalenceResult result = fcrec::oracle::run_equivalence_suite(trials, seed);
    std::cout << "oracle equivalence: " << result.checks << " checks over " << result.trials
              << " random instances in " << result.seconds << "s\n";
    if (result.failures == 0) {
        std::cout << "all engine results match the brute-force oracle\n";
        return kExitOk;
    }
    std::cout << result.failures << " mismatches; first: " << result.first_failure << "\n";
    return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clustered user-based collaborative filtering experiment engine"};
    app.require_subcommand(1);

    CommonArgs ingest_args, cluster_args, eval_args, rec_args;
    RawFlags ingest_raw, cluster_raw, eval_raw, rec_raw;

    CLI::App* ingest = app.add_subcommand("ingest", "Validate and summarize a ratings file");
    add_common_options(ingest, ingest_args, ingest_raw, true);
    std::optional<std::string> export_path;
    ingest->add_option("--export", export_path, "Re-export the validated matrix here");

    CLI::App* cluster = app.add_subcommand("cluster", "Fit fuzzy clustering, dump memberships");
    add_common_options(cluster, cluster_args, cluster_raw, true);

    CLI::App* evaluate = app.add_subcommand("evaluate", "Cross-validated evaluation report");
    add_common_options(evaluate, eval_args, eval_raw, true);
    std::optional<std::string> json_path;
    evaluate->add_option("--json", json_path, "Structured dump path (default: <out>.json)");

    CLI::App* recommend = app.add_subcommand("recommend", "Top-N recommendations for a user");
    add_common_options(recommend, rec_args, rec_raw, true);
    int rec_user = 0;
    int rec_n = 10;
    recommend->add_option("--user", rec_user, "Raw user id from the data file")->required();
    recommend->add_option("--n", rec_n, "How many items to recommend")->default_val(10);

    CLI::App* oracle = app.add_subcommand("oracle", "Brute-force equivalence suite");
    int oracle_trials = 100;
    std::uint64_t oracle_seed = 1;
    oracle->add_option("--trials", oracle_trials, "Random instances to check")->default_val(100);
    oracle->add_option("--seed", oracle_seed, "Generator seed")->default_val(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (ingest->parsed()) {
            collect_overrides(ingest, ingest_args, ingest_raw);
            return run_ingest(ingest_args, export_path);
        }
        if (cluster->parsed()) {
            collect_overrides(cluster, cluster_args, cluster_raw);
            return run_cluster(cluster_args);
        }
        if (evaluate->parsed()) {
            collect_overrides(evaluate, eval_args, eval_raw);
            return run_evaluate(eval_args, json_path);
        }
        if (recommend->parsed()) {
            collect_overrides(recommend, rec_args, rec_raw);
            // recommend uses a single N; --n wins, else the first --top-n entry
            int n = recommend->count("--n") > 0 ? rec_n
                    : (rec_args.flags.top_n_list && !rec_args.flags.top_n_list->empty()
                           ? rec_args.flags.top_n_list->front()
                           : rec_n);
            return run_recommend(rec_args, rec_user, n);
        }
        if (oracle->parsed()) {
            return run_oracle(oracle_trials, oracle_seed);
        }
    } catch (const fcrec::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const fcrec::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const fcrec::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
