#include "fcrec/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fcrec {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    std::istringstream in(value);
    in >> out;
    if (in.fail() || !(in >> std::ws).eof())
        throw ConfigError("config key '" + key + "': cannot parse value '" + value + "'");
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

std::vector<MeasureId> parse_measures(const std::vector<std::string>& names) {
    std::vector<MeasureId> out;
    for (const std::string& name : names) {
        auto id = measure_from_string(name);
        if (!id)
            throw ConfigError("unknown measure '" + name + "' (valid: " +
                              measure_names_joined() + ")");
        out.push_back(*id);
    }
    return out;
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const std::string& part : split_list(text))
        out.push_back(parse_number<int>("list", part));
    return out;
}

void ExperimentConfig::validate(const RatingScale& scale) const {
    if (cluster_count < 1) throw ConfigError("cluster_count must be at least 1");
    if (fuzzifier <= 1.0) throw ConfigError("fuzzifier must be greater than 1");
    if (neighbor_count < 1) throw ConfigError("neighbor_count must be at least 1");
    if (top_n_list.empty()) throw ConfigError("top_n_list must not be empty");
    if (!std::is_sorted(top_n_list.begin(), top_n_list.end()) ||
        std::adjacent_find(top_n_list.begin(), top_n_list.end()) != top_n_list.end())
        throw ConfigError("top_n_list must be strictly ascending");
    if (top_n_list.front() < 1) throw ConfigError("top_n_list entries must be positive");
    if (!scale.contains(relevance_threshold))
        throw ConfigError("relevance_threshold " + std::to_string(relevance_threshold) +
                          " outside rating scale [" + std::to_string(scale.min) + ", " +
                          std::to_string(scale.max) + "]");
    if (fcm_tolerance <= 0.0) throw ConfigError("fcm_tolerance must be positive");
    if (fcm_max_iterations < 1) throw ConfigError("fcm_max_iterations must be at least 1");
    if (fold_count < 2) throw ConfigError("fold_count must be at least 2");
    if (measures.empty()) throw ConfigError("at least one measure is required");
    if (similarity.gamma < 1) throw ConfigError("gamma must be at least 1");
    if (threads < 0) throw ConfigError("threads must be non-negative");
}

void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value) {
    if (key == "cluster_count") {
        config.cluster_count = parse_number<int>(key, value);
    } else if (key == "fuzzifier") {
        config.fuzzifier = parse_number<double>(key, value);
    } else if (key == "neighbor_count") {
        config.neighbor_count = parse_number<int>(key, value);
    } else if (key == "top_n_list") {
        config.top_n_list = parse_int_list(value);
    } else if (key == "relevance_threshold") {
        config.relevance_threshold = parse_number<int>(key, value);
    } else if (key == "fcm_tolerance") {
        config.fcm_tolerance = parse_number<double>(key, value);
    } else if (key == "fcm_max_iterations") {
        config.fcm_max_iterations = parse_number<int>(key, value);
    } else if (key == "seed") {
        config.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "fold_count") {
        config.fold_count = parse_number<int>(key, value);
    } else if (key == "measures") {
        config.measures = parse_measures(split_list(value));
    } else if (key == "defuzzifier") {
        if (!defuzzifier_from_string(value, config.defuzzifier))
            throw ConfigError("config key 'defuzzifier': expected cog or max, got '" + value + "'");
    } else if (key == "pss_aggregation") {
        if (value == "sum") config.similarity.pss_aggregation = PssAggregation::Sum;
        else if (value == "mean") config.similarity.pss_aggregation = PssAggregation::Mean;
        else throw ConfigError("config key 'pss_aggregation': expected sum or mean, got '" + value + "'");
    } else if (key == "singularity_form") {
        if (value == "centered") config.similarity.singularity_form = SingularityForm::Centered;
        else if (value == "signed") config.similarity.singularity_form = SingularityForm::Signed;
        else throw ConfigError("config key 'singularity_form': expected centered or signed, got '" +
                               value + "'");
    } else if (key == "gamma") {
        config.similarity.gamma = parse_number<int>(key, value);
    } else if (key == "threads") {
        config.threads = parse_number<int>(key, value);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got '" + line + "'");
        try {
            apply_config_entry(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

ExperimentConfig resolve_config(const std::optional<std::string>& config_path,
                                const FlagOverrides& flags) {
    ExperimentConfig config;
    if (config_path) config = load_config_file(*config_path);

    if (flags.measures) config.measures = parse_measures(*flags.measures);
    if (flags.cluster_count) config.cluster_count = *flags.cluster_count;
    if (flags.neighbor_count) config.neighbor_count = *flags.neighbor_count;
    if (flags.seed) config.seed = *flags.seed;
    if (flags.top_n_list) config.top_n_list = *flags.top_n_list;
    if (flags.defuzzifier) {
        if (!defuzzifier_from_string(*flags.defuzzifier, config.defuzzifier))
            throw ConfigError("--defuzzifier: expected cog or max, got '" + *flags.defuzzifier + "'");
    }
    if (flags.threads) config.threads = *flags.threads;
    if (flags.pss_aggregation) apply_config_entry(config, "pss_aggregation", *flags.pss_aggregation);
    if (flags.singularity_form) apply_config_entry(config, "singularity_form", *flags.singularity_form);
    return config;
}

}  // namespace fcrec
