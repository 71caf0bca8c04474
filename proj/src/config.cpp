#include "pretex/config.hpp"

#include "pretex/errors.hpp"
#include "pretex/harness.hpp"
#include "pretex/kb.hpp"
#include "pretex/prototype.hpp"
#include "pretex/util.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

namespace pretex {

const char* kApiKeyEnv = "PRETEX_API_KEY";
const char* kRephraserApiKeyEnv = "PRETEX_REPHRASER_API_KEY";

std::string api_key_from_env() {
    const char* value = std::getenv(kApiKeyEnv);
    return value ? value : "";
}

std::string rephraser_api_key_from_env() {
    const char* value = std::getenv(kRephraserApiKeyEnv);
    if (value) return value;
    return api_key_from_env();
}

std::string RunConfig::effective_cache_dir() const {
    if (!cache_dir.empty()) return cache_dir;
    return output_dir + "/cache";
}

std::string RunConfig::effective_model() const {
    if (model == "mock:coin" || model == "mock:surface")
        return model + ":" + std::to_string(mock_seed);
    return model;
}

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError(key + " must be true or false, got: " + value);
}

long long parse_int(const std::string& value, const std::string& key) {
    try {
        size_t used = 0;
        long long parsed = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError(key + " must be an integer, got: " + value);
    }
}

uint64_t parse_seed(const std::string& value, const std::string& key) {
    long long parsed = parse_int(value, key);
    if (parsed < 0) throw ConfigError(key + " must be non-negative, got: " + value);
    return static_cast<uint64_t>(parsed);
}

std::vector<std::string> parse_key_list(const std::string& value) {
    std::vector<std::string> out;
    for (const auto& piece : split(value, ',')) {
        std::string name = trim(piece);
        if (name.empty()) continue;
        parse_key(name);  // rejects unknown names
        out.push_back(name);
    }
    return out;
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    RunConfig config;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));

        if (key == "kb") config.kb_path = value;
        else if (key == "schema") config.schema_path = value;
        else if (key == "prototypes") config.prototypes_path = value;
        else if (key == "generator") config.generator = value;
        else if (key == "key_subset") config.key_subset = parse_key_list(value);
        else if (key == "model") config.model = value;
        else if (key == "model_url") config.model_url = value;
        else if (key == "shots") config.shots = static_cast<int>(parse_int(value, key));
        else if (key == "demo_holdout") config.demo_holdout = static_cast<int>(parse_int(value, key));
        else if (key == "rephrase") config.rephrase = parse_bool(value, key);
        else if (key == "rephraser_url") config.rephraser_url = value;
        else if (key == "rephraser_model") config.rephraser_model = value;
        else if (key == "pad_llmeval") config.pad_llmeval = parse_bool(value, key);
        else if (key == "ablation") config.ablation = parse_bool(value, key);
        else if (key == "subset_seed") config.subset_seed = parse_seed(value, key);
        else if (key == "negative_seed") config.negative_seed = parse_seed(value, key);
        else if (key == "demo_seed") config.demo_seed = parse_seed(value, key);
        else if (key == "mock_seed") config.mock_seed = parse_seed(value, key);
        else if (key == "parallelism") config.parallelism = static_cast<int>(parse_int(value, key));
        else if (key == "retries") config.retries = static_cast<int>(parse_int(value, key));
        else if (key == "output_dir") config.output_dir = value;
        else if (key == "cache_dir") config.cache_dir = value;
        else
            throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key: " + key);
    }
    return config;
}

std::string config_canonical(const RunConfig& config) {
    std::string out;
    auto field = [&out](const std::string& key, const std::string& value) {
        out += key + "=" + value + "\n";
    };
    field("kb", config.kb_path);
    field("schema", config.schema_path);
    field("prototypes", config.prototypes_path);
    field("generator", config.generator);
    std::string keys;
    for (const auto& name : config.key_subset) {
        if (!keys.empty()) keys += ',';
        keys += name;
    }
    field("key_subset", keys);
    field("model", config.effective_model());
    field("model_url", config.model_url);
    field("shots", std::to_string(config.shots));
    field("demo_holdout", std::to_string(config.demo_holdout));
    field("rephrase", config.rephrase ? "true" : "false");
    field("rephraser_url", config.rephraser_url);
    field("rephraser_model", config.rephraser_model);
    field("pad_llmeval", config.pad_llmeval ? "true" : "false");
    field("ablation", config.ablation ? "true" : "false");
    field("subset_seed", std::to_string(config.subset_seed));
    field("negative_seed", std::to_string(config.negative_seed));
    field("demo_seed", std::to_string(config.demo_seed));
    field("mock_seed", std::to_string(config.mock_seed));
    return out;
}

std::string config_hash(const RunConfig& config) {
    return sha256_hex(config_canonical(config)).substr(0, 16);
}

namespace {

bool endpoint_reachable(const std::string& base_url, std::string& detail) {
    try {
        std::string url = base_url;
        while (!url.empty() && url.back() == '/') url.pop_back();
        size_t scheme_end = url.find("://");
        if (scheme_end == std::string::npos) {
            detail = "URL lacks a scheme";
            return false;
        }
        size_t path_start = url.find('/', scheme_end + 3);
        std::string host = path_start == std::string::npos ? url : url.substr(0, path_start);
        httplib::Client client(host);
        client.set_connection_timeout(5, 0);
        client.set_read_timeout(5, 0);
        auto res = client.Get("/");
        if (!res) {
            detail = httplib::to_string(res.error());
            return false;
        }
        return true;  // any HTTP status proves the listener is there
    } catch (const std::exception& e) {
        detail = e.what();
        return false;
    }
}

}  // namespace

std::vector<std::string> validate_config(const RunConfig& config, bool check_endpoint) {
    std::vector<std::string> problems;
    auto problem = [&problems](const std::string& text) { problems.push_back(text); };

    if (config.output_dir.empty()) problem("output_dir is not set");
    if (config.shots < 0) problem("shots must be >= 0");
    if (config.demo_holdout < 0) problem("demo_holdout must be >= 0");
    if (config.parallelism < 1) problem("parallelism must be >= 1");
    if (config.retries < 0) problem("retries must be >= 0");
    if (config.shots > 0 && config.demo_holdout == 0)
        problem("shots > 0 needs demo_holdout > 0 to stock the demo pool");

    GeneratorKind generator = GeneratorKind::PretexEval;
    bool generator_ok = true;
    try {
        generator = parse_generator(config.generator);
    } catch (const Error& e) {
        generator_ok = false;
        problem(e.what());
    }
    if (generator_ok && !config.key_subset.empty() && generator == GeneratorKind::LLMEval)
        problem("key_subset does not apply to the llmeval generator");
    if (generator_ok && generator == GeneratorKind::Direct) {
        for (const auto& name : config.key_subset) {
            if (name != "none") problem("direct generator only produces the none key, subset names " + name);
        }
    }
    if (generator_ok && generator == GeneratorKind::LLMEval &&
        (config.rephraser_url.empty() || config.rephraser_model.empty()))
        problem("llmeval generator needs rephraser_url and rephraser_model for statement generation");

    if (config.model.empty()) {
        problem("model is not set");
    } else if (is_mock_model(config.model)) {
        try {
            make_mock_verifier(config.effective_model());
        } catch (const Error& e) {
            problem(e.what());
        }
    } else if (config.model_url.empty()) {
        problem("model_url is required for non-mock model " + config.model);
    } else if (check_endpoint) {
        std::string detail;
        if (!endpoint_reachable(config.model_url, detail))
            problem("model endpoint unreachable: " + config.model_url + " (" + detail + ")");
    }

    if (config.rephrase) {
        if (config.rephraser_url.empty() || config.rephraser_model.empty())
            problem("rephrase=true needs rephraser_url and rephraser_model");
        else if (check_endpoint) {
            std::string detail;
            if (!endpoint_reachable(config.rephraser_url, detail))
                problem("rephraser endpoint unreachable: " + config.rephraser_url + " (" + detail +
                        ")");
        }
    }

    std::vector<RelationSchema> schema;
    bool schema_ok = false;
    if (config.schema_path.empty()) {
        problem("schema is not set");
    } else {
        try {
            schema = load_schema(config.schema_path);
            schema_ok = true;
        } catch (const Error& e) {
            problem(e.what());
        }
    }

    std::vector<KnowledgeTriplet> kb;
    bool kb_ok = false;
    if (config.kb_path.empty()) {
        problem("kb is not set");
    } else if (schema_ok) {
        try {
            kb = load_kb(config.kb_path, schema);
            kb_ok = true;
        } catch (const Error& e) {
            problem(e.what());
        }
    }

    if (config.prototypes_path.empty()) {
        // LLMEval generates statements without templates, but demo
        // statements always come from them.
        if (generator_ok && (generator != GeneratorKind::LLMEval || config.shots > 0))
            problem("prototypes is not set");
    } else {
        try {
            PrototypePool pool = PrototypePool::load(config.prototypes_path);
            if (kb_ok) {
                std::vector<std::string> relations;
                for (const auto& triplet : kb) {
                    if (relations.empty() || relations.back() != triplet.relation)
                        relations.push_back(triplet.relation);
                }
                std::sort(relations.begin(), relations.end());
                relations.erase(std::unique(relations.begin(), relations.end()), relations.end());
                for (const auto& gap : pool.missing_for(relations)) {
                    problem("prototype pool missing (" + gap.relation + ", " +
                            gap.base_key.name() + ", " + surface_name(gap.surface) + ")");
                }
            }
        } catch (const Error& e) {
            problem(e.what());
        }
    }

    if (kb_ok && schema_ok && config.shots > 0) {
        try {
            auto subset = sample_subset(kb, schema, config.subset_seed);
            auto parts = split_demo_holdout(subset, config.demo_holdout, config.demo_seed);
            // Positives and their negatives both land in each bucket, so
            // capacity is 2x the held-out pairs at best and can shrink when
            // negative pools are exhausted.
            auto negatives = sample_negatives(parts.demo, kb, config.negative_seed);
            std::map<std::string, int> capacity;
            for (const auto& t : parts.demo) capacity[t.relation] += 1;
            for (const auto& t : negatives.triplets) capacity[t.relation] += 1;
            for (const auto& [relation, count] : capacity) {
                if (count < config.shots)
                    problem("demo pool for relation " + relation + " holds " +
                            std::to_string(count) + " entries per bucket, need " +
                            std::to_string(config.shots));
            }
        } catch (const Error& e) {
            problem(std::string("demo holdout check failed: ") + e.what());
        }
    }

    return problems;
}

}  // namespace pretex
