#include "pretex/pipeline.hpp"

#include "pretex/errors.hpp"
#include "pretex/harness.hpp"
#include "pretex/kb.hpp"
#include "pretex/metrics.hpp"
#include "pretex/prototype.hpp"
#include "pretex/textgen.hpp"
#include "pretex/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <thread>

namespace pretex {

namespace fs = std::filesystem;
using nlohmann::json;

const char* kSubsetFile = "subset.tsv";
const char* kDemosFile = "demos.tsv";
const char* kSamplesFile = "samples.jsonl";
const char* kResultsFile = "results.jsonl";
const char* kScoresFile = "scores.json";
const char* kReportJsonFile = "report.json";
const char* kReportTextFile = "report.txt";
const char* kKrowCsvFile = "krow.csv";
const char* kAblationTextFile = "ablation.txt";
const char* kManifestFile = "manifest.json";

std::string ablation_report_file(const std::string& view) {
    return "report_" + view + ".json";
}

namespace {

std::string artifact(const RunConfig& config, const std::string& name) {
    return config.output_dir + "/" + name;
}

void require_output_dir(const RunConfig& config) {
    if (config.output_dir.empty()) throw ConfigError("output_dir is not set");
    fs::create_directories(config.output_dir);
}

void require_artifact(const RunConfig& config, const char* name, const char* produced_by) {
    if (!fs::exists(artifact(config, name)))
        throw ConfigError(std::string(name) + " not found in " + config.output_dir +
                          "; run the " + produced_by + " stage first");
}

std::vector<std::string> relations_of(const std::vector<KnowledgeTriplet>& triplets) {
    std::vector<std::string> relations;
    for (const auto& t : triplets) relations.push_back(t.relation);
    std::sort(relations.begin(), relations.end());
    relations.erase(std::unique(relations.begin(), relations.end()), relations.end());
    return relations;
}

std::shared_ptr<CachedChat> make_assistant_client(const RunConfig& config,
                                                  std::shared_ptr<ResponseCache> cache) {
    HttpClientConfig http;
    http.base_url = config.rephraser_url;
    http.model = config.rephraser_model;
    http.api_key = rephraser_api_key_from_env();
    http.max_retries = config.retries;
    auto client = std::make_shared<HttpChatClient>(std::move(http));
    return std::make_shared<CachedChat>(client, std::move(cache));
}

}  // namespace

void run_ingest(const RunConfig& config, std::ostream& log) {
    require_output_dir(config);
    auto schema = load_schema(config.schema_path);
    auto kb = load_kb(config.kb_path, schema);
    auto subset = sample_subset(kb, schema, config.subset_seed);

    DemoSplit parts;
    if (config.shots > 0 && config.demo_holdout > 0) {
        parts = split_demo_holdout(subset, static_cast<size_t>(config.demo_holdout),
                                   config.demo_seed);
    } else {
        parts.eval = subset;
    }

    auto eval_negatives = sample_negatives(parts.eval, kb, config.negative_seed);
    for (const auto& warning : eval_negatives.warnings) log << "[ingest] " << warning << "\n";
    auto demo_negatives = sample_negatives(parts.demo, kb, config.negative_seed);
    for (const auto& warning : demo_negatives.warnings) log << "[ingest] " << warning << "\n";

    std::vector<KnowledgeTriplet> eval_set = parts.eval;
    eval_set.insert(eval_set.end(), eval_negatives.triplets.begin(),
                    eval_negatives.triplets.end());
    std::vector<KnowledgeTriplet> demo_set = parts.demo;
    demo_set.insert(demo_set.end(), demo_negatives.triplets.begin(),
                    demo_negatives.triplets.end());

    std::string hash = config_hash(config);
    write_triplets_tsv(artifact(config, kSubsetFile), eval_set, "config " + hash);
    write_triplets_tsv(artifact(config, kDemosFile), demo_set, "config " + hash);
    write_manifest(config);

    log << "[ingest] " << eval_set.size() << " evaluation triplets (" << parts.eval.size()
        << " positive + " << eval_negatives.triplets.size() << " negative), " << demo_set.size()
        << " demo triplets\n";
}

StageStats run_generate(const RunConfig& config, std::ostream& log) {
    require_output_dir(config);
    require_artifact(config, kSubsetFile, "ingest");

    auto schema = load_schema(config.schema_path);
    auto subset = load_triplets_tsv(artifact(config, kSubsetFile), schema);
    if (subset.empty()) throw GenerationError("evaluation subset is empty");

    GeneratorKind generator = parse_generator(config.generator);
    StageStats stats;
    std::vector<TestSample> samples;

    if (generator == GeneratorKind::LLMEval) {
        auto cache = std::make_shared<ResponseCache>(config.effective_cache_dir());
        auto client = make_assistant_client(config, cache);

        std::vector<std::vector<TestSample>> per_triplet(subset.size());
        std::vector<std::string> defects;
        std::mutex defects_mutex;
        std::atomic<size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= subset.size()) return;
                try {
                    per_triplet[i] = generate_llmeval(subset[i], *client, config.pad_llmeval);
                } catch (const GenerationError& e) {
                    std::lock_guard<std::mutex> lock(defects_mutex);
                    defects.push_back(e.what());
                }
            }
        };
        int width = std::max(1, config.parallelism);
        std::vector<std::thread> threads;
        for (int t = 0; t < width; ++t) threads.emplace_back(worker);
        for (auto& thread : threads) thread.join();

        for (const auto& defect : defects) log << "[generate] defect: " << defect << "\n";
        for (auto& chunk : per_triplet)
            samples.insert(samples.end(), chunk.begin(), chunk.end());
        if (samples.empty())
            throw GenerationError("llmeval produced no usable samples (" +
                                  std::to_string(defects.size()) + " defects)");
        stats.generation_requests = client->requests_sent();
    } else {
        auto pool = PrototypePool::load(config.prototypes_path);
        pool.require_complete(relations_of(subset));

        if (generator == GeneratorKind::Direct) {
            for (const auto& triplet : subset) samples.push_back(generate_direct(triplet, pool));
        } else if (!config.rephrase) {
            Rephraser offline;
            for (const auto& triplet : subset) {
                auto chunk = generate_pretexeval(triplet, pool, offline);
                samples.insert(samples.end(), chunk.begin(), chunk.end());
            }
        } else {
            auto cache = std::make_shared<ResponseCache>(config.effective_cache_dir());
            auto client = make_assistant_client(config, cache);

            std::vector<std::vector<TestSample>> per_triplet(subset.size());
            std::vector<std::string> warnings;
            std::mutex warnings_mutex;
            std::atomic<size_t> next{0};
            std::mutex error_mutex;
            std::exception_ptr first_error;
            auto worker = [&]() {
                for (;;) {
                    size_t i = next.fetch_add(1);
                    if (i >= subset.size()) return;
                    try {
                        Rephraser rephraser(client);
                        per_triplet[i] = generate_pretexeval(subset[i], pool, rephraser);
                        if (!rephraser.warnings().empty()) {
                            std::lock_guard<std::mutex> lock(warnings_mutex);
                            warnings.insert(warnings.end(), rephraser.warnings().begin(),
                                            rephraser.warnings().end());
                        }
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            };
            int width = std::max(1, config.parallelism);
            std::vector<std::thread> threads;
            for (int t = 0; t < width; ++t) threads.emplace_back(worker);
            for (auto& thread : threads) thread.join();
            if (first_error) std::rethrow_exception(first_error);

            for (const auto& warning : warnings) log << "[generate] " << warning << "\n";
            for (auto& chunk : per_triplet)
                samples.insert(samples.end(), chunk.begin(), chunk.end());
            stats.rephrase_requests = client->requests_sent();
        }
    }

    write_samples_jsonl(artifact(config, kSamplesFile), generator, samples, config_hash(config));
    write_manifest(config);
    log << "[generate] " << samples.size() << " samples from " << subset.size() << " triplets";
    if (stats.rephrase_requests > 0) log << ", " << stats.rephrase_requests << " rephrase requests";
    if (stats.generation_requests > 0)
        log << ", " << stats.generation_requests << " generation requests";
    log << "\n";
    return stats;
}

StageStats run_evaluate(const RunConfig& config, std::ostream& log) {
    require_output_dir(config);
    require_artifact(config, kSamplesFile, "generate");

    auto samples_file = load_samples_jsonl(artifact(config, kSamplesFile));

    DemoPool demos;
    if (config.shots > 0) {
        require_artifact(config, kDemosFile, "ingest");
        auto schema = load_schema(config.schema_path);
        auto demo_triplets = load_triplets_tsv(artifact(config, kDemosFile), schema);
        auto pool = PrototypePool::load(config.prototypes_path);
        demos = DemoPool::build(demo_triplets, pool);
    }

    std::unique_ptr<Verifier> verifier;
    std::string model = config.effective_model();
    if (is_mock_model(model)) {
        verifier = make_mock_verifier(model);
    } else {
        if (config.model_url.empty())
            throw ConfigError("model_url is required for non-mock model " + model);
        HttpClientConfig http;
        http.base_url = config.model_url;
        http.model = model;
        http.api_key = api_key_from_env();
        http.max_retries = config.retries;
        verifier = std::make_unique<HttpVerifier>(std::move(http));
    }

    EvaluateOptions options;
    options.shots = config.shots;
    options.demo_seed = config.demo_seed;
    options.parallelism = config.parallelism;
    for (const auto& name : config.key_subset) options.key_subset.push_back(parse_key(name));

    ResponseCache cache(config.effective_cache_dir());
    auto outcome = evaluate(samples_file.samples, samples_file.generator, *verifier, demos,
                            options, &cache);

    std::string hash = config_hash(config);
    write_results_jsonl(artifact(config, kResultsFile), verifier->model_id(),
                        samples_file.generator, outcome.results, hash);
    write_score_matrix(artifact(config, kScoresFile), outcome.matrix, hash);
    write_manifest(config);

    size_t transport_failures = 0;
    for (const auto& r : outcome.results) transport_failures += r.transport_failed ? 1 : 0;
    log << "[evaluate] " << outcome.results.size() << " samples, " << outcome.matrix.rows.size()
        << " knowledge points, " << outcome.requests_sent << " requests sent";
    if (transport_failures > 0) log << ", " << transport_failures << " transport failures";
    log << "\n";

    StageStats stats;
    stats.verify_requests = outcome.requests_sent;
    return stats;
}

namespace {

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
    return buf;
}

std::string signed_fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%+.*f", digits, value);
    return buf;
}

struct AblationView {
    const char* name;
    std::vector<std::string> columns;
};

std::vector<AblationView> ablation_views() {
    std::vector<std::string> all;
    for (const auto& key : canonical_keys()) all.push_back(key.name());
    return {
        {"direct", {"none"}},
        {"plus_inv", {"none", "inv"}},
        {"plus_inv_dn", {"none", "inv", "dn", "inv+dn"}},
        {"all", all},
    };
}

}  // namespace

void run_report(const RunConfig& config, std::ostream& out, std::ostream& log) {
    require_output_dir(config);
    require_artifact(config, kScoresFile, "evaluate");

    auto matrix = load_score_matrix(artifact(config, kScoresFile));
    auto report = compute_report(matrix);
    std::string hash = config_hash(config);
    write_report_json(artifact(config, kReportJsonFile), report, hash);
    std::string text = render_report_text(report);
    write_file(artifact(config, kReportTextFile), text);
    write_krow_csv(artifact(config, kKrowCsvFile), matrix);

    out << text;

    if (config.ablation) {
        if (matrix.generator != "pretexeval")
            throw ConfigError("ablation reports need pretexeval scores, got " + matrix.generator);
        for (const auto& key : canonical_keys()) {
            if (std::find(matrix.key_subset.begin(), matrix.key_subset.end(), key.name()) ==
                matrix.key_subset.end())
                throw ConfigError("ablation reports need all 8 transformation columns; scores "
                                  "lack " + key.name());
        }
        std::string table = "view        columns  a_avg   a_joint  gain\n";
        for (const auto& view : ablation_views()) {
            ScoreMatrix restricted = restrict_columns(matrix, view.columns);
            auto view_report = compute_report(restricted);
            write_report_json(artifact(config, ablation_report_file(view.name)), view_report,
                              hash);
            std::string name = view.name;
            table += name + std::string(name.size() < 12 ? 12 - name.size() : 1, ' ');
            std::string cols = std::to_string(view.columns.size());
            table += cols + std::string(cols.size() < 8 ? 8 - cols.size() : 1, ' ');
            table += " " + fixed(view_report.a_avg, 4);
            table += "  " + fixed(view_report.a_joint, 4);
            table += "  " + signed_fixed(view_report.gain_points, 1);
            table += "\n";
        }
        write_file(artifact(config, kAblationTextFile), table);
        out << "\n" << table;
    }

    write_manifest(config);
    log << "[report] a_avg " << fixed(report.a_avg, 4) << ", a_joint " << fixed(report.a_joint, 4)
        << ", n " << report.n << ", m " << report.m << "\n";
}

StageStats run_all(const RunConfig& config, std::ostream& out, std::ostream& log) {
    run_ingest(config, log);
    StageStats stats = run_generate(config, log);
    StageStats eval_stats = run_evaluate(config, log);
    stats.verify_requests = eval_stats.verify_requests;
    run_report(config, out, log);
    return stats;
}

void write_manifest(const RunConfig& config) {
    require_output_dir(config);
    fs::path root = fs::path(config.output_dir);
    fs::path cache = fs::path(config.effective_cache_dir());
    std::error_code ec;
    fs::path cache_canonical = fs::weakly_canonical(cache, ec);

    json files = json::object();
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        fs::path canonical = fs::weakly_canonical(entry.path(), ec);
        if (!cache_canonical.empty()) {
            auto rel_to_cache = canonical.lexically_relative(cache_canonical);
            if (!rel_to_cache.empty() && rel_to_cache.native().rfind("..", 0) != 0)
                continue;  // inside the response cache
        }
        std::string rel = entry.path().lexically_relative(root).generic_string();
        if (rel == kManifestFile) continue;
        files[rel] = sha256_hex(read_file(entry.path()));
    }

    json doc;
    doc["format"] = "pretexeval.manifest.v1";
    doc["config_hash"] = config_hash(config);
    doc["generator"] = config.generator;
    doc["model"] = config.effective_model();
    doc["key_subset"] = config.key_subset;
    doc["shots"] = config.shots;
    doc["seeds"] = {{"subset", config.subset_seed},
                    {"negative", config.negative_seed},
                    {"demo", config.demo_seed},
                    {"mock", config.mock_seed}};
    doc["files"] = files;
    write_file(root / kManifestFile, doc.dump(2) + "\n");
}

}  // namespace pretex
