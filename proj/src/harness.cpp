#include "pretex/harness.hpp"

#include "pretex/errors.hpp"
#include "pretex/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

namespace pretex {

using nlohmann::json;

const std::string kVerifyQuestion =
    "is the statement above true or false? Please answer True or False.";

std::string statement_line(const std::string& statement) {
    return statement + ", " + kVerifyQuestion;
}

std::string answer_name(Answer a) {
    switch (a) {
        case Answer::True: return "True";
        case Answer::False: return "False";
        case Answer::Unparsed: return "Unparsed";
    }
    throw Error("bad answer");
}

Answer parse_answer(std::string_view name) {
    if (name == "True") return Answer::True;
    if (name == "False") return Answer::False;
    if (name == "Unparsed") return Answer::Unparsed;
    throw Error("unknown answer: " + std::string(name));
}

namespace {

const std::vector<std::pair<std::string, Answer>>& keyword_table() {
    static const std::vector<std::pair<std::string, Answer>> table = {
        {"true", Answer::True},           {"entailed", Answer::True},
        {"correct", Answer::True},        {"yes", Answer::True},
        {"false", Answer::False},         {"contradicted", Answer::False},
        {"wrong", Answer::False},         {"no", Answer::False},
    };
    return table;
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

Answer extract_answer(const std::string& raw_reply) {
    std::string lowered = to_lower(raw_reply);
    size_t best_pos = std::string::npos;
    Answer best = Answer::Unparsed;
    for (const auto& [keyword, answer] : keyword_table()) {
        size_t pos = 0;
        while ((pos = lowered.find(keyword, pos)) != std::string::npos) {
            bool left_ok = pos == 0 || !is_word_char(lowered[pos - 1]);
            size_t end = pos + keyword.size();
            bool right_ok = end >= lowered.size() || !is_word_char(lowered[end]);
            if (left_ok && right_ok) {
                if (pos < best_pos) {
                    best_pos = pos;
                    best = answer;
                }
                break;  // later hits of this keyword cannot improve
            }
            ++pos;
        }
    }
    return best;
}

DemoPool DemoPool::build(const std::vector<KnowledgeTriplet>& demo_triplets,
                         const PrototypePool& pool) {
    DemoPool out;
    for (const auto& triplet : demo_triplets) {
        for (const auto& key : canonical_keys()) {
            const Prototype& proto = pool.retrieve(triplet.relation, key);
            DemoEntry entry;
            entry.triplet_id = triplet.triplet_id;
            entry.statement = instantiate(proto, triplet.head, triplet.tail);
            entry.answer = label_for(key, triplet.polarity);
            out.buckets_[{triplet.relation, key.index()}].push_back(std::move(entry));
        }
        out.triplet_ids_.push_back(triplet.triplet_id);
    }
    for (auto& [bucket_key, entries] : out.buckets_) {
        std::sort(entries.begin(), entries.end(),
                  [](const DemoEntry& a, const DemoEntry& b) { return a.triplet_id < b.triplet_id; });
    }
    std::sort(out.triplet_ids_.begin(), out.triplet_ids_.end());
    out.triplet_ids_.erase(std::unique(out.triplet_ids_.begin(), out.triplet_ids_.end()),
                           out.triplet_ids_.end());
    return out;
}

const std::vector<DemoEntry>& DemoPool::bucket(const std::string& relation,
                                               TransformKey key) const {
    auto it = buckets_.find({relation, key.index()});
    if (it == buckets_.end())
        throw ConfigError("demo pool has no bucket for (" + relation + ", " + key.name() + ")");
    return it->second;
}

std::vector<DemoEntry> DemoPool::select(const std::string& relation, TransformKey key, int count,
                                        uint64_t seed, const std::string& sample_id) const {
    if (count == 0) return {};
    const auto& entries = bucket(relation, key);
    if (entries.size() < static_cast<size_t>(count))
        throw ConfigError("demo bucket (" + relation + ", " + key.name() + ") holds " +
                          std::to_string(entries.size()) + " entries, need " +
                          std::to_string(count));
    std::mt19937_64 rng(derive_u64(seed, "demos:" + sample_id));
    std::vector<size_t> indices(entries.size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    std::vector<DemoEntry> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        size_t pick = i + uniform_index(rng, indices.size() - i);
        std::swap(indices[i], indices[pick]);
        out.push_back(entries[indices[i]]);
    }
    return out;
}

void DemoPool::require_sufficient(const std::vector<TestSample>& samples, int shots) const {
    if (shots == 0) return;
    std::map<std::pair<std::string, int>, bool> seen;
    for (const auto& sample : samples) {
        auto key = std::make_pair(sample.relation, sample.key.index());
        if (seen[key]) continue;
        seen[key] = true;
        const auto& entries = bucket(sample.relation, sample.key);
        if (entries.size() < static_cast<size_t>(shots))
            throw ConfigError("demo bucket (" + sample.relation + ", " + sample.key.name() +
                              ") holds " + std::to_string(entries.size()) + " entries, need " +
                              std::to_string(shots));
    }
}

bool DemoPool::contains_triplet(const std::string& triplet_id) const {
    return std::binary_search(triplet_ids_.begin(), triplet_ids_.end(), triplet_id);
}

std::vector<std::string> DemoPool::triplet_ids() const {
    return triplet_ids_;
}

std::string build_prompt(const TestSample& sample, const std::vector<DemoEntry>& demos) {
    std::string prompt;
    for (const auto& demo : demos) {
        prompt += statement_line(demo.statement);
        prompt += '\n';
        prompt += label_name(demo.answer);
        prompt += "\n\n";
    }
    prompt += statement_line(sample.final_text);
    return prompt;
}

HttpVerifier::HttpVerifier(HttpClientConfig config)
    : client_(std::make_unique<HttpChatClient>(std::move(config))) {}

std::string HttpVerifier::reply(const TestSample&, const std::string& prompt) {
    return client_->ask(prompt);
}

namespace {

class PerfectVerifier : public Verifier {
public:
    std::string model_id() const override { return "mock:perfect"; }
    std::string reply(const TestSample& sample, const std::string&) override {
        return label_name(sample.label);
    }
};

class AlwaysTrueVerifier : public Verifier {
public:
    std::string model_id() const override { return "mock:always-true"; }
    std::string reply(const TestSample&, const std::string&) override { return "True"; }
};

class CoinVerifier : public Verifier {
public:
    explicit CoinVerifier(uint64_t seed) : seed_(seed) {}
    std::string model_id() const override { return "mock:coin:" + std::to_string(seed_); }
    std::string reply(const TestSample& sample, const std::string&) override {
        return (derive_u64(seed_, "coin:" + sample.sample_id) & 1) ? "True" : "False";
    }

private:
    uint64_t seed_;
};

// Models a respondent that mastered the literal template wording but
// nothing else: gold answers on untransformed statements, coin otherwise.
class SurfaceVerifier : public Verifier {
public:
    explicit SurfaceVerifier(uint64_t seed) : seed_(seed) {}
    std::string model_id() const override { return "mock:surface:" + std::to_string(seed_); }
    std::string reply(const TestSample& sample, const std::string&) override {
        if (sample.key == TransformKey{} && sample.variant == 0)
            return label_name(sample.label);
        return (derive_u64(seed_, "surface:" + sample.sample_id) & 1) ? "True" : "False";
    }

private:
    uint64_t seed_;
};

uint64_t parse_seed_suffix(const std::string& name, const std::string& prefix) {
    std::string digits = name.substr(prefix.size());
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("mock seed must be a non-negative integer: " + name);
    return std::stoull(digits);
}

}  // namespace

bool is_mock_model(const std::string& name) {
    return name.rfind("mock:", 0) == 0;
}

std::unique_ptr<Verifier> make_mock_verifier(const std::string& name) {
    if (name == "mock:perfect") return std::make_unique<PerfectVerifier>();
    if (name == "mock:always-true") return std::make_unique<AlwaysTrueVerifier>();
    if (name.rfind("mock:coin:", 0) == 0)
        return std::make_unique<CoinVerifier>(parse_seed_suffix(name, "mock:coin:"));
    if (name.rfind("mock:surface:", 0) == 0)
        return std::make_unique<SurfaceVerifier>(parse_seed_suffix(name, "mock:surface:"));
    throw ConfigError("unknown mock model: " + name);
}

namespace {

std::string column_name(GeneratorKind generator, int variant) {
    if (generator == GeneratorKind::LLMEval) return "v" + std::to_string(variant);
    return key_from_index(variant).name();
}

}  // namespace

EvaluateOutcome evaluate(const std::vector<TestSample>& samples, GeneratorKind generator,
                         Verifier& verifier, const DemoPool& demos, const EvaluateOptions& options,
                         ResponseCache* cache) {
    if (!options.key_subset.empty() && generator == GeneratorKind::LLMEval)
        throw ConfigError("key subset does not apply to llmeval samples");

    std::vector<TestSample> selected;
    if (options.key_subset.empty()) {
        selected = samples;
    } else {
        for (const auto& sample : samples) {
            bool keep = std::any_of(options.key_subset.begin(), options.key_subset.end(),
                                    [&sample](TransformKey k) { return k == sample.key; });
            if (keep) selected.push_back(sample);
        }
    }
    if (selected.empty()) throw EvaluationError("no samples to evaluate");

    for (const auto& sample : selected) {
        if (demos.contains_triplet(sample.triplet_id) && options.shots > 0)
            throw EvaluationError("triplet " + sample.triplet_id +
                                  " appears in both demo pool and test samples");
    }
    demos.require_sufficient(selected, options.shots);

    // Column layout: every variant present, in canonical order.
    std::vector<int> variants;
    for (const auto& sample : selected) variants.push_back(sample.variant);
    std::sort(variants.begin(), variants.end());
    variants.erase(std::unique(variants.begin(), variants.end()), variants.end());
    std::map<int, size_t> column_of;
    for (size_t i = 0; i < variants.size(); ++i) column_of[variants[i]] = i;

    std::vector<SampleResult> results(selected.size());
    std::atomic<size_t> next{0};
    std::atomic<uint64_t> sent{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= selected.size()) return;
            const TestSample& sample = selected[i];
            SampleResult result;
            result.sample_id = sample.sample_id;
            try {
                auto demo_entries = demos.select(sample.relation, sample.key, options.shots,
                                                 options.demo_seed, sample.sample_id);
                std::string prompt = build_prompt(sample, demo_entries);
                result.prompt_hash = sha256_hex(prompt);
                std::optional<std::string> reply;
                if (cache) reply = cache->lookup(verifier.model_id(), prompt);
                if (!reply) {
                    try {
                        reply = verifier.reply(sample, prompt);
                        sent.fetch_add(1);
                        if (cache) cache->store(verifier.model_id(), prompt, *reply);
                    } catch (const TransportError&) {
                        result.raw_reply.clear();
                        result.parsed = Answer::Unparsed;
                        result.score = 0;
                        result.transport_failed = true;
                        results[i] = std::move(result);
                        continue;
                    }
                }
                result.raw_reply = *reply;
                result.parsed = extract_answer(result.raw_reply);
                bool match = (result.parsed == Answer::True && sample.label == Label::True) ||
                             (result.parsed == Answer::False && sample.label == Label::False);
                result.score = match ? 1 : 0;
                results[i] = std::move(result);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    int width = std::max(1, options.parallelism);
    if (width == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(width);
        for (int t = 0; t < width; ++t) threads.emplace_back(worker);
        for (auto& thread : threads) thread.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    EvaluateOutcome outcome;
    outcome.requests_sent = sent.load();
    outcome.results = std::move(results);

    ScoreMatrix& matrix = outcome.matrix;
    matrix.model_id = verifier.model_id();
    matrix.generator = generator_name(generator);
    for (int variant : variants) matrix.key_subset.push_back(column_name(generator, variant));
    matrix.shots = options.shots;
    matrix.demo_seed = options.demo_seed;

    std::map<std::string, size_t> row_of;
    for (size_t i = 0; i < selected.size(); ++i) {
        const TestSample& sample = selected[i];
        auto it = row_of.find(sample.triplet_id);
        if (it == row_of.end()) {
            it = row_of.emplace(sample.triplet_id, matrix.rows.size()).first;
            ScoreRow row;
            row.triplet_id = sample.triplet_id;
            row.relation = sample.relation;
            row.cells.assign(variants.size(), -1);
            matrix.rows.push_back(std::move(row));
        }
        ScoreRow& row = matrix.rows[it->second];
        size_t col = column_of.at(sample.variant);
        if (row.cells[col] != -1)
            throw EvaluationError("duplicate sample for triplet " + sample.triplet_id +
                                  " column " + matrix.key_subset[col]);
        row.cells[col] = outcome.results[i].score;
    }
    for (const auto& row : matrix.rows) {
        for (size_t c = 0; c < row.cells.size(); ++c) {
            if (row.cells[c] == -1)
                throw EvaluationError("triplet " + row.triplet_id + " is missing column " +
                                      matrix.key_subset[c]);
        }
    }
    return outcome;
}

void write_results_jsonl(const std::string& path, const std::string& model_id,
                         GeneratorKind generator, const std::vector<SampleResult>& results,
                         const std::string& config_hash) {
    std::string out;
    json meta;
    meta["type"] = "meta";
    meta["format"] = "pretexeval.results.v1";
    meta["model"] = model_id;
    meta["generator"] = generator_name(generator);
    meta["count"] = results.size();
    if (!config_hash.empty()) meta["config_hash"] = config_hash;
    out += meta.dump() + "\n";
    for (const auto& r : results) {
        json record;
        record["sample_id"] = r.sample_id;
        record["prompt_hash"] = r.prompt_hash;
        record["raw_reply"] = r.raw_reply;
        record["parsed"] = answer_name(r.parsed);
        record["score"] = r.score;
        record["transport_failed"] = r.transport_failed;
        out += record.dump() + "\n";
    }
    write_file(path, out);
}

std::vector<SampleResult> load_results_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open results file");
    std::vector<SampleResult> out;
    std::string line;
    size_t line_no = 0;
    bool saw_meta = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path, line_no, e.what());
        }
        if (!saw_meta) {
            if (record.value("format", "") != "pretexeval.results.v1")
                throw ParseError(path, line_no, "missing results meta line");
            saw_meta = true;
            continue;
        }
        SampleResult r;
        try {
            r.sample_id = record.at("sample_id").get<std::string>();
            r.prompt_hash = record.at("prompt_hash").get<std::string>();
            r.raw_reply = record.at("raw_reply").get<std::string>();
            r.parsed = parse_answer(record.at("parsed").get<std::string>());
            r.score = record.at("score").get<int>();
            r.transport_failed = record.at("transport_failed").get<bool>();
        } catch (const json::exception& e) {
            throw ParseError(path, line_no, e.what());
        }
        out.push_back(std::move(r));
    }
    if (!saw_meta) throw ParseError(path, 0, "empty results file");
    return out;
}

void write_score_matrix(const std::string& path, const ScoreMatrix& matrix,
                        const std::string& config_hash) {
    json doc;
    doc["format"] = "pretexeval.scores.v1";
    if (!config_hash.empty()) doc["config_hash"] = config_hash;
    doc["model"] = matrix.model_id;
    doc["generator"] = matrix.generator;
    doc["key_subset"] = matrix.key_subset;
    doc["shots"] = matrix.shots;
    doc["demo_seed"] = matrix.demo_seed;
    auto& rows = doc["rows"] = json::array();
    for (const auto& row : matrix.rows) {
        json r;
        r["triplet_id"] = row.triplet_id;
        r["relation"] = row.relation;
        r["cells"] = row.cells;
        rows.push_back(std::move(r));
    }
    write_file(path, doc.dump(2) + "\n");
}

ScoreMatrix load_score_matrix(const std::string& path) {
    std::string text = read_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(path, 0, e.what());
    }
    if (doc.value("format", "") != "pretexeval.scores.v1")
        throw ParseError(path, 0, "not a score matrix file");
    ScoreMatrix matrix;
    try {
        matrix.model_id = doc.at("model").get<std::string>();
        matrix.generator = doc.at("generator").get<std::string>();
        matrix.key_subset = doc.at("key_subset").get<std::vector<std::string>>();
        matrix.shots = doc.at("shots").get<int>();
        matrix.demo_seed = doc.at("demo_seed").get<uint64_t>();
        for (const auto& r : doc.at("rows")) {
            ScoreRow row;
            row.triplet_id = r.at("triplet_id").get<std::string>();
            row.relation = r.at("relation").get<std::string>();
            row.cells = r.at("cells").get<std::vector<int>>();
            matrix.rows.push_back(std::move(row));
        }
    } catch (const json::exception& e) {
        throw ParseError(path, 0, e.what());
    }
    return matrix;
}

}  // namespace pretex
