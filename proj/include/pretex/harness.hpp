#pragma once

#include "pretex/chat.hpp"
#include "pretex/kb.hpp"
#include "pretex/prototype.hpp"
#include "pretex/textgen.hpp"
#include "pretex/transform.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pretex {

// Question appended to every statement, demo and test alike.
extern const std::string kVerifyQuestion;

// "<statement>, <question>"
std::string statement_line(const std::string& statement);

enum class Answer { True, False, Unparsed };

std::string answer_name(Answer a);
Answer parse_answer(std::string_view name);

// Case-insensitive word-boundary keyword scan; the earliest match by
// position decides. No keyword at all means Unparsed.
Answer extract_answer(const std::string& raw_reply);

struct DemoEntry {
    std::string triplet_id;
    std::string statement;
    Label answer = Label::True;

    bool operator==(const DemoEntry&) const = default;
};

// Held-out (statement, answer) pairs per (relation, transform key) bucket.
// Entries come from triplets excluded from the evaluation subset, so demo
// and test triplets never overlap.
class DemoPool {
public:
    // Instantiates all 8 keys of every demo triplet with raw templates.
    static DemoPool build(const std::vector<KnowledgeTriplet>& demo_triplets,
                          const PrototypePool& pool);

    const std::vector<DemoEntry>& bucket(const std::string& relation, TransformKey key) const;

    // Draws `count` distinct entries; the draw depends only on (seed,
    // sample_id), never on evaluation order.
    std::vector<DemoEntry> select(const std::string& relation, TransformKey key, int count,
                                  uint64_t seed, const std::string& sample_id) const;

    // Every bucket the samples will touch holds at least `shots` entries.
    void require_sufficient(const std::vector<TestSample>& samples, int shots) const;

    bool contains_triplet(const std::string& triplet_id) const;
    std::vector<std::string> triplet_ids() const;
    size_t bucket_count() const { return buckets_.size(); }

private:
    std::map<std::pair<std::string, int>, std::vector<DemoEntry>> buckets_;
    std::vector<std::string> triplet_ids_;
};

// Demos first, then the test statement; the prompt always ends with the
// verbatim question. shots=0 drops the demo blocks.
std::string build_prompt(const TestSample& sample, const std::vector<DemoEntry>& demos);

// A model under evaluation. Mocks see the sample so oracles can answer
// from ground truth; the HTTP backend only forwards the prompt.
class Verifier {
public:
    virtual ~Verifier() = default;
    virtual std::string model_id() const = 0;
    virtual std::string reply(const TestSample& sample, const std::string& prompt) = 0;
};

class HttpVerifier : public Verifier {
public:
    explicit HttpVerifier(HttpClientConfig config);

    std::string model_id() const override { return client_->model_id(); }
    std::string reply(const TestSample& sample, const std::string& prompt) override;

private:
    std::unique_ptr<HttpChatClient> client_;
};

// Built-in oracle backends, selected by model name:
//   mock:perfect        answers every sample's gold label
//   mock:always-true    answers "True" unconditionally
//   mock:coin:<seed>    seeded per-sample coin
//   mock:surface:<seed> gold label on untransformed statements, coin otherwise
bool is_mock_model(const std::string& name);
std::unique_ptr<Verifier> make_mock_verifier(const std::string& name);

struct SampleResult {
    std::string sample_id;
    std::string prompt_hash;
    std::string raw_reply;
    Answer parsed = Answer::Unparsed;
    int score = 0;
    bool transport_failed = false;

    bool operator==(const SampleResult&) const = default;
};

struct ScoreRow {
    std::string triplet_id;
    std::string relation;
    std::vector<int> cells;  // one per evaluated variant, key-subset order

    bool operator==(const ScoreRow&) const = default;
};

struct ScoreMatrix {
    std::string model_id;
    std::string generator;
    std::vector<std::string> key_subset;  // column names, canonical order
    int shots = 5;
    uint64_t demo_seed = 0;
    std::vector<ScoreRow> rows;

    size_t columns() const { return key_subset.size(); }
};

struct EvaluateOptions {
    int shots = 5;
    uint64_t demo_seed = 0;
    int parallelism = 1;
    std::vector<TransformKey> key_subset;  // empty = every variant present
};

struct EvaluateOutcome {
    ScoreMatrix matrix;
    std::vector<SampleResult> results;  // samples-file order
    uint64_t requests_sent = 0;
};

// Scores every sample against the verifier. Replies are cache-first when a
// cache is given, so a warm re-run issues zero requests. Transport failures
// exhaust the client's retries, then score 0 as Unparsed with a flag.
EvaluateOutcome evaluate(const std::vector<TestSample>& samples, GeneratorKind generator,
                         Verifier& verifier, const DemoPool& demos, const EvaluateOptions& options,
                         ResponseCache* cache);

void write_results_jsonl(const std::string& path, const std::string& model_id,
                         GeneratorKind generator, const std::vector<SampleResult>& results,
                         const std::string& config_hash = "");
std::vector<SampleResult> load_results_jsonl(const std::string& path);

void write_score_matrix(const std::string& path, const ScoreMatrix& matrix,
                        const std::string& config_hash = "");
ScoreMatrix load_score_matrix(const std::string& path);

}  // namespace pretex
