#pragma once

#include "pretex/chat.hpp"
#include "pretex/kb.hpp"
#include "pretex/prototype.hpp"
#include "pretex/transform.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace pretex {

enum class GeneratorKind { PretexEval, Direct, LLMEval };

std::string generator_name(GeneratorKind g);
GeneratorKind parse_generator(std::string_view name);

// One true/false test statement ready for verification.
// variant is the score-matrix column: the transform key index for
// template-based generators, the reply line position for LLMEval.
struct TestSample {
    std::string sample_id;
    std::string triplet_id;
    std::string relation;
    TransformKey key;
    int variant = 0;
    std::string prototype_text;
    std::string final_text;
    Label label = Label::True;
    bool rephrased = false;
    GeneratorKind generator = GeneratorKind::PretexEval;

    bool operator==(const TestSample&) const = default;
};

std::string make_sample_id(const std::string& triplet_id, GeneratorKind generator, int variant);

// Paraphrase instruction sent to the rephraser service; "[prototype]"
// is replaced by the statement.
extern const std::string kRephraseInstruction;

std::string rephrase_prompt(const std::string& statement);

struct RephraseResult {
    std::string text;
    bool rephrased = false;
};

// Wraps an optional rephraser endpoint. Transport failures downgrade to
// pass-through and are collected as warnings; a batch never aborts on a
// flaky paraphrase.
class Rephraser {
public:
    Rephraser() = default;  // offline: pass-through
    explicit Rephraser(std::shared_ptr<CachedChat> client) : client_(std::move(client)) {}

    RephraseResult apply(const std::string& statement);

    bool online() const { return client_ != nullptr; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    std::shared_ptr<CachedChat> client_;
    std::vector<std::string> warnings_;
};

// All 8 transformed statements for one triplet, canonical key order.
std::vector<TestSample> generate_pretexeval(const KnowledgeTriplet& triplet,
                                            const PrototypePool& pool, Rephraser& rephraser);

// Baseline: the untransformed template, no rephrasing.
TestSample generate_direct(const KnowledgeTriplet& triplet, const PrototypePool& pool);

// Statement-generation instruction for the LLMEval baseline; "[triplet]"
// is replaced by "(head, relation, tail)".
extern const std::string kLlmEvalInstruction;

std::string llmeval_prompt(const KnowledgeTriplet& triplet);

// Drops a leading "N." / "N)" / "- " listing marker.
std::string strip_listing_prefix(const std::string& line);

// Baseline: ask a model for 8 free-form statements of the fact. All share
// the triplet's own label. Short replies throw unless pad_short is set,
// in which case the last line is repeated.
std::vector<TestSample> generate_llmeval(const KnowledgeTriplet& triplet, CachedChat& client,
                                         bool pad_short);

// Line-delimited sample records with a leading meta line. A non-empty
// config_hash lands in the meta line for provenance.
void write_samples_jsonl(const std::string& path, GeneratorKind generator,
                         const std::vector<TestSample>& samples,
                         const std::string& config_hash = "");

struct SamplesFile {
    GeneratorKind generator = GeneratorKind::PretexEval;
    std::vector<TestSample> samples;
};

SamplesFile load_samples_jsonl(const std::string& path);

}  // namespace pretex
