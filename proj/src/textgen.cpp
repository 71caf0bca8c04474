#include "pretex/textgen.hpp"

#include "pretex/errors.hpp"
#include "pretex/util.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>

namespace pretex {

using nlohmann::json;

std::string generator_name(GeneratorKind g) {
    switch (g) {
        case GeneratorKind::PretexEval: return "pretexeval";
        case GeneratorKind::Direct: return "direct";
        case GeneratorKind::LLMEval: return "llmeval";
    }
    throw Error("bad generator kind");
}

GeneratorKind parse_generator(std::string_view name) {
    if (name == "pretexeval") return GeneratorKind::PretexEval;
    if (name == "direct") return GeneratorKind::Direct;
    if (name == "llmeval") return GeneratorKind::LLMEval;
    throw Error("unknown generator: " + std::string(name));
}

std::string make_sample_id(const std::string& triplet_id, GeneratorKind generator, int variant) {
    return triplet_id + ":" + generator_name(generator) + ":" + std::to_string(variant);
}

const std::string kRephraseInstruction =
    "Please paraphrase the following statement to present the same concept in a different way. "
    "DO NOT change the basic sentence structure. Directly output the paraphrased statement "
    "without other text. Statement: [prototype]";

std::string rephrase_prompt(const std::string& statement) {
    std::string prompt = kRephraseInstruction;
    size_t pos = prompt.find("[prototype]");
    prompt.replace(pos, 11, statement);
    return prompt;
}

RephraseResult Rephraser::apply(const std::string& statement) {
    if (!client_) return {statement, false};
    try {
        std::string reply = trim(client_->ask(rephrase_prompt(statement)));
        if (reply.empty()) {
            warnings_.push_back("rephraser returned empty reply, keeping: " + statement);
            return {statement, false};
        }
        return {reply, true};
    } catch (const TransportError& e) {
        warnings_.push_back(std::string("rephrase failed, keeping original: ") + e.what());
        return {statement, false};
    }
}

std::vector<TestSample> generate_pretexeval(const KnowledgeTriplet& triplet,
                                            const PrototypePool& pool, Rephraser& rephraser) {
    auto variants = derive_variants(to_predicate(triplet));
    std::vector<TestSample> samples;
    samples.reserve(variants.size());
    for (const auto& variant : variants) {
        const Prototype& proto = pool.retrieve(triplet.relation, variant.key);
        TestSample sample;
        sample.triplet_id = triplet.triplet_id;
        sample.relation = triplet.relation;
        sample.key = variant.key;
        sample.variant = variant.key.index();
        sample.generator = GeneratorKind::PretexEval;
        sample.sample_id = make_sample_id(triplet.triplet_id, sample.generator, sample.variant);
        sample.prototype_text = instantiate(proto, variant.head, variant.tail);
        auto rephrased = rephraser.apply(sample.prototype_text);
        sample.final_text = rephrased.text;
        sample.rephrased = rephrased.rephrased;
        sample.label = label_for(variant.key, triplet.polarity);
        samples.push_back(std::move(sample));
    }
    return samples;
}

TestSample generate_direct(const KnowledgeTriplet& triplet, const PrototypePool& pool) {
    const Prototype& proto = pool.retrieve(triplet.relation, TransformKey{});
    TestSample sample;
    sample.triplet_id = triplet.triplet_id;
    sample.relation = triplet.relation;
    sample.key = TransformKey{};
    sample.variant = 0;
    sample.generator = GeneratorKind::Direct;
    sample.sample_id = make_sample_id(triplet.triplet_id, sample.generator, 0);
    sample.prototype_text = instantiate(proto, triplet.head, triplet.tail);
    sample.final_text = sample.prototype_text;
    sample.rephrased = false;
    sample.label = label_for(TransformKey{}, triplet.polarity);
    return sample;
}

const std::string kLlmEvalInstruction =
    "Based on the given knowledge triplet, generate 8 statement to express the underlying "
    "knowledge in different ways. Output one statement per line. Directly output the statements "
    "without other text. Knowledge triplet: [triplet].";

std::string llmeval_prompt(const KnowledgeTriplet& triplet) {
    std::string rendered =
        "(" + triplet.head.surface + ", " + triplet.relation + ", " + triplet.tail.surface + ")";
    std::string prompt = kLlmEvalInstruction;
    size_t pos = prompt.find("[triplet]");
    prompt.replace(pos, 9, rendered);
    return prompt;
}

std::string strip_listing_prefix(const std::string& line) {
    std::string s = trim(line);
    size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) return trim(s.substr(i + 1));
    if (s.rfind("- ", 0) == 0) return trim(s.substr(2));
    return s;
}

std::vector<TestSample> generate_llmeval(const KnowledgeTriplet& triplet, CachedChat& client,
                                         bool pad_short) {
    std::string reply = client.ask(llmeval_prompt(triplet));
    std::vector<std::string> statements;
    for (const auto& raw_line : split(reply, '\n')) {
        std::string line = strip_listing_prefix(raw_line);
        if (!line.empty()) statements.push_back(line);
    }
    if (statements.empty())
        throw GenerationError("llmeval reply for triplet " + triplet.triplet_id +
                              " has no usable lines");
    if (statements.size() < kVariantCount) {
        if (!pad_short)
            throw GenerationError("llmeval reply for triplet " + triplet.triplet_id + " has " +
                                  std::to_string(statements.size()) + " lines, expected " +
                                  std::to_string(kVariantCount));
        while (statements.size() < kVariantCount) statements.push_back(statements.back());
    }
    statements.resize(kVariantCount);

    Label label = label_for(TransformKey{}, triplet.polarity);
    std::vector<TestSample> samples;
    samples.reserve(kVariantCount);
    for (int i = 0; i < kVariantCount; ++i) {
        TestSample sample;
        sample.triplet_id = triplet.triplet_id;
        sample.relation = triplet.relation;
        sample.key = TransformKey{};
        sample.variant = i;
        sample.generator = GeneratorKind::LLMEval;
        sample.sample_id = make_sample_id(triplet.triplet_id, sample.generator, i);
        sample.prototype_text = statements[i];
        sample.final_text = statements[i];
        sample.rephrased = false;
        sample.label = label;
        samples.push_back(std::move(sample));
    }
    return samples;
}

namespace {

json sample_to_json(const TestSample& s) {
    json record;
    record["sample_id"] = s.sample_id;
    record["triplet_id"] = s.triplet_id;
    record["relation"] = s.relation;
    record["key"] = s.key.name();
    record["variant"] = s.variant;
    record["prototype_text"] = s.prototype_text;
    record["final_text"] = s.final_text;
    record["label"] = label_name(s.label);
    record["rephrased"] = s.rephrased;
    record["generator"] = generator_name(s.generator);
    return record;
}

TestSample sample_from_json(const json& record) {
    TestSample s;
    s.sample_id = record.at("sample_id").get<std::string>();
    s.triplet_id = record.at("triplet_id").get<std::string>();
    s.relation = record.at("relation").get<std::string>();
    s.key = parse_key(record.at("key").get<std::string>());
    s.variant = record.at("variant").get<int>();
    s.prototype_text = record.at("prototype_text").get<std::string>();
    s.final_text = record.at("final_text").get<std::string>();
    s.label = parse_label(record.at("label").get<std::string>());
    s.rephrased = record.at("rephrased").get<bool>();
    s.generator = parse_generator(record.at("generator").get<std::string>());
    return s;
}

}  // namespace

void write_samples_jsonl(const std::string& path, GeneratorKind generator,
                         const std::vector<TestSample>& samples,
                         const std::string& config_hash) {
    std::string out;
    json meta;
    meta["type"] = "meta";
    meta["format"] = "pretexeval.samples.v1";
    meta["generator"] = generator_name(generator);
    meta["count"] = samples.size();
    if (!config_hash.empty()) meta["config_hash"] = config_hash;
    out += meta.dump() + "\n";
    for (const auto& sample : samples) out += sample_to_json(sample).dump() + "\n";
    write_file(path, out);
}

SamplesFile load_samples_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open samples file");
    SamplesFile out;
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
            if (!record.contains("type") || record["type"] != "meta" ||
                record.value("format", "") != "pretexeval.samples.v1")
                throw ParseError(path, line_no, "missing samples meta line");
            out.generator = parse_generator(record.at("generator").get<std::string>());
            saw_meta = true;
            continue;
        }
        try {
            out.samples.push_back(sample_from_json(record));
        } catch (const json::exception& e) {
            throw ParseError(path, line_no, e.what());
        }
    }
    if (!saw_meta) throw ParseError(path, 0, "empty samples file");
    return out;
}

}  // namespace pretex
