#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pretex {

enum class Polarity { positive, negative };

std::string polarity_name(Polarity p);
Polarity parse_polarity(std::string_view name);

// A normalized entity surface form. Normalization trims and collapses
// whitespace; case is preserved (gene symbols, drug names).
struct Entity {
    std::string surface;

    bool operator==(const Entity&) const = default;
    auto operator<=>(const Entity&) const = default;
};

std::string normalize_entity(std::string_view raw);

struct RelationSchema {
    std::string relation_id;
    std::string description;
    // Set when this relation is the inversion of another relation in the
    // same KB; such relations are dropped from evaluation subsets.
    std::optional<std::string> inverse_of;
};

// One (head, relation, tail) fact. Positive triplets come verbatim from a
// KB file; negative triplets are corruptions that never appear in the KB.
struct KnowledgeTriplet {
    std::string triplet_id;
    Entity head;
    std::string relation;
    Entity tail;
    Polarity polarity = Polarity::positive;
    std::string source_kb;

    bool operator==(const KnowledgeTriplet&) const = default;
};

// Deterministic id: sha256 prefix over the identifying fields.
std::string make_triplet_id(const Entity& head, const std::string& relation,
                            const Entity& tail, Polarity polarity);

KnowledgeTriplet make_triplet(std::string head, std::string relation, std::string tail,
                              Polarity polarity = Polarity::positive,
                              std::string source_kb = "");

// Relation schema file: TSV with `relation_id <TAB> description [<TAB> inverse_of]`.
// Lines starting with '#' and blank lines are skipped.
std::vector<RelationSchema> load_schema(const std::filesystem::path& path);

const RelationSchema* find_relation(const std::vector<RelationSchema>& schema,
                                    const std::string& relation_id);

// KB file: TSV with `head <TAB> relation <TAB> tail`, one positive triplet
// per line. Entities are normalized, duplicate (h, r, t) rows collapsed.
// Malformed rows and unknown relations raise ParseError with the line number.
std::vector<KnowledgeTriplet> load_kb(const std::filesystem::path& path,
                                      const std::vector<RelationSchema>& schema);

// Keeps exactly one triplet per distinct (head, relation) pair, choosing the
// tail uniformly at random; relations marked inverse_of are dropped entirely.
// Deterministic given the seed and the input set.
std::vector<KnowledgeTriplet> sample_subset(const std::vector<KnowledgeTriplet>& triplets,
                                            const std::vector<RelationSchema>& schema,
                                            uint64_t seed);

struct NegativeSampleResult {
    std::vector<KnowledgeTriplet> triplets;
    std::vector<std::string> warnings;  // one entry per skipped (head, relation) pair
};

// For each (h, r) in `subset` draws one corrupted tail c uniformly from the
// tails seen with relation r anywhere in `full_kb`, excluding every tail t
// with (h, r, t) in the KB. Pairs with an empty candidate pool are skipped.
NegativeSampleResult sample_negatives(const std::vector<KnowledgeTriplet>& subset,
                                      const std::vector<KnowledgeTriplet>& full_kb,
                                      uint64_t seed);

// Splits sampled knowledge points into a demonstration slice and the
// evaluation set: `per_relation` (head, relation) pairs per relation are
// held out (with their negatives) for few-shot demonstrations.
struct DemoSplit {
    std::vector<KnowledgeTriplet> eval;
    std::vector<KnowledgeTriplet> demo;
};

DemoSplit split_demo_holdout(const std::vector<KnowledgeTriplet>& points,
                             size_t per_relation, uint64_t seed);

// 4-column TSV `head <TAB> relation <TAB> tail <TAB> polarity`, re-loadable
// via load_triplets_tsv. `header_comment`, when non-empty, is written as
// leading '#' lines.
void write_triplets_tsv(const std::filesystem::path& path,
                        const std::vector<KnowledgeTriplet>& triplets,
                        const std::string& header_comment = "");

std::vector<KnowledgeTriplet> load_triplets_tsv(const std::filesystem::path& path,
                                                const std::vector<RelationSchema>& schema);

}  // namespace pretex
