#include "pretex/errors.hpp"
#include "pretex/kb.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace pretex;
using testsup::TempDir;
using testsup::fixture_path;
using testsup::write_text;

TEST_CASE("entity normalization trims and collapses whitespace") {
    CHECK(normalize_entity("  Aspirin ") == "Aspirin");
    CHECK(normalize_entity("type  2\tdiabetes") == "type 2 diabetes");
    CHECK(normalize_entity("BRCA1") == "BRCA1");  // case untouched
}

TEST_CASE("triplet ids are stable and polarity-sensitive") {
    auto a = make_triplet("Aspirin", "may treat", "headache");
    auto b = make_triplet(" Aspirin ", "may treat", "headache");
    auto c = make_triplet("Aspirin", "may treat", "headache", Polarity::negative);
    CHECK(a.triplet_id == b.triplet_id);
    CHECK(a.triplet_id != c.triplet_id);
    CHECK(a.triplet_id.size() == 16);
}

TEST_CASE("schema loads with optional inverse column") {
    auto schema = load_schema(fixture_path("schema.tsv"));
    REQUIRE(schema.size() == 2);
    CHECK(schema[0].relation_id == "may treat");
    CHECK_FALSE(schema[0].description.empty());
    CHECK_FALSE(schema[0].inverse_of.has_value());

    auto with_inverse = load_schema(fixture_path("schema_with_inverse.tsv"));
    const auto* treated_by = find_relation(with_inverse, "treated by");
    REQUIRE(treated_by != nullptr);
    REQUIRE(treated_by->inverse_of.has_value());
    CHECK(*treated_by->inverse_of == "may treat");
}

TEST_CASE("kb loads, normalizes, and collapses duplicates") {
    auto schema = load_schema(fixture_path("schema.tsv"));
    auto kb = load_kb(fixture_path("kb.tsv"), schema);
    CHECK(kb.size() == 12);
    for (const auto& t : kb) {
        CHECK(t.polarity == Polarity::positive);
        CHECK(t.source_kb == "kb.tsv");
    }

    TempDir tmp;
    write_text(tmp.file("dup.tsv"),
               "Aspirin\tmay treat\theadache\n"
               " Aspirin \tmay treat\theadache\n"
               "Aspirin\tmay treat\tfever\n");
    auto collapsed = load_kb(tmp.file("dup.tsv"), schema);
    CHECK(collapsed.size() == 2);
}

TEST_CASE("kb parse errors carry the line number") {
    auto schema = load_schema(fixture_path("schema.tsv"));
    TempDir tmp;

    write_text(tmp.file("bad.tsv"), "Aspirin\tmay treat\theadache\nAspirin\tmay treat\n");
    CHECK_THROWS_WITH_AS(load_kb(tmp.file("bad.tsv"), schema),
                         doctest::Contains(":2:"), ParseError);

    write_text(tmp.file("unknown.tsv"), "Aspirin\tcures\theadache\n");
    CHECK_THROWS_WITH_AS(load_kb(tmp.file("unknown.tsv"), schema),
                         doctest::Contains("cures"), ParseError);
}

TEST_CASE("subset sampling keeps one tail per (head, relation) pair") {
    auto schema = load_schema(fixture_path("schema.tsv"));
    auto kb = load_kb(fixture_path("kb.tsv"), schema);

    auto subset = sample_subset(kb, schema, 7);
    CHECK(subset.size() == 11);  // Aspirin/may treat has two tails, rest unique

    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& t : subset) pairs.insert({t.head.surface, t.relation});
    CHECK(pairs.size() == subset.size());

    auto it = std::find_if(subset.begin(), subset.end(), [](const KnowledgeTriplet& t) {
        return t.head.surface == "Aspirin" && t.relation == "may treat";
    });
    REQUIRE(it != subset.end());
    CHECK((it->tail.surface == "headache" || it->tail.surface == "fever"));

    CHECK(sample_subset(kb, schema, 7) == subset);  // same seed, same draw
}

TEST_CASE("subset sampling drops inverse relations") {
    auto schema = load_schema(fixture_path("schema_with_inverse.tsv"));
    auto kb = load_kb(fixture_path("kb_with_inverse.tsv"), schema);
    CHECK(kb.size() == 8);

    auto subset = sample_subset(kb, schema, 1);
    CHECK(subset.size() == 6);
    for (const auto& t : subset) CHECK(t.relation != "treated by");
}

TEST_CASE("small kb yields one point per row") {
    auto schema = load_schema(fixture_path("schema.tsv"));
    auto kb = load_kb(fixture_path("kb_small.tsv"), schema);
    CHECK(kb.size() == 6);
    CHECK(sample_subset(kb, schema, 1).size() == 6);
}

TEST_CASE("negative sampling corrupts the tail within the relation domain") {
    auto schema = load_schema(fixture_path("schema.tsv"));
    auto kb = load_kb(fixture_path("kb.tsv"), schema);
    auto subset = sample_subset(kb, schema, 7);

    auto negatives = sample_negatives(subset, kb, 11);
    CHECK(negatives.warnings.empty());
    REQUIRE(negatives.triplets.size() == subset.size());

    // Tail domains per relation, and known tails per (head, relation).
    std::set<std::pair<std::string, std::string>> domain;
    std::set<std::string> known;
    for (const auto& t : kb) {
        domain.insert({t.relation, t.tail.surface});
        known.insert(t.head.surface + "|" + t.relation + "|" + t.tail.surface);
    }
    for (size_t i = 0; i < negatives.triplets.size(); ++i) {
        const auto& neg = negatives.triplets[i];
        CHECK(neg.polarity == Polarity::negative);
        CHECK(neg.head == subset[i].head);
        CHECK(neg.relation == subset[i].relation);
        CHECK(domain.count({neg.relation, neg.tail.surface}) == 1);
        CHECK(known.count(neg.head.surface + "|" + neg.relation + "|" + neg.tail.surface) == 0);
    }

    auto again = sample_negatives(subset, kb, 11);
    CHECK(again.triplets == negatives.triplets);
}

TEST_CASE("negative sampling skips pairs with no candidate tail") {
    auto schema = load_schema(fixture_path("schema.tsv"));
    TempDir tmp;
    write_text(tmp.file("one.tsv"), "Aspirin\tmay treat\theadache\n");
    auto kb = load_kb(tmp.file("one.tsv"), schema);
    auto subset = sample_subset(kb, schema, 1);

    auto negatives = sample_negatives(subset, kb, 1);
    CHECK(negatives.triplets.empty());
    REQUIRE(negatives.warnings.size() == 1);
    CHECK(negatives.warnings[0].find("Aspirin") != std::string::npos);
}

TEST_CASE("demo holdout splits per relation without overlap") {
    auto schema = load_schema(fixture_path("schema.tsv"));
    auto kb = load_kb(fixture_path("kb.tsv"), schema);
    auto subset = sample_subset(kb, schema, 7);  // 6 may treat + 5 may prevent

    auto split = split_demo_holdout(subset, 3, 5);
    CHECK(split.demo.size() == 6);
    CHECK(split.eval.size() == 5);

    std::set<std::string> demo_ids;
    for (const auto& t : split.demo) demo_ids.insert(t.triplet_id);
    for (const auto& t : split.eval) CHECK(demo_ids.count(t.triplet_id) == 0);

    size_t treat = 0;
    for (const auto& t : split.demo)
        if (t.relation == "may treat") ++treat;
    CHECK(treat == 3);

    auto again = split_demo_holdout(subset, 3, 5);
    CHECK(again.demo == split.demo);
    CHECK(again.eval == split.eval);
}

TEST_CASE("triplet tsv round-trips polarity") {
    auto schema = load_schema(fixture_path("schema.tsv"));
    std::vector<KnowledgeTriplet> points = {
        make_triplet("Aspirin", "may treat", "headache"),
        make_triplet("Aspirin", "may treat", "asthma", Polarity::negative),
    };
    TempDir tmp;
    write_triplets_tsv(tmp.file("points.tsv"), points, "round trip");
    auto loaded = load_triplets_tsv(tmp.file("points.tsv"), schema);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].polarity == Polarity::positive);
    CHECK(loaded[1].polarity == Polarity::negative);
    CHECK(loaded[0].head.surface == "Aspirin");
    CHECK(loaded[1].tail.surface == "asthma");
    CHECK(loaded[0].triplet_id == points[0].triplet_id);
}
