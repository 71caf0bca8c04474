#include "pretex/kb.hpp"

#include "pretex/errors.hpp"
#include "pretex/util.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace pretex {

std::string polarity_name(Polarity p) {
    return p == Polarity::positive ? "positive" : "negative";
}

Polarity parse_polarity(std::string_view name) {
    if (name == "positive") return Polarity::positive;
    if (name == "negative") return Polarity::negative;
    throw ParseError("unknown polarity: '" + std::string(name) + "'");
}

std::string normalize_entity(std::string_view raw) {
    return collapse_whitespace(raw);
}

std::string make_triplet_id(const Entity& head, const std::string& relation,
                            const Entity& tail, Polarity polarity) {
    std::string material;
    material.reserve(head.surface.size() + relation.size() + tail.surface.size() + 16);
    material.append(head.surface);
    material.push_back('\x1f');
    material.append(relation);
    material.push_back('\x1f');
    material.append(tail.surface);
    material.push_back('\x1f');
    material.append(polarity_name(polarity));
    return sha256_hex(material).substr(0, 16);
}

KnowledgeTriplet make_triplet(std::string head, std::string relation, std::string tail,
                              Polarity polarity, std::string source_kb) {
    KnowledgeTriplet t;
    t.head = Entity{normalize_entity(head)};
    t.relation = collapse_whitespace(relation);
    t.tail = Entity{normalize_entity(tail)};
    t.polarity = polarity;
    t.source_kb = std::move(source_kb);
    t.triplet_id = make_triplet_id(t.head, t.relation, t.tail, t.polarity);
    return t;
}

namespace {

// Iterates non-comment lines of a TSV file with 1-based physical line numbers.
template <typename Fn>
void for_each_tsv_row(const std::filesystem::path& path, Fn&& fn) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        fn(line_no, line);
    }
}

}  // namespace

std::vector<RelationSchema> load_schema(const std::filesystem::path& path) {
    std::vector<RelationSchema> schema;
    std::set<std::string> seen;
    for_each_tsv_row(path, [&](size_t line_no, const std::string& line) {
        auto fields = split(line, '\t');
        if (fields.size() < 2 || fields.size() > 3) {
            throw ParseError(path.string(), line_no,
                             "expected 2 or 3 tab-separated fields, got " +
                                 std::to_string(fields.size()));
        }
        RelationSchema rel;
        rel.relation_id = collapse_whitespace(fields[0]);
        rel.description = trim(fields[1]);
        if (fields.size() == 3 && !trim(fields[2]).empty()) {
            rel.inverse_of = collapse_whitespace(fields[2]);
        }
        if (rel.relation_id.empty()) {
            throw ParseError(path.string(), line_no, "empty relation id");
        }
        if (!seen.insert(rel.relation_id).second) {
            throw ParseError(path.string(), line_no,
                             "duplicate relation id: '" + rel.relation_id + "'");
        }
        schema.push_back(std::move(rel));
    });
    for (const auto& rel : schema) {
        if (rel.inverse_of && !find_relation(schema, *rel.inverse_of)) {
            throw ParseError("relation '" + rel.relation_id + "' declares inverse_of '" +
                             *rel.inverse_of + "', which is not in the schema");
        }
    }
    return schema;
}

const RelationSchema* find_relation(const std::vector<RelationSchema>& schema,
                                    const std::string& relation_id) {
    for (const auto& rel : schema) {
        if (rel.relation_id == relation_id) return &rel;
    }
    return nullptr;
}

std::vector<KnowledgeTriplet> load_kb(const std::filesystem::path& path,
                                      const std::vector<RelationSchema>& schema) {
    std::vector<KnowledgeTriplet> triplets;
    std::set<std::string> seen_ids;
    const std::string source = path.filename().string();
    for_each_tsv_row(path, [&](size_t line_no, const std::string& line) {
        auto fields = split(line, '\t');
        if (fields.size() != 3) {
            throw ParseError(path.string(), line_no,
                             "expected 3 tab-separated fields (head, relation, tail), got " +
                                 std::to_string(fields.size()));
        }
        const std::string head = normalize_entity(fields[0]);
        const std::string relation = collapse_whitespace(fields[1]);
        const std::string tail = normalize_entity(fields[2]);
        if (head.empty()) throw ParseError(path.string(), line_no, "empty head entity");
        if (relation.empty()) throw ParseError(path.string(), line_no, "empty relation");
        if (tail.empty()) throw ParseError(path.string(), line_no, "empty tail entity");
        if (!find_relation(schema, relation)) {
            throw ParseError(path.string(), line_no,
                             "unknown relation: '" + relation + "'");
        }
        auto triplet = make_triplet(head, relation, tail, Polarity::positive, source);
        if (seen_ids.insert(triplet.triplet_id).second) {
            triplets.push_back(std::move(triplet));
        }
    });
    return triplets;
}

std::vector<KnowledgeTriplet> sample_subset(const std::vector<KnowledgeTriplet>& triplets,
                                            const std::vector<RelationSchema>& schema,
                                            uint64_t seed) {
    // Candidate tails per (head, relation), in canonical (sorted) order so
    // the draw depends only on the set of candidates and the seed.
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> groups;
    for (const auto& t : triplets) {
        if (t.polarity != Polarity::positive) {
            throw Error("sample_subset expects an all-positive KB");
        }
        const RelationSchema* rel = find_relation(schema, t.relation);
        if (rel && rel->inverse_of) continue;
        groups[{t.head.surface, t.relation}].push_back(t.tail.surface);
    }

    std::mt19937_64 rng(seed);
    std::vector<KnowledgeTriplet> subset;
    subset.reserve(groups.size());
    for (auto& [key, tails] : groups) {
        std::sort(tails.begin(), tails.end());
        tails.erase(std::unique(tails.begin(), tails.end()), tails.end());
        const std::string& tail = tails[uniform_index(rng, tails.size())];
        subset.push_back(make_triplet(key.first, key.second, tail, Polarity::positive));
    }
    return subset;
}

NegativeSampleResult sample_negatives(const std::vector<KnowledgeTriplet>& subset,
                                      const std::vector<KnowledgeTriplet>& full_kb,
                                      uint64_t seed) {
    // Tail domain per relation, and the known-true tails per (head, relation).
    std::map<std::string, std::set<std::string>> domain;
    std::map<std::pair<std::string, std::string>, std::set<std::string>> known;
    for (const auto& t : full_kb) {
        domain[t.relation].insert(t.tail.surface);
        known[{t.head.surface, t.relation}].insert(t.tail.surface);
    }

    std::mt19937_64 rng(seed);
    NegativeSampleResult result;
    result.triplets.reserve(subset.size());
    for (const auto& point : subset) {
        const auto& pool = domain[point.relation];
        const auto& true_tails = known[{point.head.surface, point.relation}];
        std::vector<std::string> candidates;
        candidates.reserve(pool.size());
        for (const auto& tail : pool) {
            if (!true_tails.count(tail)) candidates.push_back(tail);
        }
        if (candidates.empty()) {
            result.warnings.push_back("no negative candidate for (" + point.head.surface +
                                      ", " + point.relation + "): pair skipped");
            continue;
        }
        const std::string& corrupt = candidates[uniform_index(rng, candidates.size())];
        result.triplets.push_back(
            make_triplet(point.head.surface, point.relation, corrupt, Polarity::negative));
    }
    return result;
}

DemoSplit split_demo_holdout(const std::vector<KnowledgeTriplet>& points,
                             size_t per_relation, uint64_t seed) {
    DemoSplit out;
    if (per_relation == 0) {
        out.eval = points;
        return out;
    }

    // Positive (head, relation) pairs per relation, canonical order.
    std::map<std::string, std::vector<std::string>> heads_by_relation;
    for (const auto& t : points) {
        if (t.polarity == Polarity::positive) {
            heads_by_relation[t.relation].push_back(t.head.surface);
        }
    }
    std::set<std::pair<std::string, std::string>> held_out;
    std::mt19937_64 rng(seed);
    for (auto& [relation, heads] : heads_by_relation) {
        std::sort(heads.begin(), heads.end());
        heads.erase(std::unique(heads.begin(), heads.end()), heads.end());
        if (heads.size() < per_relation + 1) {
            throw ConfigError("relation '" + relation + "' has only " +
                              std::to_string(heads.size()) +
                              " knowledge points; need more than the demo holdout of " +
                              std::to_string(per_relation));
        }
        for (size_t i = 0; i < per_relation; ++i) {
            const size_t pick = uniform_index(rng, heads.size());
            held_out.insert({heads[pick], relation});
            heads.erase(heads.begin() + static_cast<std::ptrdiff_t>(pick));
        }
    }

    for (const auto& t : points) {
        if (held_out.count({t.head.surface, t.relation})) {
            out.demo.push_back(t);
        } else {
            out.eval.push_back(t);
        }
    }
    return out;
}

void write_triplets_tsv(const std::filesystem::path& path,
                        const std::vector<KnowledgeTriplet>& triplets,
                        const std::string& header_comment) {
    std::string out;
    if (!header_comment.empty()) {
        for (const auto& line : split(header_comment, '\n')) {
            out.append("# ").append(line).push_back('\n');
        }
    }
    for (const auto& t : triplets) {
        out.append(t.head.surface).push_back('\t');
        out.append(t.relation).push_back('\t');
        out.append(t.tail.surface).push_back('\t');
        out.append(polarity_name(t.polarity)).push_back('\n');
    }
    write_file(path, out);
}

std::vector<KnowledgeTriplet> load_triplets_tsv(const std::filesystem::path& path,
                                                const std::vector<RelationSchema>& schema) {
    std::vector<KnowledgeTriplet> triplets;
    const std::string source = path.filename().string();
    for_each_tsv_row(path, [&](size_t line_no, const std::string& line) {
        auto fields = split(line, '\t');
        if (fields.size() != 4) {
            throw ParseError(path.string(), line_no,
                             "expected 4 tab-separated fields (head, relation, tail, "
                             "polarity), got " +
                                 std::to_string(fields.size()));
        }
        if (!find_relation(schema, collapse_whitespace(fields[1]))) {
            throw ParseError(path.string(), line_no,
                             "unknown relation: '" + collapse_whitespace(fields[1]) + "'");
        }
        Polarity polarity;
        try {
            polarity = parse_polarity(trim(fields[3]));
        } catch (const ParseError& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
        triplets.push_back(make_triplet(fields[0], fields[1], fields[2], polarity, source));
    });
    return triplets;
}

}  // namespace pretex
