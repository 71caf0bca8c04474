#pragma once

#include "pretex/kb.hpp"
#include "pretex/transform.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pretex {

// Surface polarity of a template. A Negated template carries one explicit
// negation; the corresponding label flip is handled by label_for.
enum class Surface { Affirmative, Negated };

std::string surface_name(Surface s);
Surface parse_surface(std::string_view name);

// A hand-crafted template for one (relation, base key, surface) cell.
// The template contains exactly one "[X]" (head slot) and one "[Y]"
// (tail slot). Inversion is realized inside the text; slots always mean
// head and tail regardless of where they appear.
struct Prototype {
    std::string relation;
    TransformKey base_key;  // dn always false
    Surface surface = Surface::Affirmative;
    std::string template_text;

    bool operator==(const Prototype&) const = default;
};

// Identifies a missing pool entry in diagnostics.
struct PoolGap {
    std::string relation;
    TransformKey base_key;
    Surface surface = Surface::Affirmative;
};

class PrototypePool {
public:
    // TSV with fields: relation, base_key name, surface, template.
    // Lines starting with '#' are comments.
    static PrototypePool load(const std::string& path);

    void add(Prototype proto);

    // Lookup for a full transform key: base key selects the row pair,
    // dn selects the negated surface.
    const Prototype& retrieve(const std::string& relation, TransformKey key) const;

    bool has(const std::string& relation, TransformKey base_key, Surface surface) const;

    // Every (base_key, surface) cell absent for any of the given relations.
    std::vector<PoolGap> missing_for(const std::vector<std::string>& relations) const;

    // Throws PoolError naming the first gap if any cell is missing.
    void require_complete(const std::vector<std::string>& relations) const;

    std::vector<std::string> relations() const;
    size_t size() const { return entries_.size(); }

private:
    struct CellKey {
        std::string relation;
        int base_index;  // 0..3
        int surface;     // 0 affirmative, 1 negated

        bool operator<(const CellKey& other) const {
            if (relation != other.relation) return relation < other.relation;
            if (base_index != other.base_index) return base_index < other.base_index;
            return surface < other.surface;
        }
    };

    static CellKey cell_key(const std::string& relation, TransformKey base_key, Surface surface);

    std::map<CellKey, Prototype> entries_;
};

// Single-pass slot substitution: "[X]" -> head surface, "[Y]" -> tail
// surface. Inserted text is never rescanned, so a head containing "[Y]"
// stays verbatim.
std::string instantiate(const Prototype& proto, const Entity& head, const Entity& tail);

}  // namespace pretex
