#include "pretex/prototype.hpp"

#include "pretex/errors.hpp"
#include "pretex/util.hpp"

#include <fstream>

namespace pretex {

std::string surface_name(Surface s) {
    return s == Surface::Affirmative ? "affirmative" : "negated";
}

Surface parse_surface(std::string_view name) {
    if (name == "affirmative") return Surface::Affirmative;
    if (name == "negated") return Surface::Negated;
    throw Error("unknown surface: " + std::string(name));
}

namespace {

void check_template(const Prototype& proto) {
    auto count = [&proto](std::string_view slot) {
        size_t n = 0;
        size_t pos = proto.template_text.find(slot);
        while (pos != std::string::npos) {
            ++n;
            pos = proto.template_text.find(slot, pos + slot.size());
        }
        return n;
    };
    if (count("[X]") != 1 || count("[Y]") != 1)
        throw PoolError("template for (" + proto.relation + ", " + proto.base_key.name() +
                        ", " + surface_name(proto.surface) +
                        ") must contain exactly one [X] and one [Y]: \"" +
                        proto.template_text + "\"");
}

}  // namespace

PrototypePool PrototypePool::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open prototype pool");

    PrototypePool pool;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;

        auto fields = split(line, '\t');
        if (fields.size() != 4)
            throw ParseError(path, line_no, "expected 4 tab-separated fields, got " +
                                                std::to_string(fields.size()));
        Prototype proto;
        proto.relation = trim(fields[0]);
        try {
            proto.base_key = parse_key(trim(fields[1]));
            proto.surface = parse_surface(trim(fields[2]));
        } catch (const Error& e) {
            throw ParseError(path, line_no, e.what());
        }
        if (proto.base_key.dn)
            throw ParseError(path, line_no, "base key must not carry dn: " + proto.base_key.name());
        proto.template_text = trim(fields[3]);
        if (proto.relation.empty() || proto.template_text.empty())
            throw ParseError(path, line_no, "empty relation or template");
        try {
            pool.add(std::move(proto));
        } catch (const PoolError& e) {
            throw ParseError(path, line_no, e.what());
        }
    }
    return pool;
}

void PrototypePool::add(Prototype proto) {
    if (proto.base_key.dn)
        throw PoolError("base key must not carry dn: " + proto.base_key.name());
    check_template(proto);
    CellKey key = cell_key(proto.relation, proto.base_key, proto.surface);
    auto [it, inserted] = entries_.emplace(key, std::move(proto));
    if (!inserted)
        throw PoolError("duplicate prototype for (" + it->second.relation + ", " +
                        it->second.base_key.name() + ", " + surface_name(it->second.surface) + ")");
}

const Prototype& PrototypePool::retrieve(const std::string& relation, TransformKey key) const {
    Surface surface = key.dn ? Surface::Negated : Surface::Affirmative;
    auto it = entries_.find(cell_key(relation, key.base(), surface));
    if (it == entries_.end())
        throw PoolError("prototype pool has no entry for (" + relation + ", " +
                        key.base().name() + ", " + surface_name(surface) + ")");
    return it->second;
}

bool PrototypePool::has(const std::string& relation, TransformKey base_key, Surface surface) const {
    return entries_.count(cell_key(relation, base_key.base(), surface)) > 0;
}

std::vector<PoolGap> PrototypePool::missing_for(const std::vector<std::string>& relations) const {
    std::vector<PoolGap> gaps;
    for (const auto& relation : relations) {
        for (const auto& key : canonical_keys()) {
            if (key.dn) continue;
            for (Surface surface : {Surface::Affirmative, Surface::Negated}) {
                if (!has(relation, key, surface)) gaps.push_back({relation, key, surface});
            }
        }
    }
    return gaps;
}

void PrototypePool::require_complete(const std::vector<std::string>& relations) const {
    auto gaps = missing_for(relations);
    if (gaps.empty()) return;
    const auto& g = gaps.front();
    throw PoolError("prototype pool incomplete: missing (" + g.relation + ", " +
                    g.base_key.name() + ", " + surface_name(g.surface) + ") and " +
                    std::to_string(gaps.size() - 1) + " more");
}

std::vector<std::string> PrototypePool::relations() const {
    std::vector<std::string> out;
    for (const auto& [key, proto] : entries_) {
        if (out.empty() || out.back() != key.relation) out.push_back(key.relation);
    }
    return out;
}

PrototypePool::CellKey PrototypePool::cell_key(const std::string& relation, TransformKey base_key,
                                               Surface surface) {
    int base_index = base_key.index();  // dn clear, so 0..3
    return CellKey{relation, base_index, surface == Surface::Negated ? 1 : 0};
}

std::string instantiate(const Prototype& proto, const Entity& head, const Entity& tail) {
    const std::string& tpl = proto.template_text;
    std::string out;
    out.reserve(tpl.size() + head.surface.size() + tail.surface.size());
    size_t pos = 0;
    while (pos < tpl.size()) {
        if (tpl.compare(pos, 3, "[X]") == 0) {
            out += head.surface;
            pos += 3;
        } else if (tpl.compare(pos, 3, "[Y]") == 0) {
            out += tail.surface;
            pos += 3;
        } else {
            out += tpl[pos];
            ++pos;
        }
    }
    return out;
}

}  // namespace pretex
