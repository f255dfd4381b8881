#include "groupoid.hpp"

#include "util.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace mgt {

// ---------------------------------------------------------------------------
// Groupoid basics

int Groupoid::object_of(const std::string& id) const {
    auto it = object_index.find(id);
    return it == object_index.end() ? -1 : it->second;
}

void Groupoid::rebuild_index() {
    object_index.clear();
    for (std::size_t i = 0; i < objects.size(); ++i)
        if (!object_index.emplace(objects[i].id, int(i)).second)
            validation_error("duplicate object id: " + objects[i].id);
    std::sort(arrows.begin(), arrows.end());
    arrows.erase(std::unique(arrows.begin(), arrows.end()), arrows.end());
    arrows_from.assign(objects.size(), {});
    arrows_into.assign(objects.size(), {});
    for (std::size_t a = 0; a < arrows.size(); ++a) {
        int s = object_of(arrows[a].src);
        int t = object_of(arrows[a].dst);
        if (s < 0 || t < 0)
            validation_error("arrow endpoint is not an object: " + arrows[a].src + " -> " + arrows[a].dst);
        arrows_from[s].push_back(int(a));
        arrows_into[t].push_back(int(a));
    }
}

// ---------------------------------------------------------------------------
// Indexing

void Indexing::finalize(const Groupoid& g) {
    param_pos.clear();
    if (parameters.size() != g.sig.sorts.size())
        validation_error("indexing: parameter lists do not match the sorts");
    for (std::size_t s = 0; s < parameters.size(); ++s)
        for (std::size_t p = 0; p < parameters[s].size(); ++p)
            if (!param_pos.emplace(parameters[s][p], std::make_pair(int(s), int(p))).second)
                validation_error("indexing: duplicate parameter name " + parameters[s][p]);
    if (interp.size() != g.objects.size())
        validation_error("indexing: interpretation does not cover all objects");
    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        if (interp[o].size() != parameters.size())
            validation_error("indexing: object " + g.objects[o].id + " missing sort rows");
        for (std::size_t s = 0; s < parameters.size(); ++s) {
            if (interp[o][s].size() != parameters[s].size())
                validation_error("indexing: object " + g.objects[o].id + " missing parameter slots");
            std::vector<char> covered(g.objects[o].carriers[s].size(), 0);
            for (std::size_t p = 0; p < parameters[s].size(); ++p) {
                int e = interp[o][s][p];
                if (e < -1 || e >= int(g.objects[o].carriers[s].size()))
                    validation_error("indexing: interpretation outside the carrier in " + g.objects[o].id);
                if (e >= 0)
                    covered[e] = 1;
            }
            for (std::size_t e = 0; e < covered.size(); ++e)
                if (!covered[e])
                    validation_error("indexing: element " + g.objects[o].carriers[s][e] + " of " +
                                     g.objects[o].id + " is not the interpretation of any parameter");
        }
    }
}

ParamEnv Indexing::param_env(const Groupoid& g, int obj) const {
    (void)g;
    ParamEnv env;
    for (std::size_t s = 0; s < parameters.size(); ++s)
        for (std::size_t p = 0; p < parameters[s].size(); ++p)
            if (interp[obj][s][p] >= 0)
                env[parameters[s][p]] = {int(s), interp[obj][s][p]};
    return env;
}

std::optional<std::pair<int, int>> Indexing::find(const std::string& name) const {
    auto it = param_pos.find(name);
    if (it == param_pos.end())
        return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------
// Validation / closure

namespace {

std::string arrow_label(const Morphism& h) {
    return h.src + "->" + h.dst;
}

} // namespace

Groupoid validate_groupoid(Groupoid g, bool auto_complete) {
    g.sig.validate();
    for (auto& obj : g.objects)
        obj.finalize(g.sig);
    g.rebuild_index();

    for (const auto& a : g.arrows) {
        int s = g.object_of(a.src);
        int t = g.object_of(a.dst);
        if (auto why = iso_violation(g.sig, g.objects[s], g.objects[t], a))
            validation_error("arrow " + arrow_label(a) + " is not an isomorphism: " + *why);
    }

    std::set<Morphism> have(g.arrows.begin(), g.arrows.end());
    if (auto_complete) {
        for (const auto& obj : g.objects)
            have.insert(identity_morphism(obj));
        bool grew = true;
        while (grew) {
            grew = false;
            std::vector<Morphism> snapshot(have.begin(), have.end());
            for (const auto& f : snapshot) {
                if (have.insert(inverse(f)).second)
                    grew = true;
                for (const auto& h : snapshot)
                    if (f.dst == h.src && have.insert(compose(f, h)).second)
                        grew = true;
            }
        }
        g.arrows.assign(have.begin(), have.end());
    } else {
        for (const auto& obj : g.objects)
            if (!have.count(identity_morphism(obj)))
                validation_error("groupoid is missing the identity of " + obj.id);
        for (const auto& f : g.arrows)
            if (!have.count(inverse(f)))
                validation_error("groupoid is missing the inverse of an arrow " + arrow_label(f));
        for (const auto& f : g.arrows)
            for (const auto& h : g.arrows)
                if (f.dst == h.src && !have.count(compose(f, h)))
                    validation_error("groupoid is not closed under composition: missing " + f.src + "->" + h.dst +
                                     " composite of " + arrow_label(f) + " and " + arrow_label(h));
    }
    g.rebuild_index();
    return g;
}

Groupoid etale_completion(const Groupoid& g) {
    Groupoid out;
    out.sig = g.sig;
    out.objects = g.objects;
    for (std::size_t i = 0; i < g.objects.size(); ++i)
        for (std::size_t j = 0; j < g.objects.size(); ++j) {
            auto isos = enumerate_isos(g.sig, g.objects[i], g.objects[j]);
            out.arrows.insert(out.arrows.end(), isos.begin(), isos.end());
        }
    out.rebuild_index();
    return out;
}

EtaleReport check_etale_complete(const Groupoid& g) {
    std::set<Morphism> have(g.arrows.begin(), g.arrows.end());
    for (std::size_t i = 0; i < g.objects.size(); ++i)
        for (std::size_t j = 0; j < g.objects.size(); ++j)
            for (const auto& iso : enumerate_isos(g.sig, g.objects[i], g.objects[j]))
                if (!have.count(iso)) {
                    EtaleReport r;
                    r.complete = false;
                    r.missing = "isomorphism " + arrow_label(iso) + " absent from the arrow set";
                    return r;
                }
    return {};
}

// ---------------------------------------------------------------------------
// Indexings

Indexing trivial_indexing(const Groupoid& g) {
    Indexing ix;
    ix.parameters.resize(g.sig.sorts.size());
    // one parameter per (object, element), interpreted only there
    std::vector<std::vector<std::pair<int, int>>> owner(g.sig.sorts.size()); // (obj, elem)
    for (std::size_t o = 0; o < g.objects.size(); ++o)
        for (std::size_t s = 0; s < g.sig.sorts.size(); ++s)
            for (std::size_t e = 0; e < g.objects[o].carriers[s].size(); ++e) {
                ix.parameters[s].push_back(g.objects[o].id + "@" + g.objects[o].carriers[s][e]);
                owner[s].emplace_back(int(o), int(e));
            }
    ix.interp.assign(g.objects.size(), {});
    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        ix.interp[o].resize(g.sig.sorts.size());
        for (std::size_t s = 0; s < g.sig.sorts.size(); ++s) {
            ix.interp[o][s].assign(ix.parameters[s].size(), -1);
            for (std::size_t p = 0; p < ix.parameters[s].size(); ++p)
                if (owner[s][p].first == int(o))
                    ix.interp[o][s][p] = owner[s][p].second;
        }
    }
    ix.finalize(g);
    return ix;
}

Indexing carrier_indexing(const Groupoid& g) {
    Indexing ix;
    ix.parameters.resize(g.sig.sorts.size());
    for (std::size_t s = 0; s < g.sig.sorts.size(); ++s) {
        std::set<std::string> names;
        for (const auto& obj : g.objects)
            names.insert(obj.carriers[s].begin(), obj.carriers[s].end());
        ix.parameters[s].assign(names.begin(), names.end());
    }
    ix.interp.assign(g.objects.size(), {});
    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        ix.interp[o].resize(g.sig.sorts.size());
        for (std::size_t s = 0; s < g.sig.sorts.size(); ++s) {
            ix.interp[o][s].assign(ix.parameters[s].size(), -1);
            for (std::size_t p = 0; p < ix.parameters[s].size(); ++p)
                ix.interp[o][s][p] = g.objects[o].elem(int(s), ix.parameters[s][p]);
        }
    }
    ix.finalize(g);
    return ix;
}

Indexing shared_indexing(const Groupoid& g, const std::vector<std::vector<std::string>>& parameters,
                         const std::vector<std::map<std::string, std::string>>& maps) {
    if (maps.size() != g.objects.size())
        validation_error("shared_indexing: one map per object required");
    Indexing ix;
    ix.parameters = parameters;
    ix.interp.assign(g.objects.size(), {});
    std::map<std::string, std::pair<int, int>> pos;
    for (std::size_t s = 0; s < parameters.size(); ++s)
        for (std::size_t p = 0; p < parameters[s].size(); ++p)
            pos[parameters[s][p]] = {int(s), int(p)};
    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        ix.interp[o].resize(parameters.size());
        for (std::size_t s = 0; s < parameters.size(); ++s)
            ix.interp[o][s].assign(parameters[s].size(), -1);
        for (const auto& [param, elem] : maps[o]) {
            auto it = pos.find(param);
            if (it == pos.end())
                validation_error("shared_indexing: unknown parameter " + param);
            auto [s, p] = it->second;
            int e = g.objects[o].elem(s, elem);
            if (e < 0)
                validation_error("shared_indexing: " + elem + " is not an element of " + g.objects[o].id);
            ix.interp[o][s][p] = e;
        }
    }
    ix.finalize(g);
    return ix;
}

Indexing reindex(const Groupoid& g, const Indexing& ix, const std::map<std::string, std::string>& sigma) {
    Indexing out;
    out.parameters = ix.parameters;
    out.interp.assign(g.objects.size(), {});
    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        out.interp[o].resize(ix.parameters.size());
        for (std::size_t s = 0; s < ix.parameters.size(); ++s)
            out.interp[o][s].assign(ix.parameters[s].size(), -1);
    }
    for (const auto& [from, to] : sigma) {
        auto fp = ix.find(from);
        auto tp = ix.find(to);
        if (!fp)
            validation_error("reindex: unknown parameter " + from);
        if (!tp)
            validation_error("reindex: unknown parameter " + to);
        if (fp->first != tp->first)
            validation_error("reindex: " + from + " and " + to + " have different sorts");
        for (std::size_t o = 0; o < g.objects.size(); ++o)
            out.interp[o][fp->first][fp->second] = ix.interp[o][tp->first][tp->second];
    }
    out.finalize(g); // rejects when some carrier is no longer covered
    return out;
}

// ---------------------------------------------------------------------------
// Maximal groupoid

namespace {

// Restricted-growth strings: all partitions of {0..n-1} in canonical order.
std::vector<std::vector<int>> partitions(int n) {
    std::vector<std::vector<int>> out;
    if (n == 0) {
        out.push_back({});
        return out;
    }
    std::vector<int> rgs(n, 0);
    while (true) {
        out.push_back(rgs);
        int i = n - 1;
        while (i > 0) {
            int max_prev = 0;
            for (int j = 0; j < i; ++j)
                max_prev = std::max(max_prev, rgs[j]);
            if (rgs[i] <= max_prev) {
                ++rgs[i];
                std::fill(rgs.begin() + i + 1, rgs.end(), 0);
                break;
            }
            rgs[i] = 0;
            --i;
        }
        if (i == 0)
            break;
    }
    return out;
}

struct SortShape {
    std::vector<int> subset;  // parameter indices, ascending
    std::vector<int> block;   // block id per subset position (RGS)
    int block_count = 0;
};

// all (subset, partition) shapes for one sort's parameter list
std::vector<SortShape> sort_shapes(int param_count) {
    std::vector<SortShape> out;
    for (int mask = 0; mask < (1 << param_count); ++mask) {
        std::vector<int> subset;
        for (int p = 0; p < param_count; ++p)
            if (mask & (1 << p))
                subset.push_back(p);
        for (auto& rgs : partitions(int(subset.size()))) {
            SortShape sh;
            sh.subset = subset;
            sh.block = rgs;
            sh.block_count = rgs.empty() ? 0 : *std::max_element(rgs.begin(), rgs.end()) + 1;
            out.push_back(std::move(sh));
        }
    }
    return out;
}

} // namespace

std::pair<Groupoid, Indexing> maximal_groupoid(const Theory& t,
                                               const std::vector<std::vector<std::string>>& parameters,
                                               int scheme_bound, std::size_t object_cap) {
    const Signature& sig = t.signature;
    if (parameters.size() != sig.sorts.size())
        validation_error("maximal_groupoid: one parameter list per sort required");
    if (!sig.functions.empty())
        validation_error("maximal_groupoid: relational signatures only");

    // per-sort shape lists
    std::vector<std::vector<SortShape>> shapes;
    for (std::size_t s = 0; s < sig.sorts.size(); ++s) {
        if (parameters[s].size() > 16)
            bound_error("maximal_groupoid: parameter set too large");
        shapes.push_back(sort_shapes(int(parameters[s].size())));
    }

    Groupoid g;
    g.sig = sig;
    Indexing ix;
    ix.parameters = parameters;

    // enumerate shape combinations across sorts
    std::vector<std::size_t> pick(sig.sorts.size(), 0);
    auto shape_id = [&](const std::vector<std::size_t>& sel) {
        std::vector<std::string> parts;
        for (std::size_t s = 0; s < sel.size(); ++s) {
            const SortShape& sh = shapes[s][sel[s]];
            std::vector<std::vector<std::string>> blocks(sh.block_count);
            for (std::size_t i = 0; i < sh.subset.size(); ++i)
                blocks[sh.block[i]].push_back(parameters[s][sh.subset[i]]);
            std::vector<std::string> rendered;
            for (auto& b : blocks)
                rendered.push_back(join(b, "~"));
            parts.push_back(join(rendered, "|"));
        }
        std::string id = join(parts, ";");
        return id.empty() ? std::string("empty") : id;
    };

    while (true) {
        // carrier: one element per block, named by the block's first parameter
        Structure base;
        base.id = shape_id(pick);
        base.carriers.resize(sig.sorts.size());
        std::vector<std::vector<int>> param_to_block(sig.sorts.size());
        for (std::size_t s = 0; s < sig.sorts.size(); ++s) {
            const SortShape& sh = shapes[s][pick[s]];
            param_to_block[s].assign(parameters[s].size(), -1);
            base.carriers[s].resize(sh.block_count);
            std::vector<char> named(sh.block_count, 0);
            for (std::size_t i = 0; i < sh.subset.size(); ++i) {
                param_to_block[s][sh.subset[i]] = sh.block[i];
                if (!named[sh.block[i]]) {
                    base.carriers[s][sh.block[i]] = parameters[s][sh.subset[i]];
                    named[sh.block[i]] = 1;
                }
            }
        }

        // all relation interpretations over this carrier
        std::vector<std::vector<std::vector<int>>> tuple_space(sig.relations.size());
        for (std::size_t r = 0; r < sig.relations.size(); ++r) {
            std::vector<int> arg_sorts;
            for (const auto& srt : sig.relations[r].arity)
                arg_sorts.push_back(sig.sort_index(srt));
            std::vector<std::vector<int>> tuples;
            std::vector<int> sizes;
            bool empty = false;
            for (int s : arg_sorts) {
                sizes.push_back(int(base.carriers[s].size()));
                if (base.carriers[s].empty())
                    empty = true;
            }
            if (!empty) {
                std::vector<int> cur(arg_sorts.size(), 0);
                while (true) {
                    tuples.push_back(cur);
                    std::size_t k = cur.size();
                    bool done = k == 0;
                    while (k > 0) {
                        --k;
                        if (++cur[k] < sizes[k])
                            break;
                        cur[k] = 0;
                        if (k == 0)
                            done = true;
                    }
                    if (done)
                        break;
                }
                if (arg_sorts.empty())
                    tuples = {{}};
            }
            if (tuples.size() > 16)
                bound_error("maximal_groupoid: relation tuple space too large to enumerate");
            tuple_space[r] = std::move(tuples);
        }

        // product over relations of subsets of each tuple space
        std::vector<std::size_t> rel_mask(sig.relations.size(), 0);
        int variant = 0;
        while (true) {
            Structure m = base;
            if (!sig.relations.empty() && variant > 0)
                m.id = base.id + "#" + std::to_string(variant);
            else if (!sig.relations.empty())
                m.id = base.id; // first variant keeps the plain id
            m.relations.assign(sig.relations.size(), {});
            for (std::size_t r = 0; r < sig.relations.size(); ++r)
                for (std::size_t ti = 0; ti < tuple_space[r].size(); ++ti)
                    if (rel_mask[r] & (std::size_t(1) << ti))
                        m.relations[r].insert(tuple_space[r][ti]);
            m.finalize(sig);
            ++variant;

            if (check_theory(m, t, scheme_bound).ok) {
                if (g.objects.size() >= object_cap)
                    bound_error("maximal_groupoid: object cap " + std::to_string(object_cap) +
                                " exceeded");
                g.objects.push_back(std::move(m));
                ix.interp.push_back({});
                auto& rows = ix.interp.back();
                rows.resize(sig.sorts.size());
                for (std::size_t s = 0; s < sig.sorts.size(); ++s) {
                    rows[s].assign(parameters[s].size(), -1);
                    for (std::size_t p = 0; p < parameters[s].size(); ++p)
                        rows[s][p] = param_to_block[s][p];
                }
            }

            // advance relation masks
            std::size_t r = sig.relations.size();
            bool done = r == 0;
            while (r > 0) {
                --r;
                if (++rel_mask[r] < (std::size_t(1) << tuple_space[r].size()))
                    break;
                rel_mask[r] = 0;
                if (r == 0)
                    done = true;
            }
            if (done)
                break;
        }

        // advance shape selection
        std::size_t s = sig.sorts.size();
        bool done = s == 0;
        while (s > 0) {
            --s;
            if (++pick[s] < shapes[s].size())
                break;
            pick[s] = 0;
            if (s == 0)
                done = true;
        }
        if (done)
            break;
    }

    g.rebuild_index();
    Groupoid complete = etale_completion(g);
    ix.finalize(complete);
    return {std::move(complete), std::move(ix)};
}

// ---------------------------------------------------------------------------
// Bouquet

Groupoid bouquet(const Signature& sig,
                 const std::vector<std::pair<Structure, std::vector<Morphism>>>& components) {
    Groupoid g;
    g.sig = sig;
    for (const auto& [structure, arrows] : components) {
        g.objects.push_back(structure);
        std::set<Morphism> set;
        for (const auto& a : arrows) {
            if (a.src != structure.id || a.dst != structure.id)
                validation_error("bouquet: arrow " + arrow_label(a) + " is not an automorphism of " +
                                 structure.id);
            if (auto why = iso_violation(sig, structure, structure, a))
                validation_error("bouquet: arrow of " + structure.id + " is not an isomorphism: " + *why);
            set.insert(a);
        }
        if (!set.count(identity_morphism(structure)))
            validation_error("bouquet: arrow set of " + structure.id + " is missing the identity");
        for (const auto& a : set) {
            if (!set.count(inverse(a)))
                validation_error("bouquet: arrow set of " + structure.id + " is missing an inverse");
            for (const auto& b : set)
                if (!set.count(compose(a, b)))
                    validation_error("bouquet: arrow set of " + structure.id + " is missing a composite");
        }
        g.arrows.insert(g.arrows.end(), set.begin(), set.end());
    }
    g.rebuild_index();
    return g;
}

// ---------------------------------------------------------------------------
// JSON document

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            parse_error("unknown field \"" + it.key() + "\" in " + where);
}

Signature signature_from_json(const json& j) {
    reject_unknown(j, {"sorts", "relations"}, "signature");
    Signature sig;
    if (!j.contains("sorts"))
        parse_error("signature: missing sorts");
    for (const auto& s : j.at("sorts"))
        sig.sorts.push_back(s.get<std::string>());
    if (j.contains("relations"))
        for (const auto& r : j.at("relations")) {
            reject_unknown(r, {"name", "arity"}, "relation");
            RelationDecl d;
            d.name = r.at("name").get<std::string>();
            for (const auto& s : r.at("arity"))
                d.arity.push_back(s.get<std::string>());
            sig.relations.push_back(std::move(d));
        }
    sig.validate();
    return sig;
}

} // namespace

GroupoidDocument load_groupoid_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        parse_error(std::string("groupoid JSON: ") + e.what());
    }

    try {
        reject_unknown(doc, {"signature", "objects", "arrows", "auto_complete", "etale_complete", "indexing"},
                       "groupoid document");
        GroupoidDocument out;
        Groupoid& g = out.groupoid;
        g.sig = signature_from_json(doc.at("signature"));

        for (const auto& jo : doc.at("objects")) {
            reject_unknown(jo, {"id", "carrier", "relations"}, "object");
            Structure m;
            m.id = jo.at("id").get<std::string>();
            m.carriers.resize(g.sig.sorts.size());
            if (jo.contains("carrier"))
                for (auto it = jo.at("carrier").begin(); it != jo.at("carrier").end(); ++it) {
                    int s = g.sig.sort_index(it.key());
                    if (s < 0)
                        parse_error("object " + m.id + ": unknown sort " + it.key());
                    for (const auto& e : it.value())
                        m.carriers[s].push_back(e.get<std::string>());
                }
            m.relations.resize(g.sig.relations.size());
            // element names are resolvable only after carriers are set
            std::vector<std::map<std::string, int>> lookup(g.sig.sorts.size());
            for (std::size_t s = 0; s < m.carriers.size(); ++s)
                for (std::size_t e = 0; e < m.carriers[s].size(); ++e)
                    lookup[s][m.carriers[s][e]] = int(e);
            if (jo.contains("relations"))
                for (auto it = jo.at("relations").begin(); it != jo.at("relations").end(); ++it) {
                    const RelationDecl* r = g.sig.relation(it.key());
                    if (!r)
                        parse_error("object " + m.id + ": unknown relation " + it.key());
                    int ri = int(r - g.sig.relations.data());
                    for (const auto& jt : it.value()) {
                        std::vector<int> tuple;
                        if (jt.size() != r->arity.size())
                            parse_error("object " + m.id + ": arity mismatch in " + r->name);
                        for (std::size_t i = 0; i < r->arity.size(); ++i) {
                            int s = g.sig.sort_index(r->arity[i]);
                            auto el = lookup[s].find(jt[i].get<std::string>());
                            if (el == lookup[s].end())
                                parse_error("object " + m.id + ": unknown element " +
                                            jt[i].get<std::string>() + " in " + r->name);
                            tuple.push_back(el->second);
                        }
                        m.relations[ri].insert(std::move(tuple));
                    }
                }
            g.objects.push_back(std::move(m));
        }

        std::map<std::string, int> obj_ix;
        for (std::size_t i = 0; i < g.objects.size(); ++i)
            obj_ix[g.objects[i].id] = int(i);

        if (doc.contains("arrows"))
            for (const auto& ja : doc.at("arrows")) {
                reject_unknown(ja, {"src", "dst", "map"}, "arrow");
                Morphism h;
                h.src = ja.at("src").get<std::string>();
                h.dst = ja.at("dst").get<std::string>();
                auto si = obj_ix.find(h.src);
                auto ti = obj_ix.find(h.dst);
                if (si == obj_ix.end() || ti == obj_ix.end())
                    parse_error("arrow endpoint is not an object: " + h.src + " -> " + h.dst);
                const Structure& sm = g.objects[si->second];
                const Structure& tm = g.objects[ti->second];
                std::vector<std::map<std::string, int>> slookup(g.sig.sorts.size()),
                    tlookup(g.sig.sorts.size());
                for (std::size_t s = 0; s < g.sig.sorts.size(); ++s) {
                    for (std::size_t e = 0; e < sm.carriers[s].size(); ++e)
                        slookup[s][sm.carriers[s][e]] = int(e);
                    for (std::size_t e = 0; e < tm.carriers[s].size(); ++e)
                        tlookup[s][tm.carriers[s][e]] = int(e);
                }
                h.map.resize(g.sig.sorts.size());
                for (std::size_t s = 0; s < g.sig.sorts.size(); ++s)
                    h.map[s].assign(sm.carriers[s].size(), -1);
                if (ja.contains("map"))
                    for (auto it = ja.at("map").begin(); it != ja.at("map").end(); ++it) {
                        int s = g.sig.sort_index(it.key());
                        if (s < 0)
                            parse_error("arrow map: unknown sort " + it.key());
                        for (auto el = it.value().begin(); el != it.value().end(); ++el) {
                            auto from = slookup[s].find(el.key());
                            auto to = tlookup[s].find(el.value().get<std::string>());
                            if (from == slookup[s].end())
                                parse_error("arrow map: " + el.key() + " is not an element of " + h.src);
                            if (to == tlookup[s].end())
                                parse_error("arrow map: " + el.value().get<std::string>() +
                                            " is not an element of " + h.dst);
                            h.map[s][from->second] = to->second;
                        }
                    }
                for (std::size_t s = 0; s < g.sig.sorts.size(); ++s)
                    for (std::size_t e = 0; e < h.map[s].size(); ++e)
                        if (h.map[s][e] < 0)
                            parse_error("arrow " + h.src + "->" + h.dst + ": no image for element " +
                                        sm.carriers[s][e]);
                g.arrows.push_back(std::move(h));
            }

        bool auto_complete = doc.value("auto_complete", false);
        out.groupoid = validate_groupoid(std::move(g), auto_complete);
        if (doc.value("etale_complete", false))
            out.groupoid = etale_completion(out.groupoid);

        if (doc.contains("indexing")) {
            out.had_indexing = true;
            const json& jx = doc.at("indexing");
            reject_unknown(jx, {"parameters", "interpretation"}, "indexing");
            Indexing ix;
            ix.parameters.resize(out.groupoid.sig.sorts.size());
            for (auto it = jx.at("parameters").begin(); it != jx.at("parameters").end(); ++it) {
                int s = out.groupoid.sig.sort_index(it.key());
                if (s < 0)
                    parse_error("indexing: unknown sort " + it.key());
                for (const auto& p : it.value())
                    ix.parameters[s].push_back(p.get<std::string>());
            }
            std::map<std::string, std::pair<int, int>> pos;
            for (std::size_t s = 0; s < ix.parameters.size(); ++s)
                for (std::size_t p = 0; p < ix.parameters[s].size(); ++p)
                    pos[ix.parameters[s][p]] = {int(s), int(p)};
            ix.interp.assign(out.groupoid.objects.size(), {});
            for (std::size_t o = 0; o < out.groupoid.objects.size(); ++o) {
                ix.interp[o].resize(ix.parameters.size());
                for (std::size_t s = 0; s < ix.parameters.size(); ++s)
                    ix.interp[o][s].assign(ix.parameters[s].size(), -1);
            }
            if (jx.contains("interpretation"))
                for (auto it = jx.at("interpretation").begin(); it != jx.at("interpretation").end(); ++it) {
                    int o = -1;
                    for (std::size_t i = 0; i < out.groupoid.objects.size(); ++i)
                        if (out.groupoid.objects[i].id == it.key())
                            o = int(i);
                    if (o < 0)
                        parse_error("indexing: unknown object " + it.key());
                    for (auto pe = it.value().begin(); pe != it.value().end(); ++pe) {
                        auto pp = pos.find(pe.key());
                        if (pp == pos.end())
                            parse_error("indexing: unknown parameter " + pe.key());
                        auto [s, p] = pp->second;
                        int e = out.groupoid.objects[o].elem(s, pe.value().get<std::string>());
                        if (e < 0)
                            parse_error("indexing: " + pe.value().get<std::string>() +
                                        " is not an element of " + it.key());
                        ix.interp[o][s][p] = e;
                    }
                }
            ix.finalize(out.groupoid);
            out.indexing = std::move(ix);
        } else {
            out.indexing = trivial_indexing(out.groupoid);
        }
        return out;
    } catch (const json::exception& e) {
        parse_error(std::string("groupoid JSON: ") + e.what());
    }
}

std::string groupoid_to_json(const Groupoid& g, const Indexing& ix) {
    ordered_json doc;
    ordered_json jsig;
    jsig["sorts"] = g.sig.sorts;
    ordered_json jrels = ordered_json::array();
    for (const auto& r : g.sig.relations)
        jrels.push_back(ordered_json{{"name", r.name}, {"arity", r.arity}});
    jsig["relations"] = std::move(jrels);
    doc["signature"] = std::move(jsig);

    ordered_json jobjs = ordered_json::array();
    for (const auto& m : g.objects) {
        ordered_json jo;
        jo["id"] = m.id;
        ordered_json jc;
        for (std::size_t s = 0; s < g.sig.sorts.size(); ++s)
            jc[g.sig.sorts[s]] = m.carriers[s];
        jo["carrier"] = std::move(jc);
        ordered_json jr;
        for (std::size_t r = 0; r < g.sig.relations.size(); ++r) {
            ordered_json tuples = ordered_json::array();
            std::vector<int> arg_sorts;
            for (const auto& srt : g.sig.relations[r].arity)
                arg_sorts.push_back(g.sig.sort_index(srt));
            for (const auto& tuple : m.relations[r]) {
                ordered_json jt = ordered_json::array();
                for (std::size_t i = 0; i < tuple.size(); ++i)
                    jt.push_back(m.carriers[arg_sorts[i]][tuple[i]]);
                tuples.push_back(std::move(jt));
            }
            jr[g.sig.relations[r].name] = std::move(tuples);
        }
        jo["relations"] = std::move(jr);
        jobjs.push_back(std::move(jo));
    }
    doc["objects"] = std::move(jobjs);

    ordered_json jarrows = ordered_json::array();
    for (const auto& a : g.arrows) {
        ordered_json ja;
        ja["src"] = a.src;
        ja["dst"] = a.dst;
        const Structure& sm = g.objects[g.object_of(a.src)];
        const Structure& tm = g.objects[g.object_of(a.dst)];
        ordered_json jm;
        for (std::size_t s = 0; s < g.sig.sorts.size(); ++s) {
            ordered_json row;
            for (std::size_t e = 0; e < sm.carriers[s].size(); ++e)
                row[sm.carriers[s][e]] = tm.carriers[s][a.map[s][e]];
            jm[g.sig.sorts[s]] = std::move(row);
        }
        ja["map"] = std::move(jm);
        jarrows.push_back(std::move(ja));
    }
    doc["arrows"] = std::move(jarrows);

    ordered_json jx;
    ordered_json jp;
    for (std::size_t s = 0; s < g.sig.sorts.size(); ++s)
        jp[g.sig.sorts[s]] = ix.parameters[s];
    jx["parameters"] = std::move(jp);
    ordered_json ji;
    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        ordered_json row;
        for (std::size_t s = 0; s < ix.parameters.size(); ++s)
            for (std::size_t p = 0; p < ix.parameters[s].size(); ++p)
                if (ix.interp[o][s][p] >= 0)
                    row[ix.parameters[s][p]] = g.objects[o].carriers[s][ix.interp[o][s][p]];
        ji[g.objects[o].id] = std::move(row);
    }
    jx["interpretation"] = std::move(ji);
    doc["indexing"] = std::move(jx);

    return doc.dump(2) + "\n";
}

} // namespace mgt
