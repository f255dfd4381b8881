#include "theorygen.hpp"

#include "util.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace mgt {

ExtendedSignature extend_signature(const Groupoid& g, const Indexing& ix, int tuple_bound) {
    if (tuple_bound < 1)
        validation_error("extend_signature: tuple bound must be at least 1");
    ExtendedSignature ext;
    ext.sig = g.sig;
    ext.base_relations = g.sig.relations.size();
    ext.tuple_bound = tuple_bound;

    std::vector<std::pair<std::string, int>> params; // (name, sort)
    for (std::size_t s = 0; s < ix.parameters.size(); ++s)
        for (const auto& p : ix.parameters[s])
            params.emplace_back(p, int(s));

    std::set<std::string> names;
    for (const auto& r : ext.sig.relations)
        names.insert(r.name);

    std::vector<std::size_t> pick;
    auto rec = [&](auto&& self) -> void {
        if (!pick.empty()) {
            RelationDecl decl;
            std::vector<std::string> tuple;
            decl.name = "R_";
            for (std::size_t i : pick) {
                decl.name += "_" + params[i].first;
                decl.arity.push_back(g.sig.sorts[params[i].second]);
                tuple.push_back(params[i].first);
            }
            if (!names.insert(decl.name).second)
                validation_error("extend_signature: relation name collision at " + decl.name);
            ext.sig.relations.push_back(std::move(decl));
            ext.tuples.push_back(std::move(tuple));
        }
        if (int(pick.size()) == tuple_bound)
            return;
        for (std::size_t i = 0; i < params.size(); ++i) {
            pick.push_back(i);
            self(self);
            pick.pop_back();
        }
    };
    rec(rec);
    return ext;
}

std::pair<Groupoid, Indexing> interpret_extension(const Groupoid& g, const Indexing& ix,
                                                  const ExtendedSignature& ext) {
    Groupoid out;
    out.sig = ext.sig;
    out.objects = g.objects;
    out.arrows = g.arrows;

    for (std::size_t t = 0; t < ext.tuples.size(); ++t) {
        const auto& tuple = ext.tuples[t];
        DefinableSet seed = params_definable(g, ix, tuple);
        DefinableSet orb = seed.members.empty() ? seed : orbit(g, seed);
        for (auto& obj : out.objects)
            obj.relations.emplace_back();
        std::map<std::string, int> obj_ix;
        for (std::size_t o = 0; o < out.objects.size(); ++o)
            obj_ix[out.objects[o].id] = int(o);
        for (const auto& p : orb.members)
            out.objects[p.object].relations[ext.base_relations + t].insert(p.tuple);
    }
    for (auto& obj : out.objects) {
        obj.elem_index.clear();
        obj.finalize(out.sig);
    }
    out.rebuild_index();
    // orbits are stable, so every original arrow is still an isomorphism
    out = validate_groupoid(std::move(out), false);

    Indexing nix = ix;
    nix.finalize(out);
    return {std::move(out), std::move(nix)};
}


namespace {

// Canonical atom patterns of an open conjunction/disjunction, with bound and
// free variables renamed by first occurrence: "exists w. Lt(w, w)" and
// "Lt(x1, x1)" flatten to the same pattern, so a kept inconsistency axiom
// subsumes its existential closures in later contexts.
std::optional<std::set<std::string>> open_patterns(const Formula& f, Formula::Kind junction) {
    const Formula* body = &f;
    if (junction == Formula::Kind::And && f.kind == Formula::Kind::Exists)
        body = &f.kids[0];
    std::vector<const Formula*> parts;
    if (body->kind == Formula::Kind::RelAtom || body->kind == Formula::Kind::Equal)
        parts = {body};
    else if (body->kind == junction) {
        for (const auto& k : body->kids)
            if (k.kind == Formula::Kind::RelAtom || k.kind == Formula::Kind::Equal)
                parts.push_back(&k);
            else
                return std::nullopt;
    } else {
        return std::nullopt;
    }
    std::map<std::string, std::string> renaming;
    auto canon = [&](const Term& t) -> std::string {
        if (t.kind != Term::Kind::Var)
            return t.name;
        auto [it, fresh] = renaming.emplace(t.name, "v" + std::to_string(renaming.size()));
        return it->second;
    };
    std::set<std::string> out;
    for (const Formula* part : parts) {
        std::string rendered = part->kind == Formula::Kind::Equal ? "=" : part->rel;
        for (const auto& t : part->terms)
            rendered += "," + canon(t);
        out.insert(std::move(rendered));
    }
    return out;
}

} // namespace

Theory theory_of_groupoid(const Groupoid& g, const PoolOptions& pool) {
    Theory theory;
    theory.signature = g.sig;

    // inconsistent and universal patterns kept so far, across contexts;
    // longer contexts go first so the open form of a law is kept and its
    // existential closures are recognised as interderivable
    std::vector<std::set<std::string>> kept_empty, kept_full;
    std::vector<Context> contexts = context_pool(g.sig, pool.max_context_len);
    std::reverse(contexts.begin(), contexts.end());

    int counter = 0;
    for (const Context& ctx : contexts) {
        std::vector<Formula> formulas = formula_pool(g.sig, ctx, pool);
        // deterministic order: smallest text first, so pruning keeps the
        // simplest representative of each extension pair
        std::stable_sort(formulas.begin(), formulas.end(), [](const Formula& a, const Formula& b) {
            std::string pa = print_formula(a), pb = print_formula(b);
            return pa.size() != pb.size() ? pa.size() < pb.size() : pa < pb;
        });

        // flat extension bitsets over the context's tuple space
        std::vector<int> sorts = context_sorts(g.sig, ctx);
        std::vector<std::size_t> offset(g.objects.size());
        std::size_t total = 0;
        for (std::size_t o = 0; o < g.objects.size(); ++o) {
            offset[o] = total;
            std::size_t count = 1;
            for (int s : sorts)
                count *= g.objects[o].carriers[s].size();
            total += count;
        }
        auto flat = [&](const PointedStructure& p) {
            std::size_t ix = 0;
            for (std::size_t i = 0; i < sorts.size(); ++i)
                ix = ix * g.objects[p.object].carriers[sorts[i]].size() + p.tuple[i];
            return offset[p.object] + ix;
        };
        std::vector<Bitset> ext;
        for (const auto& f : formulas) {
            Bitset bits(total);
            for (const auto& p : definable(g, f, ctx).members)
                bits.set(flat(p));
            ext.push_back(std::move(bits));
        }

        // Extension classes over the objects.  The emitted axioms are:
        //   - phi => false for every pool formula with empty extension (the
        //     irredundant negative constraints),
        //   - true => psi for every formula with full extension,
        //   - rep_i => rep_j for the cover pairs of the class inclusion
        //     order; transitive chains make the remaining containments
        //     derivable in every model, not just over the objects.
        std::vector<std::vector<std::size_t>> classes;
        for (std::size_t i = 0; i < formulas.size(); ++i) {
            bool placed = false;
            for (auto& cls : classes)
                if (ext[cls.front()] == ext[i]) {
                    cls.push_back(i);
                    placed = true;
                    break;
                }
            if (!placed)
                classes.push_back({i});
        }

        auto emit = [&](const Formula& premise, const Formula& conclusion) {
            Sequent ax;
            ax.name = "t" + std::to_string(++counter);
            ax.context = ctx;
            ax.premise = premise;
            ax.conclusion = conclusion;
            theory.axioms.push_back(std::move(ax));
        };

        Bitset empty_ext(total);
        Bitset full_ext = Bitset::full(total);
        std::vector<std::size_t> proper; // classes other than empty/full
        for (std::size_t c = 0; c < classes.size(); ++c) {
            const auto& cls = classes[c];
            if (ext[cls.front()] == empty_ext) {
                for (std::size_t i : cls) {
                    if (formulas[i] == Formula::falsity())
                        continue;
                    // a conjunction with an inconsistent sub-conjunction, or
                    // a disjunction of inconsistent parts, adds nothing
                    auto atoms = open_patterns(formulas[i], Formula::Kind::And);
                    bool subsumed = false;
                    if (atoms) {
                        for (const auto& k : kept_empty)
                            if (std::includes(atoms->begin(), atoms->end(), k.begin(), k.end()))
                                subsumed = true;
                    } else if (formulas[i].kind == Formula::Kind::Or) {
                        subsumed = true; // each disjunct is itself empty and smaller
                    }
                    if (subsumed)
                        continue;
                    emit(formulas[i], Formula::falsity());
                    if (atoms)
                        kept_empty.push_back(std::move(*atoms));
                }
            } else if (ext[cls.front()] == full_ext) {
                for (std::size_t i : cls) {
                    if (formulas[i] == Formula::truth())
                        continue;
                    // a disjunction weakening a universal disjunction, or a
                    // conjunction of universal parts, adds nothing
                    auto atoms = open_patterns(formulas[i], Formula::Kind::Or);
                    bool subsumed = false;
                    if (atoms) {
                        for (const auto& k : kept_full)
                            if (std::includes(atoms->begin(), atoms->end(), k.begin(), k.end()))
                                subsumed = true;
                    } else if (formulas[i].kind == Formula::Kind::And) {
                        subsumed = true; // each conjunct is itself full and smaller
                    }
                    if (subsumed)
                        continue;
                    emit(Formula::truth(), formulas[i]);
                    if (atoms)
                        kept_full.push_back(std::move(*atoms));
                }
            } else {
                proper.push_back(c);
            }
        }

        for (std::size_t a : proper)
            for (std::size_t b : proper) {
                if (a == b || !ext[classes[a].front()].is_subset_of(ext[classes[b].front()]))
                    continue;
                bool cover = true;
                for (std::size_t m : proper) {
                    if (m == a || m == b)
                        continue;
                    const Bitset& mid = ext[classes[m].front()];
                    if (ext[classes[a].front()].is_subset_of(mid) &&
                        mid.is_subset_of(ext[classes[b].front()]) &&
                        !(mid == ext[classes[a].front()]) && !(mid == ext[classes[b].front()])) {
                        cover = false;
                        break;
                    }
                }
                if (cover)
                    emit(formulas[classes[a].front()], formulas[classes[b].front()]);
            }
    }
    return theory;
}

std::optional<Formula> minimal_formula(const Groupoid& g, int object, const TypedTuple& point,
                                       const SaturationResult& sat) {
    Formula candidate = canonical_query(g.sig, g.objects[object], point);
    Context ctx = canonical_context(g.sig, point);
    DefinableSet extension = definable(g, candidate, ctx);

    PointedStructure self{object, point.elems};
    auto type_of = [&](const PointedStructure& p) {
        std::vector<bool> memberships;
        memberships.reserve(sat.basis.size());
        for (const auto& d : sat.basis)
            memberships.push_back(d.members.count(p) > 0);
        return memberships;
    };
    std::vector<bool> self_type = type_of(self);

    // (a) every satisfier realises the same bounded type
    for (const auto& q : extension.members)
        if (type_of(q) != self_type)
            return std::nullopt;
    // (b) the candidate's extension is inside or disjoint from every
    // saturated definable
    for (const auto& d : sat.basis) {
        bool inside = std::includes(d.members.begin(), d.members.end(), extension.members.begin(),
                                    extension.members.end());
        if (inside)
            continue;
        std::vector<PointedStructure> meet;
        std::set_intersection(d.members.begin(), d.members.end(), extension.members.begin(),
                              extension.members.end(), std::back_inserter(meet));
        if (!meet.empty())
            return std::nullopt;
    }
    return candidate;
}

UltraReport is_ultrahomogeneous(const Signature& sig, const Structure& m) {
    // all positions across sorts, in (sort, elem) order
    std::vector<std::pair<int, int>> positions;
    for (std::size_t s = 0; s < m.carriers.size(); ++s)
        for (std::size_t e = 0; e < m.carriers[s].size(); ++e)
            positions.emplace_back(int(s), int(e));

    // enumerate domains by size, then injective images; smaller witnesses
    // surface first
    std::vector<std::vector<std::size_t>> domains;
    for (std::size_t size = 1; size <= positions.size(); ++size) {
        std::vector<std::size_t> cur;
        auto rec = [&](auto&& self, std::size_t start) -> void {
            if (cur.size() == size) {
                domains.push_back(cur);
                return;
            }
            for (std::size_t i = start; i < positions.size(); ++i) {
                cur.push_back(i);
                self(self, i + 1);
                cur.pop_back();
            }
        };
        rec(rec, 0);
    }

    for (const auto& domain : domains) {
        TypedTuple from;
        for (std::size_t i : domain) {
            from.sorts.push_back(positions[i].first);
            from.elems.push_back(positions[i].second);
        }
        // injective images, element order per sort
        std::vector<int> image(domain.size(), -1);
        auto rec = [&](auto&& self, std::size_t pos) -> bool {
            if (pos == domain.size()) {
                TypedTuple to;
                to.sorts = from.sorts;
                to.elems = image;
                if (partial_iso_violation(sig, m, from, to))
                    return true; // not a partial isomorphism: skip
                if (!extend_partial_iso(sig, m, from, to))
                    return false; // the witness
                return true;
            }
            int s = from.sorts[pos];
            for (int e = 0; e < int(m.carriers[s].size()); ++e) {
                bool used = false;
                for (std::size_t k = 0; k < pos; ++k)
                    if (from.sorts[k] == s && image[k] == e)
                        used = true;
                if (used)
                    continue;
                image[pos] = e;
                if (!self(self, pos + 1)) {
                    return false;
                }
            }
            image[pos] = -1;
            return true;
        };
        if (!rec(rec, 0)) {
            UltraReport report;
            report.ultrahomogeneous = false;
            for (std::size_t k = 0; k < from.elems.size(); ++k) {
                report.from.push_back(m.carriers[from.sorts[k]][from.elems[k]]);
                report.to.push_back(m.carriers[from.sorts[k]][image[k]]);
            }
            return report;
        }
    }
    return {};
}

DecidabilityWitness decidability_witness(const Groupoid& g, const Indexing& ix, const Context& ctx) {
    if (ctx.vars.size() != 2 || ctx.vars[0].second != ctx.vars[1].second)
        validation_error("decidability_witness: a two-variable single-sorted context is required");
    int sort = g.sig.sort_index(ctx.vars[0].second);

    DecidabilityWitness out;
    out.complement.ctx = ctx;
    // C = union over pairs of distinct parameter names of [[x = m & x' = m']]
    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        const auto& row = ix.interp[o][sort];
        for (std::size_t p = 0; p < row.size(); ++p)
            for (std::size_t q = 0; q < row.size(); ++q)
                if (p != q && row[p] >= 0 && row[q] >= 0)
                    out.complement.members.insert({int(o), {row[p], row[q]}});
    }

    out.stable = is_stable(g, out.complement);
    DefinableSet diagonal = definable(
        g, Formula::equal(Term::var(ctx.vars[0].first), Term::var(ctx.vars[1].first)), ctx);
    std::vector<PointedStructure> meet;
    std::set_intersection(out.complement.members.begin(), out.complement.members.end(),
                          diagonal.members.begin(), diagonal.members.end(), std::back_inserter(meet));
    out.disjoint_from_diagonal = meet.empty();
    DefinableSet full = full_definable(g, ctx);
    std::set<PointedStructure> join = out.complement.members;
    join.insert(diagonal.members.begin(), diagonal.members.end());
    out.covers_with_diagonal = join == full.members;
    out.ok = out.stable && out.disjoint_from_diagonal && out.covers_with_diagonal;
    if (out.ok)
        out.formula = is_pf_definable(g, out.complement);
    return out;
}

BouquetDecomposition bouquet_decomposition(const Groupoid& g, const std::vector<Formula>& sentence_pool,
                                           const std::vector<Scheme>& schemes, int scheme_bound) {
    BouquetDecomposition out;

    // connected components under the arrows
    std::vector<int> comp(g.objects.size(), -1);
    int count = 0;
    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        if (comp[o] >= 0)
            continue;
        std::vector<int> work = {int(o)};
        comp[o] = count;
        while (!work.empty()) {
            int cur = work.back();
            work.pop_back();
            for (int a : g.arrows_from[cur]) {
                int dst = g.object_of(g.arrows[a].dst);
                if (comp[dst] < 0) {
                    comp[dst] = count;
                    work.push_back(dst);
                }
            }
            for (int a : g.arrows_into[cur]) {
                int src = g.object_of(g.arrows[a].src);
                if (comp[src] < 0) {
                    comp[src] = count;
                    work.push_back(src);
                }
            }
        }
        ++count;
    }

    // no isomorphisms may exist between distinct components
    for (std::size_t i = 0; i < g.objects.size(); ++i)
        for (std::size_t j = 0; j < g.objects.size(); ++j)
            if (comp[i] != comp[j] && !enumerate_isos(g.sig, g.objects[i], g.objects[j]).empty()) {
                out.failure = "cross isomorphism between " + g.objects[i].id + " and " + g.objects[j].id;
                return out;
            }

    // candidate sentences: the pool first, then instantiated schemes
    std::vector<Formula> candidates = sentence_pool;
    for (const auto& sch : schemes)
        for (int n = 1; n <= std::min(scheme_bound, sch.bound); ++n)
            candidates.push_back(sch.instance(n).conclusion);

    Context empty;
    std::vector<std::vector<bool>> holds(candidates.size(), std::vector<bool>(g.objects.size(), false));
    for (std::size_t c = 0; c < candidates.size(); ++c)
        for (std::size_t o = 0; o < g.objects.size(); ++o)
            holds[c][o] = eval(g.sig, candidates[c], empty, g.objects[o], {});

    for (int k = 0; k < count; ++k) {
        BouquetComponent component;
        for (std::size_t o = 0; o < g.objects.size(); ++o)
            if (comp[o] == k)
                component.objects.push_back(int(o));
        for (const auto& a : g.arrows)
            if (comp[g.object_of(a.src)] == k)
                ++component.arrows;

        bool isolated = false;
        for (std::size_t c = 0; c < candidates.size() && !isolated; ++c) {
            bool on_component = true, off_others = true;
            for (std::size_t o = 0; o < g.objects.size(); ++o) {
                if (comp[o] == k && !holds[c][o])
                    on_component = false;
                if (comp[o] != k && holds[c][o])
                    off_others = false;
            }
            if (on_component && off_others) {
                component.isolating_sentence = print_formula(candidates[c]);
                isolated = true;
            }
        }
        if (!isolated) {
            out.failure = "pool exhausted: no isolating sentence for the component of " +
                          g.objects[component.objects.front()].id;
            out.components.clear();
            return out;
        }
        out.components.push_back(std::move(component));
    }
    out.ok = true;
    return out;
}

} // namespace mgt
