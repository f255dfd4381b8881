#include "definable.hpp"

#include "util.hpp"

#include <algorithm>
#include <unordered_map>

namespace mgt {

std::vector<int> context_sorts(const Signature& sig, const Context& ctx) {
    std::vector<int> out;
    for (const auto& [v, s] : ctx.vars) {
        int si = sig.sort_index(s);
        if (si < 0)
            validation_error("context variable " + v + " has undeclared sort " + s);
        out.push_back(si);
    }
    return out;
}

DefinableSet definable(const Groupoid& g, const Formula& f, const Context& ctx) {
    if (!f.free_params().empty())
        validation_error("definable: formula mentions parameters; use definable_with_params");
    if (!f.is_geometric())
        validation_error("definable: geometric formulas only");
    check_well_sorted(f, ctx, g.sig, {}, false, false);
    DefinableSet d;
    d.ctx = ctx;
    for (std::size_t o = 0; o < g.objects.size(); ++o)
        for (auto& asg : satisfying_assignments(g.sig, f, ctx, g.objects[o]))
            d.members.insert({int(o), std::move(asg)});
    return d;
}

DefinableSet definable_with_params(const Groupoid& g, const Indexing& ix, const Formula& f, const Context& ctx) {
    if (!f.is_geometric())
        validation_error("definable_with_params: geometric formulas only");
    std::map<std::string, std::string> param_sorts;
    for (std::size_t s = 0; s < ix.parameters.size(); ++s)
        for (const auto& p : ix.parameters[s])
            param_sorts[p] = g.sig.sorts[s];
    check_well_sorted(f, ctx, g.sig, param_sorts, false, false);

    std::vector<std::string> used = f.free_params();
    for (const auto& p : used)
        if (!ix.find(p))
            validation_error("unknown parameter: " + p);

    DefinableSet d;
    d.ctx = ctx;
    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        bool all_interpreted = true;
        for (const auto& p : used) {
            auto [s, pi] = *ix.find(p);
            if (!ix.interprets(int(o), s, pi))
                all_interpreted = false;
        }
        if (!all_interpreted)
            continue;
        ParamEnv env = ix.param_env(g, int(o));
        for (auto& asg : satisfying_assignments(g.sig, f, ctx, g.objects[o], &env))
            d.members.insert({int(o), std::move(asg)});
    }
    return d;
}

DefinableSet full_definable(const Groupoid& g, const Context& ctx) {
    return definable(g, Formula::truth(), ctx);
}

DefinableSet params_definable(const Groupoid& g, const Indexing& ix, const std::vector<std::string>& params) {
    if (params.empty())
        validation_error("params_definable: empty parameter tuple");
    Context ctx;
    DefinableSet d;
    std::vector<std::pair<int, int>> pos;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = ix.find(params[i]);
        if (!p)
            validation_error("unknown parameter: " + params[i]);
        pos.push_back(*p);
        ctx.vars.emplace_back("x" + std::to_string(i + 1), g.sig.sorts[p->first]);
    }
    d.ctx = ctx;
    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        PointedStructure p;
        p.object = int(o);
        bool ok = true;
        for (auto [s, pi] : pos) {
            int e = ix.interp[o][s][pi];
            if (e < 0) {
                ok = false;
                break;
            }
            p.tuple.push_back(e);
        }
        if (ok)
            d.members.insert(std::move(p));
    }
    return d;
}

PointedStructure act(const Groupoid& g, const Context& ctx, const PointedStructure& p, const Morphism& arrow) {
    if (g.objects[p.object].id != arrow.src)
        validation_error("act: arrow source " + arrow.src + " does not match the point's object " +
                         g.objects[p.object].id);
    std::vector<int> sorts = context_sorts(g.sig, ctx);
    PointedStructure q;
    q.object = g.object_of(arrow.dst);
    q.tuple = arrow.apply(sorts, p.tuple);
    return q;
}

DefinableSet orbit(const Groupoid& g, const DefinableSet& d) {
    std::vector<int> sorts = context_sorts(g.sig, d.ctx);
    DefinableSet out;
    out.ctx = d.ctx;
    out.members = d.members;
    std::vector<PointedStructure> work(d.members.begin(), d.members.end());
    while (!work.empty()) {
        PointedStructure p = std::move(work.back());
        work.pop_back();
        for (int a : g.arrows_from[p.object]) {
            const Morphism& arrow = g.arrows[a];
            PointedStructure q;
            q.object = g.object_of(arrow.dst);
            q.tuple = arrow.apply(sorts, p.tuple);
            if (out.members.insert(q).second)
                work.push_back(std::move(q));
        }
    }
    return out;
}

bool is_stable(const Groupoid& g, const DefinableSet& d) {
    std::vector<int> sorts = context_sorts(g.sig, d.ctx);
    for (const auto& p : d.members)
        for (int a : g.arrows_from[p.object]) {
            const Morphism& arrow = g.arrows[a];
            PointedStructure q;
            q.object = g.object_of(arrow.dst);
            q.tuple = arrow.apply(sorts, p.tuple);
            if (!d.members.count(q))
                return false;
        }
    return true;
}

std::pair<Context, Formula> upper_bound_formula(const Signature& sig, const Indexing& ix,
                                                const std::vector<std::string>& params) {
    if (params.empty())
        validation_error("upper_bound_formula: empty parameter tuple");
    Context ctx;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = ix.find(params[i]);
        if (!p)
            validation_error("unknown parameter: " + params[i]);
        ctx.vars.emplace_back("x" + std::to_string(i + 1), sig.sorts[p->first]);
    }
    std::vector<Formula> eqs;
    for (std::size_t i = 0; i < params.size(); ++i)
        for (std::size_t j = i + 1; j < params.size(); ++j)
            if (params[i] == params[j])
                eqs.push_back(Formula::equal(Term::var("x" + std::to_string(i + 1)),
                                             Term::var("x" + std::to_string(j + 1))));
    return {std::move(ctx), Formula::conj(std::move(eqs))};
}

// ---------------------------------------------------------------------------
// Saturation

namespace {

// Flat indexing of all (object, tuple) pairs for a fixed sort profile.
struct TupleSpace {
    const Groupoid& g;
    std::vector<int> sorts;
    std::vector<std::size_t> offset;  // per object
    std::size_t total = 0;

    TupleSpace(const Groupoid& g_, std::vector<int> sorts_) : g(g_), sorts(std::move(sorts_)) {
        offset.resize(g.objects.size());
        for (std::size_t o = 0; o < g.objects.size(); ++o) {
            offset[o] = total;
            std::size_t count = 1;
            for (int s : sorts)
                count *= g.objects[o].carriers[s].size();
            total += count;
        }
    }

    std::size_t object_count(std::size_t o) const {
        std::size_t count = 1;
        for (int s : sorts)
            count *= g.objects[o].carriers[s].size();
        return count;
    }

    std::size_t index(const PointedStructure& p) const {
        std::size_t ix = 0;
        for (std::size_t i = 0; i < sorts.size(); ++i)
            ix = ix * g.objects[p.object].carriers[sorts[i]].size() + p.tuple[i];
        return offset[p.object] + ix;
    }

    PointedStructure decode(std::size_t flat) const {
        auto it = std::upper_bound(offset.begin(), offset.end(), flat);
        std::size_t o = std::size_t(it - offset.begin()) - 1;
        // objects with empty tuple spaces share offsets; step to the owner
        while (object_count(o) == 0)
            ++o;
        std::size_t rest = flat - offset[o];
        PointedStructure p;
        p.object = int(o);
        p.tuple.assign(sorts.size(), 0);
        for (std::size_t i = sorts.size(); i-- > 0;) {
            std::size_t size = g.objects[o].carriers[sorts[i]].size();
            p.tuple[i] = int(rest % size);
            rest /= size;
        }
        return p;
    }
};

// Deduplicating set of bitsets.
struct BitsetPool {
    std::vector<Bitset> sets;
    std::unordered_map<std::size_t, std::vector<std::size_t>> by_hash;

    // returns (index, inserted)
    std::pair<std::size_t, bool> insert(const Bitset& b) {
        std::size_t h = b.hash();
        auto& bucket = by_hash[h];
        for (std::size_t i : bucket)
            if (sets[i] == b)
                return {i, false};
        sets.push_back(b);
        bucket.push_back(sets.size() - 1);
        return {sets.size() - 1, true};
    }
};

// All conjunctive-query extensions over ctx extended by exactly `extras`
// variables with the given sorts, projected to the base context.
void cq_projections(const Groupoid& g, const std::vector<int>& base_sorts, const std::vector<int>& extra_sorts,
                    const TupleSpace& base_space, BitsetPool& projected, std::size_t cap, bool& truncated) {
    std::vector<int> sorts = base_sorts;
    sorts.insert(sorts.end(), extra_sorts.begin(), extra_sorts.end());
    TupleSpace space(g, sorts);

    // atomic extensions: relation atoms over all variable patterns, and
    // equalities between same-sorted variables
    std::vector<Bitset> atoms;
    auto materialize = [&](auto&& member_pred) {
        Bitset b(space.total);
        for (std::size_t o = 0; o < g.objects.size(); ++o) {
            std::size_t count = space.object_count(o);
            for (std::size_t k = 0; k < count; ++k) {
                PointedStructure p = space.decode(space.offset[o] + k);
                if (member_pred(p))
                    b.set(space.offset[o] + k);
            }
        }
        return b;
    };

    for (std::size_t r = 0; r < g.sig.relations.size(); ++r) {
        std::vector<int> arg_sorts;
        for (const auto& srt : g.sig.relations[r].arity)
            arg_sorts.push_back(g.sig.sort_index(srt));
        // all assignments of argument positions to context variables
        std::vector<std::vector<int>> patterns;
        std::vector<int> cur(arg_sorts.size(), -1);
        auto rec = [&](auto&& self, std::size_t pos) -> void {
            if (pos == arg_sorts.size()) {
                patterns.push_back(cur);
                return;
            }
            for (std::size_t v = 0; v < sorts.size(); ++v)
                if (sorts[v] == arg_sorts[pos]) {
                    cur[pos] = int(v);
                    self(self, pos + 1);
                }
        };
        rec(rec, 0);
        for (const auto& pattern : patterns)
            atoms.push_back(materialize([&](const PointedStructure& p) {
                std::vector<int> tuple(pattern.size());
                for (std::size_t i = 0; i < pattern.size(); ++i)
                    tuple[i] = p.tuple[pattern[i]];
                return g.objects[p.object].relations[r].count(tuple) > 0;
            }));
    }
    for (std::size_t i = 0; i < sorts.size(); ++i)
        for (std::size_t j = i + 1; j < sorts.size(); ++j)
            if (sorts[i] == sorts[j])
                atoms.push_back(materialize(
                    [&](const PointedStructure& p) { return p.tuple[i] == p.tuple[j]; }));

    // meet closure: BFS refining by one atom at a time reaches every
    // intersection of atomic extensions
    BitsetPool closure;
    std::vector<std::size_t> work;
    auto [fi, fnew] = closure.insert(Bitset::full(space.total));
    work.push_back(fi);
    while (!work.empty()) {
        std::size_t si = work.back();
        work.pop_back();
        for (const auto& a : atoms) {
            Bitset meet = closure.sets[si];
            meet &= a;
            if (closure.sets.size() >= cap) {
                truncated = true;
                break;
            }
            auto [mi, inserted] = closure.insert(meet);
            if (inserted)
                work.push_back(mi);
        }
        if (truncated)
            break;
    }

    // project every CQ extension to the base context
    for (const auto& s : closure.sets) {
        Bitset proj(base_space.total);
        for (std::size_t o = 0; o < g.objects.size(); ++o) {
            std::size_t count = space.object_count(o);
            for (std::size_t k = 0; k < count; ++k)
                if (s.test(space.offset[o] + k)) {
                    PointedStructure p = space.decode(space.offset[o] + k);
                    PointedStructure q;
                    q.object = p.object;
                    q.tuple.assign(p.tuple.begin(), p.tuple.begin() + base_sorts.size());
                    proj.set(base_space.index(q));
                }
        }
        projected.insert(proj);
    }
}

DefinableSet set_from_bits(const Groupoid& g, const Context& ctx, const TupleSpace& space, const Bitset& b) {
    DefinableSet d;
    d.ctx = ctx;
    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        std::size_t count = space.object_count(o);
        for (std::size_t k = 0; k < count; ++k)
            if (b.test(space.offset[o] + k))
                d.members.insert(space.decode(space.offset[o] + k));
    }
    return d;
}

} // namespace

SaturationResult saturate_definables(const Groupoid& g, const Context& ctx, int max_extra_vars,
                                     std::size_t cap, bool build_family) {
    SaturationResult out;
    out.max_extra_vars = max_extra_vars;
    std::vector<int> base_sorts = context_sorts(g.sig, ctx);
    TupleSpace base_space(g, base_sorts);

    BitsetPool projected;
    projected.insert(Bitset(base_space.total)); // the empty set ([[false]])

    // Sort profiles for the extra variables.  A query using fewer extras is a
    // cylinder inside a full-length profile, so profiles of length exactly
    // max_extra_vars suffice, and permuted profiles project identically.
    std::vector<std::vector<int>> profiles = {{}};
    for (int e = 0; e < max_extra_vars; ++e) {
        std::vector<std::vector<int>> next;
        for (const auto& p : profiles)
            for (int s = p.empty() ? 0 : p.back(); s < int(g.sig.sorts.size()); ++s) {
                auto q = p;
                q.push_back(s);
                next.push_back(std::move(q));
            }
        profiles = std::move(next);
    }

    for (const auto& extra : profiles) {
        cq_projections(g, base_sorts, extra, base_space, projected, cap, out.truncated);
        if (out.truncated)
            break;
    }

    for (const auto& b : projected.sets)
        out.basis.push_back(set_from_bits(g, ctx, base_space, b));
    std::sort(out.basis.begin(), out.basis.end(),
              [](const DefinableSet& a, const DefinableSet& b) { return a.members < b.members; });
    out.basis.erase(std::unique(out.basis.begin(), out.basis.end()), out.basis.end());
    if (!build_family)
        return out;

    // union closure of the basis
    BitsetPool family;
    std::vector<std::size_t> work;
    std::vector<Bitset> basis_bits;
    for (const auto& d : out.basis) {
        Bitset b(base_space.total);
        for (const auto& m : d.members)
            b.set(base_space.index(m));
        basis_bits.push_back(b);
        auto [i, fresh] = family.insert(b);
        if (fresh)
            work.push_back(i);
    }
    while (!work.empty() && !out.truncated) {
        std::size_t si = work.back();
        work.pop_back();
        for (const auto& b : basis_bits) {
            Bitset join = family.sets[si];
            join |= b;
            if (family.sets.size() >= cap) {
                out.truncated = true;
                break;
            }
            auto [ji, fresh] = family.insert(join);
            if (fresh)
                work.push_back(ji);
        }
    }
    for (const auto& b : family.sets)
        out.family.push_back(set_from_bits(g, ctx, base_space, b));
    std::sort(out.family.begin(), out.family.end(),
              [](const DefinableSet& a, const DefinableSet& b) { return a.members < b.members; });
    return out;
}

bool family_contains(const std::vector<DefinableSet>& basis, const DefinableSet& s) {
    std::set<PointedStructure> covered;
    for (const auto& b : basis) {
        bool subset = std::includes(s.members.begin(), s.members.end(), b.members.begin(), b.members.end());
        if (subset)
            covered.insert(b.members.begin(), b.members.end());
    }
    return covered == s.members;
}

} // namespace mgt
