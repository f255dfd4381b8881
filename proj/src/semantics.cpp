#include "semantics.hpp"

#include "util.hpp"

#include <algorithm>
#include <cassert>

namespace mgt {

// ---------------------------------------------------------------------------
// Structure

void Structure::finalize(const Signature& sig) {
    if (carriers.size() != sig.sorts.size())
        validation_error("structure " + id + ": carrier count does not match sort count");
    if (relations.size() != sig.relations.size())
        validation_error("structure " + id + ": relation count does not match signature");
    elem_index.assign(carriers.size(), {});
    for (std::size_t s = 0; s < carriers.size(); ++s)
        for (std::size_t i = 0; i < carriers[s].size(); ++i) {
            if (!elem_index[s].emplace(carriers[s][i], int(i)).second)
                validation_error("structure " + id + ": duplicate element " + carriers[s][i] + " in sort " +
                                 sig.sorts[s]);
        }
    for (std::size_t r = 0; r < relations.size(); ++r) {
        const auto& arity = sig.relations[r].arity;
        for (const auto& tuple : relations[r]) {
            if (tuple.size() != arity.size())
                validation_error("structure " + id + ": tuple arity mismatch in " + sig.relations[r].name);
            for (std::size_t i = 0; i < tuple.size(); ++i) {
                int s = sig.sort_index(arity[i]);
                if (tuple[i] < 0 || tuple[i] >= int(carriers[s].size()))
                    validation_error("structure " + id + ": tuple element out of carrier in " +
                                     sig.relations[r].name);
            }
        }
    }
}

int Structure::elem(int sort, const std::string& name) const {
    auto it = elem_index[sort].find(name);
    return it == elem_index[sort].end() ? -1 : it->second;
}

std::size_t Structure::carrier_total() const {
    std::size_t n = 0;
    for (const auto& c : carriers)
        n += c.size();
    return n;
}

std::vector<int> Morphism::apply(std::span<const int> sorts, std::span<const int> elems) const {
    std::vector<int> out(elems.size());
    for (std::size_t i = 0; i < elems.size(); ++i)
        out[i] = map[sorts[i]][elems[i]];
    return out;
}

bool Morphism::operator<(const Morphism& o) const {
    if (src != o.src)
        return src < o.src;
    if (dst != o.dst)
        return dst < o.dst;
    return map < o.map;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct Env {
    const Signature& sig;
    const Structure& m;
    const ParamEnv* params;
    // variable stack: (name, sort, element)
    std::vector<std::tuple<std::string, int, int>> vars;

    int lookup(const std::string& name) const {
        for (auto it = vars.rbegin(); it != vars.rend(); ++it)
            if (std::get<0>(*it) == name)
                return std::get<2>(*it);
        validation_error("unbound variable in evaluation: " + name);
    }

    int term_value(const Term& t) const {
        if (t.kind == Term::Kind::Var)
            return lookup(t.name);
        if (t.kind == Term::Kind::Param) {
            if (!params)
                validation_error("parameter in a parameter-free evaluation: " + t.name);
            auto it = params->find(t.name);
            if (it == params->end())
                validation_error("parameter not interpreted here: " + t.name);
            return it->second.second;
        }
        validation_error("function application reached evaluation: " + t.name);
    }
};

bool eval_rec(Env& env, const Formula& f);

// Quantifier block; returns `existential` as soon as one branch decides.
bool quantify(Env& env, const Formula& f, bool existential) {
    const auto& binders = f.binders;
    std::size_t base = env.vars.size();
    std::vector<std::size_t> sizes(binders.size());
    for (std::size_t i = 0; i < binders.size(); ++i) {
        int si = env.sig.sort_index(binders[i].second);
        env.vars.emplace_back(binders[i].first, si, 0);
        sizes[i] = env.m.carriers[si].size();
    }

    // empty carrier: exists -> false, forall -> true
    for (auto sz : sizes)
        if (sz == 0) {
            env.vars.resize(base);
            return !existential;
        }

    std::vector<std::size_t> idx(binders.size(), 0);
    while (true) {
        for (std::size_t i = 0; i < binders.size(); ++i)
            std::get<2>(env.vars[base + i]) = int(idx[i]);
        if (eval_rec(env, f.kids[0]) == existential) {
            env.vars.resize(base);
            return existential;
        }
        std::size_t k = binders.size();
        while (true) {
            if (k == 0) {
                env.vars.resize(base);
                return !existential;
            }
            --k;
            if (++idx[k] < sizes[k])
                break;
            idx[k] = 0;
        }
    }
}

bool eval_rec(Env& env, const Formula& f) {
    switch (f.kind) {
    case Formula::Kind::Truth:
        return true;
    case Formula::Kind::Falsity:
        return false;
    case Formula::Kind::RelAtom: {
        const RelationDecl* r = env.sig.relation(f.rel);
        if (!r)
            validation_error("unknown relation in evaluation: " + f.rel);
        int ri = int(r - env.sig.relations.data());
        std::vector<int> tuple;
        tuple.reserve(f.terms.size());
        for (const auto& t : f.terms)
            tuple.push_back(env.term_value(t));
        return env.m.relations[ri].count(tuple) > 0;
    }
    case Formula::Kind::Equal:
        return env.term_value(f.terms[0]) == env.term_value(f.terms[1]);
    case Formula::Kind::And:
        for (const auto& k : f.kids)
            if (!eval_rec(env, k))
                return false;
        return true;
    case Formula::Kind::Or:
        for (const auto& k : f.kids)
            if (eval_rec(env, k))
                return true;
        return false;
    case Formula::Kind::Not:
        return !eval_rec(env, f.kids[0]);
    case Formula::Kind::Implies:
        return !eval_rec(env, f.kids[0]) || eval_rec(env, f.kids[1]);
    case Formula::Kind::Exists:
        return quantify(env, f, true);
    case Formula::Kind::Forall:
        return quantify(env, f, false);
    }
    return false;
}

// Iterates all assignments of a context; f(asg) returning false aborts.
template <typename F>
void for_each_assignment(const Signature& sig, const Context& ctx, const Structure& m, F&& body) {
    std::vector<int> sizes;
    for (const auto& [v, s] : ctx.vars)
        sizes.push_back(int(m.carriers[sig.sort_index(s)].size()));
    for (int sz : sizes)
        if (sz == 0)
            return;
    std::vector<int> asg(ctx.vars.size(), 0);
    while (true) {
        if (!body(asg))
            return;
        std::size_t k = asg.size();
        while (true) {
            if (k == 0)
                return;
            --k;
            if (++asg[k] < sizes[k])
                break;
            asg[k] = 0;
        }
    }
}

} // namespace

bool eval(const Signature& sig, const Formula& f, const Context& ctx, const Structure& m,
          std::span<const int> assignment, const ParamEnv* params) {
    if (assignment.size() != ctx.vars.size())
        validation_error("assignment does not cover the context");
    Env env{sig, m, params, {}};
    for (std::size_t i = 0; i < ctx.vars.size(); ++i) {
        int si = sig.sort_index(ctx.vars[i].second);
        if (si < 0)
            validation_error("context variable of undeclared sort: " + ctx.vars[i].second);
        if (assignment[i] < 0 || assignment[i] >= int(m.carriers[si].size()))
            validation_error("assignment outside the carrier for " + ctx.vars[i].first);
        env.vars.emplace_back(ctx.vars[i].first, si, assignment[i]);
    }
    return eval_rec(env, f);
}

std::vector<std::vector<int>> satisfying_assignments(const Signature& sig, const Formula& f, const Context& ctx,
                                                     const Structure& m, const ParamEnv* params) {
    std::vector<std::vector<int>> out;
    for_each_assignment(sig, ctx, m, [&](const std::vector<int>& asg) {
        if (eval(sig, f, ctx, m, asg, params))
            out.push_back(asg);
        return true;
    });
    return out;
}

bool satisfies_sequent(const Signature& sig, const Structure& m, const Sequent& s) {
    bool ok = true;
    for_each_assignment(sig, s.context, m, [&](const std::vector<int>& asg) {
        if (eval(sig, s.premise, s.context, m, asg) && !eval(sig, s.conclusion, s.context, m, asg)) {
            ok = false;
            return false;
        }
        return true;
    });
    return ok;
}

TheoryCheck check_theory(const Structure& m, const Theory& t, int scheme_bound) {
    TheoryCheck out;
    for (const auto& ax : t.axioms)
        if (!satisfies_sequent(t.signature, m, ax)) {
            out.ok = false;
            out.failing.push_back(ax.name);
        }
    out.has_schemes = !t.schemes.empty();
    for (const auto& sch : t.schemes) {
        if (scheme_bound > sch.bound)
            out.schemes_truncated = true;
        int upto = std::min(scheme_bound, sch.bound);
        for (int n = 1; n <= upto; ++n) {
            Sequent inst = sch.instance(n);
            if (!satisfies_sequent(t.signature, m, inst)) {
                out.ok = false;
                out.failing.push_back(inst.name);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Homomorphism search

namespace {

// Backtracking kernel shared by hom/iso/extension search.  Source elements
// are ordered (sort asc, elem asc); a relation tuple is checked as soon as
// its last-ordered element is assigned, which prunes most dead branches.
struct HomSearch {
    const Signature& sig;
    const Structure& m;
    const Structure& n;
    bool injective = false;
    std::vector<std::vector<int>> fixed; // fixed[s][e] = forced image or -1
    bool stop_at_first = false;

    struct Slot {
        int sort, elem;
    };
    std::vector<Slot> order;
    std::vector<std::vector<std::pair<int, const std::vector<int>*>>> due;
    std::vector<std::vector<int>> assign;
    std::vector<std::vector<char>> used;
    std::vector<std::vector<int>> rel_arg_sorts;
    std::vector<Morphism> results;
    bool aborted = false;

    HomSearch(const Signature& sig_, const Structure& m_, const Structure& n_) : sig(sig_), m(m_), n(n_) {
        fixed.resize(m.carriers.size());
        for (std::size_t s = 0; s < m.carriers.size(); ++s)
            fixed[s].assign(m.carriers[s].size(), -1);
    }

    void prepare() {
        std::vector<std::vector<int>> pos_of(m.carriers.size());
        for (std::size_t s = 0; s < m.carriers.size(); ++s) {
            pos_of[s].resize(m.carriers[s].size());
            for (std::size_t e = 0; e < m.carriers[s].size(); ++e) {
                pos_of[s][e] = int(order.size());
                order.push_back({int(s), int(e)});
            }
        }
        rel_arg_sorts.resize(m.relations.size());
        due.assign(order.size() + 1, {});
        for (std::size_t r = 0; r < m.relations.size(); ++r) {
            for (const auto& srt : sig.relations[r].arity)
                rel_arg_sorts[r].push_back(sig.sort_index(srt));
            for (const auto& tuple : m.relations[r]) {
                int last = -1;
                for (std::size_t i = 0; i < tuple.size(); ++i)
                    last = std::max(last, pos_of[rel_arg_sorts[r][i]][tuple[i]]);
                due[last + 1].emplace_back(int(r), &tuple);
            }
        }
        assign.resize(m.carriers.size());
        for (std::size_t s = 0; s < m.carriers.size(); ++s)
            assign[s].assign(m.carriers[s].size(), -1);
        used.resize(n.carriers.size());
        for (std::size_t s = 0; s < n.carriers.size(); ++s)
            used[s].assign(n.carriers[s].size(), 0);
    }

    bool tuple_ok(int r, const std::vector<int>& tuple) const {
        std::vector<int> image(tuple.size());
        for (std::size_t i = 0; i < tuple.size(); ++i)
            image[i] = assign[rel_arg_sorts[r][i]][tuple[i]];
        return n.relations[r].count(image) > 0;
    }

    void run(std::size_t pos) {
        if (aborted)
            return;
        for (const auto& [r, tuple] : due[pos])
            if (!tuple_ok(r, *tuple))
                return;
        if (pos == order.size()) {
            Morphism h;
            h.src = m.id;
            h.dst = n.id;
            h.map = assign;
            results.push_back(std::move(h));
            if (stop_at_first)
                aborted = true;
            return;
        }
        auto [s, e] = order[pos];
        int forced = fixed[s][e];
        int limit = int(n.carriers[s].size());
        for (int target = forced >= 0 ? forced : 0; target < limit; ++target) {
            if (injective && used[s][target]) {
                if (forced >= 0)
                    break;
                continue;
            }
            assign[s][e] = target;
            if (injective)
                used[s][target] = 1;
            run(pos + 1);
            if (injective)
                used[s][target] = 0;
            assign[s][e] = -1;
            if (forced >= 0 || aborted)
                break;
        }
    }

    std::vector<Morphism> search() {
        prepare();
        run(0);
        return std::move(results);
    }
};

} // namespace

std::vector<Morphism> enumerate_homs(const Signature& sig, const Structure& m, const Structure& n) {
    HomSearch hs(sig, m, n);
    return hs.search();
}

std::optional<std::string> iso_violation(const Signature& sig, const Structure& m, const Structure& n,
                                         const Morphism& h) {
    if (h.map.size() != m.carriers.size())
        return "map does not cover all sorts";
    for (std::size_t s = 0; s < m.carriers.size(); ++s) {
        if (m.carriers[s].size() != n.carriers[s].size())
            return "carriers of sort " + sig.sorts[s] + " differ in size";
        if (h.map[s].size() != m.carriers[s].size())
            return "map does not cover the carrier of sort " + sig.sorts[s];
        std::vector<char> hit(n.carriers[s].size(), 0);
        for (int img : h.map[s]) {
            if (img < 0 || img >= int(n.carriers[s].size()))
                return "image outside the carrier of sort " + sig.sorts[s];
            if (hit[img])
                return "not injective on sort " + sig.sorts[s] + " at " + n.carriers[s][img];
            hit[img] = 1;
        }
    }
    for (std::size_t r = 0; r < m.relations.size(); ++r) {
        std::vector<int> arg_sorts;
        for (const auto& srt : sig.relations[r].arity)
            arg_sorts.push_back(sig.sort_index(srt));
        for (const auto& tuple : m.relations[r]) {
            std::vector<int> image(tuple.size());
            for (std::size_t i = 0; i < tuple.size(); ++i)
                image[i] = h.map[arg_sorts[i]][tuple[i]];
            if (!n.relations[r].count(image)) {
                std::vector<std::string> names;
                for (std::size_t i = 0; i < tuple.size(); ++i)
                    names.push_back(m.carriers[arg_sorts[i]][tuple[i]]);
                return "atom " + sig.relations[r].name + "(" + join(names, ",") + ") not preserved";
            }
        }
        // bijective and equal tuple counts: forward preservation implies the
        // inverse preserves too
        if (m.relations[r].size() != n.relations[r].size())
            return "relation " + sig.relations[r].name + " not reflected (tuple counts differ)";
    }
    return std::nullopt;
}

bool is_isomorphism(const Signature& sig, const Structure& m, const Structure& n, const Morphism& h) {
    return !iso_violation(sig, m, n, h).has_value();
}

Morphism identity_morphism(const Structure& m) {
    Morphism h;
    h.src = h.dst = m.id;
    h.map.resize(m.carriers.size());
    for (std::size_t s = 0; s < m.carriers.size(); ++s) {
        h.map[s].resize(m.carriers[s].size());
        for (std::size_t e = 0; e < m.carriers[s].size(); ++e)
            h.map[s][e] = int(e);
    }
    return h;
}

Morphism compose(const Morphism& f, const Morphism& g) {
    if (f.dst != g.src)
        validation_error("composition of non-composable morphisms " + f.src + "->" + f.dst + " and " + g.src +
                         "->" + g.dst);
    Morphism h;
    h.src = f.src;
    h.dst = g.dst;
    h.map.resize(f.map.size());
    for (std::size_t s = 0; s < f.map.size(); ++s) {
        h.map[s].resize(f.map[s].size());
        for (std::size_t e = 0; e < f.map[s].size(); ++e)
            h.map[s][e] = g.map[s][f.map[s][e]];
    }
    return h;
}

Morphism inverse(const Morphism& f) {
    Morphism h;
    h.src = f.dst;
    h.dst = f.src;
    h.map.resize(f.map.size());
    for (std::size_t s = 0; s < f.map.size(); ++s) {
        h.map[s].assign(f.map[s].size(), -1);
        for (std::size_t e = 0; e < f.map[s].size(); ++e)
            h.map[s][f.map[s][e]] = int(e);
    }
    return h;
}

std::vector<Morphism> enumerate_isos(const Signature& sig, const Structure& m, const Structure& n) {
    for (std::size_t s = 0; s < m.carriers.size(); ++s)
        if (m.carriers[s].size() != n.carriers[s].size())
            return {};
    for (std::size_t r = 0; r < m.relations.size(); ++r)
        if (m.relations[r].size() != n.relations[r].size())
            return {};
    HomSearch hs(sig, m, n);
    hs.injective = true;
    std::vector<Morphism> all = hs.search();
    std::vector<Morphism> out;
    for (auto& h : all)
        if (is_isomorphism(sig, m, n, h))
            out.push_back(std::move(h));
    return out;
}

bool hom_leq(const Signature& sig, const Structure& src, const TypedTuple& p, const Structure& dst,
             const TypedTuple& q) {
    if (p.sorts != q.sorts)
        validation_error("hom_leq: tuples have different sort profiles");
    HomSearch hs(sig, src, dst);
    for (std::size_t i = 0; i < p.elems.size(); ++i) {
        int s = p.sorts[i];
        int& slot = hs.fixed[s][p.elems[i]];
        if (slot >= 0 && slot != q.elems[i])
            return false; // repeated source element forced to two targets
        slot = q.elems[i];
    }
    hs.stop_at_first = true;
    return !hs.search().empty();
}

Context canonical_context(const Signature& sig, const TypedTuple& point) {
    Context ctx;
    for (std::size_t i = 0; i < point.sorts.size(); ++i)
        ctx.vars.emplace_back("x" + std::to_string(i + 1), sig.sorts[point.sorts[i]]);
    return ctx;
}

Formula canonical_query(const Signature& sig, const Structure& m, const TypedTuple& point) {
    // term for each carrier element: the first point position naming it, or a
    // quantified variable
    std::vector<std::vector<Term>> term_of(m.carriers.size());
    std::vector<std::vector<char>> named(m.carriers.size());
    for (std::size_t s = 0; s < m.carriers.size(); ++s) {
        term_of[s].resize(m.carriers[s].size());
        named[s].assign(m.carriers[s].size(), 0);
    }
    std::vector<Formula> conjuncts;
    for (std::size_t i = 0; i < point.elems.size(); ++i) {
        int s = point.sorts[i];
        int e = point.elems[i];
        std::string xi = "x" + std::to_string(i + 1);
        if (named[s][e]) {
            conjuncts.push_back(Formula::equal(term_of[s][e], Term::var(xi)));
        } else {
            named[s][e] = 1;
            term_of[s][e] = Term::var(xi);
        }
    }
    std::vector<std::pair<std::string, std::string>> binders;
    int fresh = 0;
    for (std::size_t s = 0; s < m.carriers.size(); ++s)
        for (std::size_t e = 0; e < m.carriers[s].size(); ++e)
            if (!named[s][e]) {
                std::string v = "y" + std::to_string(++fresh);
                binders.emplace_back(v, sig.sorts[s]);
                term_of[s][e] = Term::var(v);
            }
    for (std::size_t r = 0; r < m.relations.size(); ++r) {
        std::vector<int> arg_sorts;
        for (const auto& srt : sig.relations[r].arity)
            arg_sorts.push_back(sig.sort_index(srt));
        for (const auto& tuple : m.relations[r]) {
            std::vector<Term> ts;
            for (std::size_t i = 0; i < tuple.size(); ++i)
                ts.push_back(term_of[arg_sorts[i]][tuple[i]]);
            conjuncts.push_back(Formula::rel_atom(sig.relations[r].name, std::move(ts)));
        }
    }
    Formula body = Formula::conj(std::move(conjuncts));
    // a point with no atoms still needs a formula in its context
    if (binders.empty() && body == Formula::truth() && !point.elems.empty())
        body = Formula::equal(Term::var("x1"), Term::var("x1"));
    return Formula::exists(std::move(binders), std::move(body));
}

std::optional<std::string> partial_iso_violation(const Signature& sig, const Structure& m, const TypedTuple& from,
                                                 const TypedTuple& to) {
    if (from.sorts != to.sorts)
        return "sort profiles differ";
    if (from.elems.size() != to.elems.size())
        return "tuple lengths differ";
    std::vector<std::map<int, int>> fwd(m.carriers.size()), bwd(m.carriers.size());
    for (std::size_t i = 0; i < from.elems.size(); ++i) {
        int s = from.sorts[i];
        auto [it, fresh] = fwd[s].emplace(from.elems[i], to.elems[i]);
        if (!fresh && it->second != to.elems[i])
            return "not a function: " + m.carriers[s][from.elems[i]] + " has two images";
        auto [jt, fresh2] = bwd[s].emplace(to.elems[i], from.elems[i]);
        if (!fresh2 && jt->second != from.elems[i])
            return "not injective at " + m.carriers[s][to.elems[i]];
    }
    for (std::size_t r = 0; r < m.relations.size(); ++r) {
        std::vector<int> arg_sorts;
        for (const auto& srt : sig.relations[r].arity)
            arg_sorts.push_back(sig.sort_index(srt));
        for (const auto& tuple : m.relations[r]) {
            auto describe = [&](const char* what) {
                std::vector<std::string> names;
                for (std::size_t i = 0; i < tuple.size(); ++i)
                    names.push_back(m.carriers[arg_sorts[i]][tuple[i]]);
                return "atom " + sig.relations[r].name + "(" + join(names, ",") + ") not " + what;
            };
            bool in_domain = true;
            std::vector<int> image(tuple.size());
            for (std::size_t i = 0; i < tuple.size() && in_domain; ++i) {
                auto it = fwd[arg_sorts[i]].find(tuple[i]);
                if (it == fwd[arg_sorts[i]].end())
                    in_domain = false;
                else
                    image[i] = it->second;
            }
            if (in_domain && !m.relations[r].count(image))
                return describe("preserved");
            bool in_range = true;
            std::vector<int> preimage(tuple.size());
            for (std::size_t i = 0; i < tuple.size() && in_range; ++i) {
                auto it = bwd[arg_sorts[i]].find(tuple[i]);
                if (it == bwd[arg_sorts[i]].end())
                    in_range = false;
                else
                    preimage[i] = it->second;
            }
            if (in_range && !m.relations[r].count(preimage))
                return describe("reflected");
        }
    }
    return std::nullopt;
}

std::optional<Morphism> extend_partial_iso(const Signature& sig, const Structure& m, const TypedTuple& from,
                                           const TypedTuple& to) {
    if (auto violation = partial_iso_violation(sig, m, from, to))
        validation_error("not a partial isomorphism: " + *violation);
    HomSearch hs(sig, m, m);
    hs.injective = true;
    for (std::size_t i = 0; i < from.elems.size(); ++i)
        hs.fixed[from.sorts[i]][from.elems[i]] = to.elems[i];
    std::vector<Morphism> all = hs.search();
    for (auto& h : all)
        if (is_isomorphism(sig, m, m, h))
            return h;
    return std::nullopt;
}

} // namespace mgt
