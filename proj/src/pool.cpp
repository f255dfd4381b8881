#include "pool.hpp"

#include "util.hpp"

#include <algorithm>

namespace mgt {

std::vector<Formula> atom_pool(const Signature& sig, const Context& ctx) {
    std::vector<Formula> out;
    for (const auto& rel : sig.relations) {
        // all assignments of argument positions to context variables
        std::vector<std::vector<int>> patterns;
        std::vector<int> cur(rel.arity.size(), -1);
        auto rec = [&](auto&& self, std::size_t pos) -> void {
            if (pos == rel.arity.size()) {
                patterns.push_back(cur);
                return;
            }
            for (std::size_t v = 0; v < ctx.vars.size(); ++v)
                if (ctx.vars[v].second == rel.arity[pos]) {
                    cur[pos] = int(v);
                    self(self, pos + 1);
                }
        };
        rec(rec, 0);
        for (const auto& pattern : patterns) {
            std::vector<Term> ts;
            for (int v : pattern)
                ts.push_back(Term::var(ctx.vars[v].first));
            out.push_back(Formula::rel_atom(rel.name, std::move(ts)));
        }
    }
    for (std::size_t i = 0; i < ctx.vars.size(); ++i)
        for (std::size_t j = i + 1; j < ctx.vars.size(); ++j)
            if (ctx.vars[i].second == ctx.vars[j].second)
                out.push_back(Formula::equal(Term::var(ctx.vars[i].first), Term::var(ctx.vars[j].first)));
    return out;
}

namespace {

void subsets_upto(std::size_t n, int max_size, std::vector<std::vector<std::size_t>>& out) {
    std::vector<std::size_t> cur;
    auto rec = [&](auto&& self, std::size_t start) -> void {
        if (!cur.empty())
            out.push_back(cur);
        if (int(cur.size()) == max_size)
            return;
        for (std::size_t i = start; i < n; ++i) {
            cur.push_back(i);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
}

} // namespace

std::vector<Formula> formula_pool(const Signature& sig, const Context& ctx, const PoolOptions& opt) {
    std::vector<Formula> out = {Formula::truth(), Formula::falsity()};
    std::vector<Formula> atoms = atom_pool(sig, ctx);

    std::vector<std::vector<std::size_t>> sel;
    subsets_upto(atoms.size(), opt.max_conj, sel);
    for (const auto& pick : sel) {
        std::vector<Formula> parts;
        for (std::size_t i : pick)
            parts.push_back(atoms[i]);
        out.push_back(Formula::conj(std::move(parts)));
    }
    sel.clear();
    subsets_upto(atoms.size(), opt.max_disj, sel);
    for (const auto& pick : sel) {
        if (pick.size() < 2)
            continue; // singletons already present as conjunctions
        std::vector<Formula> parts;
        for (std::size_t i : pick)
            parts.push_back(atoms[i]);
        out.push_back(Formula::disj(std::move(parts)));
    }

    // existential closures: extend the context, take atom conjunctions that
    // mention every added variable, quantify them
    std::vector<std::vector<int>> profiles = {{}};
    for (int e = 0; e < opt.max_exists; ++e) {
        std::vector<std::vector<int>> next;
        for (const auto& p : profiles)
            for (int s = p.empty() ? 0 : p.back(); s < int(sig.sorts.size()); ++s) {
                auto q = p;
                q.push_back(s);
                next.push_back(q);
            }
        for (const auto& profile : next) {
            Context ext = ctx;
            std::vector<std::pair<std::string, std::string>> binders;
            for (std::size_t i = 0; i < profile.size(); ++i) {
                std::string v = "w" + std::to_string(i + 1);
                ext.vars.emplace_back(v, sig.sorts[profile[i]]);
                binders.emplace_back(v, sig.sorts[profile[i]]);
            }
            std::vector<Formula> ext_atoms = atom_pool(sig, ext);
            std::vector<std::vector<std::size_t>> picks;
            subsets_upto(ext_atoms.size(), opt.max_conj, picks);
            for (const auto& pick : picks) {
                std::vector<Formula> parts;
                std::set<std::string> used;
                for (std::size_t i : pick) {
                    parts.push_back(ext_atoms[i]);
                    for (const auto& t : ext_atoms[i].terms)
                        if (t.kind == Term::Kind::Var)
                            used.insert(t.name);
                }
                bool mentions_all = true;
                for (const auto& [v, s] : binders)
                    if (!used.count(v))
                        mentions_all = false;
                if (!mentions_all)
                    continue;
                out.push_back(Formula::exists(binders, Formula::conj(std::move(parts))));
            }
        }
        profiles = std::move(next);
    }

    // dedupe by alpha-canonical print
    std::vector<Formula> deduped;
    std::set<std::string> seen;
    for (auto& f : out)
        if (seen.insert(print_formula(alpha_canonical(f))).second)
            deduped.push_back(std::move(f));
    return deduped;
}

std::vector<Context> context_pool(const Signature& sig, int max_len) {
    std::vector<Context> out;
    std::vector<std::vector<int>> profiles = {{}};
    out.emplace_back(); // the empty context (sentences)
    for (int len = 1; len <= max_len; ++len) {
        std::vector<std::vector<int>> next;
        for (const auto& p : profiles)
            for (int s = p.empty() ? 0 : p.back(); s < int(sig.sorts.size()); ++s) {
                auto q = p;
                q.push_back(s);
                next.push_back(q);
            }
        for (const auto& profile : next) {
            Context c;
            for (std::size_t i = 0; i < profile.size(); ++i)
                c.vars.emplace_back("x" + std::to_string(i + 1), sig.sorts[profile[i]]);
            out.push_back(std::move(c));
        }
        profiles = std::move(next);
    }
    return out;
}

std::vector<Structure> enumerate_structures(const Signature& sig, int size_bound, std::size_t cap) {
    std::vector<Structure> out;
    std::size_t counter = 0;

    std::vector<int> sizes(sig.sorts.size(), 0);
    while (true) {
        // carriers for this size vector
        Structure base;
        base.carriers.resize(sig.sorts.size());
        for (std::size_t s = 0; s < sig.sorts.size(); ++s)
            for (int e = 0; e < sizes[s]; ++e)
                base.carriers[s].push_back("e" + std::to_string(e));

        // tuple spaces per relation
        std::vector<std::vector<std::vector<int>>> tuple_space(sig.relations.size());
        bool too_big = false;
        for (std::size_t r = 0; r < sig.relations.size(); ++r) {
            std::vector<int> arg_sizes;
            bool empty = false;
            for (const auto& srt : sig.relations[r].arity) {
                int s = sig.sort_index(srt);
                arg_sizes.push_back(sizes[s]);
                if (sizes[s] == 0)
                    empty = true;
            }
            if (!empty) {
                std::vector<int> cur(arg_sizes.size(), 0);
                while (true) {
                    tuple_space[r].push_back(cur);
                    std::size_t k = cur.size();
                    bool done = k == 0;
                    while (k > 0) {
                        --k;
                        if (++cur[k] < arg_sizes[k])
                            break;
                        cur[k] = 0;
                        if (k == 0)
                            done = true;
                    }
                    if (done)
                        break;
                }
            }
            if (tuple_space[r].size() > 24)
                too_big = true;
        }
        if (too_big)
            bound_error("enumerate_structures: relation tuple space too large");

        std::vector<std::size_t> mask(sig.relations.size(), 0);
        while (true) {
            if (++counter > cap)
                bound_error("enumerate_structures: more than " + std::to_string(cap) +
                            " candidate structures");
            Structure m = base;
            m.id = "N" + std::to_string(out.size());
            m.relations.assign(sig.relations.size(), {});
            for (std::size_t r = 0; r < sig.relations.size(); ++r)
                for (std::size_t t = 0; t < tuple_space[r].size(); ++t)
                    if (mask[r] & (std::size_t(1) << t))
                        m.relations[r].insert(tuple_space[r][t]);
            m.finalize(sig);
            out.push_back(std::move(m));

            std::size_t r = sig.relations.size();
            bool done = r == 0;
            while (r > 0) {
                --r;
                if (++mask[r] < (std::size_t(1) << tuple_space[r].size()))
                    break;
                mask[r] = 0;
                if (r == 0)
                    done = true;
            }
            if (done)
                break;
        }

        std::size_t s = sig.sorts.size();
        bool done = s == 0;
        while (s > 0) {
            --s;
            if (++sizes[s] <= size_bound)
                break;
            sizes[s] = 0;
            if (s == 0)
                done = true;
        }
        if (done)
            break;
    }
    return out;
}

} // namespace mgt
