#include "elimination.hpp"

#include "util.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace mgt {

HomCache::HomCache(const Groupoid& g) : g_(g) {
    homs_.resize(g.objects.size());
    for (std::size_t i = 0; i < g.objects.size(); ++i) {
        homs_[i].resize(g.objects.size());
        for (std::size_t j = 0; j < g.objects.size(); ++j)
            homs_[i][j] = enumerate_homs(g.sig, g.objects[i], g.objects[j]);
    }
}

bool HomCache::leq(const std::vector<int>& sorts, const PointedStructure& p, const PointedStructure& q) const {
    if (p.object == q.object && p.tuple == q.tuple)
        return true;
    for (const auto& h : homs_[p.object][q.object])
        if (h.apply(sorts, p.tuple) == q.tuple)
            return true;
    return false;
}

namespace {

// Is the set up-closed under hom images?  Returns a violating (p, image)
// pair otherwise.
std::optional<ElimWitness> up_closure_violation(const HomCache& cache, const std::vector<int>& sorts,
                                                const DefinableSet& d) {
    const Groupoid& g = cache.groupoid();
    for (const auto& p : d.members)
        for (std::size_t dst = 0; dst < g.objects.size(); ++dst)
            for (const auto& h : cache.homs(p.object, int(dst))) {
                PointedStructure q;
                q.object = int(dst);
                q.tuple = h.apply(sorts, p.tuple);
                if (!d.members.count(q))
                    return ElimWitness{p, q};
            }
    return std::nullopt;
}

// Representatives of the hom-minimal classes of d, in deterministic order.
std::vector<PointedStructure> minimal_members(const HomCache& cache, const std::vector<int>& sorts,
                                              const DefinableSet& d) {
    std::vector<PointedStructure> members(d.members.begin(), d.members.end());
    // image sets within d
    std::vector<std::set<std::size_t>> above(members.size());
    std::map<PointedStructure, std::size_t> index;
    for (std::size_t i = 0; i < members.size(); ++i)
        index[members[i]] = i;
    const Groupoid& g = cache.groupoid();
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t dst = 0; dst < g.objects.size(); ++dst)
            for (const auto& h : cache.homs(members[i].object, int(dst))) {
                PointedStructure q;
                q.object = int(dst);
                q.tuple = h.apply(sorts, members[i].tuple);
                auto it = index.find(q);
                if (it != index.end())
                    above[i].insert(it->second);
            }
    auto leq = [&](std::size_t i, std::size_t j) { return i == j || above[i].count(j) > 0; };
    std::vector<PointedStructure> reps;
    std::vector<std::size_t> rep_ix;
    for (std::size_t i = 0; i < members.size(); ++i) {
        bool minimal = true;
        for (std::size_t j = 0; j < members.size() && minimal; ++j)
            if (leq(j, i) && !leq(i, j))
                minimal = false;
        if (!minimal)
            continue;
        bool duplicate = false;
        for (std::size_t r : rep_ix)
            if (leq(r, i) && leq(i, r))
                duplicate = true;
        if (!duplicate) {
            reps.push_back(members[i]);
            rep_ix.push_back(i);
        }
    }
    return reps;
}

Formula synthesize_formula(const Groupoid& g, const HomCache& cache, const std::vector<int>& sorts,
                           const DefinableSet& d) {
    if (d.members.empty())
        return Formula::falsity();
    // canonical queries speak about x1..xk; rename to the context's variables
    std::map<std::string, Term> renaming;
    for (std::size_t i = 0; i < d.ctx.vars.size(); ++i) {
        std::string xi = "x" + std::to_string(i + 1);
        if (d.ctx.vars[i].first != xi)
            renaming[xi] = Term::var(d.ctx.vars[i].first);
    }
    std::vector<Formula> disjuncts;
    for (const auto& rep : minimal_members(cache, sorts, d)) {
        TypedTuple point{sorts, rep.tuple};
        Formula q = canonical_query(g.sig, g.objects[rep.object], point);
        disjuncts.push_back(renaming.empty() ? std::move(q) : substitute(q, renaming));
    }
    return Formula::disj(std::move(disjuncts));
}

std::vector<std::string> sorted_tuple(const Indexing& ix, std::vector<std::string> tuple) {
    std::sort(tuple.begin(), tuple.end(), [&](const std::string& a, const std::string& b) {
        return ix.param_pos.at(a) < ix.param_pos.at(b);
    });
    return tuple;
}

} // namespace

TupleEntry eliminates_at_tuple(const Groupoid& g, const Indexing& ix, const HomCache& cache,
                               const std::vector<std::string>& tuple, bool verify_extension) {
    TupleEntry entry;
    entry.tuple = tuple;
    DefinableSet seed = params_definable(g, ix, tuple);
    if (seed.members.empty())
        validation_error("tuple is never interpreted in any object: (" + join(tuple, ",") + ")");
    entry.formula_ctx = seed.ctx;
    DefinableSet orb = orbit(g, seed);
    entry.orbit_size = orb.members.size();
    std::vector<int> sorts = context_sorts(g.sig, seed.ctx);

    if (auto violation = up_closure_violation(cache, sorts, orb)) {
        entry.eliminated = false;
        entry.witness = std::move(violation);
        return entry;
    }
    entry.eliminated = true;
    entry.formula = synthesize_formula(g, cache, sorts, orb);
    if (verify_extension) {
        DefinableSet check = definable(g, *entry.formula, seed.ctx);
        if (check.members != orb.members)
            validation_error("internal: synthesized formula does not match the orbit for (" +
                             join(tuple, ",") + ")");
    }
    return entry;
}

ElimVerdict eliminates_parameters(const Groupoid& g, const Indexing& ix, int max_tuple_len,
                                  bool verify_extensions) {
    if (max_tuple_len < 1)
        validation_error("eliminates_parameters: max tuple length must be at least 1");
    HomCache cache(g);
    ElimVerdict verdict;
    verdict.max_tuple_len = max_tuple_len;

    // canonical tuples (sorted by parameter position, duplicates kept) that
    // are co-interpreted in at least one object
    std::set<std::vector<std::string>> todo;
    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        std::vector<std::string> interpreted;
        for (std::size_t s = 0; s < ix.parameters.size(); ++s)
            for (std::size_t p = 0; p < ix.parameters[s].size(); ++p)
                if (ix.interprets(int(o), int(s), int(p)))
                    interpreted.push_back(ix.parameters[s][p]);
        interpreted = sorted_tuple(ix, std::move(interpreted));
        // multisets of length 1..max over `interpreted`
        std::vector<std::string> cur;
        auto rec = [&](auto&& self, std::size_t start) -> void {
            if (!cur.empty())
                todo.insert(cur);
            if (int(cur.size()) == max_tuple_len)
                return;
            for (std::size_t i = start; i < interpreted.size(); ++i) {
                cur.push_back(interpreted[i]);
                self(self, i); // duplicates kept: revisit the same parameter
                cur.pop_back();
            }
        };
        rec(rec, 0);
    }

    // canonical tuples never co-interpreted have an empty seed, orbit
    // [[false]], and are trivially eliminated; count them instead of listing
    std::size_t all_params = 0;
    for (const auto& ps : ix.parameters)
        all_params += ps.size();
    std::size_t total_tuples = 0;
    for (int k = 1; k <= max_tuple_len; ++k) {
        // multisets of size k over all parameters
        std::size_t count = 1;
        for (int i = 0; i < k; ++i)
            count = count * (all_params + i) / (i + 1);
        total_tuples += count;
    }
    verdict.empty_tuples = total_tuples - todo.size();

    // orbit-level memoisation: tuples in the same arrow-orbit share a verdict
    std::map<std::set<PointedStructure>, std::pair<bool, std::optional<Formula>>> memo;
    std::map<std::set<PointedStructure>, std::optional<ElimWitness>> memo_witness;

    for (const auto& tuple : todo) {
        TupleEntry entry;
        entry.tuple = tuple;
        DefinableSet seed = params_definable(g, ix, tuple);
        if (seed.members.empty()) {
            ++verdict.empty_tuples;
            continue;
        }
        entry.formula_ctx = seed.ctx;
        DefinableSet orb = orbit(g, seed);
        entry.orbit_size = orb.members.size();
        std::vector<int> sorts = context_sorts(g.sig, seed.ctx);

        auto it = memo.find(orb.members);
        if (it != memo.end()) {
            entry.eliminated = it->second.first;
            entry.formula = it->second.second;
            entry.witness = memo_witness[orb.members];
        } else if (auto violation = up_closure_violation(cache, sorts, orb)) {
            entry.eliminated = false;
            entry.witness = std::move(violation);
            memo[orb.members] = {false, std::nullopt};
            memo_witness[orb.members] = entry.witness;
        } else {
            entry.eliminated = true;
            entry.formula = synthesize_formula(g, cache, sorts, orb);
            if (verify_extensions) {
                DefinableSet check = definable(g, *entry.formula, seed.ctx);
                if (check.members != orb.members)
                    validation_error("internal: synthesized formula does not match the orbit for (" +
                                     join(tuple, ",") + ")");
            }
            memo[orb.members] = {true, entry.formula};
            memo_witness[orb.members] = std::nullopt;
        }
        verdict.overall = verdict.overall && entry.eliminated;
        verdict.entries.push_back(std::move(entry));
    }
    return verdict;
}

std::optional<Formula> is_pf_definable(const Groupoid& g, const DefinableSet& d) {
    HomCache cache(g);
    std::vector<int> sorts = context_sorts(g.sig, d.ctx);
    if (up_closure_violation(cache, sorts, d))
        return std::nullopt;
    return synthesize_formula(g, cache, sorts, d);
}

// ---------------------------------------------------------------------------
// Conservativity

namespace {

std::string render_structure(const Signature& sig, const Structure& m) {
    std::string out = "{";
    for (std::size_t s = 0; s < sig.sorts.size(); ++s) {
        if (s)
            out += "; ";
        out += sig.sorts[s] + "=[" + join(m.carriers[s], ",") + "]";
    }
    for (std::size_t r = 0; r < sig.relations.size(); ++r) {
        out += "; " + sig.relations[r].name + "={";
        bool first = true;
        std::vector<int> arg_sorts;
        for (const auto& srt : sig.relations[r].arity)
            arg_sorts.push_back(sig.sort_index(srt));
        for (const auto& tuple : m.relations[r]) {
            if (!first)
                out += ",";
            first = false;
            std::vector<std::string> names;
            for (std::size_t i = 0; i < tuple.size(); ++i)
                names.push_back(m.carriers[arg_sorts[i]][tuple[i]]);
            out += "(" + join(names, ",") + ")";
        }
        out += "}";
    }
    return out + "}";
}

} // namespace

ConservativityReport conservative_at_level(const Groupoid& g, const Theory& t, const PoolOptions& pool,
                                           int size_bound, int scheme_bound) {
    ConservativityReport report;
    report.size_bound = size_bound;

    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        TheoryCheck check = check_theory(g.objects[o], t, scheme_bound);
        report.schemes_inconclusive |= check.schemes_truncated;
        if (!check.ok) {
            report.objects_satisfy_theory = false;
            report.failing_objects.push_back(g.objects[o].id);
        }
    }
    if (!report.objects_satisfy_theory)
        return report;

    std::vector<Structure> models;
    for (auto& m : enumerate_structures(t.signature, size_bound)) {
        TheoryCheck check = check_theory(m, t, scheme_bound);
        report.schemes_inconclusive |= check.schemes_truncated;
        if (check.ok)
            models.push_back(std::move(m));
    }
    report.models_checked = models.size();

    for (const Context& ctx : context_pool(t.signature, pool.max_context_len)) {
        // sentence containments over a family of nonempty models say nothing
        // about the empty model and would fail against it vacuously; the
        // conservativity pool starts at one variable
        if (ctx.empty())
            continue;
        std::vector<Formula> formulas = formula_pool(t.signature, ctx, pool);
        // groupoid extensions
        std::vector<DefinableSet> ext;
        for (const auto& f : formulas)
            ext.push_back(definable(g, f, ctx));
        // containments over the groupoid
        std::vector<std::pair<std::size_t, std::size_t>> entailments;
        for (std::size_t i = 0; i < formulas.size(); ++i)
            for (std::size_t j = 0; j < formulas.size(); ++j)
                if (i != j && std::includes(ext[j].members.begin(), ext[j].members.end(),
                                            ext[i].members.begin(), ext[i].members.end()))
                    entailments.emplace_back(i, j);
        report.entailments_checked += entailments.size();

        for (const auto& model : models) {
            // satisfying sets within this model, computed once per formula
            std::vector<std::set<std::vector<int>>> sat(formulas.size());
            for (std::size_t i = 0; i < formulas.size(); ++i) {
                auto rows = satisfying_assignments(t.signature, formulas[i], ctx, model);
                sat[i] = {rows.begin(), rows.end()};
            }
            for (auto [i, j] : entailments) {
                if (!std::includes(sat[j].begin(), sat[j].end(), sat[i].begin(), sat[i].end())) {
                    std::vector<int> bad;
                    for (const auto& row : sat[i])
                        if (!sat[j].count(row)) {
                            bad = row;
                            break;
                        }
                    report.conservative = false;
                    Counterexample ce;
                    ce.phi = print_formula(formulas[i]);
                    ce.psi = print_formula(formulas[j]);
                    ce.context = print_context(ctx);
                    ce.model = render_structure(t.signature, model);
                    std::vector<int> sorts = context_sorts(t.signature, ctx);
                    for (std::size_t k = 0; k < bad.size(); ++k)
                        ce.tuple.push_back(model.carriers[sorts[k]][bad[k]]);
                    report.counterexample = std::move(ce);
                    return report;
                }
            }
        }
    }
    return report;
}

} // namespace mgt
