#include "topology.hpp"

#include "util.hpp"

#include <algorithm>
#include <map>

namespace mgt {

namespace {

// objects interpreting every parameter of f and satisfying it as a sentence
std::set<int> sentence_extension(const Groupoid& g, const Indexing& ix, const Formula& f) {
    std::set<int> out;
    Context empty;
    std::vector<std::string> params = f.free_params();
    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        bool interpreted = true;
        for (const auto& p : params) {
            auto pos = ix.find(p);
            if (!pos || !ix.interprets(int(o), pos->first, pos->second)) {
                interpreted = false;
                break;
            }
        }
        if (!interpreted)
            continue;
        ParamEnv env = ix.param_env(g, int(o));
        if (eval(g.sig, f, empty, g.objects[o], {}, &env))
            out.insert(int(o));
    }
    return out;
}

void merge_open(std::map<std::set<int>, std::vector<std::string>>& acc, const std::set<int>& ext,
                std::string sentence) {
    auto& sentences = acc[ext];
    if (std::find(sentences.begin(), sentences.end(), sentence) == sentences.end())
        sentences.push_back(std::move(sentence));
}

} // namespace

ObjectBasis object_basis(const Groupoid& g, const Indexing& ix, int max_params, int quant_bound,
                         int conj_rounds) {
    ObjectBasis basis;
    basis.max_params = max_params;
    basis.quant_bound = quant_bound;
    basis.conj_rounds = conj_rounds;

    // all parameters, flattened with their sorts
    std::vector<std::pair<std::string, int>> params; // (name, sort)
    for (std::size_t s = 0; s < ix.parameters.size(); ++s)
        for (const auto& p : ix.parameters[s])
            params.emplace_back(p, int(s));

    std::vector<std::pair<Formula, std::set<int>>> atomic;
    auto add = [&](const Formula& f) { atomic.emplace_back(f, sentence_extension(g, ix, f)); };

    // equalities m = m' between same-sorted parameters (including m = m,
    // whose extension is "m is interpreted")
    if (max_params >= 1)
        for (const auto& [p, ps] : params)
            add(Formula::equal(Term::param(p), Term::param(p)));
    if (max_params >= 2)
        for (const auto& [p, ps] : params)
            for (const auto& [q, qs] : params)
                if (ps == qs && p < q)
                    add(Formula::equal(Term::param(p), Term::param(q)));

    // relation atoms over parameters and existential closures: every slot is
    // a parameter or one of quant_bound shared variables
    for (const auto& rel : g.sig.relations) {
        std::vector<int> arg_sorts;
        for (const auto& srt : rel.arity)
            arg_sorts.push_back(g.sig.sort_index(srt));
        // slot choices: 0..params-1 = parameter, params.size()+v = variable v
        std::vector<std::size_t> slots(arg_sorts.size(), 0);
        std::vector<std::vector<std::size_t>> choices(arg_sorts.size());
        for (std::size_t i = 0; i < arg_sorts.size(); ++i) {
            for (std::size_t p = 0; p < params.size(); ++p)
                if (params[p].second == arg_sorts[i])
                    choices[i].push_back(p);
            for (int v = 0; v < quant_bound; ++v)
                choices[i].push_back(params.size() + std::size_t(v));
        }
        std::vector<std::size_t> pick(arg_sorts.size(), 0);
        bool any_empty = false;
        for (const auto& c : choices)
            if (c.empty())
                any_empty = true;
        if (any_empty)
            continue;
        while (true) {
            int used_params = 0;
            std::vector<Term> terms;
            std::vector<std::pair<std::string, std::string>> binders;
            std::map<int, std::string> var_sort; // variable id -> sort (must be consistent)
            bool ok = true;
            for (std::size_t i = 0; i < arg_sorts.size(); ++i) {
                std::size_t choice = choices[i][pick[i]];
                if (choice < params.size()) {
                    terms.push_back(Term::param(params[choice].first));
                    ++used_params;
                } else {
                    int v = int(choice - params.size());
                    std::string name = "y" + std::to_string(v + 1);
                    std::string sort = g.sig.sorts[arg_sorts[i]];
                    auto it = var_sort.find(v);
                    if (it == var_sort.end()) {
                        var_sort[v] = sort;
                        binders.emplace_back(name, sort);
                    } else if (it->second != sort) {
                        ok = false;
                    }
                    terms.push_back(Term::var(name));
                }
            }
            if (ok && used_params <= max_params) {
                Formula atom = Formula::rel_atom(rel.name, terms);
                add(Formula::exists(binders, atom));
            }
            std::size_t i = pick.size();
            bool done = i == 0;
            while (i > 0) {
                --i;
                if (++pick[i] < choices[i].size())
                    break;
                pick[i] = 0;
                if (i == 0)
                    done = true;
            }
            if (done)
                break;
        }
    }

    // merge by extension, then close under pairwise intersections
    std::map<std::set<int>, std::vector<std::string>> acc;
    for (const auto& [f, ext] : atomic)
        merge_open(acc, ext, print_formula(f));
    for (int round = 0; round < conj_rounds; ++round) {
        std::map<std::set<int>, std::vector<std::string>> next = acc;
        for (const auto& [e1, s1] : acc)
            for (const auto& [e2, s2] : acc) {
                if (e1 == e2)
                    continue;
                std::set<int> meet;
                std::set_intersection(e1.begin(), e1.end(), e2.begin(), e2.end(),
                                      std::inserter(meet, meet.begin()));
                merge_open(next, meet, s1.front() + " & " + s2.front());
            }
        acc = std::move(next);
    }

    for (auto& [ext, sentences] : acc) {
        ObjectOpen open;
        open.extension = ext;
        open.sentences = std::move(sentences);
        basis.opens.push_back(std::move(open));
    }
    return basis;
}

ArrowBasis arrow_basis(const Groupoid& g, const Indexing& ix, const ArrowBasisOptions& opt) {
    ArrowBasis basis;
    basis.options = opt;

    std::vector<std::pair<std::string, int>> params;
    for (std::size_t s = 0; s < ix.parameters.size(); ++s)
        for (const auto& p : ix.parameters[s])
            params.emplace_back(p, int(s));

    // mapped tuples b |-> c of length 0..max_map_len over same-sorted pairs
    struct Mapping {
        std::vector<std::pair<std::size_t, std::size_t>> pairs; // param indices
    };
    std::vector<Mapping> mappings = {{}};
    std::vector<Mapping> frontier = {{}};
    for (int len = 0; len < opt.max_map_len; ++len) {
        std::vector<Mapping> next;
        for (const auto& m : frontier)
            for (std::size_t b = 0; b < params.size(); ++b)
                for (std::size_t c = 0; c < params.size(); ++c) {
                    if (params[b].second != params[c].second)
                        continue;
                    // keep tuples ordered to avoid permuted duplicates
                    if (!m.pairs.empty() && m.pairs.back().first > b)
                        continue;
                    Mapping ext = m;
                    ext.pairs.emplace_back(b, c);
                    next.push_back(std::move(ext));
                }
        if (mappings.size() + next.size() > opt.cap)
            bound_error("arrow_basis: open cap exceeded while enumerating mappings");
        mappings.insert(mappings.end(), next.begin(), next.end());
        frontier = std::move(next);
    }

    // side sentences: true plus, optionally, the atomic parameter sentences
    std::vector<std::pair<std::string, std::set<int>>> sides;
    {
        std::set<int> all;
        for (std::size_t o = 0; o < g.objects.size(); ++o)
            all.insert(int(o));
        sides.emplace_back("true", std::move(all));
    }
    if (opt.side_sentences) {
        ObjectBasis obj = object_basis(g, ix, 2, 0, 0);
        for (const auto& open : obj.opens)
            sides.emplace_back(open.sentences.front(), open.extension);
    }

    if (sides.size() * sides.size() * mappings.size() > opt.cap)
        bound_error("arrow_basis: open cap exceeded");

    for (const auto& [phi, phi_ext] : sides)
        for (const auto& mapping : mappings)
            for (const auto& [psi, psi_ext] : sides) {
                ArrowOpen open;
                open.source_sentence = phi;
                open.target_sentence = psi;
                for (auto [b, c] : mapping.pairs)
                    open.mapping.emplace_back(params[b].first, params[c].first);
                for (std::size_t a = 0; a < g.arrows.size(); ++a) {
                    const Morphism& arrow = g.arrows[a];
                    int src = g.object_of(arrow.src);
                    int dst = g.object_of(arrow.dst);
                    if (!phi_ext.count(src) || !psi_ext.count(dst))
                        continue;
                    bool match = true;
                    for (auto [b, c] : mapping.pairs) {
                        int s = params[b].second;
                        auto bp = ix.find(params[b].first);
                        auto cp = ix.find(params[c].first);
                        int be = ix.interp[src][s][bp->second];
                        int ce = ix.interp[dst][s][cp->second];
                        if (be < 0 || ce < 0 || arrow.map[s][be] != ce) {
                            match = false;
                            break;
                        }
                    }
                    if (match)
                        open.extension.insert(int(a));
                }
                basis.opens.push_back(std::move(open));
            }
    return basis;
}

namespace {

std::string describe_arrow_open(const ArrowOpen& open) {
    std::vector<std::string> maps;
    for (const auto& [b, c] : open.mapping)
        maps.push_back(b + "->" + c);
    return "[" + open.source_sentence + " | " + join(maps, ",") + " | " + open.target_sentence + "]";
}

} // namespace

OpenMapReport is_open_map_t(const Groupoid& g, const ObjectBasis& objects, const ArrowBasis& arrows) {
    OpenMapReport report;
    for (const auto& open : arrows.opens) {
        std::set<int> image;
        for (int a : open.extension)
            image.insert(g.object_of(g.arrows[a].dst));
        for (int n : image) {
            bool covered = false;
            for (const auto& obj_open : objects.opens)
                if (obj_open.extension.count(n) &&
                    std::includes(image.begin(), image.end(), obj_open.extension.begin(),
                                  obj_open.extension.end())) {
                    covered = true;
                    break;
                }
            if (!covered) {
                report.open = false;
                report.failing_open = describe_arrow_open(open);
                report.failing_object = g.objects[n].id;
                return report;
            }
        }
    }
    return report;
}

bool is_T0(const Groupoid& g, const ObjectBasis& basis) {
    for (std::size_t i = 0; i < g.objects.size(); ++i)
        for (std::size_t j = i + 1; j < g.objects.size(); ++j) {
            bool separated = false;
            for (const auto& open : basis.opens) {
                if (open.extension.count(int(i)) != open.extension.count(int(j))) {
                    separated = true;
                    break;
                }
            }
            if (!separated)
                return false;
        }
    return true;
}

StableOpenLattice stable_open_lattice(const Groupoid& g, const Indexing& ix, const Context& ctx,
                                      std::size_t cap, bool build_family) {
    StableOpenLattice out;
    out.ctx = ctx;
    std::vector<int> sorts = context_sorts(g.sig, ctx);

    // basic open per pointed object: [[x = a /\ parameter diagram of O]];
    // its members are the tuples matching a in every object that interprets
    // O's parameters compatibly, and its orbit is a stable open
    std::set<std::set<PointedStructure>> seen;
    std::vector<DefinableSet> basis;
    {
        DefinableSet empty;
        empty.ctx = ctx;
        seen.insert(empty.members);
        basis.push_back(std::move(empty));
    }

    for (std::size_t o = 0; o < g.objects.size(); ++o) {
        // parameters interpreted in O, with their local elements
        std::vector<std::tuple<int, int, int>> ps; // (sort, param, elem)
        for (std::size_t s = 0; s < ix.parameters.size(); ++s)
            for (std::size_t p = 0; p < ix.parameters[s].size(); ++p)
                if (ix.interp[o][s][p] >= 0)
                    ps.emplace_back(int(s), int(p), ix.interp[o][s][p]);
        // first parameter naming each element
        std::vector<std::map<int, std::string>> name_of(g.sig.sorts.size());
        for (auto [s, p, e] : ps)
            if (!name_of[s].count(e))
                name_of[s][e] = ix.parameters[s][p];

        // members of the basic open for a point a: objects interpreting all
        // of O's parameters with the same equalities and relational atoms
        std::vector<int> compatible;
        std::vector<std::map<std::pair<int, int>, int>> local(g.objects.size()); // (sort,param)->elem
        for (std::size_t n = 0; n < g.objects.size(); ++n) {
            bool ok = true;
            for (auto [s, p, e] : ps) {
                int en = ix.interp[n][s][p];
                if (en < 0) {
                    ok = false;
                    break;
                }
                local[n][{s, p}] = en;
            }
            if (!ok)
                continue;
            // equalities between O's parameters must transfer
            for (std::size_t i = 0; i < ps.size() && ok; ++i)
                for (std::size_t j = i + 1; j < ps.size() && ok; ++j) {
                    auto [si, pi, ei] = ps[i];
                    auto [sj, pj, ej] = ps[j];
                    if (si == sj && ei == ej && local[n][{si, pi}] != local[n][{sj, pj}])
                        ok = false;
                }
            // relational diagram of O must hold at the transferred parameters
            for (std::size_t r = 0; r < g.sig.relations.size() && ok; ++r) {
                std::vector<int> arg_sorts;
                for (const auto& srt : g.sig.relations[r].arity)
                    arg_sorts.push_back(g.sig.sort_index(srt));
                for (const auto& tuple : g.objects[o].relations[r]) {
                    std::vector<int> image(tuple.size());
                    bool total = true;
                    for (std::size_t i = 0; i < tuple.size(); ++i) {
                        // the first parameter naming this element
                        auto it = name_of[arg_sorts[i]].find(tuple[i]);
                        if (it == name_of[arg_sorts[i]].end()) {
                            total = false;
                            break;
                        }
                        auto pos = ix.find(it->second);
                        image[i] = local[n][{pos->first, pos->second}];
                    }
                    if (total && !g.objects[n].relations[r].count(image)) {
                        ok = false;
                        break;
                    }
                }
            }
            if (ok)
                compatible.push_back(int(n));
        }

        // enumerate points a over O and collect the basic open's members
        std::vector<std::size_t> sizes;
        for (int s : sorts)
            sizes.push_back(g.objects[o].carriers[s].size());
        bool any_empty = false;
        for (auto sz : sizes)
            if (sz == 0)
                any_empty = true;
        if (any_empty)
            continue;
        std::vector<int> point(sorts.size(), 0);
        while (true) {
            DefinableSet open;
            open.ctx = ctx;
            for (int n : compatible) {
                PointedStructure q;
                q.object = n;
                bool ok = true;
                for (std::size_t i = 0; i < sorts.size(); ++i) {
                    auto it = name_of[sorts[i]].find(point[i]);
                    if (it == name_of[sorts[i]].end()) {
                        ok = false;
                        break;
                    }
                    auto pos = ix.find(it->second);
                    q.tuple.push_back(ix.interp[n][pos->first][pos->second]);
                }
                if (ok)
                    open.members.insert(std::move(q));
            }
            DefinableSet stable = orbit(g, open);
            if (seen.insert(stable.members).second)
                basis.push_back(std::move(stable));

            std::size_t k = point.size();
            bool done = k == 0;
            while (k > 0) {
                --k;
                if (++point[k] < int(sizes[k]))
                    break;
                point[k] = 0;
                if (k == 0)
                    done = true;
            }
            if (done)
                break;
        }
        if (sorts.empty())
            ; // the empty context is handled by the single empty point above
    }

    int bound = 0;
    for (const auto& m : g.objects)
        bound = std::max(bound, int(m.carrier_total()));
    out.param_bound = bound;
    std::sort(basis.begin(), basis.end(),
              [](const DefinableSet& a, const DefinableSet& b) { return a.members < b.members; });
    out.basis = std::move(basis);
    if (!build_family)
        return out;

    // union closure
    std::set<std::set<PointedStructure>> family(seen.begin(), seen.end());
    std::vector<std::set<PointedStructure>> work(seen.begin(), seen.end());
    while (!work.empty()) {
        auto cur = std::move(work.back());
        work.pop_back();
        for (const auto& b : out.basis) {
            std::set<PointedStructure> join = cur;
            join.insert(b.members.begin(), b.members.end());
            if (family.size() >= cap) {
                out.truncated = true;
                break;
            }
            if (family.insert(join).second)
                work.push_back(std::move(join));
        }
        if (out.truncated)
            break;
    }
    for (auto& members : family) {
        DefinableSet d;
        d.ctx = ctx;
        d.members = members;
        out.family.push_back(std::move(d));
    }
    return out;
}

bool families_equal(const std::vector<DefinableSet>& basis_a, const std::vector<DefinableSet>& basis_b) {
    for (const auto& a : basis_a)
        if (!family_contains(basis_b, a))
            return false;
    for (const auto& b : basis_b)
        if (!family_contains(basis_a, b))
            return false;
    return true;
}

std::vector<Morphism> hom_space_closure(const Groupoid& g, const Indexing& ix, int m, int n, int tuple_bound) {
    if (m < 0 || m >= int(g.objects.size()) || n < 0 || n >= int(g.objects.size()))
        validation_error("hom_space_closure: object index out of range");
    // parameters interpreted in m
    std::vector<std::pair<int, int>> interpreted; // (sort, elem)
    for (std::size_t s = 0; s < ix.parameters.size(); ++s)
        for (std::size_t p = 0; p < ix.parameters[s].size(); ++p)
            if (ix.interp[m][s][p] >= 0)
                interpreted.emplace_back(int(s), ix.interp[m][s][p]);
    std::sort(interpreted.begin(), interpreted.end());
    interpreted.erase(std::unique(interpreted.begin(), interpreted.end()), interpreted.end());

    // arrows m -> n
    std::vector<const Morphism*> arrows;
    for (int a : g.arrows_from[m])
        if (g.object_of(g.arrows[a].dst) == n)
            arrows.push_back(&g.arrows[a]);

    // combinations of interpreted elements up to the bound
    std::vector<std::vector<std::pair<int, int>>> combos;
    std::vector<std::pair<int, int>> cur;
    auto rec = [&](auto&& self, std::size_t start) -> void {
        combos.push_back(cur);
        if (int(cur.size()) == tuple_bound)
            return;
        for (std::size_t i = start; i < interpreted.size(); ++i) {
            cur.push_back(interpreted[i]);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);

    std::vector<Morphism> out;
    for (const auto& alpha : enumerate_isos(g.sig, g.objects[m], g.objects[n])) {
        bool in_closure = true;
        for (const auto& combo : combos) {
            bool agreed = false;
            for (const Morphism* gamma : arrows) {
                bool same = true;
                for (auto [s, e] : combo)
                    if (gamma->map[s][e] != alpha.map[s][e]) {
                        same = false;
                        break;
                    }
                if (same) {
                    agreed = true;
                    break;
                }
            }
            if (!agreed) {
                in_closure = false;
                break;
            }
        }
        if (in_closure)
            out.push_back(alpha);
    }
    return out;
}

} // namespace mgt
