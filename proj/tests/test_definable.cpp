#include <doctest.h>

#include "corpus.hpp"
#include "definable.hpp"
#include "util.hpp"

#include <random>

using namespace mgt;

namespace {

Context vctx(std::initializer_list<const char*> names, const char* sort) {
    Context c;
    for (const char* n : names)
        c.vars.emplace_back(n, sort);
    return c;
}

} // namespace

TEST_CASE("definable of falsity is empty") {
    Groupoid g = corpus::subsets_groupoid(3);
    DefinableSet d = definable(g, Formula::falsity(), vctx({"x"}, "V"));
    CHECK(d.members.empty());
}

TEST_CASE("definable counts over the subsets groupoid") {
    Groupoid g = corpus::subsets_groupoid(3); // subsets of {0..3}
    Context c2 = vctx({"x1", "x2"}, "V");
    Formula neq = parse_formula("Neq(x1, x2)", c2, g.sig);
    DefinableSet d = definable(g, neq, c2);
    // sum over subsets of |M|(|M|-1)
    std::size_t expected = 0;
    for (const auto& m : g.objects)
        expected += m.carriers[0].size() * (m.carriers[0].size() - 1);
    CHECK(d.members.size() == expected);

    // [[exists y. x != y]] = all <n, M> with |M| >= 2, by brute-force projection
    Context c1 = vctx({"x"}, "V");
    Formula ex = parse_formula("exists y. Neq(x, y)", c1, g.sig);
    DefinableSet e = definable(g, ex, c1);
    DefinableSet expected_set;
    expected_set.ctx = c1;
    for (const auto& p : d.members)
        expected_set.members.insert({p.object, {p.tuple[0]}});
    CHECK(e == expected_set);
    for (const auto& p : e.members)
        CHECK(g.objects[p.object].carriers[0].size() >= 2);
}

TEST_CASE("definable rejects parameters") {
    Groupoid g = corpus::subsets_groupoid(2);
    Indexing ix = trivial_indexing(g);
    Context c = vctx({"x"}, "V");
    Formula f = Formula::equal(Term::var("x"), Term::param(ix.parameters[0][0]));
    CHECK_THROWS_AS(definable(g, f, c), Error);
    CHECK_NOTHROW(definable_with_params(g, ix, f, c));
}

TEST_CASE("structural semantics: meets, joins, projections on random formulas") {
    Groupoid g = corpus::subsets_groupoid(2);
    Context c = vctx({"x1", "x2"}, "V");
    std::vector<Formula> pool = {
        parse_formula("Neq(x1, x2)", c, g.sig),
        parse_formula("x1 = x2", c, g.sig),
        parse_formula("exists y. Neq(x1, y) & Neq(x2, y)", c, g.sig),
        Formula::truth(),
        Formula::falsity(),
    };
    std::mt19937 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const Formula& a = pool[rng() % pool.size()];
        const Formula& b = pool[rng() % pool.size()];
        DefinableSet da = definable(g, a, c);
        DefinableSet db = definable(g, b, c);
        DefinableSet dand = definable(g, Formula::conj({a, b}), c);
        DefinableSet dor = definable(g, Formula::disj({a, b}), c);
        std::set<PointedStructure> meet, join;
        std::set_intersection(da.members.begin(), da.members.end(), db.members.begin(), db.members.end(),
                              std::inserter(meet, meet.begin()));
        std::set_union(da.members.begin(), da.members.end(), db.members.begin(), db.members.end(),
                       std::inserter(join, join.begin()));
        CHECK(dand.members == meet);
        CHECK(dor.members == join);
    }

    // projection: [[exists x2. phi]] = projection of [[phi]]
    Context c1 = vctx({"x1"}, "V");
    for (const auto& f : pool) {
        Formula ex = Formula::exists({{"x2", "V"}}, f);
        DefinableSet proj = definable(g, ex, c1);
        DefinableSet whole = definable(g, f, c);
        std::set<PointedStructure> expected;
        for (const auto& p : whole.members)
            expected.insert({p.object, {p.tuple[0]}});
        CHECK(proj.members == expected);
    }
}

TEST_CASE("definable_with_params restricts to interpreting objects") {
    Groupoid g = corpus::subsets_groupoid(3);
    Indexing ix = trivial_indexing(g);
    Context c = vctx({"x"}, "V");

    // x = m for a parameter interpreted in exactly one object
    std::string m = ix.parameters[0][0]; // "S0@0"
    DefinableSet d = definable_with_params(g, ix, Formula::equal(Term::var("x"), Term::param(m)), c);
    CHECK(d.members.size() == 1);

    // shared indexing: [[x = 3]] over objects containing "3" (8 of 15)
    std::vector<std::string> params = {"0", "1", "2", "3"};
    std::vector<std::map<std::string, std::string>> maps(g.objects.size());
    for (std::size_t o = 0; o < g.objects.size(); ++o)
        for (const auto& e : g.objects[o].carriers[0])
            maps[o][e] = e;
    Indexing shared = shared_indexing(g, {params}, maps);
    DefinableSet d3 = definable_with_params(g, shared, Formula::equal(Term::var("x"), Term::param("3")), c);
    CHECK(d3.members.size() == 8);
}

TEST_CASE("params_definable seeds") {
    Groupoid g = corpus::aut_groupoid(corpus::ring_signature(), corpus::gf4());
    Indexing ix = trivial_indexing(g);
    DefinableSet d = params_definable(g, ix, {"GF4@a"});
    REQUIRE(d.members.size() == 1);
    CHECK(d.members.begin()->tuple[0] == g.objects[0].elem(0, "a"));
    CHECK_THROWS_AS(params_definable(g, ix, {"nope"}), Error);
}

TEST_CASE("act moves points along arrows") {
    Groupoid g = corpus::aut_groupoid(corpus::ring_signature(), corpus::gf4());
    Context c = vctx({"x"}, "R");
    const Structure& f4 = g.objects[0];
    int a = f4.elem(0, "a"), b = f4.elem(0, "b");

    const Morphism* frob = nullptr;
    const Morphism* id = nullptr;
    for (const auto& arrow : g.arrows)
        (arrow.map[0][a] == a ? id : frob) = &arrow;
    REQUIRE(frob != nullptr);
    REQUIRE(id != nullptr);

    PointedStructure p{0, {a}};
    CHECK(act(g, c, p, *id) == p);
    PointedStructure q = act(g, c, p, *frob);
    CHECK(q.tuple[0] == b);

    // act . act agrees with the composite arrow
    PointedStructure r = act(g, c, q, *frob);
    CHECK(r == act(g, c, p, compose(*frob, *frob)));
}

TEST_CASE("orbit of the empty set is empty, orbit in GF(4)") {
    Groupoid g = corpus::aut_groupoid(corpus::ring_signature(), corpus::gf4());
    Indexing ix = trivial_indexing(g);
    Context c = vctx({"x"}, "R");

    DefinableSet empty;
    empty.ctx = c;
    CHECK(orbit(g, empty).members.empty());

    DefinableSet seed = params_definable(g, ix, {"GF4@a"});
    DefinableSet orb = orbit(g, seed);
    CHECK(orb.members.size() == 2);
    CHECK(orb.members.count({0, {g.objects[0].elem(0, "a")}}) == 1);
    CHECK(orb.members.count({0, {g.objects[0].elem(0, "b")}}) == 1);

    CHECK(!is_stable(g, seed));
    CHECK(is_stable(g, orb));
}

TEST_CASE("orbit is idempotent, monotone, and least among stable supersets") {
    Groupoid g = corpus::subsets_groupoid(2);
    Context c = vctx({"x"}, "V");
    std::mt19937 rng(99);
    DefinableSet full = full_definable(g, c);
    std::vector<PointedStructure> all(full.members.begin(), full.members.end());
    for (int trial = 0; trial < 20; ++trial) {
        DefinableSet d;
        d.ctx = c;
        for (const auto& p : all)
            if (rng() % 3 == 0)
                d.members.insert(p);
        DefinableSet o1 = orbit(g, d);
        CHECK(orbit(g, o1) == o1);
        CHECK(std::includes(o1.members.begin(), o1.members.end(), d.members.begin(), d.members.end()));
        CHECK(is_stable(g, o1));
        // least: every stable superset of d contains o1; sample a few
        DefinableSet bigger = o1;
        for (const auto& p : all)
            if (rng() % 2 == 0)
                bigger.members.insert(p);
        DefinableSet stable_bigger = orbit(g, bigger);
        CHECK(std::includes(stable_bigger.members.begin(), stable_bigger.members.end(), o1.members.begin(),
                            o1.members.end()));
    }
}

TEST_CASE("parameter-free definables are stable") {
    Groupoid g = corpus::subsets_groupoid(2);
    Context c = vctx({"x1", "x2"}, "V");
    std::vector<Formula> pool = {
        parse_formula("Neq(x1, x2)", c, g.sig),
        parse_formula("x1 = x2", c, g.sig),
        parse_formula("exists y. Neq(x1, y)", c, g.sig),
        parse_formula("Neq(x1, x2) | x1 = x2", c, g.sig),
    };
    for (const auto& f : pool)
        CHECK(is_stable(g, definable(g, f, c)));
}

TEST_CASE("upper bound formula") {
    Groupoid g = corpus::subsets_groupoid(2);
    Indexing ix = trivial_indexing(g);
    std::string a = ix.parameters[0][0];
    std::string other = ix.parameters[0][1];

    auto [cdup, fdup] = upper_bound_formula(g.sig, ix, {a, a});
    CHECK(fdup == Formula::equal(Term::var("x1"), Term::var("x2")));

    auto [cdist, fdist] = upper_bound_formula(g.sig, ix, {a, other});
    CHECK(fdist == Formula::truth());

    // containment: orbit([[x = m]]) inside [[upper bound]] for tuples <= 3
    std::mt19937 rng(5);
    for (int trial = 0; trial < 15; ++trial) {
        int len = 1 + int(rng() % 3);
        std::vector<std::string> tuple;
        for (int i = 0; i < len; ++i)
            tuple.push_back(ix.parameters[0][rng() % ix.parameters[0].size()]);
        DefinableSet seed = params_definable(g, ix, tuple);
        if (seed.members.empty())
            continue;
        DefinableSet orb = orbit(g, seed);
        auto [ctx, ub] = upper_bound_formula(g.sig, ix, tuple);
        DefinableSet bound = definable(g, ub, ctx);
        CHECK(std::includes(bound.members.begin(), bound.members.end(), orb.members.begin(),
                            orb.members.end()));
    }
}

TEST_CASE("saturation over a bare sort") {
    Groupoid g = corpus::discrete_groupoid(corpus::bare_signature(), {corpus::bare_set("M", {"u", "v"})});
    Context c = vctx({"x"}, "V");
    SaturationResult sat = saturate_definables(g, c, 1);
    CHECK(!sat.truncated);
    // no relations: the only definables in one variable are {} and everything
    REQUIRE(sat.family.size() == 2);
    CHECK(sat.family[0].members.empty());
    CHECK(sat.family[1].members.size() == 2);
}

TEST_CASE("saturation over subsets contains equality and inequality") {
    Groupoid g = corpus::subsets_groupoid(2);
    Context c = vctx({"x1", "x2"}, "V");
    SaturationResult sat = saturate_definables(g, c, 2);
    CHECK(!sat.truncated);
    DefinableSet eq = definable(g, parse_formula("x1 = x2", c, g.sig), c);
    DefinableSet neq = definable(g, parse_formula("Neq(x1, x2)", c, g.sig), c);
    auto found = [&](const DefinableSet& d) {
        for (const auto& s : sat.family)
            if (s.members == d.members)
                return true;
        return false;
    };
    CHECK(found(eq));
    CHECK(found(neq));
    CHECK(family_contains(sat.basis, eq));
    CHECK(family_contains(sat.basis, neq));

    // the family is a sublattice: closed under union and intersection
    std::mt19937 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto& a = sat.family[rng() % sat.family.size()];
        const auto& b = sat.family[rng() % sat.family.size()];
        std::set<PointedStructure> join, meet;
        std::set_union(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                       std::inserter(join, join.begin()));
        std::set_intersection(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                              std::inserter(meet, meet.begin()));
        bool has_join = false, has_meet = false;
        for (const auto& s : sat.family) {
            has_join |= s.members == join;
            has_meet |= s.members == meet;
        }
        CHECK(has_join);
        CHECK(has_meet);
    }
}

TEST_CASE("saturation is monotone in the variable bound") {
    Groupoid g = corpus::subsets_groupoid(1);
    Context c = vctx({"x"}, "V");
    SaturationResult s0 = saturate_definables(g, c, 0);
    SaturationResult s1 = saturate_definables(g, c, 1);
    SaturationResult s2 = saturate_definables(g, c, 2);
    auto subset_of = [](const SaturationResult& a, const SaturationResult& b) {
        for (const auto& x : a.family) {
            bool found = false;
            for (const auto& y : b.family)
                if (x.members == y.members)
                    found = true;
            if (!found)
                return false;
        }
        return true;
    };
    CHECK(subset_of(s0, s1));
    CHECK(subset_of(s1, s2));
}

TEST_CASE("saturated family members are up-closed under the hom-preorder") {
    Groupoid g = corpus::linear_orders_groupoid(2);
    Context c = vctx({"x"}, "V");
    SaturationResult sat = saturate_definables(g, c, 1);
    REQUIRE(!sat.truncated);
    DefinableSet full = full_definable(g, c);
    for (const auto& s : sat.family)
        for (const auto& p : s.members)
            for (const auto& q : full.members) {
                TypedTuple tp{{0}, {p.tuple[0]}};
                TypedTuple tq{{0}, {q.tuple[0]}};
                if (hom_leq(g.sig, g.objects[p.object], tp, g.objects[q.object], tq))
                    CHECK(s.members.count(q) == 1);
            }
}

TEST_CASE("at full bound every up-closed set is in the family") {
    // max carrier total is 2, context nonempty: extras = 1 suffices for every
    // canonical query
    Groupoid g = corpus::linear_orders_groupoid(2);
    Context c = vctx({"x"}, "V");
    SaturationResult sat = saturate_definables(g, c, 2);
    REQUIRE(!sat.truncated);

    DefinableSet full = full_definable(g, c);
    std::vector<PointedStructure> pts(full.members.begin(), full.members.end());
    // enumerate all up-closed subsets of the (tiny) point set
    REQUIRE(pts.size() <= 8);
    int in_family = 0, up_closed_count = 0;
    for (int mask = 0; mask < (1 << pts.size()); ++mask) {
        DefinableSet s;
        s.ctx = c;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (mask & (1 << i))
                s.members.insert(pts[i]);
        bool up_closed = true;
        for (const auto& p : s.members)
            for (const auto& q : pts) {
                TypedTuple tp{{0}, {p.tuple[0]}};
                TypedTuple tq{{0}, {q.tuple[0]}};
                if (hom_leq(g.sig, g.objects[p.object], tp, g.objects[q.object], tq) && !s.members.count(q))
                    up_closed = false;
            }
        bool in_fam = family_contains(sat.basis, s);
        if (up_closed)
            ++up_closed_count;
        if (in_fam)
            ++in_family;
        CHECK(up_closed == in_fam);
    }
    CHECK(up_closed_count == in_family);
    CHECK(up_closed_count > 2);
}
